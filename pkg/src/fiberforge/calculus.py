"""Relation axioms and elementary moves on twist words.

Every move is a sound identity in the mapping class group given the declared
intersection data of the curve system. Moves never consult homology to decide
legality; homology is only used for internal consistency assertions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .surface import CurveSystem, SurfaceError, transvect
from .words import (
    Conj,
    CurveExpr,
    Letter,
    TwistWord,
    WordError,
    invert_conj,
    is_reduced,
    reduce_conj,
    resolve_vector,
    same_up_to_sign,
    word_from_json,
)

MOVE_KINDS = (
    "hurwitz_left",
    "hurwitz_right",
    "cyclic",
    "global_conjugate",
    "insert_cancelling_pair",
    "cancel_pair",
    "expand_conjugation",
    "collapse_conjugation",
    "relation_substitution",
)


class MoveRejected(WordError):
    def __init__(self, message: str, letter: int | None = None):
        super().__init__(message)
        self.letter = letter


class InternalInconsistency(AssertionError):
    pass


Pattern = tuple[tuple[str, int], ...]


@dataclass(frozen=True)
class RelationAxiom:
    id: str
    kind: str  # braid | commute | chain | lantern | hyperelliptic_square | hyperelliptic_commute
    lhs: Pattern = ()
    rhs: Pattern = ()

    @property
    def twist_delta(self) -> int:
        return sum(abs(e) for _, e in self.rhs) - sum(abs(e) for _, e in self.lhs)


def hyperelliptic_pattern(g: int) -> Pattern:
    up = [f"c{i}" for i in range(1, 2 * g + 2)]
    return tuple((c, 1) for c in up + up[::-1])


def _pattern_image(system: CurveSystem, pattern: Pattern):
    n = 2 * system.genus
    cols = [tuple(int(i == j) for i in range(n)) for j in range(n)]
    for base, exp in reversed(pattern):
        v = system.vector(base)
        cols = [transvect(c, v, exp) for c in cols]
    return cols


class RelationRegistry:
    """Named axioms valid on a curve system; braid and commute are generic."""

    def __init__(self, system: CurveSystem):
        self.system = system
        self.axioms: dict[str, RelationAxiom] = {}

    def register(self, axiom: RelationAxiom) -> None:
        self._check_intersections(axiom)
        if _pattern_image(self.system, axiom.lhs) != _pattern_image(self.system, axiom.rhs):
            raise SurfaceError(f"relation {axiom.id} has sides with different symplectic images")
        self.axioms[axiom.id] = axiom

    def _check_intersections(self, axiom: RelationAxiom) -> None:
        s = self.system
        for b, _ in axiom.lhs + axiom.rhs:
            s[b]
        if axiom.kind == "chain":
            chain = list(dict.fromkeys(b for b, _ in axiom.lhs))
            boundary = [b for b, _ in axiom.rhs]
            for i, a in enumerate(chain):
                for j, b in enumerate(chain):
                    if abs(i - j) == 1 and not s.braided(a, b):
                        raise SurfaceError(f"chain relation {axiom.id}: {a}, {b} must meet once")
                    if abs(i - j) >= 2 and not s.disjoint(a, b):
                        raise SurfaceError(f"chain relation {axiom.id}: {a}, {b} must be disjoint")
                for d in boundary:
                    if not s.disjoint(a, d):
                        raise SurfaceError(f"chain relation {axiom.id}: boundary {d} must miss {a}")
        elif axiom.kind == "lantern":
            outer = [b for b, _ in axiom.lhs]
            inner = [b for b, _ in axiom.rhs]
            if len(outer) != 4 or len(inner) != 3:
                raise SurfaceError("a lantern has four boundary and three interior curves")
            for a in outer:
                for b in outer + inner:
                    if a != b and not s.disjoint(a, b):
                        raise SurfaceError(f"lantern {axiom.id}: {a} and {b} must be disjoint")
        elif axiom.kind in ("hyperelliptic_square", "hyperelliptic_commute"):
            chain = [f"c{i}" for i in range(1, 2 * s.genus + 2)]
            for a, b in zip(chain, chain[1:]):
                if not s.braided(a, b):
                    raise SurfaceError("hyperelliptic relation needs the standard chain")

    def __getitem__(self, key: str) -> RelationAxiom:
        try:
            return self.axioms[key]
        except KeyError:
            raise MoveRejected(f"unknown relation {key!r}") from None

    def ids(self) -> list[str]:
        return ["braid", "commute", *self.axioms]


def standard_registry(system: CurveSystem) -> RelationRegistry:
    reg = RelationRegistry(system)
    g = system.genus
    names = set(system.curves)
    chain = [f"c{i}" for i in range(1, 2 * g + 2)]
    if system.boundary == 0 and all(c in names for c in chain):
        h = hyperelliptic_pattern(g)
        reg.register(RelationAxiom("hyperelliptic_square", "hyperelliptic_square", h + h, ()))
        for c in chain:
            reg.register(RelationAxiom(f"hyperelliptic_commute_{c}", "hyperelliptic_commute",
                                       h + ((c, 1),), ((c, 1),) + h))
    if system.boundary == 2 and g == 3:
        seven = tuple((f"c{i}", 1) for i in range(7, 0, -1))
        five = tuple((f"c{i}", 1) for i in range(7, 2, -1))
        reg.register(RelationAxiom("chain7", "chain", seven * 8, (("d1", 1), ("d2", 1))))
        reg.register(RelationAxiom("chain5", "chain", five * 6, (("a", 1), ("b", 1))))
    if {"a1", "a3", "b1", "b3", "s", "l"} <= names:
        reg.register(RelationAxiom("lantern_fibersum", "lantern",
                                   (("a1", 1), ("a3", 1), ("b1", 1), ("b3", 1)),
                                   (("s", 1), ("c3", 1), ("l", 1))))
    if {"r1", "r2", "r3"} <= names:
        reg.register(RelationAxiom("lantern_odd", "lantern",
                                   (("c1", 1), ("c3", 1), ("c5", 1), ("c7", 1)),
                                   (("r1", 1), ("r2", 1), ("r3", 1))))
    return reg


@dataclass(frozen=True)
class Move:
    kind: str
    site: int = 0
    relation: str | None = None
    direction: str = "forward"
    scope: str = "word"
    position: int = 0
    shuffle: bool = False
    rule: str | None = None
    base: str | None = None
    exp: int = 0
    curve: CurveExpr | None = None
    by: Conj = ()
    shift: int = 0

    def __post_init__(self):
        if self.kind not in MOVE_KINDS:
            raise MoveRejected(f"unknown move kind {self.kind!r}")

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind, "site": self.site}
        k = self.kind
        if k == "relation_substitution":
            out["relation"] = self.relation
            out["direction"] = self.direction
            if self.scope != "word":
                out["scope"] = self.scope
                out["position"] = self.position
            if self.shuffle:
                out["shuffle"] = True
        elif k in ("expand_conjugation", "collapse_conjugation"):
            out["rule"] = self.rule
            if self.rule == "disjoint" or (self.rule == "braid" and k == "expand_conjugation"):
                out["base"] = self.base
                out["exp"] = self.exp
        elif k == "insert_cancelling_pair":
            out["curve"] = {"base": self.curve.base,
                            "conjugator": [{"base": b, "conjugator": [], "exp": e} for b, e in self.curve.conj]}
            out["exp"] = self.exp
        elif k == "global_conjugate":
            out["by"] = [{"base": b, "conjugator": [], "exp": e} for b, e in self.by]
        elif k == "cyclic":
            out["shift"] = self.shift
        return out

    @classmethod
    def from_json(cls, doc: Mapping) -> "Move":
        from .words import conj_from_json

        kind = doc["kind"]
        kw: dict = {"kind": kind, "site": int(doc.get("site", 0))}
        for key in ("relation", "direction", "scope", "rule", "base"):
            if key in doc:
                kw[key] = doc[key]
        for key in ("position", "exp", "shift"):
            if key in doc:
                kw[key] = int(doc[key])
        if "shuffle" in doc:
            kw["shuffle"] = bool(doc["shuffle"])
        if "curve" in doc:
            kw["curve"] = CurveExpr(doc["curve"]["base"], conj_from_json(doc["curve"].get("conjugator", [])))
        if "by" in doc:
            kw["by"] = conj_from_json(doc["by"])
        return cls(**kw)


@dataclass
class MoveContext:
    system: CurveSystem
    registry: RelationRegistry
    central_target: bool = True
    checks: bool = True


def _letter(word: TwistWord, i: int) -> Letter:
    if not 0 <= i < len(word):
        raise MoveRejected(f"site {i} is outside a word of length {len(word)}", i)
    return word[i]


def _replace(word: TwistWord, start: int, stop: int, new: Sequence[Letter]) -> TwistWord:
    return word.with_letters(word.letters[:start] + tuple(new) + word.letters[stop:])


def _assert_same_curve(ctx: MoveContext, old: CurveExpr, new: CurveExpr) -> None:
    if ctx.checks and not same_up_to_sign(resolve_vector(old, ctx.system), resolve_vector(new, ctx.system)):
        raise InternalInconsistency(f"curve rewrite {old} -> {new} changed the homology class")


def _hurwitz(word: TwistWord, m: Move, ctx: MoveContext) -> TwistWord:
    i = m.site
    x, y = _letter(word, i), _letter(word, i + 1)
    for pos, l in ((i, x), (i + 1, y)):
        if abs(l.exp) != 1:
            raise MoveRejected(f"Hurwitz moves need exponent +-1, letter {pos} has {l.exp}", pos)
    if m.kind == "hurwitz_left":
        new = (Letter(y.curve.conjugated(x.curve.twist_word(x.exp)), y.exp), x)
        if ctx.checks:
            want = transvect(resolve_vector(y.curve, ctx.system), resolve_vector(x.curve, ctx.system), x.exp)
            if not same_up_to_sign(want, resolve_vector(new[0].curve, ctx.system)):
                raise InternalInconsistency("Hurwitz move changed the monodromy")
    else:
        new = (y, Letter(x.curve.conjugated(y.curve.twist_word(-y.exp)), x.exp))
        if ctx.checks:
            want = transvect(resolve_vector(x.curve, ctx.system), resolve_vector(y.curve, ctx.system), -y.exp)
            if not same_up_to_sign(want, resolve_vector(new[1].curve, ctx.system)):
                raise InternalInconsistency("Hurwitz move changed the monodromy")
    return _replace(word, i, i + 2, new)


def _conj_rewrite(word: TwistWord, m: Move, ctx: MoveContext) -> TwistWord:
    i = m.site
    letter = _letter(word, i)
    c = letter.curve
    s = ctx.system
    if m.rule == "disjoint":
        if m.base is None or m.exp == 0:
            raise MoveRejected("disjoint conjugation rewrite needs a base curve and nonzero exponent", i)
        if m.base not in s:
            raise MoveRejected(f"unknown curve {m.base}", i)
        if not s.disjoint(m.base, c.base):
            raise MoveRejected(f"{m.base} is not declared disjoint from {c.base}", i)
        sign = 1 if m.kind == "expand_conjugation" else -1
        new = CurveExpr(c.base, reduce_conj(c.conj + ((m.base, sign * m.exp),)))
    elif m.rule == "braid":
        if m.kind == "collapse_conjugation":
            if not c.conj:
                raise MoveRejected(f"letter {i} has no conjugator to rewrite", i)
            tail, e = c.conj[-1]
            if abs(e) != 1 or not s.braided(c.base, tail):
                raise MoveRejected(f"braid rewrite needs a single twist about a curve meeting {c.base} once", i)
            new = CurveExpr(tail, reduce_conj(c.conj[:-1] + ((c.base, -e),)))
        else:
            if m.base is None or abs(m.exp) != 1:
                raise MoveRejected("braid expansion needs a base curve and exponent +-1", i)
            if m.base not in s or not s.braided(m.base, c.base):
                raise MoveRejected(f"{m.base} does not meet {c.base} once", i)
            new = CurveExpr(m.base, reduce_conj(c.conj + ((m.base, m.exp), (c.base, m.exp))))
    else:
        raise MoveRejected(f"unknown conjugation rule {m.rule!r}", i)
    _assert_same_curve(ctx, c, new)
    return _replace(word, i, i + 1, [Letter(new, letter.exp)])


def _match_pattern(word: TwistWord, start: int, pattern: Pattern, shuffle: bool, ctx: MoveContext):
    """Return (end, conj, bystanders) when the pattern occurs at start."""
    if not pattern:
        return start, None, []
    first = _letter(word, start)
    conj = first.curve.conj
    k = 0
    i = start
    bystanders: list[Letter] = []
    bases = {b for b, _ in pattern}
    while k < len(pattern):
        if i >= len(word):
            raise MoveRejected(f"pattern runs past the end of the word at letter {i}", i)
        l = word[i]
        want = pattern[k]
        if l.curve.conj == conj and (l.curve.base, l.exp) == want:
            k += 1
        elif shuffle and l.curve.conj == conj and all(ctx.system.disjoint(l.curve.base, b) for b in bases):
            bystanders.append(l)
        else:
            got = f"{l.curve}^{l.exp}"
            need = f"{want[0]}^{want[1]}" + (f" conjugated by {list(conj)}" if conj else "")
            raise MoveRejected(f"letter {i} is {got}, expected {need}", i)
        i += 1
    return i, conj, bystanders


def _substitute_word(word: TwistWord, m: Move, ctx: MoveContext) -> TwistWord:
    i = m.site
    s = ctx.system
    if m.relation == "commute":
        x, y = _letter(word, i), _letter(word, i + 1)
        if x.curve.conj != y.curve.conj:
            raise MoveRejected(f"letters {i}, {i + 1} are not simultaneously conjugated", i)
        if not s.disjoint(x.curve.base, y.curve.base):
            raise MoveRejected(f"{x.curve.base} and {y.curve.base} are not declared disjoint", i)
        return _replace(word, i, i + 2, (y, x))
    if m.relation == "braid":
        x, y, z = _letter(word, i), _letter(word, i + 1), _letter(word, i + 2)
        if not (x.curve == z.curve and x.curve.conj == y.curve.conj and x.exp == y.exp == z.exp and abs(x.exp) == 1):
            raise MoveRejected(f"letters {i}..{i + 2} do not have the shape t_a t_b t_a", i)
        if not s.braided(x.curve.base, y.curve.base):
            raise MoveRejected(f"{x.curve.base} and {y.curve.base} are not declared to meet once", i)
        return _replace(word, i, i + 3, (y, x, y))
    axiom = ctx.registry[m.relation]
    if m.direction == "forward":
        source, target = axiom.lhs, axiom.rhs
    elif m.direction == "backward":
        source, target = axiom.rhs, axiom.lhs
    else:
        raise MoveRejected(f"unknown direction {m.direction!r}", i)
    if not source:
        if m.shuffle:
            raise MoveRejected("an empty side cannot be matched with shuffles", i)
        if not 0 <= i <= len(word):
            raise MoveRejected(f"site {i} is outside the word", i)
        new = [Letter(CurveExpr(b), e) for b, e in target]
        return _replace(word, i, i, new)
    end, conj, bystanders = _match_pattern(word, i, source, m.shuffle, ctx)
    new = bystanders + [Letter(CurveExpr(b, conj), e) for b, e in target]
    return _replace(word, i, end, new)


def _substitute_conj(word: TwistWord, m: Move, ctx: MoveContext) -> TwistWord:
    i = m.site
    letter = _letter(word, i)
    c = letter.curve
    conj = list(c.conj)
    j = m.position
    s = ctx.system
    if m.relation == "commute":
        if not 0 <= j < len(conj) - 1:
            raise MoveRejected(f"conjugator position {j} out of range", i)
        (a, e), (b, f) = conj[j], conj[j + 1]
        if not s.disjoint(a, b):
            raise MoveRejected(f"conjugator letters {a}, {b} are not declared disjoint", i)
        conj[j], conj[j + 1] = conj[j + 1], conj[j]
    elif m.relation == "braid":
        if not 0 <= j < len(conj) - 2:
            raise MoveRejected(f"conjugator position {j} out of range", i)
        (a, e), (b, f), (a2, e2) = conj[j : j + 3]
        if not (a == a2 and e == f == e2 and abs(e) == 1 and s.braided(a, b)):
            raise MoveRejected("conjugator window is not of the shape t_a t_b t_a", i)
        conj[j : j + 3] = [(b, e), (a, e), (b, e)]
    else:
        raise MoveRejected("only braid and commute relations act inside conjugators", i)
    if not is_reduced(conj):
        raise MoveRejected("rewrite would merge adjacent conjugator letters; rewrite explicitly instead", i)
    new = CurveExpr(c.base, tuple(conj))
    _assert_same_curve(ctx, c, new)
    return _replace(word, i, i + 1, [Letter(new, letter.exp)])


def apply_move(word: TwistWord, m: Move, ctx: MoveContext) -> TwistWord:
    k = m.kind
    if k in ("hurwitz_left", "hurwitz_right"):
        return _hurwitz(word, m, ctx)
    if k == "cyclic":
        if not ctx.central_target:
            raise MoveRejected("cyclic permutation needs a central target")
        if not word.letters:
            return word
        r = m.shift % len(word)
        return word.with_letters(word.letters[r:] + word.letters[:r])
    if k == "global_conjugate":
        if not ctx.central_target:
            raise MoveRejected("global conjugation needs a central target")
        for b, _ in m.by:
            ctx.system[b]
        return word.conjugated(m.by)
    if k == "insert_cancelling_pair":
        if m.curve is None or m.exp == 0:
            raise MoveRejected("inserting a pair needs a curve and a nonzero exponent")
        if not 0 <= m.site <= len(word):
            raise MoveRejected(f"site {m.site} is outside the word", m.site)
        resolve_vector(m.curve, ctx.system)
        return _replace(word, m.site, m.site, (Letter(m.curve, m.exp), Letter(m.curve, -m.exp)))
    if k == "cancel_pair":
        x, y = _letter(word, m.site), _letter(word, m.site + 1)
        if x.curve != y.curve or x.exp != -y.exp:
            raise MoveRejected(f"letters {m.site}, {m.site + 1} are not a cancelling pair", m.site)
        return _replace(word, m.site, m.site + 2, ())
    if k in ("expand_conjugation", "collapse_conjugation"):
        return _conj_rewrite(word, m, ctx)
    if m.scope == "conjugator":
        return _substitute_conj(word, m, ctx)
    if m.scope != "word":
        raise MoveRejected(f"unknown scope {m.scope!r}")
    return _substitute_word(word, m, ctx)


def invert_move(before: TwistWord, m: Move, ctx: MoveContext) -> Move:
    """A move undoing m when applied to apply_move(before, m)."""
    k = m.kind
    if k == "hurwitz_left":
        return Move("hurwitz_right", m.site)
    if k == "hurwitz_right":
        return Move("hurwitz_left", m.site)
    if k == "cyclic":
        return Move("cyclic", shift=-m.shift)
    if k == "global_conjugate":
        return Move("global_conjugate", by=invert_conj(m.by))
    if k == "insert_cancelling_pair":
        return Move("cancel_pair", m.site)
    if k == "cancel_pair":
        l = before[m.site]
        return Move("insert_cancelling_pair", m.site, curve=l.curve, exp=l.exp)
    if k in ("expand_conjugation", "collapse_conjugation"):
        other = "collapse_conjugation" if k == "expand_conjugation" else "expand_conjugation"
        if m.rule == "disjoint":
            return Move(other, m.site, rule="disjoint", base=m.base, exp=m.exp)
        if k == "collapse_conjugation":
            c = before[m.site].curve
            tail, e = c.conj[-1]
            return Move("expand_conjugation", m.site, rule="braid", base=c.base, exp=e)
        return Move("collapse_conjugation", m.site, rule="braid")
    if m.shuffle:
        raise MoveRejected("shuffled substitutions are invertible only up to the declared commutations")
    if m.relation in ("commute", "braid"):
        return m
    flip = "backward" if m.direction == "forward" else "forward"
    return Move(k, m.site, relation=m.relation, direction=flip, scope=m.scope, position=m.position)


def script_moves_from_json(items: Sequence[Mapping]) -> list[Move]:
    return [Move.from_json(d) for d in items]
