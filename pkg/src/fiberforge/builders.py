"""Script builders replaying the clustered-factorization proofs move by move.

The builders only *produce* scripts; validity is established independently by
``check_derivation``. Tactics here are conveniences that emit primitive moves.
"""

from __future__ import annotations

import heapq
from collections import deque
from functools import lru_cache
from dataclasses import dataclass

from .calculus import Move, MoveContext, MoveRejected, RelationRegistry, apply_move, standard_registry
from .derivation import DerivationScript
from .surface import CurveSystem, SymplecticLattice, standard_curve_system, transvect
from .words import CurveExpr, Letter, TwistWord, resolve_vector, same_up_to_sign


def plain(*names: str) -> list[Letter]:
    return [Letter(CurveExpr(n), 1) for n in names]


def chain_names(g: int) -> list[str]:
    return [f"c{i}" for i in range(1, 2 * g + 2)]


def hyperelliptic_word(g: int, boundary: int = 0) -> TwistWord:
    up = chain_names(g)
    return TwistWord(g, boundary, tuple(plain(*(up + up[::-1]))))


class ScriptBuilder:
    def __init__(self, system: CurveSystem, source: TwistWord, registry: RelationRegistry | None = None,
                 central: bool = True):
        self.system = system
        self.registry = registry or standard_registry(system)
        self.ctx = MoveContext(system, self.registry, central_target=central, checks=False)
        self.source = source
        self.word = source
        self.moves: list[Move] = []
        self.checkpoints: list[tuple[int, TwistWord]] = []

    # primitive wrappers -------------------------------------------------
    def do(self, move: Move) -> None:
        self.word = apply_move(self.word, move, self.ctx)
        self.moves.append(move)

    def checkpoint(self) -> None:
        self.checkpoints.append((len(self.moves), self.word))

    def commute(self, i: int) -> None:
        self.do(Move("relation_substitution", i, relation="commute"))

    def braid(self, i: int) -> None:
        self.do(Move("relation_substitution", i, relation="braid"))

    def hl(self, i: int) -> None:
        self.do(Move("hurwitz_left", i))

    def hr(self, i: int) -> None:
        self.do(Move("hurwitz_right", i))

    def substitute(self, i: int, relation: str, direction: str = "forward") -> None:
        self.do(Move("relation_substitution", i, relation=relation, direction=direction))

    def cyclic(self, shift: int) -> None:
        self.do(Move("cyclic", shift=shift))

    # letter-level predicates --------------------------------------------
    def _commutes(self, x: Letter, y: Letter) -> bool:
        return (x.curve.conj == y.curve.conj and x.curve.base != y.curve.base
                and self.system.disjoint(x.curve.base, y.curve.base))

    def _braids(self, i: int) -> bool:
        w = self.word
        if i + 2 >= len(w):
            return False
        x, y, z = w[i], w[i + 1], w[i + 2]
        return (x == z and x.exp == y.exp and abs(x.exp) == 1 and x.curve.conj == y.curve.conj
                and self.system.braided(x.curve.base, y.curve.base))

    # tactics -------------------------------------------------------------
    def slide_left(self, i: int, target: int) -> None:
        """Move letter i left to position target by commutations."""
        for p in range(i - 1, target - 1, -1):
            self.commute(p)

    def slide_right(self, i: int, target: int) -> None:
        for p in range(i, target):
            self.commute(p)

    def carry_right(self, i: int, passes: int | None = None) -> int:
        """Push letter i rightwards with commutations and braid moves.

        A braid move t_x t_y t_x -> t_y t_x t_y lets the moving letter exit as
        t_y. Stops after `passes` letters have been crossed, or when stuck.
        Returns the final position of the moving letter.
        """
        crossed = 0
        while passes is None or crossed < passes:
            w = self.word
            if i + 1 >= len(w):
                break
            if self._braids(i) and (passes is None or crossed + 2 <= passes):
                self.braid(i)
                i += 2
                crossed += 2
            elif self._commutes(w[i], w[i + 1]):
                self.commute(i)
                i += 1
                crossed += 1
            else:
                break
        if passes is not None and crossed != passes:
            raise MoveRejected(f"carry stopped after {crossed} of {passes} letters at {i}")
        return i

    def carry_left(self, i: int, passes: int) -> int:
        crossed = 0
        while crossed < passes:
            w = self.word
            if i >= 2 and self._braids(i - 2) and crossed + 2 <= passes:
                self.braid(i - 2)
                i -= 2
                crossed += 2
            elif i >= 1 and self._commutes(w[i - 1], w[i]):
                self.commute(i - 1)
                i -= 1
                crossed += 1
            else:
                raise MoveRejected(f"left carry stuck at {i}")
        return i

    def pass_unchanged_left(self, i: int, target: int, simplify: bool = True) -> None:
        """Move letter i to position target < i keeping it verbatim (Hurwitz right moves)."""
        for p in range(i - 1, target - 1, -1):
            self.hr(p)
            if simplify:
                self.simplify(p + 1)

    def pass_unchanged_right(self, i: int, target: int, simplify: bool = True) -> None:
        for p in range(i, target):
            self.hl(p)
            if simplify:
                self.simplify(p)

    def simplify(self, i: int, max_nodes: int = 4000) -> None:
        """Shorten the conjugator of letter i by a bounded best-first search."""
        start = self.word[i].curve
        if not start.conj:
            return
        best = _search_simplification(start, self.system, max_nodes)
        for move in best:
            self.do(Move(move[0], i, **move[1]))

    def script(self, target: TwistWord, name: str, surface: dict, relation_target: str = "identity") -> DerivationScript:
        return DerivationScript(
            surface=surface,
            source=self.source,
            target=target,
            moves=list(self.moves),
            relation_target=relation_target,
            name=name,
            checkpoints=list(self.checkpoints),
        )


def _conj_neighbours(curve: CurveExpr, system: CurveSystem):
    conj = curve.conj
    base = curve.base
    if conj:
        tail, e = conj[-1]
        if system.disjoint(tail, base):
            yield ("collapse_conjugation", {"rule": "disjoint", "base": tail, "exp": e}), \
                CurveExpr(base, conj[:-1])
        if abs(e) == 1 and system.braided(base, tail):
            from .words import reduce_conj
            yield ("collapse_conjugation", {"rule": "braid"}), CurveExpr(tail, reduce_conj(conj[:-1] + ((base, -e),)))
    for j in range(len(conj) - 1):
        (a, e), (b, f) = conj[j], conj[j + 1]
        if a != b and system.disjoint(a, b):
            new = list(conj)
            new[j], new[j + 1] = new[j + 1], new[j]
            if all(new[k][0] != new[k + 1][0] for k in range(len(new) - 1)):
                yield ("relation_substitution", {"relation": "commute", "scope": "conjugator", "position": j}), \
                    CurveExpr(base, tuple(new))


def _search_simplification(start: CurveExpr, system: CurveSystem, max_nodes: int):
    def cost(c: CurveExpr):
        return (len(c.conj), sum(abs(e) for _, e in c.conj))

    seen = {start: []}
    heap = [(cost(start), 0, start)]
    counter = 1
    best = start
    while heap and len(seen) < max_nodes:
        _, _, cur = heapq.heappop(heap)
        if cost(cur) < cost(best):
            best = cur
            if not cur.conj:
                break
        for move, nxt in _conj_neighbours(cur, system):
            if nxt not in seen:
                seen[nxt] = seen[cur] + [move]
                heapq.heappush(heap, (cost(nxt), counter, nxt))
                counter += 1
    return seen[best]


# ---------------------------------------------------------------------------
# clustered factorizations on the closed surface


@dataclass(frozen=True)
class PositiveFactorization:
    word: TwistWord
    target: str = "identity"  # or boundary_multitwist

    def __post_init__(self):
        if not self.word.positive:
            raise ValueError("a positive factorization has only positive exponents")
        if self.target not in ("identity", "boundary_multitwist"):
            raise ValueError(f"unknown factorization target {self.target!r}")


def _surface(g: int, boundary: int = 0, curves: str = "standard") -> dict:
    return {"genus": g, "boundary": boundary, "curves": curves}


def build_lemma_g_script(g: int, p: int, q: int) -> DerivationScript:
    """Rewrite h^2 into t1^p t3^q D with D a product of 4g positive twists."""
    n = 2 * g + 1
    if p < 0 or q < 0 or p + q != 4 * g + 4:
        raise ValueError(f"p + q must equal 4g + 4 = {4 * g + 4}")
    system = standard_curve_system(g)
    h = hyperelliptic_word(g)
    b = ScriptBuilder(system, h + h)

    # h commutes with every chain twist: pull the first half of the second h through
    for k in range(1, n + 1):
        b.substitute(k - 1, f"hyperelliptic_commute_c{k}")
    b.checkpoint()

    # interleave: the middle letters slide outwards by commutations
    for k in range(1, n):
        b.slide_left(n + k - 1, 2 * k)
    for k in range(1, n):
        i = 3 * n - k
        b.slide_right(i, i + n - k - 1)
    b.checkpoint()

    b.cyclic(1)
    # the two central c_n letters each travel to the right end and become c1
    centre = 2 * (n - 1)
    b.carry_right(centre + 1)
    b.carry_right(centre)
    b.checkpoint()

    # each pair (c_{k+1} c_k) releases a letter that travels right and becomes c1
    pairs = 2 * (n - 1)
    for j in range(pairs):
        b.hl(j)
        b.carry_right(j + 1)
    b.checkpoint()

    # (c3^{c2} c2^{c1}) c1 = c3 (c3^{c2} c2^{c1})
    x_len = pairs
    for r in range(q):
        c1_pos = x_len + r
        b.hl(c1_pos - 1)
        b.simplify(c1_pos - 1)
        b.hl(c1_pos - 2)
        b.simplify(c1_pos - 2)
    b.checkpoint()
    # the c3 letters cross (c3^{c2} c2^{c1}), which picks up a conjugation by t3^q
    for r in range(q):
        pos = x_len - 3 + q - r
        b.hl(pos)
        b.hl(pos + 1)
    b.checkpoint()
    # rotate t3^q t1^p to the front, then sort t1 before t3
    b.cyclic(len(b.word) - (p + q))
    for i in range(p):
        # the c1 at position q + i moves left past the q copies of c3
        b.slide_left(q + i, i)
    b.checkpoint()

    target = b.word.merged()
    return b.script(target, f"clustered factorization g={g} p={p} q={q}", _surface(g))


def build_genus3_boundary_script() -> DerivationScript:
    """Rewrite the 7-chain word into the clustered factorization of t_{d1} t_{d2}."""
    system = standard_curve_system(3, 2)
    block = [f"c{i}" for i in range(7, 0, -1)]
    source = TwistWord(3, 2, tuple(plain(*(block * 8))))
    b = ScriptBuilder(system, source)

    # t_i (c7..c1) = (c7..c1) t_{i+1}: the trailing c1 of blocks 1..6 drift right
    for blk in range(1, 7):
        b.carry_right(6 * blk, 7 * (7 - blk))
    b.checkpoint()
    # same with the trailing c2 of the 6-chain blocks
    for blk in range(1, 6):
        b.carry_right(5 * blk, 6 * (6 - blk))
    b.checkpoint()

    b.substitute(0, "chain5")
    b.checkpoint()

    # a b U V L R with U = c2..c7, V = c7..c2, L = c1..c7, R = c7..c1.
    # t_i L = L t_{i-1}, so V L = L (c6..c1) and then U L = L (c1..c6)
    for k in range(6):
        b.carry_right(13 - k, 7)
    for k in range(6):
        b.carry_right(7 - k, 7)
    b.checkpoint()

    # interleave into c1 (c2 c1) ... (c7 c6) (c6 c7) ... (c1 c2) c1
    for k in range(1, 7):
        b.slide_left(8 + k, 2 + 2 * k)
    for k in range(1, 7):
        b.slide_right(21 - k, 27 - 2 * k)
    b.checkpoint()

    for j in range(12):
        b.hl(3 + j)
        b.carry_right(4 + j)
    b.checkpoint()

    b.cyclic(len(b.word) - 13)
    b.slide_left(15, 13)
    b.checkpoint()

    # X = x0..x11 starts at 16; x8 = c5{c4} travels to the far right
    x = 16
    b.pass_unchanged_right(x + 8, x + 11)
    b.cyclic(len(b.word) - 1)
    b.pass_unchanged_right(0, 16)
    b.checkpoint()

    # second cluster: x1, x4, x5, x7, x11 gathered right after the first
    start = 17
    layout = [0, 1, 2, 3, 4, 5, 6, 7, 9, 10, 11]
    for slot, name in enumerate([1, 4, 5, 7, 11]):
        b.pass_unchanged_left(start + layout.index(name), start + slot)
        layout.remove(name)
        layout.insert(slot, name)
    b.checkpoint()

    # x4 = c5{c6} joins the first cluster
    b.pass_unchanged_left(start + 1, start)
    # c_i{c_j} = c_j{c_i^-1} for curves meeting once
    for i in range(16, 22):
        b.do(Move("collapse_conjugation", i, rule="braid"))
    # order the second cluster as c1, c3, c5, c7
    b.pass_unchanged_left(21, 18)
    b.pass_unchanged_left(21, 20)
    b.checkpoint()

    for i in range(16):
        b.do(Move("expand_conjugation", i, rule="disjoint", base="c5", exp=-1))
    for i in (18, 19):
        b.do(Move("expand_conjugation", i, rule="disjoint", base="c6", exp=-1))
    for i in (20, 21):
        b.do(Move("expand_conjugation", i, rule="disjoint", base="c2", exp=-1))
        b.do(Move("relation_substitution", i, relation="commute", scope="conjugator", position=0))
    b.checkpoint()
    b.do(Move("global_conjugate", by=(("c5", 1),)))
    for i in range(18, 22):
        b.do(Move("relation_substitution", i, relation="commute", scope="conjugator", position=0))
    for i in range(22, len(b.word)):
        b.simplify(i)
    b.checkpoint()

    target = b.word.merged()
    return b.script(target, "clustered factorization of the boundary multitwist", _surface(3, 2),
                    relation_target="boundary_multitwist")


def lemma_g_factorization(g: int, p: int, q: int) -> tuple[PositiveFactorization, DerivationScript]:
    script = build_lemma_g_script(g, p, q)
    return PositiveFactorization(script.target), script


def lemma_genus3_factorization() -> tuple[PositiveFactorization, DerivationScript]:
    script = build_genus3_boundary_script()
    return PositiveFactorization(script.target, "boundary_multitwist"), script


# ---------------------------------------------------------------------------
# lantern configurations


def build_odd_lantern_script() -> DerivationScript:
    """Expose c1 c3 c5 c7 at the front of h^2 on the genus-3 surface and replace it by a lantern."""
    system = standard_curve_system(3, lanterns=True)
    h = hyperelliptic_word(3)
    b = ScriptBuilder(system, h + h)
    for idx, slot in ((2, 1), (4, 2), (6, 3)):
        b.pass_unchanged_left(idx, slot)
    b.checkpoint()
    b.substitute(0, "lantern_odd")
    return b.script(b.word, "odd lantern on the genus-3 hyperelliptic word", _surface(3, curves="lanterns"))


def _conj_action(system: CurveSystem, conj, v):
    for name, e in reversed(conj):
        v = transvect(v, system.vector(name), e)
    return v


def lantern_gluing(g: int, max_len: int = 8) -> tuple[tuple[str, int], ...]:
    """Shortest twist word in the chain curves and a1, a3 moving [c1], [c3] to the classes of a1, a3 (up to sign)."""
    return _lantern_gluing(g, max_len)


@lru_cache(maxsize=None)
def _lantern_gluing(g: int, max_len: int):
    system = standard_curve_system(g, lanterns=True)
    c1, c3 = system.vector("c1"), system.vector("c3")
    t1, t3 = system.vector("a1"), system.vector("a3")
    gens = chain_names(g) + ["a1", "a3"]
    start = ()
    seen = {(c1, c3): start}
    queue = deque([(start, c1, c3)])
    while queue:
        conj, u, v = queue.popleft()
        if same_up_to_sign(u, t1) and same_up_to_sign(v, t3):
            return conj
        if len(conj) >= max_len:
            continue
        for name in gens:
            for e in (1, -1):
                if conj and conj[0][0] == name:
                    continue
                w = ((name, e),) + conj
                key = (transvect(u, system.vector(name), e), transvect(v, system.vector(name), e))
                if key not in seen:
                    seen[key] = w
                    queue.append((w, *key))
    raise ValueError(f"no gluing word of length <= {max_len} in genus {g}")


def twisted_double_word(g: int) -> tuple[TwistWord, tuple[tuple[str, int], ...], int]:
    """A word A (a1 a3 b1 b3)^n for the twisted double of the genus-g hyperelliptic fibration.

    Each copy of h^2 is first brought to the clustered form c1^n c3^n D with
    n = 2g + 2, then conjugated by the gluing word; its images of c1 and c3 are
    named a1, a3 (first copy) and b1, b3 (second copy). Returns the expanded
    word, the gluing word and the position of the first lantern block.
    """
    n = 2 * g + 2
    clustered = build_lemma_g_script(g, n, n).target.expanded()
    rotated = clustered.with_letters(clustered.letters[2 * n:] + clustered.letters[: 2 * n])
    phi = lantern_gluing(g)
    moved = rotated.conjugated(phi)

    def relabel(word: TwistWord, first: str, third: str) -> list[Letter]:
        names = {CurveExpr("c1", phi): first, CurveExpr("c3", phi): third}
        return [Letter(CurveExpr(names[l.curve]), l.exp) if l.curve in names else l for l in word]

    copy_a = relabel(moved, "a1", "a3")
    copy_b = relabel(moved, "b1", "b3")
    body = len(rotated) - 2 * n
    d_a, clusters_a = copy_a[:body], copy_a[body:]
    d_b, clusters_b = copy_b[:body], copy_b[body:]
    # D_b slides left past a1^n a3^n, picking up that block as a conjugator
    shift = (("a1", n), ("a3", n))
    d_b = [Letter(l.curve.conjugated(shift), l.exp) for l in d_b]
    blocks = [Letter(CurveExpr(c)) for _ in range(n) for c in ("a1", "a3", "b1", "b3")]
    assert sorted(map(str, blocks)) == sorted(map(str, clusters_a + clusters_b))
    word = TwistWord(g, 0, tuple(d_a + d_b + blocks))
    return word, phi, len(d_a) + len(d_b)
