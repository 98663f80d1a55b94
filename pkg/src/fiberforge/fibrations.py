"""Invariants of Lefschetz fibrations over the sphere and the constructions built from them."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Mapping, Sequence

from .builders import build_odd_lantern_script, hyperelliptic_word, twisted_double_word
from .calculus import Move, MoveContext, apply_move, standard_registry
from .plumbing import AbelianGroup, AbelianPresentation, abelian_group_from_presentation
from .surface import CurveSystem, standard_curve_system, word_action
from .words import TwistWord, resolve_vector

PROVENANCES = ("endo-formula", "additivity", "substitution-delta", "user-supplied")


class FibrationError(ValueError):
    pass


class SignatureUnavailable(FibrationError):
    pass


@dataclass(frozen=True)
class LefschetzFibration:
    genus: int
    word: TwistWord
    system: CurveSystem
    hyperelliptic: bool = False
    separating_types: tuple[int, ...] = ()
    sections: int | None = None
    chi: int | None = None
    sigma: int | None = None
    provenance: tuple[str, ...] = ()
    annotations: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.word.genus != self.genus:
            raise FibrationError("word and fibration genus differ")
        if not self.word.positive:
            raise FibrationError("monodromy factorization must be positive")

    @property
    def twist_count(self) -> int:
        return self.word.twist_count

    def separating_letters(self) -> list[int]:
        out = []
        for i, l in enumerate(self.word):
            if not any(resolve_vector(l.curve, self.system)):
                out.append(i)
        return out


@dataclass(frozen=True)
class InvariantRecord:
    chi: int
    sigma: int
    h1: AbelianGroup | None = None
    provenance: tuple[str, ...] = ()

    def __post_init__(self):
        if (self.chi + self.sigma) % 4:
            raise FibrationError(f"chi + sigma = {self.chi + self.sigma} is not divisible by 4")

    @property
    def chi_h(self) -> int:
        return (self.chi + self.sigma) // 4

    @property
    def c1_squared(self) -> int:
        return 2 * self.chi + 3 * self.sigma

    def to_json(self) -> dict:
        doc = {"chi": self.chi, "sigma": self.sigma, "chi_h": self.chi_h, "c1_squared": self.c1_squared,
               "provenance": list(self.provenance)}
        if self.h1 is not None:
            doc["h1"] = self.h1.to_json()
        return doc


def euler_characteristic(genus: int, twists: int) -> int:
    return 4 - 4 * genus + twists


def signature_hyperelliptic(L: LefschetzFibration) -> int:
    if not L.hyperelliptic:
        raise SignatureUnavailable("the hyperelliptic formula needs a hyperelliptic fibration")
    seps = L.separating_letters()
    if len(seps) != len(L.separating_types):
        raise FibrationError(f"{len(seps)} separating letters but {len(L.separating_types)} type tags")
    types = [h for i, h in zip(seps, L.separating_types) for _ in range(L.word[i].exp)]
    return hyperelliptic_signature(L.genus, L.twist_count - len(types), types)


def hyperelliptic_signature(g: int, nonseparating: int, separating: Sequence[int] = ()) -> int:
    """-(g+1)/(2g+1) n0 + sum over separating twists of 4h(g-h)/(2g+1) - 1."""
    s = Fraction(-(g + 1), 2 * g + 1) * nonseparating
    for h in separating:
        if not 1 <= h <= g // 2:
            raise FibrationError(f"separating type {h} out of range for genus {g}")
        s += Fraction(4 * h * (g - h), 2 * g + 1) - 1
    if s.denominator != 1:
        raise FibrationError(f"signature {s} is not an integer; the word is probably mis-tagged")
    return int(s)


def vanishing_cycle_group(L: LefschetzFibration) -> AbelianGroup:
    """Z^{2g} modulo the vanishing cycles: H_1 of the total space when a section exists."""
    rows = tuple(tuple(resolve_vector(l.curve, L.system)) for l in L.word)
    return abelian_group_from_presentation(AbelianPresentation(2 * L.genus, rows))


def base_invariants(L: LefschetzFibration, homology: bool = True) -> InvariantRecord:
    chi = euler_characteristic(L.genus, L.twist_count)
    if L.chi is not None and L.chi != chi:
        raise FibrationError(f"tracked chi {L.chi} disagrees with the twist count ({chi})")
    if L.sigma is not None:
        sigma, prov = L.sigma, L.provenance
    elif L.hyperelliptic:
        sigma, prov = signature_hyperelliptic(L), ("endo-formula",)
    else:
        raise SignatureUnavailable("signature provenance missing")
    return InvariantRecord(chi, sigma, vanishing_cycle_group(L) if homology else None, tuple(prov))


def hyperelliptic_fibration(g: int, lanterns: bool = False) -> LefschetzFibration:
    h = hyperelliptic_word(g)
    system = standard_curve_system(g, lanterns=lanterns)
    return LefschetzFibration(g, h + h, system, hyperelliptic=True, sections=1)


def _with_invariants(L: LefschetzFibration) -> LefschetzFibration:
    rec = base_invariants(L, homology=False)
    return replace(L, chi=rec.chi, sigma=rec.sigma, provenance=rec.provenance)


def fiber_sum(L1: LefschetzFibration, L2: LefschetzFibration, gluing: Sequence[tuple[str, int]] = ()) -> LefschetzFibration:
    if L1.genus != L2.genus:
        raise FibrationError("fiber sum needs equal fiber genus")
    if L1.system != L2.system:
        raise FibrationError("fiber sum needs a common curve system")
    a, b = _with_invariants(L1), _with_invariants(L2)
    g = L1.genus
    word = a.word + b.word.conjugated(tuple(gluing))
    return LefschetzFibration(
        g, word, L1.system,
        hyperelliptic=False,
        sections=1 if (L1.sections and L2.sections) else None,
        chi=a.chi + b.chi + 4 * g - 4,
        sigma=a.sigma + b.sigma,
        provenance=("additivity",),
    )


@lru_cache(maxsize=32)
def _registry(system: CurveSystem):
    return standard_registry(system)


def lantern_sites(L: LefschetzFibration) -> list[tuple[int, str]]:
    """Positions where the four boundary twists of a registered lantern appear consecutively."""
    reg = _registry(L.system)
    out = []
    for rid, ax in reg.axioms.items():
        if ax.kind != "lantern":
            continue
        pat = [(n, e) for n, e in ax.lhs]
        for i in range(len(L.word) - len(pat) + 1):
            window = L.word.letters[i : i + len(pat)]
            if all(l.curve.plain and l.curve.base == n and l.exp == e for l, (n, e) in zip(window, pat)):
                out.append((i, rid))
    return out


def lantern_substitution(L: LefschetzFibration, site: int, relation: str | None = None) -> LefschetzFibration:
    sites = dict(lantern_sites(L))
    if site not in sites or (relation is not None and sites[site] != relation):
        raise FibrationError(f"no registered lantern configuration at position {site}")
    base = _with_invariants(L)
    ctx = MoveContext(L.system, _registry(L.system), central_target=True, checks=True)
    word = apply_move(L.word, Move("relation_substitution", site, relation=sites[site]), ctx)
    return LefschetzFibration(
        L.genus, word, L.system,
        hyperelliptic=False,
        sections=L.sections,
        chi=base.chi - 1,
        sigma=base.sigma + 1,
        provenance=tuple(dict.fromkeys(base.provenance + ("substitution-delta",))),
        annotations={**L.annotations, "rational_blowdowns": L.annotations.get("rational_blowdowns", 0) + 1},
    )


# ---------------------------------------------------------------------------
# twisted doubles and geography


@lru_cache(maxsize=None)
def twisted_double(g: int) -> LefschetzFibration:
    """The twisted fiber sum of two copies of the genus-g hyperelliptic fibration.

    Its word has the form A (a1 a3 b1 b3)^{2g+2}, whose 2g+2 blocks are
    lantern configurations.
    """
    if g < 2:
        raise FibrationError("the twisted double needs genus at least 2")
    word, phi, _ = twisted_double_word(g)
    system = standard_curve_system(g, lanterns=True)
    if not word_action(word, system).is_identity():
        raise FibrationError("twisted double word does not act trivially on homology")
    base = hyperelliptic_fibration(g, lanterns=True)
    summed = fiber_sum(base, base)
    return LefschetzFibration(g, word, system, sections=1, chi=summed.chi, sigma=summed.sigma,
                              provenance=summed.provenance, annotations={"gluing": [list(x) for x in phi]})


def in_region(a: int, b: int) -> str | None:
    """None when (a, b) is an allowed geography point, otherwise the violated inequality."""
    if a < 3:
        return f"a >= 3 fails (a = {a})"
    if b <= 0:
        return f"b > 0 fails (b = {b})"
    if b > 2 * a:
        return f"b <= 2a fails ({b} > {2 * a})"
    return None


@dataclass
class GeographyPlan:
    a: int
    b: int
    genus: int
    sites: list[int]
    notes: list[str]

    def to_json(self) -> dict:
        return {"a": self.a, "b": self.b, "fiber_genus": self.genus, "lantern_sites": self.sites,
                "notes": self.notes}


def geography_point(a: int, b: int, build: bool = True) -> tuple[GeographyPlan, InvariantRecord]:
    bad = in_region(a, b)
    if bad:
        raise FibrationError(f"(a, b) = ({a}, {b}) is outside the region: {bad}")
    g = a - 1
    z = twisted_double(g)
    sites = [i for i, rid in lantern_sites(z) if rid == "lantern_fibersum"]
    if len(sites) != 2 * g + 2:
        raise FibrationError(f"expected {2 * g + 2} lantern blocks, found {len(sites)}")
    chosen = sites[:b]
    notes = [f"twisted double of the genus-{g} hyperelliptic fibration",
             f"{b} lantern substitutions on blocks of (a1 a3 b1 b3)"]
    if b == 2 * a:
        notes.append("every block substituted: a1, a3 disappear and c3 appears; simple connectivity uses c3")
    plan = GeographyPlan(a, b, g, chosen, notes)
    if build:
        L = z
        for site in sorted(chosen, reverse=True):
            L = lantern_substitution(L, site, "lantern_fibersum")
        if not word_action(L.word, L.system).is_identity():
            raise FibrationError("substituted word does not act trivially on homology")
        return plan, base_invariants(L)
    rec = base_invariants(z, homology=False)
    return plan, InvariantRecord(rec.chi - b, rec.sigma + b, None, rec.provenance + ("substitution-delta",))


# ---------------------------------------------------------------------------
# arithmetic side conditions


@dataclass
class KnotObstruction:
    genus: int
    log_transform: list[tuple[int, int]]
    knot_surgery: list[int]

    @property
    def empty(self) -> bool:
        return not self.log_transform and not self.knot_surgery

    def to_json(self) -> dict:
        return {"genus": self.genus, "log_transform": [list(x) for x in self.log_transform],
                "knot_surgery": self.knot_surgery, "empty": self.empty}


def log_transform_knot_obstruction(g: int) -> KnotObstruction:
    """Pairs (p, q) with gcd 1 and (g+1)pq - p - q in {1, 2}; levels l with (2l + g - 1) | 2.

    Termination: pq - p - q >= -1 for p, q >= 1, so the value is at least
    g pq - 1 and a solution needs pq <= 3/g.
    """
    if g < 1:
        raise FibrationError("genus must be at least 1")
    limit = 3 // g + 1
    pairs = []
    for p in range(1, limit + 1):
        for q in range(1, limit // p + 1):
            if gcd(p, q) == 1 and (g + 1) * p * q - p - q in (1, 2):
                pairs.append((p, q))
    levels = []
    l = 0
    while 2 * l + g - 1 <= 2:
        if 2 * l + g - 1 > 0 and 2 % (2 * l + g - 1) == 0:
            levels.append(l)
        l += 1
    return KnotObstruction(g, pairs, levels)


def cluster_bound(g: int) -> int:
    if g < 1:
        raise FibrationError("genus must be at least 1")
    return 9 if g == 1 else 4 * g + 4


# ---------------------------------------------------------------------------
# the odd-lantern example on the genus-3 hyperelliptic word


@dataclass
class NoetherExample:
    before: InvariantRecord
    after: InvariantRecord
    summed: InvariantRecord
    certificate_valid: bool


def noether_example() -> NoetherExample:
    from .derivation import check_derivation

    script = build_odd_lantern_script()
    cert = check_derivation(script)
    base = hyperelliptic_fibration(3, lanterns=True)
    # the exposed word is equal to h^2 by the script, so it inherits the hyperelliptic signature
    exposed_word = _replay_until_substitution(script)
    exposed = replace(_with_invariants(base), word=exposed_word)
    after = lantern_substitution(exposed, 0, "lantern_odd")
    total = fiber_sum(exposed, after)
    return NoetherExample(base_invariants(base), base_invariants(after), base_invariants(total), cert.valid)


def _replay_until_substitution(script) -> TwistWord:
    ctx = MoveContext(script.system, standard_registry(script.system), central_target=True, checks=False)
    w = script.source
    for m in script.moves:
        if m.kind == "relation_substitution" and m.relation == "lantern_odd":
            break
        w = apply_move(w, m, ctx)
    return w
