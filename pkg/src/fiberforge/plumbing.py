"""Plumbings, lens-space boundaries, abelian presentations and the K.omega functional."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, isqrt, lcm
from typing import Mapping, Sequence

from . import exact
from .homology import Configuration, H2Class, HomologyError, canonical_class, pair


class PlumbingError(ValueError):
    pass


@dataclass(frozen=True)
class PlumbingGraph:
    weights: tuple[int, ...]
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        n = len(self.weights)
        for a, b in self.edges:
            if not (0 <= a < n and 0 <= b < n) or a == b:
                raise PlumbingError(f"bad edge ({a}, {b})")

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def matrix(self) -> list[list[int]]:
        n = self.size
        q = [[0] * n for _ in range(n)]
        for i, w in enumerate(self.weights):
            q[i][i] = w
        for a, b in self.edges:
            q[a][b] += 1
            q[b][a] += 1
        return q

    @property
    def signature(self) -> int:
        return exact.signature(self.matrix)

    @property
    def euler(self) -> int:
        return self.size + 1

    @property
    def det(self) -> int:
        return int(exact.det(self.matrix))

    @property
    def negative_definite(self) -> bool:
        return self.size > 0 and exact.is_negative_definite(self.matrix)

    @property
    def is_linear(self) -> bool:
        return set(map(frozenset, self.edges)) == {frozenset((i, i + 1)) for i in range(self.size - 1)}

    def to_json(self) -> dict:
        doc: dict = {"weights": list(self.weights)}
        if not self.is_linear:
            doc["edges"] = [list(e) for e in self.edges]
        return doc

    @classmethod
    def from_json(cls, doc: Mapping) -> "PlumbingGraph":
        weights = [int(w) for w in doc["weights"]]
        if "edges" in doc:
            return cls(tuple(weights), tuple((int(a), int(b)) for a, b in doc["edges"]))
        return linear_plumbing(weights)


def linear_plumbing(weights: Sequence[int]) -> PlumbingGraph:
    if not weights:
        raise PlumbingError("a linear plumbing needs at least one vertex")
    return PlumbingGraph(tuple(int(w) for w in weights), tuple((i, i + 1) for i in range(len(weights) - 1)))


# ---------------------------------------------------------------------------
# lens spaces


@dataclass(frozen=True)
class LensSpace:
    p: int
    q: int
    q_prime: int

    def to_json(self) -> dict:
        return {"p": self.p, "q": self.q, "q_prime": self.q_prime}


def continued_fraction(coeffs: Sequence[int]) -> Fraction:
    """Negative continued fraction [a1, ..., ak] = a1 - 1/(a2 - 1/(...))."""
    value = Fraction(coeffs[-1])
    for a in reversed(coeffs[:-1]):
        value = a - 1 / value
    return value


def lens_space_of_linear_plumbing(weights: Sequence[int]) -> LensSpace:
    if not weights:
        raise PlumbingError("empty weight string")
    if any(w > -2 for w in weights):
        raise PlumbingError("every weight must be at most -2 for the continued fraction model")
    a = [-w for w in weights]
    x = continued_fraction(a)
    y = continued_fraction(a[::-1])
    p, q = x.numerator, x.denominator
    if y.numerator != p:
        raise ArithmeticError("reversed continued fraction has a different numerator")
    q_prime = y.denominator
    if p > 1 and (q * q_prime) % p != 1:
        raise ArithmeticError("q and q' are not inverse modulo p")
    return LensSpace(p, q, q_prime)


@dataclass(frozen=True)
class FamilyWitness:
    member: bool
    m: int | None = None
    k: int | None = None
    matched: str | None = None


def qhb_family_check(p: int, q: int) -> FamilyWitness:
    """Is L(p, q) in the family L(m^2, mk - 1), gcd(m, k) = 1, up to orientation and inversion?"""
    m = isqrt(p)
    if m * m != p or m < 2:
        return FamilyWitness(False)
    q %= p
    q_inv = pow(q, -1, p) if gcd(q, p) == 1 else None
    candidates = (("q", q), ("-q", (-q) % p), ("q^-1", q_inv), ("-q^-1", None if q_inv is None else (-q_inv) % p))
    for label, value in candidates:
        if value is None:
            continue
        for k in range(1, m):
            if gcd(m, k) == 1 and (m * k - 1) % p == value:
                return FamilyWitness(True, m, k, label)
    return FamilyWitness(False)


# ---------------------------------------------------------------------------
# abelian groups


@dataclass(frozen=True)
class AbelianPresentation:
    generators: int
    relations: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        if any(len(r) != self.generators for r in self.relations):
            raise PlumbingError("every relation needs one coefficient per generator")


@dataclass(frozen=True)
class AbelianGroup:
    torsion: tuple[int, ...]
    free_rank: int
    smith: exact.SmithForm | None = None

    @property
    def trivial(self) -> bool:
        return not self.torsion and self.free_rank == 0

    @property
    def order(self) -> int | None:
        if self.free_rank:
            return None
        out = 1
        for d in self.torsion:
            out *= d
        return out

    def __str__(self):
        parts = [f"Z/{d}" for d in self.torsion] + ["Z"] * self.free_rank
        return " + ".join(parts) if parts else "0"

    def to_json(self) -> dict:
        return {"torsion": list(self.torsion), "free_rank": self.free_rank, "description": str(self)}


def abelian_group_from_presentation(pres: AbelianPresentation) -> AbelianGroup:
    # zero rows and rows repeated up to sign do not change the quotient
    rows = []
    seen = set()
    for r in pres.relations:
        key = max(tuple(r), tuple(-x for x in r))
        if any(r) and key not in seen:
            seen.add(key)
            rows.append(list(r))
    if not rows:
        return AbelianGroup((), pres.generators, None)
    form = exact.smith(rows, pres.generators)
    diag = list(form.diagonal)
    nonzero = [d for d in diag if d]
    torsion = tuple(d for d in nonzero if d != 1)
    return AbelianGroup(torsion, pres.generators - len(nonzero), form)


def meridian_presentation(plumbing: PlumbingGraph) -> AbelianPresentation:
    """H_1 of the boundary: meridians modulo the rows of the intersection matrix."""
    return AbelianPresentation(plumbing.size, tuple(tuple(r) for r in plumbing.matrix))


def meridian_multiples(weights: Sequence[int], upto: int) -> list[int]:
    """Coefficients c_i with mu_i = c_i mu_1, read off the first rows of a linear plumbing."""
    c = [0, 1]
    for i in range(1, upto):
        c.append(-weights[i - 1] * c[i] - c[i - 1])
    return c[1 : upto + 1]


# ---------------------------------------------------------------------------
# bookkeeping


def rational_blowdown_bookkeeping(ambient: tuple[int, int], plumbing: PlumbingGraph) -> tuple[int, int]:
    if plumbing.size == 0:
        raise PlumbingError("cannot blow down an empty plumbing")
    if not plumbing.negative_definite:
        raise PlumbingError("rational blowdown needs a negative definite plumbing")
    chi, sigma = ambient
    return chi - plumbing.euler + 1, sigma - plumbing.signature


@dataclass(frozen=True)
class HomeomorphismReport:
    name: str
    b2: int
    b_plus: int
    b_minus: int
    parity: str
    note: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "b2": self.b2, "b_plus": self.b_plus, "b_minus": self.b_minus,
                "parity": self.parity, "note": self.note}


def homeomorphism_type(chi: int, sigma: int, parity: str = "unknown", simply_connected: bool = True) -> HomeomorphismReport:
    b2 = chi - 2
    if b2 < 0 or abs(sigma) > b2 or (b2 + sigma) % 2:
        raise PlumbingError(f"(chi, sigma) = ({chi}, {sigma}) is not realizable by a simply connected manifold")
    bp, bm = (b2 + sigma) // 2, (b2 - sigma) // 2
    if parity not in ("odd", "even", "unknown"):
        raise PlumbingError(f"unknown parity {parity!r}")
    note = ""
    if sigma % 16:
        if parity == "even":
            raise PlumbingError("an even simply connected form needs signature divisible by 16 (Rokhlin)")
        note = "signature not divisible by 16, so the form cannot be even"
        if parity == "unknown":
            parity = "odd"
    if not simply_connected:
        return HomeomorphismReport("undetermined", b2, bp, bm, parity, "not known to be simply connected")
    if b2 == 0:
        return HomeomorphismReport("S4", b2, bp, bm, parity, note)
    if parity == "odd":
        left = "CP2" if bp == 1 else (f"{bp}CP2" if bp else "")
        right = "CP2bar" if bm == 1 else (f"{bm}CP2bar" if bm else "")
        if bp == 1 and bm:
            name = f"CP2#{right}"
        else:
            name = "#".join(x for x in (left, right) if x)
        return HomeomorphismReport(name, b2, bp, bm, parity, note)
    if parity == "even":
        if sigma == 0:
            return HomeomorphismReport(f"#{bp}(S2xS2)", b2, bp, bm, parity, note)
        if bp and bm:
            e8 = abs(sigma) // 8
            hyp = min(bp, bm)
            return HomeomorphismReport(f"{e8}E8+{hyp}H form", b2, bp, bm, parity,
                                       "even indefinite form; homeomorphism type fixed by Freedman")
    return HomeomorphismReport("undetermined", b2, bp, bm, parity, note or "parity unknown")


# ---------------------------------------------------------------------------
# table check and the K.omega functional


@dataclass
class TableReport:
    ok: bool
    mismatches: list[tuple[str, str, int, int]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"ok": self.ok, "mismatches": [{"a": a, "b": b, "got": g, "want": w} for a, b, g, w in self.mismatches]}


def check_embedding(config: Configuration, names: Sequence[str], plumbing: PlumbingGraph) -> TableReport:
    if len(names) != plumbing.size:
        raise PlumbingError(f"{len(names)} classes for a plumbing with {plumbing.size} vertices")
    q = plumbing.matrix
    bad = []
    for i, a in enumerate(names):
        for j, b in enumerate(names[i:], start=i):
            got = pair(config[a], config[b])
            if got != q[i][j]:
                bad.append((a, b, got, q[i][j]))
    return TableReport(not bad, bad)


@dataclass
class KOmegaReport:
    variables: list[str]
    denominator: int
    restricted: list[int]
    total: list[int]
    ambient: list[int]
    k_restricted: list[int]
    positive: bool
    certificate: dict

    def coefficient(self, which: str, var: str) -> Fraction:
        vec = {"restricted": self.restricted, "total": self.total, "ambient": self.ambient}[which]
        return Fraction(vec[self.variables.index(var)], self.denominator)

    def to_json(self) -> dict:
        return {
            "variables": self.variables,
            "denominator": self.denominator,
            "restricted_numerators": self.restricted,
            "k_omega_numerators": self.total,
            "ambient_numerators": self.ambient,
            "k_restricted": self.k_restricted,
            "positive": self.positive,
            "certificate": self.certificate,
        }


def k_omega_functional(config: Configuration, names: Sequence[str], plumbing: PlumbingGraph,
                       k: H2Class | None = None) -> KOmegaReport:
    """K.omega after rationally blowing down the plumbing spanned by `names`.

    omega = a h - sum b_i e_i, so omega.u is linear in (a, b_i) with the
    coefficients of u itself. The restricted part is K|_P^T Q^-1 omega|_P.
    """
    table = check_embedding(config, names, plumbing)
    if not table.ok:
        a, b, got, want = table.mismatches[0]
        raise PlumbingError(f"embedding does not match the plumbing: {a}.{b} = {got}, expected {want}")
    basis = config.basis
    if not basis.is_rational:
        raise HomologyError("the K.omega functional is defined on {h, e_i} bases")
    k = k or canonical_class(basis)
    variables = ["a"] + [f"b{i}" for i in basis.exceptional_indices]
    kp = [pair(k, config[n]) for n in names]
    omega = [list(config[n].coeffs) for n in names]  # rows: u_i, columns: variables
    qinv = exact.inverse(plumbing.matrix)
    weights = [sum(kp[i] * qinv[i][j] for i in range(len(kp))) for j in range(len(kp))]
    restricted = [sum(weights[j] * omega[j][v] for j in range(len(kp))) for v in range(len(variables))]
    # K.omega on the ambient manifold: K = -3h + sum e_i pairs with a h - sum b_i e_i to -3a + sum b_i
    ambient = [Fraction(k.coeffs[0])] + [Fraction(c) for c in k.coeffs[1:]]
    total = [x - y for x, y in zip(ambient, restricted)]
    den = 1
    for x in restricted:
        den = lcm(den, x.denominator)
    if plumbing.det % den:
        raise ArithmeticError("coefficients do not have denominator dividing det Q")
    num = lambda vec: [int(x * den) for x in vec]
    ca, rest = total[0] * den, [x * den for x in total[1:]]
    # with a > sum b_i and b_i > 0: c_a a + sum c_i b_i - (a - sum b_i)
    # = (c_a - 1) a + sum (c_i + 1) b_i > sum (c_a + c_i) b_i >= 0
    ok = ca - 1 > 0 and all(ca + c >= 0 for c in rest)
    certificate = {
        "bound": "K_X.omega_X - (a - sum b_i)/denominator > 0",
        "assumes": ["a > sum of b_i", "b_i > 0"],
        "a_margin": int(ca - 1),
        "min_pair_margin": int(min(ca + c for c in rest)) if rest else None,
    }
    return KOmegaReport(variables, den, num(restricted), num(total), num(ambient), kp, ok, certificate)
