"""Adjunctive candidate enumeration, wall crossing and integrality for basic classes.

A candidate L is recorded by its evaluations on a rational basis of H_2 made of
classes on the complement Z of a plumbing (the z-vector) and the plumbing
spheres themselves (the p-vector). All arithmetic is integral; squares are
computed through the adjugate of the relevant Gram matrix.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm, prod
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import exact
from .homology import Basis, H2Class, pair
from .plumbing import PlumbingGraph


class SWConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Gram data


@dataclass(frozen=True)
class GramData:
    matrix: tuple[tuple[int, ...], ...]
    inverse: tuple[tuple[Fraction, ...], ...]
    det: int

    @property
    def adjugate(self) -> np.ndarray:
        """det * G^-1 as an int64 array."""
        return np.array([[int(x * self.det) for x in r] for r in self.inverse], dtype=np.int64)

    def square(self, v: Sequence[int]) -> Fraction:
        return exact.bilinear(v, self.inverse, v)


def gram(classes: Sequence[H2Class]) -> GramData:
    m = [[pair(a, b) for b in classes] for a in classes]
    d = exact.det(m)
    if d == 0:
        raise exact.SingularMatrix("classes are linearly dependent")
    inv = exact.inverse(m)
    return GramData(tuple(map(tuple, m)), tuple(map(tuple, inv)), int(d))


@dataclass(frozen=True)
class ZBasis:
    names: tuple[str, ...]
    classes: tuple[H2Class, ...]
    genera: tuple[int, ...]

    @property
    def squares(self) -> tuple[int, ...]:
        return tuple(c.square for c in self.classes)

    @property
    def gram(self) -> GramData:
        return gram(self.classes)

    def evaluate(self, c: H2Class) -> tuple[int, ...]:
        return tuple(pair(c, a) for a in self.classes)


# ---------------------------------------------------------------------------
# Z-side candidates

BOX_POLICIES = ("literal", "adjunction", "explicit")


def box_bounds(zb: ZBasis, policy: str, sphere_rule: str = "square",
               explicit: Sequence[int] | None = None) -> tuple[int, ...]:
    """Per-class bounds |L(A_i)| <= b_i.

    literal: b = -A^2. adjunction: b = 2g - 2 - A^2 for g >= 1; spheres use
    -A^2 ("square") or -A^2 - 2 ("strict"). explicit: the given list.
    """
    if policy == "literal":
        return tuple(-s for s in zb.squares)
    if policy == "adjunction":
        if sphere_rule not in ("square", "strict"):
            raise SWConfigError(f"unknown sphere rule {sphere_rule!r}")
        out = []
        for s, g in zip(zb.squares, zb.genera):
            if g >= 1:
                out.append(2 * g - 2 - s)
            else:
                out.append(-s if sphere_rule == "square" else -s - 2)
        return tuple(out)
    if policy == "explicit":
        if explicit is None or len(explicit) != len(zb.classes):
            raise SWConfigError("explicit policy needs one bound per class")
        return tuple(int(b) for b in explicit)
    raise SWConfigError(f"unknown box policy {policy!r}")


def coordinate_values(square: int, bound: int) -> list[int]:
    return [x for x in range(-bound, bound + 1) if (x - square) % 2 == 0]


def box_count(squares: Sequence[int], bounds: Sequence[int]) -> int:
    return prod(len(coordinate_values(s, b)) for s, b in zip(squares, bounds))


@dataclass(frozen=True)
class ZFilter:
    min_square: int = 4
    modulus: int = 8
    residue: int = 4


def _z_slice(args) -> np.ndarray:
    values, adj, det, flt, start, stop = args
    shape = tuple(len(v) for v in values)
    idx = np.unravel_index(np.arange(start, stop, dtype=np.int64), shape)
    rows = np.stack([np.asarray(v, dtype=np.int64)[i] for v, i in zip(values, idx)], axis=1)
    num = np.einsum("ij,jk,ik->i", rows, adj, rows)
    # num = det * L^2; det may be negative
    ok = num % det == 0
    sq = np.where(ok, num // det, 0)
    keep = ok & (sq >= flt.min_square) & (sq % flt.modulus == flt.residue % flt.modulus)
    return rows[keep]


def _slices(total: int, count: int) -> list[tuple[int, int]]:
    count = max(1, min(count, total)) if total else 1
    edges = [total * k // count for k in range(count + 1)]
    return [(a, b) for a, b in zip(edges, edges[1:])]


@dataclass
class ZEnumeration:
    bounds: tuple[int, ...]
    box_count: int
    candidates: np.ndarray

    @property
    def filtered_count(self) -> int:
        return len(self.candidates)


def enumerate_z_candidates(zb: ZBasis, bounds: Sequence[int], flt: ZFilter = ZFilter(), jobs: int = 1,
                           slices: int | None = None, chunk: int = 1 << 20) -> ZEnumeration:
    """Lattice points of the parity box whose square passes the dimension filter, in lexicographic order."""
    g = zb.gram
    adj, det = g.adjugate, g.det
    if np.abs(adj).max() * max(bounds, default=0) ** 2 * len(bounds) ** 2 >= 2**62:
        raise OverflowError("box too large for 64-bit evaluation")
    values = [coordinate_values(s, b) for s, b in zip(zb.squares, bounds)]
    total = prod(len(v) for v in values)
    n = slices or max(jobs, -(-total // chunk))
    tasks = [(values, adj, det, flt, a, b) for a, b in _slices(total, n)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_z_slice, tasks))
    else:
        parts = [_z_slice(t) for t in tasks]
    rows = np.concatenate(parts) if parts else np.zeros((0, len(values)), dtype=np.int64)
    return ZEnumeration(tuple(bounds), total, rows)


# ---------------------------------------------------------------------------
# plumbing-side candidates


def enumerate_p_candidates(plumbing: PlumbingGraph, target_square: int,
                           bounds: Sequence[tuple[int, int]] | None = None) -> list[tuple[int, ...]]:
    """Vectors v with w_i + 2 <= v_i <= -w_i, v_i = w_i mod 2 and v^T Q^-1 v = target.

    Depth-first over coordinates using Q = L D L^T: v^T Q^-1 v = sum z_k^2 / d_k
    with z = L^-1 v, and every term has the sign of d_k < 0, which prunes.
    """
    q = plumbing.matrix
    n = len(q)
    if not plumbing.negative_definite:
        raise SWConfigError("plumbing must be negative definite")
    lower = [[Fraction(0)] * n for _ in range(n)]
    d = [Fraction(0)] * n
    for k in range(n):
        for j in range(k):
            s = Fraction(q[k][j]) - sum(lower[k][t] * lower[j][t] * d[t] for t in range(j))
            lower[k][j] = s / d[j]
        d[k] = Fraction(q[k][k]) - sum(lower[k][t] ** 2 * d[t] for t in range(k))
        lower[k][k] = Fraction(1)
    nbrs = [[j for j in range(k) if lower[k][j]] for k in range(n)]
    bounds = bounds or [(w + 2, -w) for w in plumbing.weights]
    budget = Fraction(-target_square)
    out: list[tuple[int, ...]] = []
    v: list[int] = []
    z: list[Fraction] = []

    def walk(k: int, acc: Fraction) -> None:
        if k == n:
            if acc == budget:
                out.append(tuple(v))
            return
        lo, hi = bounds[k]
        w = plumbing.weights[k]
        shift = sum((lower[k][j] * z[j] for j in nbrs[k]), Fraction(0))
        for x in range(lo, hi + 1):
            if (x - w) % 2:
                continue
            zk = x - shift
            a = acc + zk * zk / -d[k]
            if a <= budget:
                v.append(x)
                z.append(zk)
                walk(k + 1, a)
                v.pop()
                z.pop()

    walk(0, Fraction(0))
    return out


# ---------------------------------------------------------------------------
# wall crossing and integrality


@dataclass(frozen=True)
class Wall:
    """Coordinates of H and of the reference class h in the combined basis, scaled to integers."""

    h_coords: tuple[int, ...]
    ref_coords: tuple[int, ...]
    ref_scale: int
    h_square: Fraction
    h_dot_ref: Fraction


def prepare_wall(basis_classes: Sequence[H2Class], plumbing_indices: Sequence[int], h_coeffs: Sequence[int],
                 reference: H2Class) -> Wall:
    g = gram(basis_classes)
    n = len(basis_classes)
    if len(h_coeffs) != n:
        raise SWConfigError("H needs one coefficient per basis class")
    gm = g.matrix
    for i in plumbing_indices:
        if sum(h_coeffs[k] * gm[k][i] for k in range(n)) != 0:
            raise SWConfigError(f"H pairs nontrivially with plumbing class {i}")
    h_sq = Fraction(exact.bilinear(h_coeffs, gm, h_coeffs))
    if h_sq <= 0:
        raise SWConfigError("H must have positive square")
    rhs = [pair(b, reference) for b in basis_classes]
    coords = exact.solve(gm, rhs)
    h_dot_ref = sum(Fraction(h_coeffs[k]) * rhs[k] for k in range(n))
    if h_dot_ref <= 0:
        raise SWConfigError("H must pair positively with the reference class")
    scale = lcm(*(c.denominator for c in coords))
    return Wall(tuple(int(x) for x in h_coeffs), tuple(int(c * scale) for c in coords), scale, h_sq, h_dot_ref)


def wall_crossing_filter(z: np.ndarray, p: np.ndarray, wall: Wall, block: int = 256) -> np.ndarray:
    """Index pairs (i, j) of (z_i, p_j) whose pairings with H and h have strictly opposite signs."""
    nz = z.shape[1] if z.ndim == 2 else 0
    hz = np.array(wall.h_coords[:nz], dtype=np.int64)
    hp = np.array(wall.h_coords[nz:], dtype=np.int64)
    rz = np.array(wall.ref_coords[:nz], dtype=np.int64)
    rp = np.array(wall.ref_coords[nz:], dtype=np.int64)
    if len(z) == 0 or len(p) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    p_ref, p_h = p @ rp, p @ hp
    found = []
    for start in range(0, len(z), block):
        zb = z[start : start + block]
        lh = (zb @ hz)[:, None] + p_h[None, :]
        lr = (zb @ rz)[:, None] + p_ref[None, :]
        keep = np.sign(lh) * np.sign(lr) < 0
        ij = np.argwhere(keep)
        ij[:, 0] += start
        found.append(ij)
    return np.concatenate(found)


@dataclass(frozen=True)
class Coordinatizer:
    """Solves B_k . L = v_k for L in the ambient basis, with a common denominator."""

    basis: Basis
    numerators: tuple[tuple[int, ...], ...]
    denominator: int

    @classmethod
    def build(cls, classes: Sequence[H2Class]) -> "Coordinatizer":
        basis = classes[0].basis
        rows = [[sum(c.coeffs[l] * basis.gram[l][m] for l in range(basis.rank)) for m in range(basis.rank)]
                for c in classes]
        if len(rows) != basis.rank:
            raise SWConfigError("the combined classes must form a rational basis of H_2")
        inv = exact.inverse(rows)
        den = lcm(*(x.denominator for r in inv for x in r))
        return cls(basis, tuple(tuple(int(x * den) for x in r) for r in inv), den)

    def solve(self, v: Sequence[int]) -> H2Class | None:
        out = []
        for r in self.numerators:
            s = sum(a * b for a, b in zip(r, v))
            if s % self.denominator:
                return None
            out.append(s // self.denominator)
        return H2Class(self.basis, tuple(out))


def is_characteristic(c: H2Class) -> bool:
    g = c.basis.gram
    return all((sum(g[i][j] * c.coeffs[j] for j in range(len(g))) - g[i][i]) % 2 == 0 for i in range(len(g)))


def integral_classes(pairs: np.ndarray, z: np.ndarray, p: np.ndarray, coord: Coordinatizer) -> list[H2Class]:
    out = []
    for i, j in pairs:
        v = [int(x) for x in z[i]] + [int(x) for x in p[j]]
        c = coord.solve(v)
        if c is not None and is_characteristic(c):
            out.append(c)
    return sorted(out, key=lambda c: c.coeffs)


# ---------------------------------------------------------------------------
# the full pipeline


@dataclass
class SWProblem:
    """Everything the enumeration needs, independent of where the classes came from."""

    zbasis: ZBasis
    p_names: tuple[str, ...]
    p_classes: tuple[H2Class, ...]
    plumbing: PlumbingGraph
    p_square: int
    wall_h: tuple[int, ...]
    reference: H2Class
    zfilter: ZFilter = ZFilter()

    @property
    def combined(self) -> tuple[H2Class, ...]:
        return tuple(self.zbasis.classes) + tuple(self.p_classes)


@dataclass
class PipelineReport:
    policy: str
    bounds: tuple[int, ...]
    counts: dict[str, int]
    box_counts: dict[str, int]
    final_classes: list[str]
    checks: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    verdict: str = ""
    timing: dict[str, float] = field(default_factory=dict)

    def to_json(self, timing: bool = True) -> dict:
        doc = {
            "policy": self.policy,
            "bounds": list(self.bounds),
            "counts": dict(self.counts),
            "box_counts": dict(self.box_counts),
            "final_classes": list(self.final_classes),
            "checks": self.checks,
            "notes": list(self.notes),
            "verdict": self.verdict,
        }
        if timing:
            doc["timing"] = {k: round(v, 3) for k, v in self.timing.items()}
        return doc


@dataclass
class SWResult:
    z: ZEnumeration
    p: np.ndarray
    pairs: np.ndarray
    final: list[H2Class]
    timing: dict[str, float]

    @property
    def counts(self) -> dict[str, int]:
        return {
            "adjunctive_box": self.z.box_count,
            "dimension_filtered": self.z.filtered_count,
            "p_classes": len(self.p),
            "paired": self.z.filtered_count * len(self.p),
            "wall_crossed": len(self.pairs),
            "integral": len(self.final),
        }


def run_enumeration(problem: SWProblem, bounds: Sequence[int], jobs: int = 1,
                    slices: int | None = None) -> SWResult:
    timing = {}
    t = time.perf_counter()
    zs = enumerate_z_candidates(problem.zbasis, bounds, problem.zfilter, jobs=jobs, slices=slices)
    timing["z"] = time.perf_counter() - t
    t = time.perf_counter()
    ps = np.array(enumerate_p_candidates(problem.plumbing, problem.p_square), dtype=np.int64)
    ps = ps.reshape(-1, problem.plumbing.size)
    timing["p"] = time.perf_counter() - t
    t = time.perf_counter()
    nz = len(problem.zbasis.classes)
    wall = prepare_wall(problem.combined, range(nz, nz + len(problem.p_classes)), problem.wall_h, problem.reference)
    pairs = wall_crossing_filter(zs.candidates, ps, wall)
    timing["wall"] = time.perf_counter() - t
    t = time.perf_counter()
    final = integral_classes(pairs, zs.candidates, ps, Coordinatizer.build(problem.combined))
    timing["integral"] = time.perf_counter() - t
    return SWResult(zs, ps, pairs, final, timing)


def default_jobs() -> int:
    raw = os.environ.get("FIBERFORGE_JOBS", "1")
    try:
        jobs = int(raw)
    except ValueError:
        raise SWConfigError(f"FIBERFORGE_JOBS must be a positive integer, got {raw!r}") from None
    if jobs < 1:
        raise SWConfigError("FIBERFORGE_JOBS must be at least 1")
    return jobs


def evaluations(problem: SWProblem, c: H2Class) -> tuple[tuple[int, ...], tuple[int, ...]]:
    return problem.zbasis.evaluate(c), tuple(pair(c, u) for u in problem.p_classes)


def membership(rows: np.ndarray, v: Iterable[int]) -> bool:
    v = np.asarray(list(v), dtype=np.int64)
    return bool(len(rows)) and bool((rows == v).all(axis=1).any())


def summarize(problem: SWProblem, result: SWResult, policy: str, bounds: Sequence[int],
              extra_policies: Mapping[str, Sequence[int]] | None = None,
              canonical: H2Class | None = None) -> PipelineReport:
    counts = result.counts
    squares = problem.zbasis.squares
    boxes = {name: box_count(squares, b) for name, b in (extra_policies or {}).items()}
    boxes.setdefault(policy, counts["adjunctive_box"])
    checks: dict = {}
    if canonical is not None:
        zk, pk = evaluations(problem, canonical)
        checks["canonical_z_vector"] = list(zk)
        checks["canonical_p_vector"] = list(pk)
        checks["canonical_survives_z"] = membership(result.z.candidates, zk)
        checks["canonical_in_p"] = membership(result.p, pk)
        finals = {c.coeffs for c in result.final}
        checks["final_is_plus_minus_canonical"] = finals == {canonical.coeffs, tuple(-x for x in canonical.coeffs)}
    return PipelineReport(
        policy=policy,
        bounds=tuple(bounds),
        counts=counts,
        box_counts=dict(sorted(boxes.items())),
        final_classes=[str(c) for c in result.final],
        checks=checks,
        timing=dict(result.timing),
    )
