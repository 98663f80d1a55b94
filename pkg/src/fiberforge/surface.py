"""First homology of a closed surface and the symplectic action of Dehn twists.

Basis order is x1, y1, x2, y2, ..., xg, yg with <x_i, y_i> = 1. A right-handed
twist about a curve c acts on homology by the transvection x -> x + <x, c> c.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

Vector = tuple[int, ...]


class SurfaceError(ValueError):
    """Raised for malformed surface or curve data."""


def pairing(u: Sequence[int], v: Sequence[int]) -> int:
    if len(u) != len(v) or len(u) % 2:
        raise SurfaceError(f"vectors of length {len(u)} and {len(v)} do not live on a common lattice")
    return sum(u[i] * v[i + 1] - u[i + 1] * v[i] for i in range(0, len(u), 2))


def transvect(x: Sequence[int], c: Sequence[int], exponent: int = 1) -> Vector:
    k = exponent * pairing(x, c)
    if k == 0:
        return tuple(x)
    return tuple(a + k * b for a, b in zip(x, c))


@dataclass(frozen=True)
class SymplecticLattice:
    genus: int

    def __post_init__(self):
        if self.genus < 1:
            raise SurfaceError("genus must be positive")

    @property
    def rank(self) -> int:
        return 2 * self.genus

    def labels(self) -> list[str]:
        return [f"{s}{i}" for i in range(1, self.genus + 1) for s in ("x", "y")]

    def basis_vector(self, label: str) -> Vector:
        v = [0] * self.rank
        v[self.labels().index(label)] = 1
        return tuple(v)

    def x(self, i: int) -> Vector:
        v = [0] * self.rank
        if 1 <= i <= self.genus:
            v[2 * i - 2] = 1
        return tuple(v)

    def y(self, i: int) -> Vector:
        v = [0] * self.rank
        v[2 * i - 1] = 1
        return tuple(v)

    def pairing_matrix(self) -> "SpMatrix":
        n = self.rank
        rows = [[0] * n for _ in range(n)]
        for i in range(0, n, 2):
            rows[i][i + 1] = 1
            rows[i + 1][i] = -1
        return SpMatrix(tuple(map(tuple, rows)), check=False)


@dataclass(frozen=True)
class SpMatrix:
    """Integer 2g x 2g matrix preserving the symplectic pairing."""

    rows: tuple[tuple[int, ...], ...]
    check: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        n = len(self.rows)
        if n % 2 or any(len(r) != n for r in self.rows):
            raise SurfaceError("symplectic matrices are square of even size")
        if self.check and not self.is_symplectic():
            raise SurfaceError("matrix does not preserve the symplectic pairing")

    @classmethod
    def identity(cls, n: int) -> "SpMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), check=False)

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence[int]], check: bool = True) -> "SpMatrix":
        n = len(cols)
        return cls(tuple(tuple(cols[j][i] for j in range(n)) for i in range(n)), check=check)

    @property
    def size(self) -> int:
        return len(self.rows)

    def columns(self) -> list[Vector]:
        n = self.size
        return [tuple(self.rows[i][j] for i in range(n)) for j in range(n)]

    def apply(self, v: Sequence[int]) -> Vector:
        return tuple(sum(a * b for a, b in zip(row, v)) for row in self.rows)

    def __matmul__(self, other: "SpMatrix") -> "SpMatrix":
        cols = [self.apply(c) for c in other.columns()]
        return SpMatrix.from_columns(cols, check=False)

    def inverse(self) -> "SpMatrix":
        # M^-1 = -J M^T J for symplectic M
        n = self.size
        t = [[self.rows[j][i] for j in range(n)] for i in range(n)]
        out = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                # (J M^T J)_{ij} with J_{2k,2k+1} = 1, J_{2k+1,2k} = -1
                ii, si = (i + 1, 1) if i % 2 == 0 else (i - 1, -1)
                jj, sj = (j - 1, 1) if j % 2 == 1 else (j + 1, -1)
                out[i][j] = -si * sj * t[ii][jj]
        return SpMatrix(tuple(map(tuple, out)), check=False)

    def is_identity(self) -> bool:
        return all(self.rows[i][j] == int(i == j) for i in range(self.size) for j in range(self.size))

    def is_symplectic(self) -> bool:
        cols = self.columns()
        n = self.size
        for i in range(n):
            for j in range(i, n):
                expected = 0
                if j == i + 1 and i % 2 == 0:
                    expected = 1
                if pairing(cols[i], cols[j]) != expected:
                    return False
        return True

    def tolist(self) -> list[list[int]]:
        return [list(r) for r in self.rows]


@dataclass(frozen=True)
class CurveClass:
    name: str
    homology: Vector
    separating: bool = False
    disjoint: frozenset[str] = frozenset()
    braid: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.separating and any(self.homology):
            raise SurfaceError(f"separating curve {self.name} must be null-homologous")
        if self.name in self.braid:
            raise SurfaceError(f"curve {self.name} cannot braid with itself")
        if self.disjoint & self.braid:
            raise SurfaceError(f"curve {self.name} declares a pair both disjoint and braided")


@dataclass(frozen=True, eq=False)
class CurveSystem:
    """Named curves on a surface with declared geometric intersection data.

    Declarations are symmetric: adding b to a's disjoint set also records a in
    b's. Consistency with algebraic intersection is checked on construction.
    """

    genus: int
    boundary: int
    curves: Mapping[str, CurveClass]

    def __post_init__(self):
        lattice = SymplecticLattice(self.genus)
        for c in self.curves.values():
            if len(c.homology) != lattice.rank:
                raise SurfaceError(f"curve {c.name} has homology of the wrong length")
            for other in c.disjoint | c.braid:
                if other not in self.curves:
                    raise SurfaceError(f"curve {c.name} refers to unknown curve {other}")
            for other in c.disjoint:
                if self.name_pair_value(c.name, other) != 0:
                    raise SurfaceError(f"{c.name} and {other} are declared disjoint but pair nontrivially")
                if c.name not in self.curves[other].disjoint:
                    raise SurfaceError(f"disjointness of {c.name} and {other} is not symmetric")
            for other in c.braid:
                if abs(self.name_pair_value(c.name, other)) != 1:
                    raise SurfaceError(f"{c.name} and {other} are declared to meet once but pair to "
                                       f"{self.name_pair_value(c.name, other)}")
                if c.name not in self.curves[other].braid:
                    raise SurfaceError(f"braid pair {c.name}, {other} is not symmetric")

    @property
    def lattice(self) -> SymplecticLattice:
        return SymplecticLattice(self.genus)

    def __contains__(self, name: str) -> bool:
        return name in self.curves

    def __getitem__(self, name: str) -> CurveClass:
        try:
            return self.curves[name]
        except KeyError:
            raise SurfaceError(f"unknown curve {name!r}") from None

    def vector(self, name: str) -> Vector:
        return self[name].homology

    def name_pair_value(self, a: str, b: str) -> int:
        return pairing(self.curves[a].homology, self.curves[b].homology)

    def disjoint(self, a: str, b: str) -> bool:
        return a == b or b in self[a].disjoint

    def braided(self, a: str, b: str) -> bool:
        return b in self[a].braid

    def to_json(self) -> dict:
        return {
            "genus": self.genus,
            "boundary": self.boundary,
            "curves": [
                {
                    "name": c.name,
                    "homology": list(c.homology),
                    "separating": c.separating,
                    "disjoint": sorted(c.disjoint, key=_curve_sort_key),
                    "braid": sorted(c.braid, key=_curve_sort_key),
                }
                for c in self.curves.values()
            ],
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "CurveSystem":
        curves = {}
        for entry in doc["curves"]:
            curves[entry["name"]] = CurveClass(
                entry["name"],
                tuple(entry["homology"]),
                bool(entry.get("separating", False)),
                frozenset(entry.get("disjoint", ())),
                frozenset(entry.get("braid", ())),
            )
        return cls(doc["genus"], doc.get("boundary", 0), curves)


def _curve_sort_key(name: str):
    head = name.rstrip("0123456789")
    tail = name[len(head):]
    return (head, int(tail) if tail else -1)


class _SystemBuilder:
    def __init__(self, genus: int, boundary: int):
        self.genus = genus
        self.boundary = boundary
        self.homology: dict[str, Vector] = {}
        self.separating: set[str] = set()
        self.disjoint: dict[str, set[str]] = {}
        self.braid: dict[str, set[str]] = {}

    def add(self, name: str, vector: Vector, separating: bool = False):
        self.homology[name] = tuple(vector)
        self.disjoint[name] = set()
        self.braid[name] = set()
        if separating:
            self.separating.add(name)

    def declare_disjoint(self, a: str, others: Iterable[str]):
        for b in others:
            if a != b:
                self.disjoint[a].add(b)
                self.disjoint[b].add(a)

    def declare_braid(self, a: str, b: str):
        self.braid[a].add(b)
        self.braid[b].add(a)

    def build(self) -> CurveSystem:
        curves = {
            n: CurveClass(n, v, n in self.separating, frozenset(self.disjoint[n]), frozenset(self.braid[n]))
            for n, v in self.homology.items()
        }
        return CurveSystem(self.genus, self.boundary, curves)


def chain_homology(g: int, i: int) -> Vector:
    lattice = SymplecticLattice(g)
    if i % 2 == 0:
        return lattice.y(i // 2)
    k = (i + 1) // 2
    return tuple(a + b for a, b in zip(lattice.x(k - 1), lattice.x(k)))


def five_chain_boundary_class() -> Vector:
    """Homology of the two boundary curves of a neighbourhood of c3..c7 on a genus-3 surface.

    The capped image of (t7 t6 t5 t4 t3)^6 is I + 2 v v^T J^T for a single
    primitive v; solving for v gives the common class of both boundary curves.
    """
    g = 3
    cols = [tuple(int(i == j) for i in range(2 * g)) for j in range(2 * g)]
    for _ in range(6):
        for i in (3, 4, 5, 6, 7):  # rightmost letter t3 acts first
            cols = [transvect(c, chain_homology(g, i)) for c in cols]
    return rank_one_square_root(SpMatrix.from_columns(cols))


def rank_one_square_root(m: SpMatrix) -> Vector:
    """Return primitive v with m = T_v^2, raising if m is not of that form."""
    n = m.size
    lattice = SymplecticLattice(n // 2)
    j = lattice.pairing_matrix()
    # T_v^2 = I + 2 v v^T J^T, so (m - I) J = 2 v v^T
    diff = [[m.rows[r][c] - int(r == c) for c in range(n)] for r in range(n)]
    outer = [[sum(diff[r][k] * j.rows[k][c] for k in range(n)) for c in range(n)] for r in range(n)]
    if any(outer[r][c] % 2 for r in range(n) for c in range(n)):
        raise SurfaceError("matrix is not the square of a transvection")
    outer = [[x // 2 for x in row] for row in outer]
    pivot = next((r for r in range(n) if outer[r][r]), None)
    if pivot is None:
        raise SurfaceError("matrix is the identity")
    root = outer[pivot][pivot]
    s = int(round(root ** 0.5))
    if s * s != root:
        raise SurfaceError("diagonal entry is not a square")
    v = [outer[r][pivot] // s for r in range(n)]
    if any(outer[r][c] != v[r] * v[c] for r in range(n) for c in range(n)):
        raise SurfaceError("matrix is not the square of a single transvection")
    return tuple(v)


def standard_curve_system(g: int, with_boundary: int = 0, lanterns: bool = False) -> CurveSystem:
    """Chain c1..c_{2g+1} plus the auxiliary curves used by the constructions.

    with_boundary=2 (genus 3 only) adds the 5-chain boundary curves a, b and the
    boundary curves d1, d2 of the 7-chain neighbourhood. lanterns=True adds the
    four lantern boundary curves a1, a3, b1, b3 of the twisted fiber sum with
    their interior curves s (separating), c3 and l, and for genus 3 also the
    interior curves r1, r2, r3 of the lantern bounded by c1, c3, c5, c7.
    """
    if g < 1 or with_boundary not in (0, 2):
        raise SurfaceError(f"unsupported surface: genus {g}, boundary {with_boundary}")
    if with_boundary == 2 and g != 3:
        raise SurfaceError("the two-boundary system is only defined in genus 3")
    if lanterns and with_boundary:
        raise SurfaceError("lantern curves live on the closed surface")
    if lanterns and g < 2:
        raise SurfaceError("the fiber-sum lantern needs genus at least 2")
    lattice = SymplecticLattice(g)
    b = _SystemBuilder(g, with_boundary)
    n = 2 * g + 1
    chain = [f"c{i}" for i in range(1, n + 1)]
    for i in range(1, n + 1):
        b.add(f"c{i}", chain_homology(g, i))
    for i in range(1, n + 1):
        for j in range(i + 2, n + 1):
            b.declare_disjoint(f"c{i}", [f"c{j}"])
        if i < n:
            b.declare_braid(f"c{i}", f"c{i + 1}")

    if with_boundary == 2:
        v = five_chain_boundary_class()
        zero = (0,) * lattice.rank
        b.add("a", v)
        b.add("b", v)
        b.add("d1", zero, separating=True)
        b.add("d2", zero, separating=True)
        b.declare_disjoint("a", ["b", "c1", "c3", "c4", "c5", "c6", "c7"])
        b.declare_disjoint("b", ["c1", "c3", "c4", "c5", "c6", "c7"])
        for d in ("d1", "d2"):
            b.declare_disjoint(d, [name for name in b.homology if name != d])

    if lanterns:
        x1, x2 = lattice.x(1), lattice.x(2)
        b.add("a1", x1)
        b.add("b1", x1)
        b.add("a3", x2)
        b.add("b3", x2)
        outer = ["a1", "a3", "b1", "b3"]
        for name in outer:
            b.declare_disjoint(name, outer)
        for name in ("a1", "b1"):
            b.declare_disjoint(name, [c for c in chain if c != "c2"])
            b.declare_braid(name, "c2")
        for name in ("a3", "b3"):
            b.declare_disjoint(name, [c for c in chain if c != "c4"])
            b.declare_braid(name, "c4")
        b.add("s", (0,) * lattice.rank, separating=True)
        b.add("l", tuple(p - q for p, q in zip(x1, x2)))
        for name in ("s", "l"):
            b.declare_disjoint(name, outer)
        if g == 3:
            x3 = lattice.x(3)
            b.add("r1", tuple(-a for a in x2))
            b.add("r2", tuple(p + q + r for p, q, r in zip(x1, x2, x3)))
            b.add("r3", tuple(p - r for p, r in zip(x1, x3)))
            b.declare_disjoint("r1", ["c1", "c3", "c5", "c7"])
            b.declare_disjoint("r2", ["c1", "c3", "c5", "c7"])
            b.declare_disjoint("r3", ["c1", "c3", "c5", "c7"])
    return b.build()


def intersection_number(u: CurveClass, v: CurveClass) -> int:
    if len(u.homology) != len(v.homology):
        raise SurfaceError("curves live on surfaces of different genus")
    return pairing(u.homology, v.homology)


def transvection_matrix(vector: Sequence[int], exponent: int = 1) -> SpMatrix:
    n = len(vector)
    cols = []
    for j in range(n):
        e = [0] * n
        e[j] = 1
        cols.append(transvect(e, vector, exponent))
    return SpMatrix.from_columns(cols, check=False)


def twist_action(c: CurveClass, exponent: int = 1) -> SpMatrix:
    return transvection_matrix(c.homology, exponent)


def word_action(word, system: CurveSystem) -> SpMatrix:
    """Symplectic image of a twist word; letters act right to left."""
    from .words import resolve_vector

    n = 2 * system.genus
    cols = [tuple(int(i == j) for i in range(n)) for j in range(n)]
    for letter in reversed(word.letters):
        v = resolve_vector(letter.curve, system)
        cols = [transvect(c, v, letter.exp) for c in cols]
    return SpMatrix.from_columns(cols, check=False)
