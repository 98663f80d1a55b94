"""Exact integer and rational matrix helpers.

Everything here is exact: determinants, inverses and Smith forms go through
sympy, and inertia is computed by symmetric elimination over Fractions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import sympy
from sympy.matrices.normalforms import smith_normal_decomp

IntMatrix = list[list[int]]


class SingularMatrix(ValueError):
    pass


def to_sympy(rows: Sequence[Sequence]) -> sympy.Matrix:
    if not rows:
        return sympy.zeros(0, 0)
    return sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) if isinstance(x, Fraction) else x for x in r]
                         for r in rows])


def _frac(x) -> Fraction:
    x = sympy.Rational(x)
    return Fraction(int(x.p), int(x.q))


def from_sympy(m: sympy.Matrix) -> list[list[Fraction]]:
    return [[_frac(m[i, j]) for j in range(m.cols)] for i in range(m.rows)]


def det(rows: Sequence[Sequence]) -> Fraction:
    if not rows:
        return Fraction(1)
    return _frac(to_sympy(rows).det(method="bareiss"))


def inverse(rows: Sequence[Sequence]) -> list[list[Fraction]]:
    m = to_sympy(rows)
    if m.det(method="bareiss") == 0:
        raise SingularMatrix("matrix is singular")
    return from_sympy(m.inv())


def solve(rows: Sequence[Sequence], rhs: Sequence) -> list[Fraction]:
    m = to_sympy(rows)
    if m.det(method="bareiss") == 0:
        raise SingularMatrix("matrix is singular")
    x = m.LUsolve(to_sympy([[v] for v in rhs]))
    return [_frac(x[i, 0]) for i in range(x.rows)]


def rank(rows: Sequence[Sequence]) -> int:
    return to_sympy(rows).rank() if rows else 0


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    cols = list(zip(*b))
    return [[sum(x * y for x, y in zip(r, c)) for c in cols] for r in a]


def bilinear(u: Sequence, m: Sequence[Sequence], v: Sequence):
    return sum(u[i] * sum(m[i][j] * v[j] for j in range(len(v))) for i in range(len(u)))


def inertia(rows: Sequence[Sequence]) -> tuple[int, int, int]:
    """(positive, negative, zero) counts of a symmetric rational matrix."""
    a = [[Fraction(x) for x in r] for r in rows]
    n = len(a)
    for i in range(n):
        for j in range(n):
            if a[i][j] != a[j][i]:
                raise ValueError("inertia needs a symmetric matrix")
    pos = neg = 0
    size = n
    while size:
        k = next((i for i in range(size) if a[i][i] != 0), None)
        if k is None:
            pair = next(((i, j) for i in range(size) for j in range(size) if a[i][j] != 0), None)
            if pair is None:
                break
            i, j = pair
            # congruence by e_i -> e_i + e_j creates a nonzero diagonal entry 2a_ij
            for t in range(size):
                a[i][t] += a[j][t]
            for t in range(size):
                a[t][i] += a[t][j]
            k = i
        a[k], a[size - 1] = a[size - 1], a[k]
        for r in a:
            r[k], r[size - 1] = r[size - 1], r[k]
        p = a[size - 1][size - 1]
        if p > 0:
            pos += 1
        else:
            neg += 1
        for i in range(size - 1):
            f = a[i][size - 1] / p
            if f:
                for j in range(size - 1):
                    a[i][j] -= f * a[size - 1][j]
        size -= 1
    return pos, neg, n - pos - neg


def signature(rows: Sequence[Sequence]) -> int:
    p, q, _ = inertia(rows)
    return p - q


def is_negative_definite(rows: Sequence[Sequence]) -> bool:
    return inertia(rows)[1] == len(rows)


@dataclass(frozen=True)
class SmithForm:
    diagonal: tuple[int, ...]
    U: tuple[tuple[int, ...], ...]
    V: tuple[tuple[int, ...], ...]
    D: tuple[tuple[int, ...], ...]


def _is_unimodular(m: sympy.Matrix) -> bool:
    return m.is_square and abs(m.det(method="bareiss")) == 1


def smith(rows: Sequence[Sequence[int]], ncols: int | None = None) -> SmithForm:
    """Smith normal form with transforms; asserts U*M*V = D and unimodularity."""
    nrows = len(rows)
    ncols = ncols if ncols is not None else (len(rows[0]) if rows else 0)
    if nrows == 0 or ncols == 0:
        ident = lambda k: tuple(tuple(int(i == j) for j in range(k)) for i in range(k))
        return SmithForm((), ident(nrows), ident(ncols), tuple(tuple(0 for _ in range(ncols)) for _ in range(nrows)))
    m = sympy.Matrix(rows)
    d, u, v = smith_normal_decomp(m, domain=sympy.ZZ)
    if u * m * v != d or not _is_unimodular(u) or not _is_unimodular(v):
        raise ArithmeticError("Smith decomposition failed its certificate")
    diag = [abs(int(d[i, i])) for i in range(min(nrows, ncols))]
    for a, b in zip(diag, diag[1:]):
        if a == 0 and b != 0 or (a and b % a):
            raise ArithmeticError("invariant factors do not divide successively")
    as_t = lambda x: tuple(tuple(int(x[i, j]) for j in range(x.cols)) for i in range(x.rows))
    return SmithForm(tuple(diag), as_t(u), as_t(v), as_t(d))
