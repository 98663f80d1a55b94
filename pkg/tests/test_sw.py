import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fiberforge import exact
from fiberforge.homology import Basis, H2Class, pair
from fiberforge.plumbing import linear_plumbing
from fiberforge.sw import (
    SWConfigError,
    SWProblem,
    ZBasis,
    ZFilter,
    box_bounds,
    box_count,
    coordinate_values,
    enumerate_p_candidates,
    enumerate_z_candidates,
    is_characteristic,
    prepare_wall,
    run_enumeration,
)
from conftest import CASES, PROPERTY_CASES

B = Basis.rational(4)


def cls(text):
    return H2Class.parse(B, text)


# a -4 sphere in CP2 # 4 CP2bar and a rational basis of its orthogonal complement
ZB = ZBasis(("A1", "A2", "A3", "A4"), (cls("h"), cls("e1+e2"), cls("e2-e3"), cls("e3-e4")), (0, 0, 0, 0))
U = cls("e1-e2-e3-e4")
H = cls("2h+e1+e2")
PROBLEM = SWProblem(ZB, ("u",), (U,), linear_plumbing([-4]), -1, (2, 1, 0, 0, 0), cls("h"), ZFilter(-10, 8, 6))
BOUNDS = (5, 6, 6, 6)


def brute_force(bounds, reach=15):
    """Every characteristic class in a large coefficient box, filtered by direct pairings."""
    odd = np.arange(-reach, reach + 1, 2)
    grid = np.array(np.meshgrid(*[odd] * 5, indexing="ij")).reshape(5, -1).T
    gram = np.diag([1, -1, -1, -1, -1])
    ev = lambda c: grid @ (gram @ np.array(c.coeffs))
    z = np.stack([ev(c) for c in ZB.classes], axis=1)
    pv = ev(U)
    square = np.einsum("ij,jk,ik->i", grid, gram, grid)
    zsq = square + 1  # L^2 = L|Z^2 + (L.u)^2 / -4 and (L.u)^2 = 4 below
    ok = (np.abs(z) <= np.array(bounds)).all(axis=1)
    ok &= (pv >= -2) & (pv <= 4) & (pv * pv == 4)
    ok &= (zsq >= -10) & (zsq % 8 == 6)
    ok &= np.sign(ev(H)) * np.sign(ev(cls("h"))) < 0
    rows = grid[ok]
    assert len(rows) == 0 or np.abs(rows).max() < reach
    return sorted(tuple(int(x) for x in r) for r in rows)


def test_pipeline_matches_brute_force():
    res = run_enumeration(PROBLEM, BOUNDS)
    assert res.counts["integral"] > 0
    assert res.counts["wall_crossed"] > res.counts["integral"]
    assert res.counts["paired"] == res.counts["dimension_filtered"] * res.counts["p_classes"]
    assert sorted(c.coeffs for c in res.final) == brute_force(BOUNDS)
    assert all(is_characteristic(c) for c in res.final)


def test_p_candidates_against_brute_force():
    plumbing = linear_plumbing([-2, -5, -3])
    q = plumbing.matrix
    inv = exact.inverse(q)
    ranges = [range(w + 2, -w + 1) for w in plumbing.weights]
    by_square = {}
    for v in itertools.product(*ranges):
        if any((x - w) % 2 for x, w in zip(v, plumbing.weights)):
            continue
        s = exact.bilinear(v, inv, v)
        by_square.setdefault(s, []).append(v)
    for s, want in by_square.items():
        if s.denominator == 1:
            assert sorted(enumerate_p_candidates(plumbing, int(s))) == sorted(want), s
    assert enumerate_p_candidates(plumbing, 5) == []


def test_p_candidates_need_negative_definite():
    with pytest.raises(SWConfigError):
        enumerate_p_candidates(linear_plumbing([-1, -1]), -1)


@settings(max_examples=PROPERTY_CASES)
@given(st.lists(st.integers(0, 7), min_size=4, max_size=4), st.integers(1, 40), st.integers(-12, 8))
def test_partition_merge_is_deterministic(bounds, slices, min_square):
    CASES["test_partition_merge_is_deterministic"] += 1
    flt = ZFilter(min_square, 8, 6)
    one = enumerate_z_candidates(ZB, bounds, flt, slices=1)
    many = enumerate_z_candidates(ZB, bounds, flt, slices=slices)
    assert one.box_count == many.box_count == box_count(ZB.squares, bounds)
    assert np.array_equal(one.candidates, many.candidates)
    # lexicographic order of the box survives the merge
    rows = [tuple(r) for r in many.candidates.tolist()]
    assert rows == sorted(rows)


def test_worker_processes_give_identical_output():
    serial = enumerate_z_candidates(ZB, (7, 8, 8, 8), ZFilter(-30, 8, 6), jobs=1, slices=7)
    pooled = enumerate_z_candidates(ZB, (7, 8, 8, 8), ZFilter(-30, 8, 6), jobs=2, slices=7)
    assert serial.filtered_count > 0
    assert np.array_equal(serial.candidates, pooled.candidates)


def test_box_policies():
    zb = ZBasis(("X", "Y"), (cls("3h-e1"), cls("e1-e2")), (1, 0))
    assert zb.squares == (8, -2)
    assert box_bounds(zb, "literal") == (-8, 2)
    assert box_bounds(zb, "adjunction") == (2 - 2 - 8, 2)
    assert box_bounds(zb, "adjunction", "strict") == (-8, 0)
    assert box_bounds(zb, "explicit", explicit=[3, 4]) == (3, 4)
    with pytest.raises(SWConfigError):
        box_bounds(zb, "explicit")
    with pytest.raises(SWConfigError):
        box_bounds(zb, "nonsense")


def test_coordinate_values_parity():
    assert coordinate_values(-3, 3) == [-3, -1, 1, 3]
    assert coordinate_values(-2, 3) == [-2, 0, 2]
    assert box_count([-3, -2], [3, 3]) == 12


def test_wall_validation():
    classes = PROBLEM.combined
    with pytest.raises(SWConfigError):
        prepare_wall(classes, [4], (0, 0, 0, 0, 1), cls("h"))  # pairs with the plumbing
    with pytest.raises(SWConfigError):
        prepare_wall(classes, [4], (0, 1, 0, 0, 0), cls("h"))  # negative square
    with pytest.raises(SWConfigError):
        prepare_wall(classes, [4], (-2, -1, 0, 0, 0), cls("h"))  # wrong side of the reference
    wall = prepare_wall(classes, [4], (2, 1, 0, 0, 0), cls("h"))
    assert wall.h_square == 2 and wall.h_dot_ref == 2
