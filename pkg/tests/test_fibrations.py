from math import gcd

import pytest

from fiberforge.builders import hyperelliptic_word, lantern_gluing
from fiberforge.fibrations import (
    FibrationError,
    InvariantRecord,
    LefschetzFibration,
    SignatureUnavailable,
    base_invariants,
    cluster_bound,
    fiber_sum,
    geography_point,
    hyperelliptic_fibration,
    hyperelliptic_signature,
    in_region,
    lantern_sites,
    lantern_substitution,
    log_transform_knot_obstruction,
    noether_example,
    twisted_double,
)
from fiberforge.surface import standard_curve_system, word_action
from fiberforge.words import parse_word


@pytest.mark.parametrize("g", [1, 2, 3, 4, 5])
def test_hyperelliptic_invariants(g):
    rec = base_invariants(hyperelliptic_fibration(g))
    assert (rec.chi, rec.sigma) == (4 * g + 8, -4 * g - 4)
    assert rec.provenance == ("endo-formula",)
    assert rec.h1.trivial


def test_signature_formula_with_separating_twists():
    # genus 2: six nonseparating and two separating twists of type 1
    assert hyperelliptic_signature(2, 6, [1, 1]) == -4
    assert hyperelliptic_signature(3, 28) == -16
    with pytest.raises(FibrationError):
        hyperelliptic_signature(2, 0, [1])
    with pytest.raises(FibrationError):
        hyperelliptic_signature(3, 0, [2])


def test_signature_needs_provenance():
    system = standard_curve_system(2)
    h = hyperelliptic_word(2)
    L = LefschetzFibration(2, h + h, system)
    with pytest.raises(SignatureUnavailable):
        base_invariants(L)
    tagged = LefschetzFibration(2, h + h, system, sigma=-12, provenance=("user-supplied",))
    assert base_invariants(tagged).provenance == ("user-supplied",)


def test_record_rejects_impossible_pair():
    with pytest.raises(FibrationError):
        InvariantRecord(20, -15)
    rec = InvariantRecord(47, -31)
    assert (rec.chi_h, rec.c1_squared) == (4, 1)


def test_positive_words_only():
    with pytest.raises(FibrationError):
        LefschetzFibration(2, parse_word("c1^-1 c1", 2), standard_curve_system(2))


def test_fiber_sum_additivity_and_associativity():
    a = hyperelliptic_fibration(2)
    left = base_invariants(fiber_sum(fiber_sum(a, a), a), homology=False)
    right = base_invariants(fiber_sum(a, fiber_sum(a, a)), homology=False)
    assert (left.chi, left.sigma) == (right.chi, right.sigma) == (3 * 16 + 2 * 4, -36)
    assert left.provenance == ("additivity",)


@pytest.mark.parametrize("g", [2, 3, 4, 5])
def test_twisted_double(g):
    z = twisted_double(g)
    rec = base_invariants(z, homology=False)
    assert (rec.chi, rec.sigma) == (12 * g + 12, -8 * g - 8)
    assert word_action(z.word, z.system).is_identity()
    assert len([s for s, rid in lantern_sites(z) if rid == "lantern_fibersum"]) == 2 * g + 2
    assert len(lantern_gluing(g)) <= 8


def test_lantern_substitution_changes_invariants_by_one():
    z = twisted_double(2)
    site = next(s for s, rid in lantern_sites(z) if rid == "lantern_fibersum")
    after = lantern_substitution(z, site)
    before, now = base_invariants(z, homology=False), base_invariants(after, homology=False)
    assert (now.chi, now.sigma) == (before.chi - 1, before.sigma + 1)
    assert "substitution-delta" in now.provenance
    assert after.twist_count == z.twist_count - 1
    with pytest.raises(FibrationError):
        lantern_substitution(z, site + 1)


def test_region():
    assert in_region(3, 6) is None
    assert in_region(3, 7) and in_region(2, 1) and in_region(4, 0)
    with pytest.raises(FibrationError):
        geography_point(3, 7)


@pytest.mark.parametrize("a,b", [(3, 1), (3, 6), (4, 8), (5, 3)])
def test_geography_points(a, b):
    plan, rec = geography_point(a, b)
    assert (rec.chi_h, rec.c1_squared) == (a, b)
    assert plan.genus == a - 1 and len(plan.sites) == b
    fast_plan, fast = geography_point(a, b, build=False)
    assert (fast.chi, fast.sigma) == (rec.chi, rec.sigma)


def test_full_substitution_leaves_z2_in_the_vanishing_quotient():
    # at b = 2a with odd fiber genus the vanishing cycles alone do not kill H_1;
    # the plan carries the extra argument as a note instead
    plan, rec = geography_point(4, 8)
    assert rec.h1.torsion == (2,)
    assert any("c3" in n for n in plan.notes)


def test_noether_violating_example():
    ex = noether_example()
    assert ex.certificate_valid
    assert (ex.before.chi, ex.before.sigma) == (20, -16)
    assert (ex.after.chi, ex.after.sigma) == (19, -15)
    assert (ex.summed.chi_h, ex.summed.c1_squared) == (4, 1)
    assert ex.summed.c1_squared < 2 * ex.summed.chi_h - 6
    assert ex.summed.h1.trivial


def test_knot_obstruction_arithmetic():
    def brute(g, limit=60):
        pairs = [(p, q) for p in range(1, limit) for q in range(1, limit)
                 if gcd(p, q) == 1 and (g + 1) * p * q - p - q in (1, 2)]
        levels = [l for l in range(0, limit) if (2 * l + g - 1) > 0 and 2 % (2 * l + g - 1) == 0]
        return pairs, levels

    for g in range(1, 20):
        obs = log_transform_knot_obstruction(g)
        pairs, levels = brute(g)
        assert sorted(obs.log_transform) == pairs and obs.knot_surgery == levels
    assert log_transform_knot_obstruction(3).log_transform == [(1, 1)]
    assert log_transform_knot_obstruction(4).empty
    assert cluster_bound(1) == 9 and cluster_bound(3) == 16
