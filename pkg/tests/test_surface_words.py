import pytest
from hypothesis import given, settings, strategies as st

from fiberforge.builders import hyperelliptic_word
from fiberforge.surface import (
    SpMatrix,
    SurfaceError,
    chain_homology,
    pairing,
    standard_curve_system,
    transvect,
    transvection_matrix,
    word_action,
)
from fiberforge.words import (
    CurveExpr,
    Letter,
    TwistWord,
    WordError,
    invert_conj,
    parse_word,
    reduce_conj,
    resolve_vector,
    word_from_json,
)

vec4 = st.lists(st.integers(-5, 5), min_size=4, max_size=4)


@settings(max_examples=300)
@given(vec4, vec4, vec4, st.integers(-3, 3))
def test_transvection_preserves_pairing(x, y, c, k):
    assert pairing(transvect(x, c, k), transvect(y, c, k)) == pairing(x, y)
    assert tuple(transvect(transvect(x, c, k), c, -k)) == tuple(x)


def test_chain_vectors_intersect_like_a_chain():
    g = 3
    vs = [chain_homology(g, i) for i in range(1, 2 * g + 2)]
    for i in range(len(vs)):
        for j in range(len(vs)):
            assert abs(pairing(vs[i], vs[j])) == (1 if abs(i - j) == 1 else 0)


@pytest.mark.parametrize("g", [1, 2, 3, 4, 5])
def test_hyperelliptic_relation_acts_trivially(g):
    system = standard_curve_system(g)
    h = hyperelliptic_word(g)
    m = word_action(h, system)
    # the hyperelliptic involution acts as -1 on H_1
    assert all(tuple(m.apply(v)) == tuple(-x for x in v) for v in (chain_homology(g, 1), chain_homology(g, 2)))
    assert word_action(h + h, system).is_identity()


def test_torus_chain_relation():
    system = standard_curve_system(1)
    assert word_action(parse_word("c1 c2 " * 6, 1), system).is_identity()
    assert not word_action(parse_word("c1 c2 " * 3, 1), system).is_identity()


def test_matrices_are_symplectic():
    system = standard_curve_system(2)
    m = word_action(parse_word("c1 c2^-3 c4{c3} c5", 2), system)
    assert m.is_symplectic()
    assert SpMatrix.from_columns(m.columns()).is_symplectic()
    assert (m.inverse().apply(m.apply(chain_homology(2, 1)))) == tuple(chain_homology(2, 1))
    assert transvection_matrix(chain_homology(2, 3), 2).is_symplectic()


def test_parse_round_trip_and_json():
    w = parse_word("c1^3 c3{c2^-1 c5} c4^-1", 2)
    assert str(parse_word(str(w), 2)) == str(w)
    assert word_from_json(w.to_json(), 2) == w
    assert w.twist_count == 5
    assert not w.positive
    with pytest.raises(WordError):
        parse_word("c1 %", 2)


def test_conjugator_reduction():
    assert reduce_conj([("c1", 1), ("c1", -1), ("c2", 2)]) == (("c2", 2),)
    seq = (("c1", 1), ("c2", -2))
    assert reduce_conj(seq + invert_conj(seq)) == ()


def test_conjugated_curve_vector_is_transvected():
    system = standard_curve_system(2)
    c = CurveExpr("c2", (("c1", 1),))
    want = transvect(system.vector("c2"), system.vector("c1"), 1)
    got = resolve_vector(c, system)
    assert tuple(got) == tuple(want) or tuple(got) == tuple(-x for x in want)


def test_unknown_curve_rejected():
    with pytest.raises((SurfaceError, WordError, KeyError)):
        resolve_vector(CurveExpr("zz", ()), standard_curve_system(2))


def test_inverse_word_cancels():
    system = standard_curve_system(2)
    w = parse_word("c1 c2{c3} c5^2", 2)
    assert word_action(w + w.inverse(), system).is_identity()
    assert isinstance(w.inverse(), TwistWord)
    assert Letter(CurveExpr("c1", ()), 1) in w.letters
