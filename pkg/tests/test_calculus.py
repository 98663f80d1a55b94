import copy

import pytest
from hypothesis import given, settings, strategies as st

from fiberforge.builders import (
    build_odd_lantern_script,
    hyperelliptic_word,
    lemma_g_factorization,
    lemma_genus3_factorization,
)
from fiberforge.calculus import Move, MoveContext, MoveRejected, apply_move, invert_move, standard_registry
from fiberforge.derivation import DerivationScript, canonical, check_derivation, positivity_audit
from fiberforge.pipeline import data_path
from fiberforge.surface import standard_curve_system, word_action
from fiberforge.words import CurveExpr, Letter, TwistWord, parse_word, reduce_conj, same_up_to_sign
from conftest import CASES, PROPERTY_CASES

G = 2
SYSTEM = standard_curve_system(G)
REGISTRY = standard_registry(SYSTEM)
CTX = MoveContext(SYSTEM, REGISTRY, central_target=True)
CURVES = [f"c{i}" for i in range(1, 2 * G + 2)]

conj_step = st.tuples(st.sampled_from(CURVES), st.sampled_from([-2, -1, 1, 2]))
letters = st.builds(
    lambda base, conj, exp: Letter(CurveExpr(base, reduce_conj(conj)), exp),
    st.sampled_from(CURVES), st.lists(conj_step, max_size=2), st.sampled_from([-1, 1]),
)
words = st.lists(letters, min_size=2, max_size=8).map(lambda ls: TwistWord(G, 0, tuple(ls)))


@st.composite
def word_and_move(draw):
    w = draw(words)
    n = len(w)
    kind = draw(st.sampled_from(["hurwitz_left", "hurwitz_right", "cyclic", "global_conjugate",
                                 "insert_cancelling_pair", "cancel_pair"]))
    if kind in ("hurwitz_left", "hurwitz_right"):
        return w, Move(kind, draw(st.integers(0, n - 2)))
    if kind == "cyclic":
        return w, Move("cyclic", shift=draw(st.integers(-n, n)))
    if kind == "global_conjugate":
        return w, Move("global_conjugate", by=reduce_conj(draw(st.lists(conj_step, min_size=1, max_size=3))))
    if kind == "insert_cancelling_pair":
        c = CurveExpr(draw(st.sampled_from(CURVES)), reduce_conj(draw(st.lists(conj_step, max_size=2))))
        return w, Move("insert_cancelling_pair", draw(st.integers(0, n)), curve=c, exp=draw(st.sampled_from([-1, 1, 2])))
    # force a cancelling pair into the word so cancel_pair applies
    site = draw(st.integers(0, n))
    l = draw(letters)
    w = w.with_letters(w.letters[:site] + (l, Letter(l.curve, -l.exp)) + w.letters[site:])
    return w, Move("cancel_pair", site)


@settings(max_examples=PROPERTY_CASES)
@given(word_and_move())
def test_every_move_is_inverted_by_its_inverse(case):
    CASES["test_every_move_is_inverted_by_its_inverse"] += 1
    w, m = case
    after = apply_move(w, m, CTX)
    back = apply_move(after, invert_move(w, m, CTX), CTX)
    assert canonical(back) == canonical(w)
    if m.kind not in ("cyclic", "global_conjugate"):
        # local moves preserve the monodromy exactly
        assert word_action(after, SYSTEM) == word_action(w, SYSTEM)


def _corrupt(word: TwistWord, site: int, how: str, other: str) -> TwistWord:
    ls = list(word.letters)
    l = ls[site]
    if how == "replace":
        ls[site] = Letter(CurveExpr(other, l.curve.conj), l.exp)
    elif how == "invert":
        ls[site] = Letter(l.curve, -l.exp)
    elif how == "delete":
        del ls[site]
    else:
        ls.insert(site, l)
    return word.with_letters(ls)


SCRIPTS = {p.name: DerivationScript.load(p) for g in (1, 2, 3)
           for p in sorted(data_path("lemma21_g1.json").parent.glob(f"lemma21_g{g}*.json"))}


@settings(max_examples=PROPERTY_CASES)
@given(st.sampled_from(sorted(SCRIPTS)), st.sampled_from(["source", "target"]), st.data())
def test_single_letter_corruption_is_caught(name, side, data):
    CASES["test_single_letter_corruption_is_caught"] += 1
    script = copy.copy(SCRIPTS[name])
    word = getattr(script, side)
    site = data.draw(st.integers(0, len(word) - 1))
    how = data.draw(st.sampled_from(["replace", "invert", "delete", "duplicate"]))
    g = script.source.genus
    system = script.system
    base = system.vector(word[site].curve.base)
    # a replacement must change the homology class, otherwise it is not a corruption at all
    # (on the closed torus c3 is isotopic to c1)
    distinct = [c for c in (f"c{i}" for i in range(1, 2 * g + 2)) if not same_up_to_sign(system.vector(c), base)]
    other = data.draw(st.sampled_from(distinct))
    bad = _corrupt(word, site, how, other)
    # the homological oracle alone sees every single-letter corruption of a relation
    assert not word_action(bad, system).is_identity()
    setattr(script, side, bad)
    script.checkpoints = []
    cert = check_derivation(script)
    assert not cert.valid
    assert not cert.oracle_ok


def test_rejected_move_reports_its_index():
    script = DerivationScript.load(data_path("lemma21_g1.json"))
    script.moves = list(script.moves)
    script.moves.insert(3, Move("cancel_pair", 0))
    cert = check_derivation(script)
    assert cert.verdict == "INVALID"
    assert cert.failing_move == 3
    assert "rejected" in cert.error


def test_cyclic_needs_central_target():
    ctx = MoveContext(SYSTEM, REGISTRY, central_target=False)
    with pytest.raises(MoveRejected):
        apply_move(parse_word("c1 c2", G), Move("cyclic", shift=1), ctx)


def test_cyclic_moves_first_letter_to_the_end():
    w = parse_word("c1 c2 c3", G)
    assert str(apply_move(w, Move("cyclic", shift=1), CTX)) == "c2 c3 c1"


def test_hurwitz_on_braided_pair():
    w = parse_word("c1 c2", G)
    after = apply_move(w, Move("hurwitz_left", 0), CTX)
    assert after[1] == w[0]
    assert word_action(after, SYSTEM) == word_action(w, SYSTEM)


def test_substitution_must_match():
    with pytest.raises(MoveRejected):
        apply_move(parse_word("c1 c2 c3", G), Move("relation_substitution", 0, relation="hyperelliptic_square"), CTX)


def test_hyperelliptic_square_removes_twenty_twists():
    h = hyperelliptic_word(G)
    out = apply_move(h + h, Move("relation_substitution", 0, relation="hyperelliptic_square"), CTX)
    assert out.twist_count == 0


@pytest.mark.parametrize("g,p,q", [(1, 4, 4), (2, 12, 0), (3, 7, 9)])
def test_builder_factorizations_certify(g, p, q):
    fact, script = lemma_g_factorization(g, p, q)
    cert = check_derivation(script)
    assert cert.valid, cert.error
    assert fact.word.positive
    assert fact.word.twist_count == 8 * g + 4
    audit = positivity_audit(fact.word, script.system)
    assert audit.positive
    # the leading clusters are t1^p and t3^q
    assert fact.word[0].curve.base == "c1" and fact.word[0].exp == p or p == 0


def test_builder_matches_bundled_script(bundled):
    _, script = lemma_g_factorization(3, 8, 8)
    assert script.to_json()["moves"] == bundled("lemma21_g3.json")["moves"]


def test_genus3_boundary_factorization():
    fact, script = lemma_genus3_factorization()
    assert check_derivation(script).valid
    assert fact.target == "boundary_multitwist"
    assert fact.word.twist_count == 28
    assert str(fact.word).startswith("c1^14 a b c4 c6")


def test_odd_lantern_script():
    cert = check_derivation(build_odd_lantern_script())
    assert cert.valid and cert.source_twists == 28 and cert.target_twists == 27


def test_script_json_round_trip(tmp_path):
    script = DerivationScript.load(data_path("lemma21_g2.json"))
    path = tmp_path / "s.json"
    script.dump(path)
    again = DerivationScript.load(path)
    assert again.to_json() == script.to_json()
