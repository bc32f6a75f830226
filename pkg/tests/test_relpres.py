import random

import pytest

from relhyp.config import load_experiment
from relhyp.relpres import (EXACT, UNKNOWN, NotNullError, RelativePresentation, UnknownWithinScale,
                            alphabet_letters, area, dehn_profile, enumerate_words, is_primitive,
                            replay_witness, validate)
from relhyp.words import HLetter, QLetter, Word, XGen, invert, reduce

from oracles import derivation_areas, free_reduce

ZXZ = load_experiment("zxz")
TREE = load_experiment("tree")
CONJ = [(XGen("b", 1),), (XGen("b", -1),)] + [(HLetter("A", k),) for k in (-3, -2, -1, 1, 2, 3)]


@pytest.fixture(scope="module")
def derivations():
    p = ZXZ.presentation
    return derivation_areas(p.relators, CONJ, ZXZ.rs.oracles, 2)


def test_commutator_areas_match_derivation_oracle():
    p = ZXZ.presentation
    best = derivation_areas(p.relators, CONJ, ZXZ.rs.oracles, 3)
    for n in (1, 2, 3):
        w = ZXZ.word(f"[H[A]{{{n}}}, b]")
        res = area(w, p)
        assert res.status == EXACT
        assert res.k == best[free_reduce(w.letters, ZXZ.rs.oracles)] == n


def test_area_never_exceeds_a_found_derivation(derivations):
    p = ZXZ.presentation
    rng = random.Random(7)
    sample = sorted((w for w in derivations if len(w) <= 10), key=repr)
    for w in rng.sample(sample, 60):
        res = area(Word(w), p)
        assert res.status == EXACT
        assert res.k <= derivations[w]
        if derivations[w] <= 1:
            assert res.k == derivations[w]


def test_witness_replays_to_empty():
    p = ZXZ.presentation
    for text in ("[H[A]{3}, b]", "[H[A]{2}, b] [b, H[A]{1}]^-1", "b [H[A]{-2}, b] b^-1"):
        w = ZXZ.word(text)
        res = area(w, p)
        assert len(res.witness) == res.k
        assert not replay_witness(w, p, res.witness)


def test_area_of_empty_and_freely_trivial_words():
    p = ZXZ.presentation
    assert area(Word(()), p).k == 0
    assert area(ZXZ.word("b H[A]{2} H[A]{-2} b^-1"), p).k == 0


def test_non_null_word_is_rejected():
    with pytest.raises(NotNullError) as info:
        area(ZXZ.word("b"), ZXZ.presentation)
    assert info.value.element == "(0,1)"


def test_budget_exhaustion_is_unknown_with_lower_bound():
    res = area(ZXZ.word("[H[A]{5}, b]"), ZXZ.presentation, max_expansions=10)
    assert res.status == UNKNOWN and res.k is None
    assert 1 <= res.lower_bound <= 5


def test_cap_below_word_length_is_unknown():
    res = area(ZXZ.word("[H[A]{2}, b]"), ZXZ.presentation, cap=3)
    assert res.status == UNKNOWN


def test_validate_flags_non_null_relators():
    bad = RelativePresentation(ZXZ.rs, [ZXZ.word("b")])
    rep = validate(bad)
    assert not rep.valid and rep.problems[0]["problem"] == "not null in G"
    assert validate(ZXZ.presentation).valid


def test_enumerate_words_counts():
    letters = alphabet_letters(TREE.rs, {"A": [1], "B": [1], "C": [1]})
    assert len(letters) == 3
    all_words = [w for n, w in enumerate_words(letters, 4, reduced_only=False)]
    assert len(all_words) == 3 + 9 + 27 + 81
    reduced = [w for n, w in enumerate_words(letters, 4)]
    assert len(reduced) == 3 + 6 + 12 + 24


def test_enumerate_words_cap_stops_early():
    letters = alphabet_letters(TREE.rs, {"A": [1], "B": [1], "C": [1]})
    assert len(list(enumerate_words(letters, 6, reduced_only=False, cap=50))) == 50


def test_dehn_profile_zxz_small():
    prof = dehn_profile(ZXZ.presentation, 4, {"A": [1, 2]})
    assert [r.max_area for r in prof.rows] == [0, 0, 0, 2]
    assert prof.rows[3].argmax
    assert not prof.partial
    assert "lower estimate" in prof.note


def test_dehn_profile_is_cumulative():
    prof = dehn_profile(ZXZ.presentation, 6, {"A": [1]})
    areas = [r.max_area for r in prof.rows]
    assert areas == sorted(areas)


def test_is_primitive():
    rs = ZXZ.rs
    qa = (1, 0)
    member = lambda g: g[1] == 0          # Q = <a>
    w = Word((QLetter(qa), XGen("b", 1), QLetter(qa)))
    assert is_primitive(w, rs, member) is None
    w = Word((QLetter(qa), HLetter("A", 2), QLetter(qa), XGen("b", 1)))
    dec = is_primitive(w, rs, member)
    assert dec is not None and dec.w2.letters == (HLetter("A", 2),)
    with pytest.raises(UnknownWithinScale):
        is_primitive(Word((QLetter(qa), QLetter(qa))), rs, lambda g: None)


def test_conjugate_by_h_letter_keeps_area():
    p = ZXZ.presentation
    o = ZXZ.rs.oracles
    w = ZXZ.word("[H[A]{2}, b]")
    f = Word((HLetter("A", 3), XGen("b", 1)))
    conj = reduce(f + w + invert(f, o), o)
    assert area(conj, p).k == area(w, p).k == 2
