import pytest
from hypothesis import given, settings, strategies as st

from relhyp.config import load_experiment
from relhyp.words import (CyclicWord, HLetter, QLetter, Word, WordSyntaxError, XGen, cyclic_reduce,
                          cyclic_shift, format_word, invert, parse_word, reduce, relative_length,
                          syllables)

from oracles import free_reduce

ZXZ = load_experiment("zxz")
TREE = load_experiment("tree")


def zxz_letters():
    return st.one_of(
        st.builds(XGen, st.just("b"), st.sampled_from([1, -1])),
        st.builds(HLetter, st.just("A"), st.integers(-5, 5).filter(bool)),
    )


def tree_letters():
    return st.builds(HLetter, st.sampled_from("ABC"), st.just(1))


zxz_words = st.lists(zxz_letters(), max_size=12).map(lambda xs: Word(tuple(xs)))
tree_words = st.lists(tree_letters(), max_size=12).map(lambda xs: Word(tuple(xs)))


def test_commutator_expands():
    w = ZXZ.word("[H[A]{3}, b]")
    assert format_word(w, ZXZ.rs) == "H[A]{3} b H[A]{-3} b^-1"
    assert ZXZ.G.is_identity(ZXZ.rs.evaluate(w))


def test_powers_and_groups():
    rs = ZXZ.rs
    assert format_word(parse_word("b^3", rs), rs) == "b b b"
    assert format_word(parse_word("(b H[A]{1})^-2", rs), rs) == "H[A]{-1} b^-1 H[A]{-1} b^-1"
    assert parse_word("1", rs) == Word(())
    assert parse_word("  ", rs) == Word(())


def test_h_letter_uses_generator_names():
    w = ZXZ.word("H[A]{a^2}")
    assert w.letters == (HLetter("A", 2),)


def test_q_letters_need_a_parser():
    with pytest.raises(WordSyntaxError):
        parse_word("Q{(1,0)}", ZXZ.rs)
    w = parse_word("Q{(1,0)} b", ZXZ.rs, ZXZ.G.parse_element)
    assert w.letters[0] == QLetter((1, 0))


@pytest.mark.parametrize("text, column", [
    ("b c", 3),
    ("H[Z]{1}", 3),
    ("H[A]{x}", 6),
    ("[b, b", 6),
    ("(b", 3),
    ("b )", 3),
    ("H[A]{1", 5),
])
def test_syntax_errors_report_columns(text, column):
    with pytest.raises(WordSyntaxError) as info:
        parse_word(text, ZXZ.rs)
    assert info.value.column == column


@settings(max_examples=200, deadline=None)
@given(zxz_words)
def test_format_parse_roundtrip(w):
    assert parse_word(format_word(w, ZXZ.rs), ZXZ.rs) == w


@settings(max_examples=200, deadline=None)
@given(zxz_words)
def test_reduce_properties(w):
    o = ZXZ.rs.oracles
    r = reduce(w, o)
    assert reduce(r, o) == r
    assert r.letters == free_reduce(w.letters, o)
    assert ZXZ.rs.evaluate(r) == ZXZ.rs.evaluate(w)
    assert not reduce(w + invert(w, o), o)
    assert relative_length(w, o) == len(r)


@settings(max_examples=200, deadline=None)
@given(tree_words)
def test_reduce_in_free_product_of_z2(w):
    o = TREE.rs.oracles
    r = reduce(w, o)
    # a reduced word alternates labels, so it is empty iff the element is trivial
    assert all(x.lam != y.lam for x, y in zip(r.letters, r.letters[1:]))
    assert (not r) == TREE.G.is_identity(TREE.rs.evaluate(w))


@settings(max_examples=200, deadline=None)
@given(zxz_words, st.integers(0, 20))
def test_cyclic_word_is_shift_invariant(w, i):
    o = ZXZ.rs.oracles
    assert CyclicWord(w, o) == CyclicWord(cyclic_shift(w, i), o)


@settings(max_examples=200, deadline=None)
@given(zxz_words)
def test_cyclic_reduce_is_conjugate_and_cyclically_reduced(w):
    o = ZXZ.rs.oracles
    c = cyclic_reduce(w, o)
    assert len(c) <= len(reduce(w, o))
    assert cyclic_reduce(c, o) == c
    if len(c) >= 2:
        first, last = c.letters[0], c.letters[-1]
        assert free_reduce((last, first), o) == (last, first)


def test_cyclic_reduce_merges_seam():
    o = ZXZ.rs.oracles
    w = ZXZ.word("H[A]{2} b H[A]{-2}")
    assert cyclic_reduce(w, o).letters == (XGen("b", 1),)
    w = ZXZ.word("H[A]{2} b H[A]{1}")
    assert cyclic_reduce(w, o).letters == (HLetter("A", 3), XGen("b", 1))


def test_syllables_of_commutator():
    for n in range(1, 9):
        w = reduce(ZXZ.word(f"[H[A]{{{n}}}, b]"), ZXZ.rs.oracles)
        syl = syllables(w)
        assert [s.lam for s in syl] == ["A", None, "A", None]
        assert len(w) == 4


def test_word_slicing_returns_words():
    w = ZXZ.word("b H[A]{1} b")
    assert isinstance(w[1:], Word) and len(w[1:]) == 2
    assert w[0] == XGen("b", 1)
