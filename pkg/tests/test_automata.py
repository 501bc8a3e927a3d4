"""Matcher correctness against a naive sliding-window oracle."""
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hitstat.automata import build_automaton
from hitstat.errors import InvalidSymbol, MixedLengths


def naive_scan(words, text):
    """Quadratic reference matcher: compare every window to every word."""
    words = [tuple(w) for w in words]
    n = len(words[0])
    out = []
    for i in range(len(text) - n + 1):
        window = tuple(text[i:i + n])
        if window in words:
            out.append((i + n - 1, words.index(window)))
    return out


def test_single_word_overlapping_matches():
    auto = build_automaton(["11"], alphabet_size=2)
    assert auto.scan([0, 1, 1, 1]) == [(2, 0), (3, 0)]
    auto = build_automaton([(0, 1, 0, 1)], alphabet_size=2)
    assert auto.scan([0, 1, 0, 1, 0, 1]) == [(3, 0), (5, 0)]


def test_multi_word_matching():
    auto = build_automaton(["00", "11"], alphabet_size=2)
    assert auto.scan([0, 0, 1, 1, 1]) == [(1, 0), (3, 1), (4, 1)]
    assert auto.words == ((0, 0), (1, 1))


def test_state_count_bound():
    words = ["000", "001", "010", "011"]
    auto = build_automaton(words, alphabet_size=2)
    assert auto.n_states <= 3 * len(words) + 1
    assert auto.word_length == 3


def test_failure_links_reuse_matched_prefix():
    # after 0,0,1 a 0 breaks the match but starts a fresh prefix "0"
    auto = build_automaton(["0011"], alphabet_size=2)
    assert auto.scan([0, 1, 0, 1, 1]) == []
    assert auto.scan([0, 0, 1, 0, 0, 1, 1]) == [(6, 0)]


def test_countable_alphabet_fallback_goes_to_root():
    auto = build_automaton([(0, 2)])
    # 999 has no column: it must reset any progress
    assert auto.scan([0, 999, 0, 2]) == [(3, 0)]
    state = auto.step(0, 0)
    assert auto.step(state, 777) == 0
    assert auto.other_col is not None


def test_finite_alphabet_rejects_foreign_symbols():
    auto = build_automaton(["01"], alphabet_size=2)
    with pytest.raises(InvalidSymbol):
        auto.step(0, 2)
    with pytest.raises(InvalidSymbol):
        build_automaton(["012"], alphabet_size=2)


def test_word_set_shape_validation():
    with pytest.raises(MixedLengths):
        build_automaton([])
    with pytest.raises(MixedLengths):
        build_automaton(["01", "001"])
    with pytest.raises(ValueError):
        build_automaton(["01", "01"])


def test_column_array_matches_step():
    auto = build_automaton([(1, 4)])
    arr = auto.column_array(6)
    for s in range(7):
        assert auto.step(3 if 3 < auto.n_states else 0, s) == auto.table[3 if 3 < auto.n_states else 0][arr[s]]


def test_column_array_finite_is_identity():
    auto = build_automaton(["01"], alphabet_size=3)
    assert list(auto.column_array(2)) == [0, 1, 2]
    with pytest.raises(InvalidSymbol):
        auto.column_array(5)


@given(
    st.integers(min_value=2, max_value=3),
    st.integers(min_value=1, max_value=4),
    st.data(),
)
@settings(max_examples=80, deadline=None)
def test_matches_naive_oracle(k, n, data):
    n_words = data.draw(st.integers(1, min(3, k**n)))
    pool = st.lists(st.integers(0, k - 1), min_size=n, max_size=n).map(tuple)
    words = data.draw(st.lists(pool, min_size=n_words, max_size=n_words, unique=True))
    text = data.draw(st.lists(st.integers(0, k - 1), min_size=0, max_size=40))
    auto = build_automaton(words, alphabet_size=k)
    assert auto.scan(text) == naive_scan(words, text)


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_matches_naive_oracle_countable(data):
    n = data.draw(st.integers(1, 3))
    word = tuple(data.draw(st.lists(st.integers(0, 5), min_size=n, max_size=n)))
    text = data.draw(st.lists(st.integers(0, 8), min_size=0, max_size=40))
    auto = build_automaton([word])
    assert auto.scan(text) == naive_scan([word], text)
