import random

import pytest

from subfactor.core import (CapExceeded, SubstitutionError, WindowOracle, chacon, compose,
                            fibonacci, k_formula, oracle, show, thue_morse)
from subfactor.decide import properize
from subfactor.returns import (derived_window, lambda_set, lambda_word, return_pairs,
                               return_substitution_set, return_substitution_word, return_words)

import oracles


@pytest.mark.parametrize("name, sub, seed, u", [
    ("fib", fibonacci, "a", "a"), ("fib", fibonacci, "a", "aa"), ("fib", fibonacci, "a", "abaab"),
    ("tm", thue_morse, "a", "b"), ("tm", thue_morse, "a", "bb"), ("tm", thue_morse, "a", "abba"),
    ("chacon", chacon, "a", "a"), ("chacon", chacon, "a", "aab"),
])
def test_return_words_follow_first_occurrence(name, sub, seed, u):
    s = sub()
    st = return_words(WindowOracle(s, seed), u)
    x = show(WindowOracle(s, seed).prefix(1 << 14))
    assert [show(w) for w in st.words] == oracles.return_words(x, u)


def test_return_word_sets_match_examples():
    def words(sub, u):
        return sorted(show(w) for w in return_words(WindowOracle(sub, "a"), u).words)
    assert words(fibonacci(), "a") == ["a", "ab"]
    assert words(fibonacci(), "aa") == ["aab", "aabab"]
    assert words(thue_morse(), "b") == ["b", "ba", "baa"]
    assert words(thue_morse(), "bb") == sorted(["bbaa", "bbaaba", "bbabaa", "bbabaaba"])
    assert words(chacon(), "aab") == ["aaba", "aabab"]


def test_return_words_reject_absent_marker():
    with pytest.raises((SubstitutionError, CapExceeded)):
        return_words(oracle(fibonacci()), "bb")


def test_derived_sequence_of_chacon():
    d = derived_window(WindowOracle(chacon(), "a"), "a", 40)
    assert "".join(d) == "1211221211211221221211221211211221211211"


@pytest.mark.parametrize("sub, u", [(fibonacci, "a"), (fibonacci, "aba"), (thue_morse, "abb")])
def test_theta_of_derived_sequence_is_the_point(sub, u):
    s = sub()
    orc = oracle(s)
    st = return_words(orc, u)
    d = derived_window(orc, u, 300)
    img = show(st.theta(d))
    x = show(orc.prefix(len(img) + 10))
    i = x.find(u)
    assert x[i:i + len(img)] == img


@pytest.mark.parametrize("sub, u", [(thue_morse, "bb"), (fibonacci, "a"), (chacon, "aab")])
def test_return_words_are_a_code(sub, u):
    orc = WindowOracle(sub(), "a")
    words = [show(w) for w in return_words(orc, u).words]
    x = show(orc.prefix(400))
    occ = [i for i in range(len(x)) if x.startswith(u, i)]
    for j in occ:
        if 0 < j - occ[0] <= 200:
            assert oracles.count_factorizations(x[occ[0]:j], words) == 1


def test_lambda_identity_and_examples():
    for sub, u, v, expected in (
            (chacon, "a", "aab", {"1": "121", "2": "122"}),):
        orc = WindowOracle(sub(), "a")
        lam = lambda_word(orc, u, v)
        assert lam.rules() == expected
    for sub, u, v in ((fibonacci, "a", "aa"), (thue_morse, "b", "bb"), (chacon, "a", "aab")):
        orc = WindowOracle(sub(), "a")
        lam = lambda_word(orc, u, v)
        assert compose(return_words(orc, u).theta, lam) == return_words(orc, v).theta


def test_lambda_requires_prefix():
    with pytest.raises(SubstitutionError):
        lambda_word(oracle(fibonacci()), "b", "ab")


def test_return_substitution_word_thue_morse_a():
    rs = return_substitution_word(thue_morse(), "a")
    assert rs.theta.rules() == {"1": "abb", "2": "ab", "3": "a"}
    assert rs.sub.rules() == {"1": "123", "2": "13", "3": "2"}


def test_return_substitution_commutes_on_random_prefixes():
    rng = random.Random(5)
    subs = [fibonacci(), thue_morse(), properize(fibonacci()).xi]
    for _ in range(12):
        s = rng.choice(subs)
        x = oracle(s).prefix(12)
        u = x[:rng.randint(1, 8)]
        rs = return_substitution_word(s, u)
        th = rs.theta
        assert compose(th, rs.sub) == compose(s, th)
        # derived sequence is the fixed point starting with 1
        assert rs.sub.images["1"][0] == "1"


def test_return_pairs_examples():
    st = return_pairs(oracle(thue_morse()), frozenset({("a", "a"), ("b", "b")}))
    assert {k: [show(w), show(u)] for k, (w, u) in zip("1234", st.pairs)} == {
        "1": ["bbab", "aa"], "2": ["aa", "bb"], "3": ["bb", "aa"], "4": ["aaba", "bb"]}
    assert st.is_admissible(("2", "3", "4"))
    assert not st.is_admissible(("2", "3", "2"))
    st = return_pairs(oracle(fibonacci()), frozenset({("a", "a"), ("a", "b")}))
    assert [(show(w), show(u)) for w, u in st.pairs] == [("ab", "aa"), ("a", "ab"), ("ab", "ab")]


def test_return_substitution_set_fibonacci():
    rs = return_substitution_set(fibonacci(), frozenset({("a", "a"), ("a", "b")}))
    assert rs.sub.rules() == {"1": "12312123", "2": "12312", "3": "12312123"}


def test_return_substitution_set_is_consistent_with_pairs():
    # images of each pair letter begin and end with letters that form admissible words
    rs = return_substitution_set(thue_morse(), frozenset({("a", "a"), ("b", "b")}))
    st = rs.structure
    for a in rs.sub.alphabet:
        assert st.is_admissible(rs.sub.images[a])


def test_singleton_set_agrees_with_word_case():
    orc = oracle(fibonacci())
    a = return_pairs(orc, frozenset({("a", "b", "a")}))
    b = return_words(orc, "aba")
    assert [show(w) for w, _u in a.pairs] == [show(w) for w in b.words]


def test_lambda_set_identities_and_length_guard():
    orc = oracle(fibonacci())
    U = frozenset({("a", "a"), ("a", "b")})
    V = frozenset({("a", "a", "b"), ("a", "b", "a")})
    lam = lambda_set(orc, U, V)
    small, big = return_pairs(orc, U), return_pairs(orc, V)
    for i, (w, _u) in zip(big.alphabet, big.pairs):
        assert sum((small.pairs[int(j) - 1][0] for j in lam.images[i]), ()) == w
    with pytest.raises(SubstitutionError):
        lambda_set(orc, V, U)


def test_return_word_powers_occur():
    orc = oracle(thue_morse())
    x = show(orc.prefix(4096))
    for u in ("b", "bb", "abba"):
        for w in return_words(orc, u).words:
            k = -(-len(u) // len(w))
            assert show(w) * k in x


def test_number_of_return_words_bounded():
    for s in (fibonacci(), thue_morse()):
        K = k_formula(s).exact
        x = oracle(s).prefix(16)
        for m in range(1, 9):
            assert return_words(oracle(s), x[:m]).size <= (K + 1) ** 3
