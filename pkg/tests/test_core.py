import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from subfactor.core import (Alphabet, IntMatrix, Morphism, Substitution, SubstitutionError,
                            bound_calculators, chacon, complexity, compose, empirical_lr_constant,
                            fibonacci, fixed_point_window, growth_sandwich, identity_morphism,
                            k_formula, language, parse_sub, show, spectral_data, thue_morse)

import oracles


def test_alphabet_rejects_duplicates_and_empty():
    with pytest.raises(SubstitutionError):
        Alphabet(["a", "a"])
    with pytest.raises(SubstitutionError):
        Alphabet([])


def test_multichar_tokens_round_trip():
    alph = Alphabet(["(aab)", "(aba)", "r1"])
    w = ("r1", "(aab)", "r1")
    assert alph.decode(alph.encode(w)) == w


def test_compose_fibonacci_square():
    phi = fibonacci()
    sq = compose(phi, phi)
    assert sq.rules() == {"a": "aba", "b": "ab"}
    # independent: apply the rules twice on strings
    r = {"a": "ab", "b": "a"}
    assert {a: oracles.apply(r, oracles.apply(r, a)) for a in r} == sq.rules()


def test_compose_identity_and_mismatch():
    phi = fibonacci()
    assert compose(identity_morphism(phi.alphabet), phi) == phi
    other = Morphism(Alphabet("xy"), Alphabet("xy"), {"x": ("x",), "y": ("y",)})
    with pytest.raises(SubstitutionError):
        compose(phi, other)


def test_classify_examples():
    f = fibonacci().flags
    assert f.primitive and f.growing and f.left_proper and not f.right_proper
    assert ("a", "right") in [tuple(p) for p in f.prolongable]
    assert not chacon().flags.primitive
    t = thue_morse().flags
    assert t.primitive and t.constant_length and t.injective_on_letters


@pytest.mark.parametrize("sub, seed, n, expected", [
    (fibonacci, "a", 21, "abaababaabaababaababa"),
    (thue_morse, "a", 20, "abbabaabbaababbabaab"),
    (chacon, "a", 12, "aabaaababaab"),
])
def test_fixed_point_windows(sub, seed, n, expected):
    assert show(fixed_point_window(sub(), seed, n)) == expected


def test_fixed_point_two_sided_admissibility():
    with pytest.raises(SubstitutionError):
        fixed_point_window(fibonacci(), ("b", "b"), 5)


def test_languages_against_brute_force():
    for sub, rules in ((fibonacci(), {"a": "ab", "b": "a"}),
                       (thue_morse(), {"a": "ab", "b": "ba"})):
        for n in range(1, 9):
            assert {show(w) for w in language(sub, n)} == oracles.brute_language(rules, n)


def test_chacon_language_five():
    expected = {"aabaa", "abaaa", "baaab", "aaaba", "aabab", "ababa", "babaa", "abaab", "baaba"}
    assert {show(w) for w in language(chacon(), 5)} == expected


def test_complexity_values():
    assert [complexity(fibonacci(), n) for n in range(1, 11)] == [n + 1 for n in range(1, 11)]
    assert [complexity(thue_morse(), n) for n in (1, 2, 3)] == [2, 4, 6]
    assert complexity(fibonacci(), 0) == 1


def test_spectral_data():
    sd = spectral_data(fibonacci())
    lo, hi = sd.rho_interval(Fraction(1, 10 ** 8))
    g = (1 + math.sqrt(5)) / 2
    assert lo <= Fraction(g) <= hi
    assert str(sd.char_poly.as_expr()) == "t**2 - t - 1"
    fr = sd.frequencies
    assert abs(sum(fr) - 1) < 1e-12 and abs(fr[0] - 1 / g) < 1e-9
    assert spectral_data(thue_morse()).degree == 1


def test_bounds_and_empirical_constant():
    assert k_formula(fibonacci()).exact == 2 ** 16
    kf = empirical_lr_constant(fibonacci())
    assert kf <= 10 * (1 + math.sqrt(5)) / 2
    kt = empirical_lr_constant(thue_morse())
    assert kt <= 16
    x = "".join(fixed_point_window(thue_morse(), "a", 1 << 14))
    assert kt == oracles.lr_ratio(x, 8)
    b = bound_calculators(fibonacci())
    assert set(b) >= {"K_formula", "L_formula", "Q_formula"}


def test_growth_sandwich_with_formula_constant():
    for s in (fibonacci(), thue_morse()):
        for n in range(1, 7):
            assert growth_sandwich(s, n, k_formula(s).exact)


def test_matrix_functoriality():
    phi, nu = fibonacci(), thue_morse()
    for s in (phi, nu):
        assert (s.matrix @ s.matrix).tolist() == compose(s, s).matrix.tolist()
    m = IntMatrix([[1, 1], [1, 0]])
    assert (m ** 10).rows[0][0] == 89


def test_parse_errors_have_positions():
    with pytest.raises(SubstitutionError, match=r"f.sub:2:"):
        parse_sub("a -> ab\nb => a\n", "f.sub")
    s = parse_sub("alphabet: a b\n# comment\na -> a b\nb -> a\n")
    assert s.rules() == {"a": "ab", "b": "a"}


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=1, max_value=60))
def test_fixed_point_prefix_property(n):
    s = fibonacci()
    w = fixed_point_window(s, "a", n)
    assert s(w)[:n] == w


@settings(max_examples=20, deadline=None)
@given(st.dictionaries(st.sampled_from("abc"), st.text("abc", min_size=1, max_size=3),
                       min_size=3, max_size=3))
def test_complexity_growth_law(rules):
    s = Substitution.from_rules(rules)
    if not (s.flags.primitive and s.flags.growing):
        return
    ps = [complexity(s, n) for n in range(1, 7)]
    assert all(a <= b <= 3 * a for a, b in zip(ps, ps[1:]))
