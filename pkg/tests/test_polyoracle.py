from fractions import Fraction as F

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from valgap.errors import InvalidInput, NotDivisible, ResourceError
from valgap.polyoracle import (
    SparsePoly,
    Substitution,
    build_P,
    discriminant_check,
    divide_by_monomial,
    identity_substitution,
    resultant,
    substitute,
    verify_chain,
    verify_p_seq,
)
from valgap.scenario import ScenarioConfig

VARS = ("x", "y", "t")


def poly(terms, char=0, vars=VARS):
    return SparsePoly(vars, terms, char)


def to_sympy(p):
    syms = sympy.symbols(p.vars)
    return sympy.expand(sum(c * sympy.prod([s**e for s, e in zip(syms, m)]) for m, c in p.terms.items()))


def test_build_P_small():
    P = build_P(3, (2, 3, 5, 7))
    x, y, t = sympy.symbols("x y t")
    assert to_sympy(P[2]) == sympy.expand(y**4 - (1 + t) * x**6)
    assert to_sympy(P[3]) == sympy.expand((y**4 - (1 + t) * x**6) ** 9 - (1 + t) * x**57)
    assert len(P[3].xy_terms()) == 11
    assert len(P[3]) == 57


def test_build_P_rejects_characteristic_prime():
    with pytest.raises(InvalidInput):
        build_P(2, (2, 3), char=2)


def test_dump_format():
    P = build_P(2, (2, 3))
    assert P[2].dump().splitlines() == ["y^4 : 1", "x^6 : -1 - t"]


def test_characteristic_reduces_coefficients():
    P = build_P(2, (3, 5), char=2)
    # -1 - t == 1 + t over F_2
    assert P[2].terms[(12, 0, 1)] == 1
    assert poly({(1, 0, 0): 2}, char=2).terms == {}


def test_substitute_example():
    p = poly({(2, 0, 0): 1, (0, 3, 0): 1})
    s = Substitution({"x": {"x": 1, "y": 1}, "y": {"y": 1}, "t": {"t": 1}}, VARS)
    img = substitute(p, s)
    assert img == poly({(2, 2, 0): 1, (0, 3, 0): 1})
    assert divide_by_monomial(img, {"y": 2}) == poly({(2, 0, 0): 1, (0, 1, 0): 1})


def test_divide_reports_witness():
    p = poly({(2, 0, 0): 1, (0, 3, 0): 1})
    with pytest.raises(NotDivisible) as exc:
        divide_by_monomial(p, {"x": 1})
    assert exc.value.witness == (0, 3, 0)


def test_substitution_validation():
    with pytest.raises(InvalidInput):
        Substitution({"x": {"q": 1}}, VARS)
    with pytest.raises(InvalidInput):
        substitute(poly({(1, 0, 0): 1}), Substitution({"x": {"x": 1}}, VARS))


def test_term_cap(monkeypatch):
    monkeypatch.setenv("VALGAP_TERM_CAP", "20")
    with pytest.raises(ResourceError):
        build_P(3, (2, 3, 5))


small_polys = st.dictionaries(
    st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 2)), st.integers(-4, 4), max_size=5
)
monos = st.fixed_dictionaries({"x": st.integers(0, 2), "y": st.integers(0, 2), "t": st.integers(0, 1)})


@settings(max_examples=60, deadline=None)
@given(small_polys, small_polys, monos, monos, st.sampled_from([0, 2, 3]))
def test_substitution_is_a_ring_map(a, b, mx, my, char):
    f, g = poly(a, char), poly(b, char)
    s = Substitution({"x": mx, "y": my, "t": {"t": 1}}, VARS)
    assert substitute(f * g, s) == substitute(f, s) * substitute(g, s)
    assert substitute(f + g, s) == substitute(f, s) + substitute(g, s)
    assert substitute(f, identity_substitution(VARS)) == f


@settings(max_examples=40, deadline=None)
@given(small_polys, small_polys)
def test_arithmetic_matches_sympy(a, b):
    f, g = poly(a), poly(b)
    assert to_sympy(f * g - g) == sympy.expand(to_sympy(f) * to_sympy(g) - to_sympy(g))
    assert to_sympy(f**2) == sympy.expand(to_sympy(f) ** 2)


def test_p_sequence_identities():
    assert verify_p_seq(3).passed
    assert verify_p_seq(3, char=2).passed


@pytest.mark.parametrize("char", [0, 2])
def test_verify_chain(char):
    rep = verify_chain(ScenarioConfig(char, 5, 2, 0), l_max=1, step_max=2, depth=3)
    assert rep.passed, [c for c in rep.checks if not c.passed]
    names = " ".join(c.name for c in rep.checks)
    assert "exceptional exponent" in names and "strict transform" in names


def test_verify_chain_depth_guard():
    with pytest.raises(InvalidInput):
        verify_chain(ScenarioConfig(0, 5, 2, 0), l_max=3, depth=3)


def test_resultant_of_linear_polys():
    # Res(f, g) = g(2) for monic f = u - 2
    assert resultant([[1], [-2]], [[1], [-5]]) == [-3]


@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_discriminant_against_sympy(p):
    u, t = sympy.symbols("u t")
    want = sympy.Poly(sympy.discriminant(u**p - (1 + t), u), t).all_coeffs()[::-1]
    got = discriminant_check(p)
    assert got["discriminant"] == [int(c) for c in want]
    assert got["unit_times_power_of_1_plus_t"]


@pytest.mark.parametrize("p", [3, 5, 7])
def test_discriminant_closed_form_odd(p):
    assert discriminant_check(p)["matches_formula"]


def test_discriminant_p2_sign():
    # u^2 - (1+t) has discriminant 4(1+t); the closed form with sign (-1)^1 gives -4(1+t)
    r = discriminant_check(2)
    assert r["discriminant"] == [4, 4]
    assert r["formula"] == [-4, -4]
    assert not r["matches_formula"]


@pytest.mark.parametrize("p", [3, 5])
def test_discriminant_characteristic_two(p):
    r = discriminant_check(p, char=2)
    assert r["matches_formula"] and r["unit_times_power_of_1_plus_t"]
    with pytest.raises(InvalidInput):
        discriminant_check(2, char=2)


def test_fraction_coefficients_allowed():
    p = poly({(1, 0, 0): F(1, 2)})
    assert (p + p) == poly({(1, 0, 0): 1})
