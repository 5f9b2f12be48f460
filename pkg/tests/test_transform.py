from fractions import Fraction as F

import pytest

from valgap.errors import ChainTerminated, InvalidInput, NotACenter, ResourceError
from valgap.exactnum import group_of, index
from valgap.scenario import DEFAULT_SCENARIO, ScenarioConfig, initial_state_R0, state_at_center
from valgap.transform import (
    GenSeqState,
    advance_center,
    audit,
    audit_Di,
    bezout_pair,
    gamma_reduce,
    quadratic_case,
    quadratic_step,
    run_chain,
    strict_divisors,
)


@pytest.fixture
def r0():
    return initial_state_R0(ScenarioConfig(0, 3, 3, 0))


@pytest.fixture
def r1(r0):
    return advance_center(r0)


def summary(s):
    return (s.nuz, s.nuw, s.c, s.e1, s.nuQ(2))


def test_bezout():
    assert bezout_pair(2, 3) == (1, 2)
    a0, b0 = bezout_pair(5, 7)
    assert 5 * b0 - 7 * a0 == 1 and a0 >= 1


def test_advance_from_R0(r1):
    assert r1.l == 1 and r1.j == 0
    assert summary(r1) == (F(1, 2), F(1, 3), 3, 2, F(16, 5))
    assert r1.ef(2) == (32, 0)
    assert r1.bezout == ((1, 2),)
    assert r1.unit(1) == (("Y1", 19),)
    assert r1.unit(2) == (("Y1", 286),)
    assert r1.depth == 2
    assert audit(r1).passed


def test_advance_value_group_grows_by_first_prime(r0, r1):
    assert group_of(r1.values()).generator == F(1, 30)
    assert index(group_of(r0.values()[:3]), group_of(r0.values()[:2])) == 3


def test_forced_chain(r1):
    states, terminated = run_chain(r1)
    assert terminated
    assert [summary(s) for s in states] == [
        (F(1, 2), F(1, 3), 3, 2, F(16, 5)),
        (F(1, 6), F(1, 3), 1, 2, F(6, 5)),
        (F(1, 6), F(1, 6), 1, 1, F(7, 10)),
    ]
    assert [s.j for s in states] == [0, 1, 2]
    for s in states:
        assert audit(s).passed, audit(s).failures()
    with pytest.raises(ChainTerminated):
        quadratic_case(states[-1])
    with pytest.raises(ChainTerminated):
        quadratic_step(states[-1])


def test_index_table_at_R1(r1):
    rep = audit(r1)
    assert rep.index_of(1) == r1.c == 3
    assert rep.index_of(2) == r1.prime(2) == 5


def test_strict_divisors_match_value_drop(r1):
    nxt = quadratic_step(r1)
    # case 1: nu(w) < nu(z), the exceptional divisor has value nu(w)
    assert quadratic_case(r1) == 1
    for i, d in strict_divisors(r1).items():
        assert r1.nuQ(i) - nxt.nuQ(i) == d * r1.nuw


def test_run_chain_step_limit(r1):
    states, terminated = run_chain(r1, 1)
    assert len(states) == 2 and not terminated
    states, terminated = run_chain(r1, 0)
    assert states == [r1] and not terminated


def test_default_scenario_chain():
    s = state_at_center(DEFAULT_SCENARIO)
    assert s.l == 1 and s.depth == 4
    assert [s.nuQ(i) for i in (2, 3, 4)] == [F(16, 5), F(561, 7), F(43198, 11)]
    states, terminated = run_chain(s)
    assert terminated and len(states) == 3
    assert all(audit(t).passed for t in states)


def test_advance_twice_matches_closed_form():
    s = initial_state_R0(ScenarioConfig(0, 5, 2, 0), depth=4)
    s2 = advance_center(advance_center(s))
    assert s2.l == 2 and s2.depth == 2
    assert audit(s2).passed


def test_advance_needs_a_center(r1):
    states, _ = run_chain(r1)
    assert states[1].c == 1
    with pytest.raises(NotACenter):
        advance_center(states[1])


def test_advance_needs_depth():
    s = initial_state_R0(ScenarioConfig(0, 2, 2, 0))
    s1 = advance_center(s)
    with pytest.raises(InvalidInput):
        advance_center(s1)


def test_json_round_trip(r1):
    states, _ = run_chain(r1)
    for s in states:
        assert GenSeqState.from_json(s.to_json()) == s
    with pytest.raises(InvalidInput):
        GenSeqState.from_json({"nuz": "1/2"})


def test_audit_flags_broken_state(r1):
    d = r1.to_json()
    d["higher"][0]["nuQ"] = "3"
    bad = GenSeqState.from_json(d)
    rep = audit(bad)
    assert not rep.passed
    assert {c.name for c in rep.failures()} >= {"nu(Q_2) > p*c*nu(w)", "value balance of Q_2"}


def test_gamma_reduce_example():
    s = initial_state_R0(ScenarioConfig(0, 2, 2, 0))
    # c = 2, e1 = 3 at R_0, so w^2 rewrites as gamma_1 z^3
    g, res = gamma_reduce(s, (0, 2, 0))
    assert g == (1, 0) and res == (3, 0, 0)


def test_Di_small_example():
    s = initial_state_R0(ScenarioConfig(0, 2, 2, 0))
    rep = audit_Di(s, 6)
    assert rep.passed
    assert any(a == (3, 0, 0) and b == (0, 2, 0) and g[0] == 1 for _, a, b, g in rep.ratios)


def test_Di_default_scenario():
    s = state_at_center(DEFAULT_SCENARIO)
    states, _ = run_chain(s)
    for t in states:
        assert audit_Di(t, 3).passed


def test_Di_cap():
    s = initial_state_R0(ScenarioConfig(0, 2, 2, 0))
    with pytest.raises(ResourceError):
        audit_Di(s, 50, cap=10)
    with pytest.raises(InvalidInput):
        audit_Di(s, -1)


def test_positive_characteristic_chain():
    cfg = ScenarioConfig(2, 4, 3, 1)
    s = state_at_center(cfg)
    assert s.primes[:3] == (3, 5, 7)
    states, terminated = run_chain(s)
    assert terminated
    assert all(audit(t).passed for t in states)
