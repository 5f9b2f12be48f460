from fractions import Fraction as F
from math import gcd

import pytest

from valgap.errors import InvalidInput
from valgap.exactnum import group_of, index
from valgap.scenario import (
    ScenarioConfig,
    build_a_seq,
    build_primes,
    initial_state_R0,
    p_values,
    tower_ledger,
)
from valgap.transform import audit

from .oracles import sieve


def test_primes_match_sieve():
    assert build_primes(0, 4).primes == tuple(sieve(10)[:4]) == (2, 3, 5, 7)
    assert build_primes(2, 3).primes == (3, 5, 7)
    assert build_primes(0, 1).primes == (2,)
    assert build_primes(5, 6).primes == tuple(p for p in sieve(20) if p != 5)[:6]


def test_primes_reject_composite_characteristic():
    with pytest.raises(InvalidInput):
        build_primes(4, 2)


def test_a_sequence():
    assert build_a_seq((2, 3, 5, 7), 4) == (3, 19, 286, 10011)
    assert build_a_seq((2, 3, 5, 7), 1) == (3,)
    assert build_a_seq((3, 5, 7), 2) == (4, 61)


def test_a_sequence_properties():
    ps = build_primes(0, 6).primes
    a = build_a_seq(ps, 6)
    for i in range(6):
        assert gcd(a[i], ps[i]) == 1
    vals = p_values(ps, 6)
    for i in range(2, 7):
        assert vals[i] > ps[i - 2] ** 2 * vals[i - 1]
        assert index(group_of(vals[: i + 1]), group_of(vals[:i])) == ps[i - 1]


def test_initial_state():
    s = initial_state_R0(ScenarioConfig(0, 3, 3, 0))
    assert (s.nuz, s.nuw, s.nuQ(2), s.nuQ(3)) == (1, F(3, 2), F(19, 3), F(286, 5))
    assert (s.c, s.e1) == (2, 3)
    assert [s.ef(i) for i in (2, 3)] == [(19, 0), (286, 0)]
    assert s.nuQ(2) > 4 * s.nuw
    assert all(u == () for u in s.units)
    assert audit(s).passed


def test_initial_state_depth_two():
    s = initial_state_R0(ScenarioConfig(0, 2, 2, 0))
    assert (s.c, s.e1) == (2, 3)
    assert s.depth == 2


def test_initial_state_requires_l_zero():
    with pytest.raises(InvalidInput):
        initial_state_R0(ScenarioConfig())


def test_tower():
    t = tower_ledger((2, 3, 5), 3)
    assert t.degrees == (2, 3, 5)
    assert t.total_degree() == 30
    assert tower_ledger((2, 3, 5), 1).degrees == (2,)
    assert str(t.minpolys[1]) == "u^3 - (1+t)*1^3"


def test_config_validation_and_json():
    cfg = ScenarioConfig.from_json({"characteristic": 0, "prime_count": 5, "depth": 4, "l": 1, "bound": "8/1"})
    assert cfg == ScenarioConfig()
    assert cfg.dumps() == '{"characteristic": 0, "prime_count": 5, "depth": 4, "l": 1, "bound": "8/1"}'
    with pytest.raises(InvalidInput):
        ScenarioConfig(depth=1)
    with pytest.raises(InvalidInput):
        ScenarioConfig(prime_count=4, depth=4, l=1)
    with pytest.raises(InvalidInput):
        ScenarioConfig(bound=0)
    with pytest.raises(InvalidInput):
        ScenarioConfig.from_json({"depth": 3})
