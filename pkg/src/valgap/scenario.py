"""Concrete data of the construction: the prime sequence, the integer
recurrence, the residue tower and the starting state at R_0."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from fractions import Fraction
from math import gcd, prod
from typing import Sequence

from .errors import InvalidInput, InvariantFailure
from .exactnum import rat, rat_str


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class PrimeSeq:
    characteristic: int
    primes: tuple[int, ...]

    def __getitem__(self, i: int) -> int:
        """1-based access: seq[1] is the first prime."""
        if i < 1 or i > len(self.primes):
            raise IndexError(f"prime index {i} outside 1..{len(self.primes)}")
        return self.primes[i - 1]

    def __len__(self):
        return len(self.primes)


def build_primes(characteristic: int, count: int) -> PrimeSeq:
    if characteristic != 0 and not is_prime(characteristic):
        raise InvalidInput(f"characteristic must be 0 or prime, got {characteristic}")
    if count < 1:
        raise InvalidInput("prime count must be at least 1")
    out = []
    n = 2
    while len(out) < count:
        if is_prime(n) and n != characteristic:
            out.append(n)
        n += 1
    return PrimeSeq(characteristic, tuple(out))


def build_a_seq(primes: PrimeSeq | Sequence[int], depth: int) -> tuple[int, ...]:
    ps = primes.primes if isinstance(primes, PrimeSeq) else tuple(primes)
    if depth < 1 or depth > len(ps):
        raise InvalidInput(f"depth {depth} needs 1..{len(ps)} primes")
    a = [ps[0] + 1]
    for i in range(1, depth):
        a.append(ps[i - 1] * ps[i] * a[-1] + 1)
    for ai, p in zip(a, ps):
        if gcd(ai, p) != 1:
            raise InvariantFailure(f"gcd({ai}, {p}) != 1")
    return tuple(a)


def p_values(primes, depth: int) -> list[Fraction]:
    """Values of P_0, ..., P_depth with the value of x normalized to 1."""
    ps = primes.primes if isinstance(primes, PrimeSeq) else tuple(primes)
    a = build_a_seq(ps, depth)
    return [Fraction(1)] + [Fraction(ai, p) for ai, p in zip(a, ps)]


@dataclass(frozen=True)
class MinPoly:
    """u^degree - (1+t) * unit^degree; the unit is a residue we never evaluate."""

    degree: int
    unit: str

    def __str__(self):
        return f"u^{self.degree} - (1+t)*{self.unit}^{self.degree}"


@dataclass(frozen=True)
class TowerLedger:
    degrees: tuple[int, ...]
    minpolys: tuple[MinPoly, ...]

    def total_degree(self, upto: int | None = None) -> int:
        return prod(self.degrees[:upto])


def tower_ledger(primes, depth: int) -> TowerLedger:
    ps = primes.primes if isinstance(primes, PrimeSeq) else tuple(primes)
    if depth < 1 or depth > len(ps):
        raise InvalidInput(f"depth {depth} needs 1..{len(ps)} primes")
    degs = ps[:depth]
    return TowerLedger(degs, tuple(MinPoly(p, "1") for p in degs))


@dataclass(frozen=True)
class ScenarioConfig:
    characteristic: int = 0
    prime_count: int = 5
    depth: int = 4
    l: int = 1
    bound: Fraction = Fraction(8)

    def __post_init__(self):
        object.__setattr__(self, "bound", rat(self.bound))
        if self.characteristic != 0 and not is_prime(self.characteristic):
            raise InvalidInput("characteristic must be 0 or prime")
        if self.depth < 2:
            raise InvalidInput("depth must be at least 2")
        if self.l < 0:
            raise InvalidInput("center offset l must be nonnegative")
        if self.prime_count < self.l + self.depth:
            raise InvalidInput(
                f"prime_count {self.prime_count} < l + depth = {self.l + self.depth}"
            )
        if self.bound <= 0:
            raise InvalidInput("bound must be positive")

    def primes(self) -> PrimeSeq:
        return build_primes(self.characteristic, self.prime_count)

    def to_json(self) -> dict:
        d = asdict(self)
        d["bound"] = rat_str(self.bound)
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, data: dict) -> "ScenarioConfig":
        try:
            return cls(
                characteristic=int(data["characteristic"]),
                prime_count=int(data["prime_count"]),
                depth=int(data["depth"]),
                l=int(data["l"]),
                bound=rat(data["bound"]),
            )
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed scenario config: {exc}") from exc


DEFAULT_SCENARIO = ScenarioConfig()


def initial_state_R0(config: ScenarioConfig, depth: int | None = None):
    """Generating-sequence state at R_0, where z = x and w = y.

    ``depth`` overrides ``config.depth``; this is how a caller asks for the
    extra elements that advancing the center will consume.
    """
    from .transform import GenSeqState

    if depth is None:
        if config.l != 0:
            raise InvalidInput("initial_state_R0 needs a config with l = 0")
        depth = config.depth
    primes = config.primes()
    if depth > len(primes):
        raise InvalidInput(f"depth {depth} exceeds prime count {len(primes)}")
    a = build_a_seq(primes, depth)
    ps = primes.primes
    higher = tuple((a[i - 1], 0, Fraction(a[i - 1], ps[i - 1])) for i in range(2, depth + 1))
    return GenSeqState(
        characteristic=primes.characteristic,
        primes=ps,
        l=0,
        j=0,
        nuz=Fraction(1),
        nuw=Fraction(a[0], ps[0]),
        c=ps[0],
        e1=a[0],
        higher=higher,
        units=tuple(() for _ in range(depth)),
        bezout=(),
    )


def state_at_center(config: ScenarioConfig):
    """Start at R_0 with depth + l elements and advance the center l times."""
    from .transform import advance_center

    state = initial_state_R0(config, depth=config.depth + config.l)
    for _ in range(config.l):
        state = advance_center(state)
    return state
