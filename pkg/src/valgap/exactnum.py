"""Exact value arithmetic: rationals, rank-2 lexicographic values, cyclic
subgroups of Q and finitely generated sub-semigroups of Q>=0."""

from __future__ import annotations

import heapq
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from math import gcd, lcm
from typing import Iterable, Sequence

from .errors import InvalidInput, NotASubgroup, ResourceError

Rat = Fraction

DEFAULT_DP_CAP = 10**6


def dp_cap() -> int:
    return int(os.environ.get("VALGAP_DP_CAP", DEFAULT_DP_CAP))


def rat(value) -> Fraction:
    """Coerce ints, Fractions and "p/q" strings to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InvalidInput(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidInput(f"not a rational: {value!r}") from exc
    raise InvalidInput(f"not a rational: {value!r}")


def rat_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _check_gens(gens: Sequence[Fraction]) -> list[Fraction]:
    gens = [rat(g) for g in gens]
    if not gens:
        raise InvalidInput("empty generator list")
    for g in gens:
        if g <= 0:
            raise InvalidInput(f"generator must be positive, got {rat_str(g)}")
    return gens


def common_scale(values: Iterable[Fraction]) -> int:
    return reduce(lcm, (v.denominator for v in values), 1)


# -- subgroups of Q ----------------------------------------------------------


@dataclass(frozen=True)
class QSubgroup:
    """The subgroup generator*Z of Q."""

    generator: Fraction

    def __post_init__(self):
        if self.generator <= 0:
            raise InvalidInput("subgroup generator must be positive")

    def __contains__(self, v) -> bool:
        return (rat(v) / self.generator).denominator == 1

    def __le__(self, other: "QSubgroup") -> bool:
        return self.generator in other


def group_of(gens: Sequence) -> QSubgroup:
    gens = _check_gens(gens)
    d = common_scale(gens)
    g = reduce(gcd, (int(v * d) for v in gens))
    return QSubgroup(Fraction(g, d))


def index(big: QSubgroup, small: QSubgroup) -> int:
    q = small.generator / big.generator
    if q.denominator != 1:
        raise NotASubgroup(
            f"{rat_str(small.generator)}Z is not contained in {rat_str(big.generator)}Z"
        )
    return q.numerator


# -- numerical semigroups ----------------------------------------------------


@dataclass(frozen=True)
class NumSgp:
    generators: tuple[Fraction, ...]
    scale: int
    scaled_gens: tuple[int, ...]

    @classmethod
    def of(cls, gens: Sequence) -> "NumSgp":
        gens = _check_gens(gens)
        scale = common_scale(gens)
        return cls(tuple(gens), scale, tuple(int(g * scale) for g in gens))

    def apery(self) -> list[int | None]:
        """Minimal scaled element in each residue class modulo the smallest
        scaled generator (None where the class is not reached)."""
        return _apery(self.scaled_gens)


def _apery(scaled: Sequence[int]) -> list[int | None]:
    m = min(scaled)
    if m > dp_cap():
        raise ResourceError(f"Apery table of size {m} exceeds cap {dp_cap()}")
    return list(_apery_table(tuple(scaled)))


@lru_cache(maxsize=256)
def _apery_table(scaled: tuple[int, ...]) -> tuple[int | None, ...]:
    m = min(scaled)
    best: list[int | None] = [None] * m
    best[0] = 0
    heap = [(0, 0)]
    while heap:
        d, r = heapq.heappop(heap)
        if d != best[r]:
            continue
        for g in scaled:
            nd = d + g
            nr = nd % m
            if best[nr] is None or nd < best[nr]:
                best[nr] = nd
                heapq.heappush(heap, (nd, nr))
    return tuple(best)


def _member_scaled(apery: list[int | None], n: int) -> bool:
    floor_ = apery[n % len(apery)]
    return floor_ is not None and n >= floor_


def sgp_member(s: NumSgp, v) -> bool:
    v = rat(v)
    if v < 0:
        raise InvalidInput("membership query for a negative value")
    n = v * s.scale
    if n.denominator != 1:
        return False
    return _member_scaled(s.apery(), n.numerator)


def sgp_enumerate(s: NumSgp, bound) -> list[Fraction]:
    bound = rat(bound)
    if bound <= 0:
        raise InvalidInput("enumeration bound must be positive")
    top = int(bound * s.scale)
    if top > dp_cap():
        raise ResourceError(f"enumeration range {top} exceeds cap {dp_cap()}")
    ap = s.apery()
    return [Fraction(n, s.scale) for n in range(top + 1) if _member_scaled(ap, n)]


# -- rank-2 values -----------------------------------------------------------


@dataclass(frozen=True, order=True)
class LexVal:
    """Value in Q x Z ordered lexicographically, first component dominant."""

    nu: Fraction
    mu: int = 0

    def __add__(self, other: "LexVal") -> "LexVal":
        return LexVal(self.nu + other.nu, self.mu + other.mu)

    def to_json(self) -> list:
        return [rat_str(self.nu), self.mu]

    @classmethod
    def from_json(cls, data) -> "LexVal":
        nu, mu = data
        return cls(rat(nu), int(mu))


def add(a: LexVal, b: LexVal) -> LexVal:
    return a + b


def cmp(a: LexVal, b: LexVal) -> int:
    return (a > b) - (a < b)


def project(a: LexVal) -> Fraction:
    return a.nu
