"""Generating-sequence states and the two kinds of transforms acting on them.

A state describes the generating sequence Q_0 = z, Q_1 = w, Q_2, ..., Q_depth
at a center D_j that lies over R_l.  The relation defining Q_2 is

    Q_2 = Q_1^(p c) - (1+t) tau_1^p Q_0^(p e1),          p = prime(1)

and for i >= 2 the relation defining Q_(i+1) is

    Q_(i+1) = Q_i^(q^2) - (1+t) tau_i^q Q_0^(q e_i) Q_1^(q f_i),   q = prime(i)

where prime(i) is the (i+l)-th prime of the scenario.  Only values and
exponents are tracked; the units tau_i are monomials in auxiliary unit
variables Y1, Y2, ... introduced by each change of center.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import combinations
from math import gcd, prod
from typing import Iterator

from .errors import ChainTerminated, InvalidInput, InvariantFailure, NotACenter, ResourceError
from .exactnum import group_of, index, rat, rat_str

Monomial = tuple[tuple[str, int], ...]


def _mono_mul(*monos: dict | Monomial) -> Monomial:
    out: dict[str, int] = {}
    for m in monos:
        for var, e in dict(m).items():
            out[var] = out.get(var, 0) + e
    return tuple(sorted((v, e) for v, e in out.items() if e))


@dataclass(frozen=True)
class GenSeqState:
    characteristic: int
    primes: tuple[int, ...]
    l: int
    j: int
    nuz: Fraction
    nuw: Fraction
    c: int
    e1: int
    # (e_i, f_i, value of Q_i) for i = 2..depth
    higher: tuple[tuple[int, int, Fraction], ...]
    # unit monomial tau_i for i = 1..depth
    units: tuple[Monomial, ...]
    bezout: tuple[tuple[int, int], ...] = field(default=())

    @property
    def depth(self) -> int:
        return 1 + len(self.higher)

    def prime(self, i: int) -> int:
        """The prime attached to Q_i at this center, i.e. the (i+l)-th prime."""
        k = i + self.l
        if k < 1 or k > len(self.primes):
            raise InvalidInput(f"prime index {k} is beyond the scenario's {len(self.primes)} primes")
        return self.primes[k - 1]

    def nuQ(self, i: int) -> Fraction:
        if i == 0:
            return self.nuz
        if i == 1:
            return self.nuw
        return self.higher[i - 2][2]

    def values(self) -> list[Fraction]:
        return [self.nuQ(i) for i in range(self.depth + 1)]

    def ef(self, i: int) -> tuple[int, int]:
        return self.higher[i - 2][0], self.higher[i - 2][1]

    def unit(self, i: int) -> Monomial:
        return self.units[i - 1]

    def is_standard(self) -> bool:
        return self.c == self.prime(1) and all(f == 0 for _, f, _ in self.higher)

    # -- serialization --

    def to_json(self) -> dict:
        return {
            "characteristic": self.characteristic,
            "primes": list(self.primes),
            "l": self.l,
            "j": self.j,
            "nuz": rat_str(self.nuz),
            "nuw": rat_str(self.nuw),
            "c": self.c,
            "e1": self.e1,
            "higher": [
                {"i": i, "e": e, "f": f, "nuQ": rat_str(v)}
                for i, (e, f, v) in enumerate(self.higher, start=2)
            ],
            "units": [
                {"i": i, "monomial": [[var, exp] for var, exp in mono]}
                for i, mono in enumerate(self.units, start=1)
            ],
            "bezout": [list(pair) for pair in self.bezout],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())

    @classmethod
    def from_json(cls, d: dict) -> "GenSeqState":
        try:
            higher = sorted(d["higher"], key=lambda h: h["i"])
            units = sorted(d["units"], key=lambda u: u["i"])
            return cls(
                characteristic=int(d["characteristic"]),
                primes=tuple(int(p) for p in d["primes"]),
                l=int(d["l"]),
                j=int(d["j"]),
                nuz=rat(d["nuz"]),
                nuw=rat(d["nuw"]),
                c=int(d["c"]),
                e1=int(d["e1"]),
                higher=tuple((int(h["e"]), int(h["f"]), rat(h["nuQ"])) for h in higher),
                units=tuple(tuple((str(v), int(e)) for v, e in u["monomial"]) for u in units),
                bezout=tuple((int(a), int(b)) for a, b in d.get("bezout", [])),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"malformed state: {exc}") from exc


# -- change of center R_l -> R_(l+1) ------------------------------------------


def bezout_pair(p: int, a: int) -> tuple[int, int]:
    """Minimal a0 >= 1 with p*b0 - a*a0 = 1; returns (a0, b0)."""
    if gcd(p, a) != 1:
        raise InvariantFailure(f"gcd({p}, {a}) != 1")
    a0 = (-pow(a, -1, p)) % p if p > 1 else 1
    if a0 == 0:
        a0 = p
    b0, r = divmod(1 + a * a0, p)
    assert r == 0
    return a0, b0


def center_divisor_exponent(state: GenSeqState, i: int) -> int:
    """Exponent E_i with P_(i,l+1) = P_(i+1,l) / x_(l+1)^E_i."""
    e = state.e1 * state.prime(1) ** 2
    for s in range(2, i + 1):
        e *= state.prime(s) ** 2
    return e


def advance_center(state: GenSeqState) -> GenSeqState:
    """Monomial change of center R_l -> R_(l+1).

    x_l = x'^p Y^a0 and y_l = x'^e1 Y^b0 with p*b0 - e1*a0 = 1, Y a new unit
    variable.  The new sequence is P_(i,l+1) = P_(i+1,l) / x'^E_i, so one
    tracked element is consumed.
    """
    if state.depth < 2:
        raise InvalidInput("advancing the center needs depth >= 2")
    if not state.is_standard():
        raise NotACenter(
            f"state (l={state.l}, j={state.j}, c={state.c}) is not in the standard form of a center R_l"
        )
    p = state.prime(1)
    a0, b0 = bezout_pair(p, state.e1)
    nux = state.nuz / p
    new_l = state.l + 1
    ynew = f"Y{new_l}"
    vals, avals = [], []
    for i in range(1, state.depth):
        v = state.nuQ(i + 1) - center_divisor_exponent(state, i) * nux
        q = state.primes[i + new_l - 1] if i + new_l <= len(state.primes) else None
        if q is None:
            raise InvalidInput("not enough primes to advance the center")
        a = v * q / nux
        if a.denominator != 1 or a <= 0:
            raise InvariantFailure(f"recovered exponent a_({i},{new_l}) = {a} is not a positive integer")
        a = a.numerator
        closed = p * state.ef(i + 1)[0] - center_divisor_exponent(state, i) * q
        if a != closed:
            raise InvariantFailure(f"a_({i},{new_l}) = {a} disagrees with the closed form {closed}")
        if gcd(a, q) != 1:
            raise InvariantFailure(f"gcd(a_({i},{new_l}), {q}) = {gcd(a, q)}")
        vals.append(v)
        avals.append(a)
    units = tuple(
        _mono_mul(state.unit(i + 1), {ynew: a0 * state.ef(i + 1)[0]}) for i in range(1, state.depth)
    )
    return GenSeqState(
        characteristic=state.characteristic,
        primes=state.primes,
        l=new_l,
        j=0,
        nuz=nux,
        nuw=vals[0],
        c=state.primes[new_l],
        e1=avals[0],
        higher=tuple((avals[i - 1], 0, vals[i - 1]) for i in range(2, state.depth)),
        units=units,
        bezout=state.bezout + ((a0, b0),),
    )


# -- quadratic transforms D_j -> D_(j+1) --------------------------------------


def quadratic_case(state: GenSeqState) -> int:
    """1 when z = z'w' (w has the smaller value), 2 when w = z'w'."""
    if state.nuz == state.nuw:
        raise ChainTerminated(
            f"nu(z) = nu(w) = {rat_str(state.nuz)}: no monomial quadratic transform remains"
        )
    return 1 if state.nuw < state.nuz else 2


def _prefix(state: GenSeqState, i: int) -> int:
    """p_(1+l) * prod_(s=2)^(i-1) p_(s+l)^2."""
    return state.prime(1) * prod(state.prime(s) ** 2 for s in range(2, i))


def strict_divisors(state: GenSeqState) -> dict[int, int]:
    """Exponent of the exceptional variable divided out of each Q_i, i >= 2."""
    mult = state.e1 if quadratic_case(state) == 1 else state.c
    return {i: mult * _prefix(state, i) for i in range(2, state.depth + 1)}


def quadratic_step(state: GenSeqState) -> GenSeqState:
    case = quadratic_case(state)
    if case == 1:
        mult, base = state.e1, state.nuw
    else:
        mult, base = state.c, state.nuz
    higher = []
    for i in range(2, state.depth + 1):
        e, f = state.ef(i)
        drop = mult * _prefix(state, i)
        new_v = state.nuQ(i) - drop * base
        m_i = _prefix(state, i) * state.prime(i)
        if case == 1:
            e2, f2 = e, e + f - state.e1 * m_i
            derived = f2
        else:
            e2, f2 = e + f - state.c * m_i, f
            derived = e2
        if derived <= 0:
            raise InvariantFailure(f"derived exponent for Q_{i + 1} is {derived}, not positive")
        if new_v <= 0:
            raise InvariantFailure(f"value of Q_{i} dropped to {rat_str(new_v)}")
        higher.append((e2, f2, new_v))
    if case == 1:
        nuz, nuw, c, e1 = state.nuz - state.nuw, state.nuw, state.c - state.e1, state.e1
    else:
        nuz, nuw, c, e1 = state.nuz, state.nuw - state.nuz, state.c, state.e1 - state.c
    if c <= 0 or e1 <= 0:
        raise InvariantFailure(f"derived (c, e1) = ({c}, {e1}) not positive")
    return replace(state, j=state.j + 1, nuz=nuz, nuw=nuw, c=c, e1=e1, higher=tuple(higher))


def run_chain(state: GenSeqState, steps: int | None = None) -> tuple[list[GenSeqState], bool]:
    """Apply quadratic steps until termination (or ``steps`` of them).

    Returns the visited states, starting state included, and whether the
    chain reached equal parameter values."""
    out = [state]
    while steps is None or len(out) <= steps:
        try:
            out.append(quadratic_step(out[-1]))
        except ChainTerminated:
            return out, True
    return out, False


# -- auditing ----------------------------------------------------------------


@dataclass
class Check:
    name: str
    passed: bool
    witness: str

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "witness": self.witness}


@dataclass
class AuditReport:
    checks: list[Check]
    # (i, index of G(Q_0..Q_i) over G(Q_0..Q_(i-1)), expected)
    indices: list[tuple[int, int, int]]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def index_of(self, i: int) -> int:
        for k, got, _ in self.indices:
            if k == i:
                return got
        raise KeyError(i)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [c.to_json() for c in self.checks],
            "indices": [{"i": i, "index": got, "expected": want} for i, got, want in self.indices],
        }


def audit(state: GenSeqState) -> AuditReport:
    checks: list[Check] = []

    def check(name, ok, witness):
        checks.append(Check(name, bool(ok), witness))

    s = state
    r = rat_str
    check("positive values", s.nuz > 0 and s.nuw > 0 and all(v > 0 for _, _, v in s.higher),
          f"nu(z)={r(s.nuz)}, nu(w)={r(s.nuw)}")
    check("gcd(c, e1) = 1", gcd(s.c, s.e1) == 1, f"gcd({s.c}, {s.e1}) = {gcd(s.c, s.e1)}")
    check("c*nu(w) = e1*nu(z)", s.c * s.nuw == s.e1 * s.nuz,
          f"{r(s.c * s.nuw)} vs {r(s.e1 * s.nuz)}")
    if s.depth >= 2:
        bound = s.prime(1) * s.c * s.nuw
        check("nu(Q_2) > p*c*nu(w)", s.nuQ(2) > bound, f"{r(s.nuQ(2))} > {r(bound)}")
    for k in range(3, s.depth + 1):
        bound = s.prime(k - 1) ** 2 * s.nuQ(k - 1)
        check(f"nu(Q_{k}) > p^2*nu(Q_{k - 1})", s.nuQ(k) > bound, f"{r(s.nuQ(k))} > {r(bound)}")
    for i in range(2, s.depth + 1):
        e, f = s.ef(i)
        lhs = s.prime(i) * s.nuQ(i)
        rhs = e * s.nuz + f * s.nuw
        check(f"value balance of Q_{i}", lhs == rhs and e >= 0 and f >= 0,
              f"{s.prime(i)}*{r(s.nuQ(i))} = {r(lhs)} vs {e}*{r(s.nuz)} + {f}*{r(s.nuw)} = {r(rhs)}")

    indices = []
    vals = s.values()
    if all(v > 0 for v in vals):
        for i in range(1, s.depth + 1):
            got = index(group_of(vals[: i + 1]), group_of(vals[:i]))
            want = s.c if i == 1 else s.prime(i)
            indices.append((i, got, want))
            check(f"index at Q_{i}", got == want, f"[G(Q_0..Q_{i}):G(Q_0..Q_{i - 1})] = {got}, expected {want}")
    return AuditReport(checks, indices)


# -- linear independence of residues (formula D(i)) ----------------------------

DEFAULT_DI_CAP = 200_000


@dataclass
class DiReport:
    budget: Fraction
    tuples: int
    classes: int
    # (value, first tuple, other tuple, gamma exponent vector of the ratio)
    ratios: list[tuple[Fraction, tuple[int, ...], tuple[int, ...], tuple[int, ...]]]
    failures: list[str]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {
            "budget": rat_str(self.budget),
            "tuples": self.tuples,
            "classes": self.classes,
            "passed": self.passed,
            "ratios": [
                {"value": rat_str(v), "base": list(a), "other": list(b), "gamma": list(g)}
                for v, a, b, g in self.ratios
            ],
            "failures": self.failures,
        }


def _exponent_tuples(state: GenSeqState, budget: Fraction, cap: int) -> Iterator[tuple[Fraction, tuple[int, ...]]]:
    vals = state.values()
    n = state.depth
    upper = [None, state.prime(1) * state.c] + [state.prime(k) ** 2 for k in range(2, n + 1)]
    count = 0

    def rec(k, rest, acc):
        nonlocal count
        if k == 0:
            f0 = 0
            while f0 * vals[0] <= rest:
                count += 1
                if count > cap:
                    raise ResourceError(f"D(i) enumeration exceeded {cap} tuples")
                yield budget - rest + f0 * vals[0], (f0,) + acc
                f0 += 1
            return
        fk = 0
        while fk < upper[k] and fk * vals[k] <= rest:
            yield from rec(k - 1, rest - fk * vals[k], (fk,) + acc)
            fk += 1

    yield from rec(n, budget, ())


def gamma_reduce(state: GenSeqState, exps: tuple[int, ...]) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Rewrite Q_1^c as gamma_1 z^e1 and Q_i^p as gamma_i z^e_i w^f_i.

    Returns (gamma exponents reduced modulo the residue degrees, residual
    exponent tuple).  Reducing mod the degree is legitimate because each
    gamma_i^degree lies in the residue field of the center."""
    f = list(exps)
    g = [0] * len(f)
    for k in range(len(f) - 1, 1, -1):
        q, f[k] = divmod(f[k], state.prime(k))
        e, ff = state.ef(k)
        g[k] = q
        f[0] += q * e
        f[1] += q * ff
    if len(f) > 1:
        q, f[1] = divmod(f[1], state.c)
        g[1] = q
        f[0] += q * state.e1
    degs = [None] + [state.prime(k) for k in range(1, len(f))]
    reduced = tuple(g[k] % degs[k] for k in range(1, len(f)))
    return reduced, tuple(f)


def audit_Di(state: GenSeqState, value_budget, cap: int = DEFAULT_DI_CAP) -> DiReport:
    budget = rat(value_budget)
    if budget < 0:
        raise InvalidInput("value budget must be nonnegative")
    classes: dict[Fraction, list[tuple[int, ...]]] = {}
    total = 0
    for v, t in _exponent_tuples(state, budget, cap):
        classes.setdefault(v, []).append(t)
        total += 1
    ratios, failures = [], []
    degs = [state.prime(k) for k in range(1, state.depth + 1)]
    for v in sorted(classes):
        group = classes[v]
        if len(group) < 2:
            continue
        reduced = [gamma_reduce(state, t) for t in group]
        base_g, base_res = reduced[0]
        for t, (gv, res) in zip(group[1:], reduced[1:]):
            diff = tuple(a - b for a, b in zip(gv, base_g))
            ratios.append((v, group[0], t, diff))
            if res != base_res:
                failures.append(f"value {rat_str(v)}: {t} and {group[0]} leave different residual monomials")
            elif any(abs(d) >= deg for d, deg in zip(diff, degs)):
                failures.append(f"value {rat_str(v)}: gamma vector {diff} outside degree bounds {degs}")
        for (ta, (ga, _)), (tb, (gb, _)) in combinations(zip(group, reduced), 2):
            if ga == gb:
                failures.append(f"value {rat_str(v)}: {ta} and {tb} have equal residue monomials")
    return DiReport(budget, total, len(classes), ratios, failures)
