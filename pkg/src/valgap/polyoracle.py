"""Brute-force polynomial oracle.

Everything here works on explicit sparse polynomials with integer
coefficients, reduced modulo the characteristic when it is positive.  The
variable ``t`` is an ordinary variable; coefficients "in k[t]" are read off
by grouping the remaining variables.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import ChainTerminated, InvalidInput, NotDivisible, ResourceError
from .exactnum import rat_str
from .scenario import ScenarioConfig, build_a_seq, build_primes, initial_state_R0
from .transform import (
    Check,
    GenSeqState,
    advance_center,
    center_divisor_exponent,
    quadratic_case,
    quadratic_step,
    strict_divisors,
)

DEFAULT_TERM_CAP = 10**6


def term_cap() -> int:
    return int(os.environ.get("VALGAP_TERM_CAP", DEFAULT_TERM_CAP))


class SparsePoly:
    __slots__ = ("vars", "terms", "char")

    def __init__(self, vars: Sequence[str], terms: Mapping[tuple[int, ...], int | Fraction], char: int = 0):
        self.vars = tuple(vars)
        self.char = char
        clean = {}
        for mono, coef in terms.items():
            if len(mono) != len(self.vars):
                raise InvalidInput(f"monomial {mono} does not match variables {self.vars}")
            if char:
                coef = _mod(coef, char)
            if coef:
                clean[tuple(mono)] = coef
        if len(clean) > term_cap():
            raise ResourceError(f"polynomial has {len(clean)} terms, cap is {term_cap()}")
        self.terms = clean

    # -- constructors --

    @classmethod
    def var(cls, name: str, vars: Sequence[str], char: int = 0) -> "SparsePoly":
        vars = tuple(vars)
        return cls(vars, {tuple(int(v == name) for v in vars): 1}, char)

    @classmethod
    def const(cls, c, vars: Sequence[str], char: int = 0) -> "SparsePoly":
        vars = tuple(vars)
        return cls(vars, {(0,) * len(vars): c}, char)

    @classmethod
    def monomial(cls, exps: Mapping[str, int], vars: Sequence[str], char: int = 0, coef=1) -> "SparsePoly":
        vars = tuple(vars)
        unknown = set(exps) - set(vars)
        if unknown:
            raise InvalidInput(f"unknown variables {sorted(unknown)}")
        return cls(vars, {tuple(exps.get(v, 0) for v in vars): coef}, char)

    # -- ring structure --

    def _coerce(self, other) -> "SparsePoly":
        if isinstance(other, SparsePoly):
            if other.char != self.char:
                raise InvalidInput("mixing coefficient characteristics")
            if other.vars != self.vars:
                raise InvalidInput(f"variable mismatch {self.vars} vs {other.vars}")
            return other
        return SparsePoly.const(other, self.vars, self.char)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return SparsePoly(self.vars, out, self.char)

    __radd__ = __add__

    def __neg__(self):
        return SparsePoly(self.vars, {m: -c for m, c in self.terms.items()}, self.char)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        out: dict = {}
        cap = term_cap()
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                m = tuple(a + b for a, b in zip(m1, m2))
                out[m] = out.get(m, 0) + c1 * c2
            if len(out) > cap:
                raise ResourceError(f"product exceeds {cap} terms")
        return SparsePoly(self.vars, out, self.char)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise InvalidInput("negative power")
        result = SparsePoly.const(1, self.vars, self.char)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, SparsePoly):
            other = SparsePoly.const(other, self.vars, self.char)
        return self.vars == other.vars and self.char == other.char and self.terms == other.terms

    def __hash__(self):
        return hash((self.vars, self.char, frozenset(self.terms.items())))

    def __repr__(self):
        return f"SparsePoly({self.vars}, {len(self.terms)} terms, char={self.char})"

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    # -- structure --

    def with_vars(self, vars: Sequence[str]) -> "SparsePoly":
        """Re-embed into a superset of the current variables."""
        vars = tuple(vars)
        missing = set(self.vars) - set(vars)
        if missing:
            raise InvalidInput(f"cannot drop variables {sorted(missing)}")
        pos = [vars.index(v) for v in self.vars]
        out = {}
        for m, c in self.terms.items():
            e = [0] * len(vars)
            for k, p in zip(m, pos):
                e[p] = k
            out[tuple(e)] = c
        return SparsePoly(vars, out, self.char)

    def content_exponent(self, name: str) -> int:
        """Largest k such that name^k divides every term."""
        if not self.terms:
            raise InvalidInput("zero polynomial has no content")
        k = self.vars.index(name)
        return min(m[k] for m in self.terms)

    def xy_terms(self, coef_var: str = "t") -> dict[tuple[int, ...], dict[int, int]]:
        """Group terms by their monomial in the non-``coef_var`` variables."""
        if coef_var in self.vars:
            k = self.vars.index(coef_var)
        else:
            k = None
        out: dict = {}
        for m, c in self.terms.items():
            if k is None:
                key, deg = m, 0
            else:
                key, deg = m[:k] + m[k + 1:], m[k]
            out.setdefault(key, {})[deg] = c
        return out

    def dump(self, coef_var: str = "t") -> str:
        names = [v for v in self.vars if v != coef_var]
        lines = []
        for key, coeffs in sorted(self.xy_terms(coef_var).items()):
            mono = " ".join(f"{n}^{e}" if e != 1 else n for n, e in zip(names, key) if e) or "1"
            lines.append(f"{mono} : {_format_tpoly(coeffs, coef_var)}")
        return "\n".join(lines)


def _mod(c, p: int) -> int:
    if isinstance(c, Fraction):
        if c.denominator % p == 0:
            raise InvalidInput(f"coefficient {c} not defined in characteristic {p}")
        return c.numerator * pow(c.denominator, -1, p) % p
    return c % p


def _format_tpoly(coeffs: Mapping[int, int], var: str) -> str:
    parts = []
    for deg in sorted(coeffs):
        c = coeffs[deg]
        if deg == 0:
            parts.append(str(c))
            continue
        power = var + (f"^{deg}" if deg > 1 else "")
        parts.append(power if c == 1 else f"-{power}" if c == -1 else f"{c}*{power}")
    return " + ".join(parts).replace("+ -", "- ")


# -- ring maps ---------------------------------------------------------------


@dataclass(frozen=True)
class Substitution:
    """Each source variable maps to a monomial in the target variables."""

    images: Mapping[str, Mapping[str, int]]
    target: tuple[str, ...]

    def __post_init__(self):
        for src, mono in self.images.items():
            for v, e in mono.items():
                if v not in self.target:
                    raise InvalidInput(f"image of {src} uses unknown variable {v}")
                if e < 0:
                    raise InvalidInput(f"negative exponent in image of {src}")


def substitute(p: SparsePoly, s: Substitution) -> SparsePoly:
    for v in p.vars:
        if v not in s.images:
            raise InvalidInput(f"variable {v} is not mapped")
    target = tuple(s.target)
    images = [tuple(s.images[v].get(u, 0) for u in target) for v in p.vars]
    out: dict = {}
    for m, c in p.terms.items():
        e = [0] * len(target)
        for k, img in zip(m, images):
            if k:
                for idx, d in enumerate(img):
                    e[idx] += k * d
        key = tuple(e)
        out[key] = out.get(key, 0) + c
    return SparsePoly(target, out, p.char)


def identity_substitution(vars: Sequence[str]) -> Substitution:
    return Substitution({v: {v: 1} for v in vars}, tuple(vars))


def divide_by_monomial(p: SparsePoly, m: Mapping[str, int]) -> SparsePoly:
    d = tuple(m.get(v, 0) for v in p.vars)
    unknown = set(m) - set(p.vars)
    if unknown and any(m[v] for v in unknown):
        raise InvalidInput(f"unknown variables {sorted(unknown)}")
    out = {}
    for mono, c in p.terms.items():
        q = tuple(a - b for a, b in zip(mono, d))
        if min(q, default=0) < 0:
            raise NotDivisible(f"term {mono} of {p!r} is not divisible by {dict(m)}", witness=mono)
        out[q] = c
    return SparsePoly(p.vars, out, p.char)


# -- the sequence P_i --------------------------------------------------------


def build_P(depth: int, primes: Sequence[int], a_seq: Sequence[int] | None = None, char: int = 0) -> list[SparsePoly]:
    """P_0 = x, P_1 = y, P_(i+1) = P_i^(p_i^2) - (1+t) x^(p_i a_i)."""
    if depth < 1 or depth > len(primes):
        raise InvalidInput(f"depth {depth} needs 1..{len(primes)} primes")
    if char and char in primes[:depth]:
        raise InvalidInput("a prime of the sequence equals the characteristic")
    if a_seq is None:
        a_seq = build_a_seq(primes, depth)
    vars = ("x", "y", "t")
    x = SparsePoly.var("x", vars, char)
    one_t = SparsePoly.var("t", vars, char) + 1
    P = [x, SparsePoly.var("y", vars, char)]
    for i in range(1, depth):
        p = primes[i - 1]
        P.append(P[i] ** (p * p) - one_t * x ** (p * a_seq[i - 1]))
    return P


def template_polys(state: GenSeqState, z: str = "z", w: str = "w", vars: Sequence[str] | None = None) -> list[SparsePoly]:
    """Q_0..Q_depth rebuilt from the state's relations, with z, w and the
    unit variables treated as independent indeterminates."""
    unit_vars = sorted({v for mono in state.units for v, _ in mono}, key=lambda s: (len(s), s))
    if vars is None:
        vars = (z, w, *unit_vars, "t")
    char = state.characteristic
    Z = SparsePoly.var(z, vars, char)
    W = SparsePoly.var(w, vars, char)
    one_t = SparsePoly.var("t", vars, char) + 1
    Q = [Z, W]
    if state.depth >= 2:
        p = state.prime(1)
        tau = SparsePoly.monomial(dict(state.unit(1)), vars, char)
        Q.append(W ** (p * state.c) - one_t * tau ** p * Z ** (p * state.e1))
    for i in range(2, state.depth):
        q = state.prime(i)
        e, f = state.ef(i)
        tau = SparsePoly.monomial(dict(state.unit(i)), vars, char)
        Q.append(Q[i] ** (q * q) - one_t * tau ** q * Z ** (q * e) * W ** (q * f))
    return Q


# -- chain verification ------------------------------------------------------


@dataclass
class OracleReport:
    checks: list[Check] = field(default_factory=list)
    dumps: dict[str, str] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, ok: bool, witness: str = ""):
        self.checks.append(Check(name, bool(ok), witness))

    def to_json(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_json() for c in self.checks]}


def _verify_advance(state: GenSeqState, polys: list[SparsePoly], report: OracleReport, dump: bool) -> tuple[GenSeqState, list[SparsePoly]]:
    """Check the change of center R_l -> R_(l+1) on explicit polynomials.

    ``polys`` are Q_0..Q_depth at R_l in variables (x_l, y_l, units, t)."""
    new = advance_center(state)
    l1 = new.l
    src = polys[0].vars
    xl, yl = src[0], src[1]
    xn, yn = f"x{l1}", f"Y{l1}"
    target = (xn,) + tuple(v for v in src[2:] if v != "t") + (yn, "t")
    a0, b0 = new.bezout[-1]
    images = {v: {v: 1} for v in src[2:]}
    images[xl] = {xn: state.prime(1), yn: a0}
    images[yl] = {xn: state.e1, yn: b0}
    sub = Substitution(images, target)
    nux = new.nuz
    out = [SparsePoly.var(xn, target, state.characteristic)]
    for i in range(1, new.depth + 1):
        img = substitute(polys[i + 1], sub)
        predicted = center_divisor_exponent(state, i)
        found = img.content_exponent(xn)
        report.add(
            f"l={l1}: exceptional exponent of P_{i + 1},{state.l}",
            found == predicted,
            f"found {found}, predicted {predicted}",
        )
        drop = state.nuQ(i + 1) - new.nuQ(i)
        report.add(
            f"l={l1}: value drop of P_{i},{l1} equals divisor weight",
            drop == predicted * nux,
            f"{rat_str(drop)} vs {predicted}*{rat_str(nux)}",
        )
        out.append(divide_by_monomial(img, {xn: predicted}))
    # template relations at the new center, with the explicit P_(1,l+1) in place of y
    for i in range(1, new.depth):
        q = new.prime(i)
        a_i = new.e1 if i == 1 else new.ef(i)[0]
        tau = SparsePoly.monomial(dict(new.unit(i)), target, state.characteristic)
        one_t = SparsePoly.var("t", target, state.characteristic) + 1
        X = out[0]
        rhs = out[i] ** (q * q) - one_t * tau ** q * X ** (q * a_i)
        ok = out[i + 1] == rhs
        report.add(
            f"l={l1}: P_{i + 1},{l1} = P_{i},{l1}^{q * q} - (1+t) tau^{q} x^{q * a_i}",
            ok,
            f"{len(out[i + 1])} terms",
        )
    if dump:
        for i, p in enumerate(out):
            report.dumps[f"P_{i},{l1}"] = p.dump()
    return new, out


def _verify_steps(state: GenSeqState, step_max: int, report: OracleReport, dump: bool) -> None:
    """Check each quadratic step on template polynomials in free z, w."""
    for _ in range(step_max):
        try:
            case = quadratic_case(state)
        except ChainTerminated:
            report.add(f"l={state.l} j={state.j}: chain terminated", True, "nu(z) = nu(w)")
            return
        polys = template_polys(state)
        vars = polys[0].vars
        subs = {v: {v: 1} for v in vars}
        if case == 1:
            subs["z"] = {"z": 1, "w": 1}
            exc = "w"
        else:
            subs["w"] = {"z": 1, "w": 1}
            exc = "z"
        sub = Substitution(subs, vars)
        divisors = strict_divisors(state)
        new = quadratic_step(state)
        new_polys = template_polys(new, vars=vars)
        exc_val = new.nuw if exc == "w" else new.nuz
        tag = f"l={state.l} j={state.j}->{new.j} (case {case})"
        for i in range(2, state.depth + 1):
            img = substitute(polys[i], sub)
            found = img.content_exponent(exc)
            report.add(f"{tag}: exceptional exponent of Q_{i}", found == divisors[i],
                       f"found {found}, predicted {divisors[i]}")
            strict = divide_by_monomial(img, {exc: divisors[i]})
            report.add(f"{tag}: strict transform of Q_{i} matches relation", strict == new_polys[i],
                       f"{len(strict)} terms")
            drop = state.nuQ(i) - new.nuQ(i)
            report.add(f"{tag}: value drop of Q_{i} equals divisor weight",
                       drop == divisors[i] * exc_val,
                       f"{rat_str(drop)} vs {divisors[i]}*{rat_str(exc_val)}")
            if dump:
                report.dumps[f"Q_{i},{new.j} (l={new.l})"] = strict.dump()
        # Q_0, Q_1 of the new center are the new parameters
        img1 = substitute(polys[1], sub) if case == 2 else substitute(polys[0], sub)
        ok = divide_by_monomial(img1, {exc: 1}) == new_polys[1 if case == 2 else 0]
        report.add(f"{tag}: parameters transform monomially", ok)
        state = new


def verify_chain(config: ScenarioConfig, l_max: int = 1, step_max: int = 2, depth: int = 3, dump: bool = False) -> OracleReport:
    """Polynomial-level check of changes of center and quadratic steps.

    ``depth`` is the number of generating-sequence elements built at R_0;
    each change of center consumes one.
    """
    if depth - l_max < 1:
        raise InvalidInput(f"depth {depth} cannot support {l_max} changes of center")
    report = OracleReport()
    primes = build_primes(config.characteristic, max(config.prime_count, depth))
    P = build_P(depth, primes.primes, char=config.characteristic)
    cfg0 = ScenarioConfig(config.characteristic, len(primes), max(depth, 2), 0, config.bound)
    state = initial_state_R0(cfg0, depth=depth)
    tmpl = template_polys(state, "x", "y", vars=("x", "y", "t"))
    report.add("l=0: template relations reproduce P_i", all(a == b for a, b in zip(P, tmpl)))
    for l in range(l_max + 1):
        if step_max > 0 and state.depth >= 2:
            _verify_steps(state, step_max, report, dump)
        if l < l_max:
            # beyond R_0 the parameter y_l enters as a free indeterminate
            polys = P if l == 0 else template_polys(state, f"x{l}", f"y{l}")
            state, _ = _verify_advance(state, polys, report, dump)
    return report


# -- discriminant ------------------------------------------------------------


def _tp_trim(a: list) -> list:
    while a and a[-1] == 0:
        a.pop()
    return a


def _tp_mul(a, b, char):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    if char:
        out = [c % char for c in out]
    return _tp_trim(out)


def _tp_sub(a, b, char):
    n = max(len(a), len(b))
    out = [(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)]
    if char:
        out = [c % char for c in out]
    return _tp_trim(out)


def _tp_divexact(a, b, char):
    a = list(a)
    if not b:
        raise ZeroDivisionError("division by zero polynomial")
    lead = b[-1]
    inv = pow(lead, -1, char) if char else None
    q = [0] * max(len(a) - len(b) + 1, 0)
    while a and len(a) >= len(b):
        c = a[-1] * inv % char if char else Fraction(a[-1], lead)
        if not char and c.denominator != 1:
            raise NotDivisible("inexact division in Bareiss elimination")
        c = int(c)
        k = len(a) - len(b)
        q[k] = c
        for i, y in enumerate(b):
            a[i + k] -= c * y
        if char:
            a = [v % char for v in a]
        _tp_trim(a)
    if a:
        raise NotDivisible("inexact division in Bareiss elimination")
    return _tp_trim(q)


def _det_bareiss(mat: list[list[list[int]]], char: int) -> list[int]:
    """Fraction-free determinant of a matrix with entries in Z[t] or F_p[t]."""
    m = [[list(e) for e in row] for row in mat]
    n = len(m)
    sign = 1
    prev = [1]
    for k in range(n - 1):
        if not m[k][k]:
            for r in range(k + 1, n):
                if m[r][k]:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return []
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = _tp_sub(_tp_mul(m[i][j], m[k][k], char), _tp_mul(m[i][k], m[k][j], char), char)
                m[i][j] = _tp_divexact(num, prev, char)
        prev = m[k][k]
    det = m[n - 1][n - 1]
    if sign < 0:
        det = _tp_sub([], det, char)
    return det


def sylvester(f: list[list[int]], g: list[list[int]]) -> list[list[list[int]]]:
    """Sylvester matrix; f and g list coefficients in u from the top degree down."""
    m, n = len(f) - 1, len(g) - 1
    size = m + n
    rows = []
    for i in range(n):
        rows.append([[] for _ in range(i)] + [list(c) for c in f] + [[] for _ in range(size - m - 1 - i)])
    for i in range(m):
        rows.append([[] for _ in range(i)] + [list(c) for c in g] + [[] for _ in range(size - n - 1 - i)])
    return rows


def resultant(f: list[list[int]], g: list[list[int]], char: int = 0) -> list[int]:
    return _det_bareiss(sylvester(f, g), char)


def _binom_power(p: int, k: int, sign: int, char: int) -> list[int]:
    """sign * p^p * (1+t)^k as a coefficient list."""
    from math import comb

    out = [sign * p**p * comb(k, i) for i in range(k + 1)]
    if char:
        out = [c % char for c in out]
    return _tp_trim(out)


def discriminant_check(p_prime: int, char: int = 0) -> dict:
    """Discriminant of u^p - (1+t) over k[t] against the closed form."""
    if p_prime == char:
        raise InvalidInput("the extension degree equals the characteristic")
    if p_prime < 2:
        raise InvalidInput("degree must be at least 2")
    p = p_prime
    norm = (lambda c: c % char) if char else (lambda c: c)
    # u^p - (1+t), top degree first
    f = [[1]] + [[] for _ in range(p - 1)] + [_tp_trim([norm(-1), norm(-1)])]
    fprime = [_tp_trim([norm(p)])] + [[] for _ in range(p - 1)]
    res = resultant(f, fprime, char)
    sign = (-1) ** (p * (p - 1) // 2)
    disc = _tp_trim([norm(sign * c) for c in res])
    formula = _binom_power(p, p - 1, sign, char)
    # disc = unit * (1+t)^(p-1)?
    base = _tp_trim([1, 1]) if not char else _tp_trim([1 % char, 1 % char])
    power = [1]
    for _ in range(p - 1):
        power = _tp_mul(power, base, char)
    try:
        unit = _tp_divexact(disc, power, char)
        unit_ok = len(unit) == 1 and unit[0] != 0
    except NotDivisible:
        unit, unit_ok = None, False
    return {
        "p": p,
        "characteristic": char,
        "resultant": res,
        "discriminant": disc,
        "formula": formula,
        "matches_formula": disc == formula,
        "unit_times_power_of_1_plus_t": unit_ok,
        "unit": unit[0] if unit_ok else None,
    }


def format_tcoeffs(coeffs: Sequence[int]) -> str:
    return _format_tpoly({i: c for i, c in enumerate(coeffs) if c}, "t") or "0"


def verify_p_seq(depth: int, char: int = 0, count: int | None = None, dump: bool = False) -> OracleReport:
    """Expand P_0..P_depth and check each recurrence step term by term."""
    primes = build_primes(char, max(depth, count or 0)).primes
    a = build_a_seq(primes, depth)
    P = build_P(depth, primes, a, char)
    report = OracleReport()
    vars = P[0].vars
    one_t = SparsePoly.var("t", vars, char) + 1
    x = P[0]
    for i in range(1, depth):
        p = primes[i - 1]
        diff = P[i + 1] - P[i] ** (p * p)
        report.add(
            f"P_{i + 1} - P_{i}^{p * p} = -(1+t) x^{p * a[i - 1]}",
            diff == -(one_t * x ** (p * a[i - 1])),
            f"{len(P[i + 1].xy_terms())} monomials in x, y; {len(P[i + 1])} terms",
        )
    if dump:
        for i, poly in enumerate(P):
            report.dumps[f"P_{i}"] = poly.dump()
    return report
