"""Semigroup-gap certificates and composite-valuation lifts.

Adjoining a p-th root of 1+t (p the prime attached to Q_1 at the center)
splits Q_2 into p factors h_j.  All but one of them have value e1*nu(z);
the remaining one carries the gap value, which is not in the value
semigroup of the original ring.  A certificate records the value-level
facts so they can be rechecked with exact arithmetic alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Sequence

from .errors import InvalidInput, InvariantFailure
from .exactnum import (
    LexVal,
    NumSgp,
    group_of,
    index,
    project,
    rat,
    rat_str,
    sgp_enumerate,
    sgp_member,
)
from .transform import GenSeqState

CERT_VERSION = 1
CORE_CHECKS = ("sum", "lt_nuQ2", "not_in_semigroup")
SECTION = "monomial section: phi(f) = (nu(f), 0) on monomials in the parameters, phi(t) = (0, 1)"


@dataclass(frozen=True)
class ExtensionSpec:
    p: int
    omega_count: int

    @classmethod
    def for_state(cls, state: GenSeqState) -> "ExtensionSpec":
        p = state.prime(1)
        if p == state.characteristic:
            raise InvalidInput("extension degree equals the characteristic")
        return cls(p, p)


def _check_ext(state: GenSeqState, ext: ExtensionSpec) -> None:
    if ext.p != state.prime(1):
        raise InvalidInput(f"extension degree {ext.p} does not match the prime {state.prime(1)} at l={state.l}")
    if ext.p == state.characteristic:
        raise InvalidInput("extension degree equals the characteristic")
    if state.depth < 2:
        raise InvalidInput("the state must track Q_2")


def _h_values(p: int, e1: int, nuz: Fraction, nuQ2: Fraction) -> list[Fraction]:
    generic = e1 * nuz
    return [generic] * (p - 1) + [nuQ2 - (p - 1) * generic]


def h_values(state: GenSeqState, ext: ExtensionSpec) -> list[Fraction]:
    _check_ext(state, ext)
    vals = _h_values(ext.p, state.e1, state.nuz, state.nuQ(2))
    if sum(vals) != state.nuQ(2):
        raise InvariantFailure("h-values do not sum to nu(Q_2)")
    return vals


@dataclass
class GapCertificate:
    snapshot: dict
    h_values: list[Fraction]
    gap: Fraction
    checks: dict[str, bool]
    witness: dict = field(default_factory=dict)
    narrative: str = ""

    @property
    def issued(self) -> bool:
        # not_in_group is the stronger witness; the claim needs only the other three
        return all(self.checks[k] for k in CORE_CHECKS)

    @property
    def status(self) -> str:
        return "issued" if self.issued else "refuted"

    def to_json(self) -> dict:
        return {
            "version": CERT_VERSION,
            "kind": "prop1-gap",
            "snapshot": self.snapshot,
            "h_values": [rat_str(v) for v in self.h_values],
            "gap": rat_str(self.gap),
            "checks": {k: self.checks[k] for k in ("sum", "lt_nuQ2", "not_in_group", "not_in_semigroup")},
            "status": self.status,
            "witness": self.witness,
            "narrative": self.narrative,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _snapshot(state: GenSeqState, ext: ExtensionSpec) -> dict:
    return {
        "characteristic": state.characteristic,
        "l": state.l,
        "j": state.j,
        "p": ext.p,
        "next_prime": state.prime(2),
        "nuQ0": rat_str(state.nuz),
        "nuQ1": rat_str(state.nuw),
        "nuQ2": rat_str(state.nuQ(2)),
        "c": state.c,
        "e1": state.e1,
    }


def _derive(snap: dict, bound: Fraction | None = None) -> tuple[list[Fraction], Fraction, dict, dict]:
    p, c, e1 = int(snap["p"]), int(snap["c"]), int(snap["e1"])
    nuz, nuw, nuQ2 = rat(snap["nuQ0"]), rat(snap["nuQ1"]), rat(snap["nuQ2"])
    hv = _h_values(p, e1, nuz, nuQ2)
    gap = hv[-1]
    sgp = NumSgp.of([nuz, nuw])
    grp = group_of([nuz, nuw])
    checks = {
        "sum": sum(hv) == nuQ2,
        "lt_nuQ2": gap < nuQ2,
        "not_in_group": gap not in grp,
        "not_in_semigroup": gap >= 0 and not sgp_member(sgp, gap),
    }
    scaled = gap * sgp.scale
    witness = {
        "scale": sgp.scale,
        "scaled_generators": list(sgp.scaled_gens),
        "scaled_gap": rat_str(scaled),
        "group_generator": rat_str(grp.generator),
        "index_Q2": index(group_of([nuz, nuw, nuQ2]), grp),
        "expected_index_Q2": int(snap["next_prime"]),
        "balance": c * nuw == e1 * nuz and gcd(c, e1) == 1,
        "nuQ2_above_p_c_nuQ1": nuQ2 > p * c * nuw,
    }
    if scaled.denominator == 1:
        ap = sgp.apery()
        witness["apery_floor"] = ap[scaled.numerator % len(ap)]
    if bound is not None:
        top = min(bound, nuQ2)
        witness["truncated_semigroup"] = [rat_str(v) for v in sgp_enumerate(sgp, top)]
    return hv, gap, checks, witness


def _narrative(snap: dict, checks: dict) -> str:
    p, nxt = snap["p"], snap["next_prime"]
    if not all(checks[k] for k in CORE_CHECKS):
        return (
            "refuted: the distinguished factor's value lies in the semigroup generated by "
            "nu(z), nu(w), so no gap is witnessed for this state"
        )
    return (
        f"Adjoin lambda with lambda^{p} = 1+t. Q_2 splits into {p} factors; {p - 1} of them have value "
        f"e1*nu(z) = {rat_str(Fraction(snap['e1']) * rat(snap['nuQ0']))} and the last has the gap value. "
        "The gap is below nu(Q_2), so in the old ring it could only be reached from nu(z), nu(w). "
        f"It is not in that semigroup; were it, nu(Q_2) would lie in G(nu(z), nu(w)), which has "
        f"index {nxt} in G(nu(z), nu(w), nu(Q_2)). Hence the extended ring has a strictly larger semigroup; "
        "the Henselization and completion statements rest on this."
    )


def certify_gap(state: GenSeqState, ext: ExtensionSpec | None = None, bound=None) -> GapCertificate:
    """Issue (or refute) the gap certificate for ``state``.

    ``bound`` optionally attaches the truncated semigroup S(nu(z), nu(w))
    below min(bound, nu(Q_2)) to the witness.
    """
    if ext is None:
        ext = ExtensionSpec.for_state(state)
    hv = h_values(state, ext)
    snap = _snapshot(state, ext)
    derived_hv, gap, checks, witness = _derive(snap, None if bound is None else rat(bound))
    assert derived_hv == hv
    if not checks["lt_nuQ2"]:
        raise InvariantFailure(f"gap {rat_str(gap)} is not below nu(Q_2) = {rat_str(state.nuQ(2))}")
    return GapCertificate(snap, hv, gap, checks, witness, _narrative(snap, checks))


def recheck(cert: dict | str) -> bool:
    """Re-derive every claim of a certificate from its snapshot."""
    if isinstance(cert, str):
        try:
            cert = json.loads(cert)
        except json.JSONDecodeError as exc:
            raise InvalidInput(f"certificate is not valid JSON: {exc}") from exc
    if not isinstance(cert, dict):
        raise InvalidInput("certificate must be a JSON object")
    kind = cert.get("kind")
    if cert.get("version") != CERT_VERSION:
        return False
    if kind == "prop1-gap":
        return _recheck_gap(cert)
    if kind == "prop2-lift":
        return _recheck_lift(cert)
    raise InvalidInput(f"unknown certificate kind {kind!r}")


def _recheck_gap(cert: dict) -> bool:
    try:
        snap = cert["snapshot"]
        stored_hv = [rat(v) for v in cert["h_values"]]
        stored_gap = rat(cert["gap"])
        stored_checks = cert["checks"]
        hv, gap, checks, witness = _derive(snap)
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed certificate: {exc}") from exc
    if sorted(stored_hv) != sorted(hv) or stored_gap != gap:
        return False
    if sum(stored_hv) != rat(snap["nuQ2"]):
        return False
    if stored_checks != checks:
        return False
    if not (witness["balance"] and witness["nuQ2_above_p_c_nuQ1"]):
        return False
    if witness["index_Q2"] != witness["expected_index_Q2"]:
        return False
    return all(checks[k] for k in CORE_CHECKS)


# -- composite valuation lift -------------------------------------------------


@dataclass
class SurjectionCertificate:
    lifts: list[tuple[Fraction, LexVal]]
    t_lift: LexVal
    section: str = SECTION

    @property
    def passed(self) -> bool:
        return all(project(lift) == v for v, lift in self.lifts) and project(self.t_lift) == 0

    def to_json(self) -> dict:
        return {
            "version": CERT_VERSION,
            "kind": "prop2-lift",
            "section": self.section,
            "t_value": self.t_lift.to_json(),
            "lifts": [{"value": rat_str(v), "lift": lift.to_json()} for v, lift in self.lifts],
            "checks": {"projection": self.passed},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def composite_lift(values: Sequence, t_value: LexVal = LexVal(Fraction(0), 1)) -> SurjectionCertificate:
    """Lift each value of the rank-1 semigroup to the rank-2 model.

    Under the monomial section the minimal lift of a value a is (a, 0)."""
    vals = [rat(v) for v in values]
    for v in vals:
        if v < 0:
            raise InvalidInput(f"negative value {rat_str(v)}")
    lifts = [(v, LexVal(v, 0)) for v in vals]
    for v, lift in lifts:
        assert project(lift) == v
    return SurjectionCertificate(lifts, t_value)


def lift_from_state(state: GenSeqState, bound) -> SurjectionCertificate:
    sample = sgp_enumerate(NumSgp.of(state.values()), bound)
    return composite_lift(sample)


def _recheck_lift(cert: dict) -> bool:
    try:
        t_lift = LexVal.from_json(cert["t_value"])
        pairs = [(rat(x["value"]), LexVal.from_json(x["lift"])) for x in cert["lifts"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInput(f"malformed certificate: {exc}") from exc
    ok = all(project(lift) == v and v >= 0 for v, lift in pairs)
    ok = ok and project(t_lift) == 0 and t_lift > LexVal(Fraction(0), 0)
    return ok and cert.get("checks", {}).get("projection") is True
