"""Exact valuation semigroups along quadratic transforms, with gap certificates."""

from .errors import (
    ChainTerminated,
    InvalidInput,
    InvariantFailure,
    NotACenter,
    NotASubgroup,
    NotDivisible,
    ResourceError,
    ValgapError,
)
from .exactnum import LexVal, NumSgp, QSubgroup, Rat, group_of, index, sgp_enumerate, sgp_member
from .gapcert import ExtensionSpec, GapCertificate, certify_gap, composite_lift, h_values, recheck
from .scenario import ScenarioConfig, build_a_seq, build_primes, initial_state_R0, state_at_center, tower_ledger
from .transform import GenSeqState, advance_center, audit, audit_Di, quadratic_step, run_chain

__version__ = "0.1.0"
