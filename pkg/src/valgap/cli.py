"""Command-line front end.

Exit codes: 0 success, 1 invariant violation or refuted certificate,
2 invalid input, 3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from fractions import Fraction

from .errors import InvalidInput, ValgapError
from .exactnum import NumSgp, rat, rat_str, sgp_enumerate, sgp_member
from .gapcert import ExtensionSpec, certify_gap, lift_from_state, recheck
from .polyoracle import discriminant_check, format_tcoeffs, verify_chain, verify_p_seq
from .scenario import DEFAULT_SCENARIO, ScenarioConfig, initial_state_R0, state_at_center
from .transform import GenSeqState, advance_center, audit, audit_Di, run_chain


def _write(path: str, text: str) -> None:
    """Write atomically: a failed run never leaves a partial file."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".valgap-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
            if not text.endswith("\n"):
                f.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read_json(path: str):
    try:
        with open(path) as f:
            return json.load(f)
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"{path} is not valid JSON: {exc}") from exc


def _load_scenario(arg: str | None) -> ScenarioConfig:
    if arg is None or arg == "default":
        return DEFAULT_SCENARIO
    return ScenarioConfig.from_json(_read_json(arg))


def _load_state(args) -> GenSeqState:
    if getattr(args, "state", None):
        return GenSeqState.from_json(_read_json(args.state))
    return state_at_center(_load_scenario(getattr(args, "scenario", None)))


def _emit(args, payload: dict, text: str) -> None:
    body = json.dumps(payload, indent=2)
    if getattr(args, "out", None):
        _write(args.out, body)
    print(body if args.json else text)


# -- subcommands -------------------------------------------------------------


def cmd_scenario(args) -> int:
    cfg = ScenarioConfig(args.char, args.primes, args.depth, args.l, rat(args.bound))
    payload = cfg.to_json()
    _emit(args, payload, f"scenario: characteristic {cfg.characteristic}, primes {list(cfg.primes().primes)}, "
                         f"depth {cfg.depth}, l {cfg.l}, bound {rat_str(cfg.bound)}")
    return 0


def _parse_steps(s: str) -> int | None:
    if s == "auto":
        return None
    try:
        k = int(s)
    except ValueError:
        raise InvalidInput(f"--steps must be 'auto' or an integer, got {s!r}") from None
    if k < 0:
        raise InvalidInput("--steps must be nonnegative")
    return k


def cmd_chain(args) -> int:
    cfg = _load_scenario(args.scenario)
    advance = cfg.l if args.advance is None else args.advance
    if advance < 0:
        raise InvalidInput("--advance must be nonnegative")
    steps = _parse_steps(args.steps)
    state = initial_state_R0(ScenarioConfig(cfg.characteristic, max(cfg.prime_count, cfg.depth + advance),
                                            cfg.depth, 0, cfg.bound), depth=cfg.depth + advance)
    for _ in range(advance):
        state = advance_center(state)
    states, terminated = run_chain(state, steps)
    records, lines, ok = [], [], True
    for s in states:
        rec = {"state": s.to_json()}
        line = (f"l={s.l} j={s.j}: nu(z)={rat_str(s.nuz)} nu(w)={rat_str(s.nuw)} c={s.c} e1={s.e1}"
                + (f" nu(Q_2)={rat_str(s.nuQ(2))}" if s.depth >= 2 else ""))
        if args.audit:
            rep = audit(s)
            rec["audit"] = rep.to_json()
            ok &= rep.passed
            line += " audit " + ("pass" if rep.passed else "FAIL: " + ", ".join(c.name for c in rep.failures()))
        if args.di_budget is not None:
            di = audit_Di(s, rat(args.di_budget))
            rec["d_i"] = di.to_json()
            ok &= di.passed
            line += f" D(i) {'pass' if di.passed else 'FAIL'} ({di.tuples} tuples)"
        records.append(rec)
        lines.append(line)
    lines.append(f"{len(states) - 1} quadratic steps" + ("; chain terminated (nu(z) = nu(w))" if terminated else ""))
    payload = {"scenario": cfg.to_json(), "advance": advance, "states": records, "terminated": terminated}
    _emit(args, payload, "\n".join(lines))
    return 0 if ok else 1


def cmd_semigroup(args) -> int:
    gens = [rat(g) for g in args.gens.split(",") if g.strip()]
    s = NumSgp.of(gens)
    payload: dict = {"generators": [rat_str(g) for g in s.generators]}
    text = []
    if args.member is not None:
        m = sgp_member(s, rat(args.member))
        payload["member"] = {"value": rat_str(rat(args.member)), "result": m}
        text.append("true" if m else "false")
    if args.bound is not None:
        elems = sgp_enumerate(s, rat(args.bound))
        payload["bound"] = rat_str(rat(args.bound))
        payload["elements"] = [rat_str(v) for v in elems]
        text.append(" ".join(str(v) for v in elems))
    if args.member is None and args.bound is None:
        raise InvalidInput("give --member, --bound or both")
    _emit(args, payload, "\n".join(text))
    return 0


def cmd_oracle(args) -> int:
    if args.action != "verify":
        raise InvalidInput(f"unknown oracle action {args.action!r}")
    cfg = ScenarioConfig(args.char, max(5, args.depth + 1), max(args.depth - args.l_max, 2), 0)
    if args.what == "disc":
        ps = [args.p] if args.p else [p for p in (2, 3, 5, 7) if p != args.char]
        results = [discriminant_check(p, args.char) for p in ps]
        ok = all(r["matches_formula"] and r["unit_times_power_of_1_plus_t"] for r in results)
        lines = [
            f"p={r['p']}: disc = {format_tcoeffs(r['discriminant'])}; closed form {format_tcoeffs(r['formula'])}; "
            f"match {r['matches_formula']}; unit*(1+t)^(p-1) {r['unit_times_power_of_1_plus_t']}"
            for r in results
        ]
        _emit(args, {"what": "disc", "passed": ok, "results": results}, "\n".join(lines))
        return 0 if ok else 1
    if args.what == "p-seq":
        rep = verify_p_seq(args.depth, args.char, dump=args.dump)
    elif args.what == "eq21":
        rep = verify_chain(cfg, l_max=args.l_max, step_max=0, depth=args.depth, dump=args.dump)
    else:
        rep = verify_chain(cfg, l_max=args.l_max, step_max=args.steps, depth=args.depth, dump=args.dump)
    lines = [f"{'pass' if c.passed else 'FAIL'}  {c.name}" + (f"  [{c.witness}]" if c.witness else "")
             for c in rep.checks]
    for name, body in rep.dumps.items():
        lines.append(f"--- {name}\n{body}")
    payload = {"what": args.what, **rep.to_json()}
    if args.dump:
        payload["dumps"] = rep.dumps
    _emit(args, payload, "\n".join(lines))
    return 0 if rep.passed else 1


def cmd_certify(args) -> int:
    state = _load_state(args)
    if args.kind == "prop1":
        cert = certify_gap(state, ExtensionSpec.for_state(state), args.bound)
        _emit(args, cert.to_json(), f"{cert.status}: gap {rat_str(cert.gap)} at l={state.l} j={state.j}; "
                                    "h-values " + ", ".join(rat_str(v) for v in cert.h_values))
        return 0 if cert.issued else 1
    if args.bound is None:
        raise InvalidInput("certify lift needs --bound")
    cert = lift_from_state(state, args.bound)
    _emit(args, cert.to_json(), f"{len(cert.lifts)} values lifted; projection check {cert.passed}")
    return 0 if cert.passed else 1


def cmd_recheck(args) -> int:
    try:
        with open(args.cert) as f:
            text = f.read()
    except OSError as exc:
        raise InvalidInput(f"cannot read {args.cert}: {exc.strerror}") from exc
    ok = recheck(text)
    print(json.dumps({"valid": ok}) if args.json else ("true" if ok else "false"))
    return 0 if ok else 1


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output on stdout")

    parser = argparse.ArgumentParser(prog="valgap", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scenario", parents=[common], help="write a scenario config")
    p.add_argument("--char", type=int, default=0)
    p.add_argument("--primes", type=int, default=5, help="number of primes")
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--bound", default="8")
    p.add_argument("--out")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("chain", parents=[common], help="advance the center, then run quadratic steps")
    p.add_argument("--scenario", default="default")
    p.add_argument("--advance", type=int)
    p.add_argument("--steps", default="auto")
    p.add_argument("--audit", action="store_true")
    p.add_argument("--di-budget", help="also run the residue independence audit up to this value")
    p.add_argument("--out")
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("semigroup", parents=[common], help="semigroup membership and enumeration")
    p.add_argument("--gens", required=True, help="comma-separated rationals, e.g. 1/2,1/3")
    p.add_argument("--bound")
    p.add_argument("--member")
    p.add_argument("--out")
    p.set_defaults(func=cmd_semigroup)

    p = sub.add_parser("oracle", parents=[common], help="polynomial-level verification")
    p.add_argument("action", choices=["verify"])
    p.add_argument("--what", choices=["p-seq", "eq21", "strict", "disc"], required=True)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--p", type=int)
    p.add_argument("--char", type=int, default=0)
    p.add_argument("--l-max", type=int, default=1)
    p.add_argument("--steps", type=int, default=2)
    p.add_argument("--dump", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("certify", parents=[common], help="issue a certificate")
    p.add_argument("kind", choices=["prop1", "lift"])
    p.add_argument("--state", help="state JSON; defaults to the center of --scenario")
    p.add_argument("--scenario", default="default")
    p.add_argument("--bound", type=Fraction)
    p.add_argument("--out")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("recheck", parents=[common], help="recheck a certificate offline")
    p.add_argument("--cert", required=True)
    p.set_defaults(func=cmd_recheck)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValgapError as exc:
        print(f"valgap: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
