"""Command line: ``hydrasim simulate | compare | presets``.

Exit codes: 0 ok, 1 bad input (message names the file and field),
2 the simulator produced a trace that violates its own invariants.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .engine import SimConfig, config_from_dict, simulate, trace_to_csv
from .environment import PRESET_NAMES, Environment, environment_to_dict, load_environment, preset
from .invariants import check_trace
from .manifest import parse_manifest
from .metrics import compare_reports, compute_report, format_delta_table
from .runner import POLICIES, build
from .scenario import parse_scenario


class InputError(Exception):
    pass


class InvariantError(Exception):
    pass


def _read(path: str, what: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{what} {path}: {exc.strerror or exc}") from None


def _load(path: str, what: str, parse):
    text = _read(path, what)
    try:
        return parse(text)
    except (ValueError, TypeError) as exc:
        raise InputError(f"{what} {path}: {exc}") from None


def _load_env(args) -> Environment:
    if args.env_file:
        return _load(args.env_file, "env-file", load_environment)
    try:
        return preset(args.env)
    except ValueError as exc:
        raise InputError(f"--env: {exc}") from None


def _load_config(args) -> SimConfig:
    if not args.config:
        return SimConfig()
    return _load(args.config, "config", lambda t: config_from_dict(json.loads(t)))


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _run_one(m, env, s, cfg, policy):
    pm, plan = build(m, env, policy)
    trace = simulate(pm, plan, env, s, cfg)
    errs = check_trace(trace, pm, plan, env, cfg)
    if errs:
        raise InvariantError(f"{policy}: " + "; ".join(errs))
    return plan, trace, compute_report(trace, pm, s, cfg)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_simulate(args) -> None:
    m = _load(args.manifest, "manifest", parse_manifest)
    s = _load(args.scenario, "scenario", parse_scenario)
    env, cfg = _load_env(args), _load_config(args)
    try:
        plan, trace, report = _run_one(m, env, s, cfg, args.policy)
    except ValueError as exc:
        raise InputError(f"scenario {args.scenario}: {exc}") from None
    if args.dump_plan:
        Path(args.dump_plan).write_text(_dumps(plan.to_json()), encoding="utf-8")
    if args.trace:
        Path(args.trace).write_text(trace_to_csv(trace), encoding="utf-8")
    _emit(_dumps(report.to_json()), args.out)


def cmd_compare(args) -> None:
    m = _load(args.manifest, "manifest", parse_manifest)
    s = _load(args.scenario, "scenario", parse_scenario)
    env, cfg = _load_env(args), _load_config(args)
    try:
        _, base_trace, base = _run_one(m, env, s, cfg, "baseline")
        plan, mrah_trace, mrah = _run_one(m, env, s, cfg, "mrah")
    except ValueError as exc:
        raise InputError(f"scenario {args.scenario}: {exc}") from None
    delta = compare_reports(base, mrah)
    if args.dump_plan:
        Path(args.dump_plan).write_text(_dumps(plan.to_json()), encoding="utf-8")
    if args.trace:
        stem = Path(args.trace)
        stem.with_name(stem.stem + ".baseline" + stem.suffix).write_text(trace_to_csv(base_trace), encoding="utf-8")
        stem.with_name(stem.stem + ".mrah" + stem.suffix).write_text(trace_to_csv(mrah_trace), encoding="utf-8")
    doc = {"baseline": base.to_json(), "mrah": mrah.to_json(), "delta": delta.to_json()}
    _emit(_dumps(doc) + "\n" + format_delta_table(delta), args.out)


def cmd_presets(args) -> None:
    _emit(_dumps({name: environment_to_dict(preset(name)) for name in PRESET_NAMES}), None)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hydrasim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--manifest", required=True)
        p.add_argument("--scenario", required=True)
        g = p.add_mutually_exclusive_group()
        g.add_argument("--env", default="desktop-fast", help=f"preset: {', '.join(PRESET_NAMES)}")
        g.add_argument("--env-file")
        p.add_argument("--config")
        p.add_argument("--out")
        p.add_argument("--trace", help="write the trace as CSV")
        p.add_argument("--dump-plan", help="write the resolved hydration plan as JSON")

    p = sub.add_parser("simulate", help="run one policy and print its metrics")
    common(p)
    p.add_argument("--policy", choices=POLICIES, default="mrah")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="run baseline and mrah on the same inputs")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("presets", help="list the built-in environments")
    p.set_defaults(func=cmd_presets)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except InvariantError as exc:
        print(f"internal error: trace invariant violated: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
