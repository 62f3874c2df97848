"""One-call helpers that wire manifest, policy, engine and metrics together."""

from __future__ import annotations

from typing import Optional

from .engine import SimConfig, SimTrace, simulate
from .environment import Environment
from .manifest import PageManifest, baseline_transform
from .metrics import DeltaReport, MetricsReport, compare_reports, compute_report
from .policy import HydrationPlan, plan_for_baseline, resolve_plan
from .scenario import UserScenario

POLICIES = ("mrah", "baseline")


def build(m: PageManifest, env: Environment, policy: str) -> tuple[PageManifest, HydrationPlan]:
    if policy == "mrah":
        return m, resolve_plan(m, env)
    if policy == "baseline":
        bm = baseline_transform(m)
        return bm, plan_for_baseline(bm)
    raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")


def run_policy(m: PageManifest, env: Environment, s: UserScenario, policy: str,
               cfg: Optional[SimConfig] = None) -> tuple[SimTrace, MetricsReport]:
    cfg = cfg or SimConfig()
    pm, plan = build(m, env, policy)
    trace = simulate(pm, plan, env, s, cfg)
    return trace, compute_report(trace, pm, s, cfg)


def run_comparison(m: PageManifest, env: Environment, s: UserScenario,
                   cfg: Optional[SimConfig] = None) -> tuple[MetricsReport, MetricsReport, DeltaReport]:
    _, base = run_policy(m, env, s, "baseline", cfg)
    _, mrah = run_policy(m, env, s, "mrah", cfg)
    return base, mrah, compare_reports(base, mrah)
