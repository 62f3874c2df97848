"""Structural checks on a finished trace: exclusivity, causality, throttle, horizons."""

from __future__ import annotations

import math

from .engine import RUNTIME_ID, SimConfig, SimTrace
from .environment import Environment
from .manifest import PageManifest
from .policy import HydrationPlan

_TOL = 1e-6


def check_trace(trace: SimTrace, m: PageManifest, plan: HydrationPlan, env: Environment,
                cfg: SimConfig | None = None) -> list[str]:
    """Return a description of every violated trace invariant (empty when sound)."""
    cfg = cfg or SimConfig()
    errs: list[str] = []
    slowdown = env.device.cpu_slowdown

    tasks = list(trace.tasks)
    for a, b in zip(tasks, tasks[1:]):
        if b.start_ms < a.start_ms:
            errs.append(f"tasks out of order: {a.label}@{a.start_ms} before {b.label}@{b.start_ms}")
        if b.start_ms < a.end_ms - _TOL:
            errs.append(f"tasks overlap: {a.label} [{a.start_ms}, {a.end_ms}) and {b.label} @ {b.start_ms}")
    for tk in tasks:
        if tk.ready_ms > tk.start_ms + _TOL or tk.end_ms < tk.start_ms:
            errs.append(f"task {tk.label}: ready/start/end out of order")

    for f in trace.fetches:
        if not f.request_ms <= f.first_byte_ms <= f.done_ms:
            errs.append(f"fetch {f.id}: request <= firstByte <= done violated")

    exec_end = {tk.module_id: tk.end_ms for tk in tasks if tk.kind == "execute"}
    runtime_end = exec_end.get(None)
    plans = {p.module_id: p for p in plan.plans}
    for h in trace.hydrations:
        mod = m.module(h.module_id)
        if h.trigger_ms > h.task_start_ms + _TOL:
            errs.append(f"hydration {h.module_id}: starts before its trigger")
        if h.fetch_done_ms > h.task_start_ms + _TOL:
            errs.append(f"hydration {h.module_id}: starts before its code arrived")
        want = h.task_start_ms + mod.hydration_cost_ms * slowdown
        if not math.isclose(h.task_end_ms, want, rel_tol=1e-9, abs_tol=_TOL):
            errs.append(f"hydration {h.module_id}: duration is not cost x cpuSlowdown")
        if mod.chunk_bytes > 0 and (h.module_id not in exec_end
                                    or exec_end[h.module_id] > h.task_start_ms + _TOL):
            errs.append(f"hydration {h.module_id}: starts before its chunk executed")
        if m.shared_runtime_bytes > 0 and (runtime_end is None or runtime_end > h.task_start_ms + _TOL):
            errs.append(f"hydration {h.module_id}: starts before the shared runtime executed")
        first = min((f.request_ms for f in trace.fetches if f.module_id == h.module_id), default=None)
        if first is not None and first < min(trace.head_arrival_ms, h.trigger_ms) - _TOL:
            errs.append(f"hydration {h.module_id}: chunk requested before page head or trigger")

    if plan.throttle == "one-at-a-time":
        # tasks are recorded in execution order; hydrations likewise
        pos = {tk.module_id: i for i, tk in enumerate(tasks) if tk.kind == "hydrate"}
        hyd = list(trace.hydrations)
        for a, b in zip(hyd, hyd[1:]):
            if b.task_start_ms < a.task_end_ms - _TOL:
                errs.append(f"throttle: {a.module_id} and {b.module_id} hydrate concurrently")
                continue
            x, j = b.task_start_ms, pos[b.module_id]
            # idle at x: nothing earlier still running, nothing later already waiting
            blocking = [tk for i, tk in enumerate(tasks)
                        if (i < j and tk.end_ms > x + _TOL)
                        or (i > j and tk.ready_ms < x - _TOL)]
            if blocking:
                errs.append(f"throttle: {b.module_id} hydrated without an idle instant after {a.module_id}")

    for mod in m.modules:
        p = plans[mod.id]
        if p.trigger.kind != "ssr-only":
            continue
        if any(f.module_id == mod.id for f in trace.fetches):
            errs.append(f"ssr-only {mod.id}: fetched")
        if any(tk.module_id == mod.id for tk in tasks):
            errs.append(f"ssr-only {mod.id}: has main-thread work")
        if trace.hydration_for(mod.id) is not None:
            errs.append(f"ssr-only {mod.id}: hydrated")

    for tr in trace.triggers:
        p = plans[tr.module_id]
        if tr.cause == "timeout" and tr.at_ms != p.timeout_ms:
            errs.append(f"timeout {tr.module_id}: fired at {tr.at_ms}, expected {p.timeout_ms}")
        if p.timeout_ms is not None and tr.at_ms > p.timeout_ms:
            errs.append(f"timeout {tr.module_id}: trigger at {tr.at_ms} after its timeout")
    for p in plan.plans:
        if (p.timeout_ms is not None and p.trigger.kind != "ssr-only"
                and p.timeout_ms <= trace.end_ms and trace.trigger_for(p.module_id) is None):
            errs.append(f"timeout {p.module_id}: never fired")

    for paint in trace.paints:
        if any(tk.start_ms < paint.at_ms < tk.end_ms for tk in tasks):
            errs.append(f"paint {paint.module_id} committed while the main thread was busy")

    if sum(tk.duration_ms for tk in tasks) > trace.final_ms + _TOL:
        errs.append("work conservation: task time exceeds trace length")

    fetched = {f.id for f in trace.fetches}
    if m.shared_runtime_bytes > 0 and RUNTIME_ID not in fetched:
        errs.append("shared runtime was never fetched")
    return errs
