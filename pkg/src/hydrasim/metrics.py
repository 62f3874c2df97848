"""Web-vitals style metrics over a simulation trace, and baseline/variant deltas."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .engine import SimConfig, SimTrace, viewport_visible
from .manifest import PageManifest
from .scenario import UserScenario, scroll_position_at


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class MetricsReport:
    fcp_ms: float
    lcp_ms: float
    tti_ms: float
    tbt_ms: float
    cls: float
    fid_ms: Optional[float]
    script_bytes: int
    dead_clicks: int

    def to_json(self) -> dict:
        return {
            "fcpMs": _ms(self.fcp_ms),
            "lcpMs": _ms(self.lcp_ms),
            "ttiMs": _ms(self.tti_ms),
            "tbtMs": _ms(self.tbt_ms),
            "cls": round(self.cls, 4),
            "fidMs": _ms(self.fid_ms),
            "scriptBytes": int(self.script_bytes),
            "deadClicks": int(self.dead_clicks),
        }


def _ms(v: Optional[float]) -> Optional[float]:
    return None if v is None else round(v, 2)


def compute_fcp(trace: SimTrace) -> float:
    if not trace.paints:
        raise MetricsError("no paint")
    return min(p.at_ms for p in trace.paints)


def compute_lcp(trace: SimTrace, m: PageManifest, s: UserScenario) -> float:
    """Content paint of the largest above-the-fold LCP candidate.

    Falls back to the tallest module painted in the initial viewport when no
    flagged candidate is above the fold.
    """
    content = {}
    for p in trace.paints:
        if p.kind == "content":
            content.setdefault(p.module_id, p.at_ms)
    if not content:
        raise MetricsError("no content paint")
    above = [mod for mod in m.modules
             if mod.id in content
             and viewport_visible(mod.offset_px, mod.height_px, 0, s.viewport_height_px, 0)]
    pool = [mod for mod in above if mod.lcp_candidate] or above
    if not pool:
        raise MetricsError("no content paint in the initial viewport")
    best = max(pool, key=lambda mod: mod.height_px)  # max() keeps the first on ties
    return content[best.id]


def _max_in_flight(trace: SimTrace, lo: float, hi: float) -> int:
    """Peak number of fetches in flight over [lo, hi)."""
    spans = [(f.request_ms, f.done_ms) for f in trace.fetches if f.done_ms > lo and f.request_ms < hi]
    if not spans:
        return 0
    probes = [lo] + [a for a, _ in spans if lo < a < hi]
    return max(sum(1 for a, b in spans if a <= x < b) for x in probes)


def compute_tti(trace: SimTrace, cfg: Optional[SimConfig] = None) -> float:
    """Start of the first quiet window at or after FCP.

    Quiet means: for ``quiet_window_ms`` there is no task longer than the
    long-task threshold and never more than ``quiet_max_fetches`` requests in
    flight. The window may not start inside a task.
    """
    cfg = cfg or SimConfig()
    fcp = compute_fcp(trace)
    window = cfg.quiet_window_ms
    limit = cfg.long_task_threshold_ms
    busy = [(tk.start_ms, tk.end_ms) for tk in trace.tasks if tk.end_ms > tk.start_ms]
    long_starts = [tk.start_ms for tk in trace.tasks if tk.duration_ms > limit]
    cands = {fcp}
    cands.update(tk.end_ms for tk in trace.tasks if tk.end_ms >= fcp)
    cands.update(f.done_ms for f in trace.fetches if f.done_ms >= fcp)
    for t in sorted(cands):
        if any(a <= t < b for a, b in busy):
            continue
        if any(t <= a < t + window for a in long_starts):
            continue
        if _max_in_flight(trace, t, t + window) > cfg.quiet_max_fetches:
            continue
        return t
    raise AssertionError("no quiet window found")  # unreachable: the last candidate is always quiet


def compute_tbt(trace: SimTrace, tti_ms: float, cfg: Optional[SimConfig] = None) -> float:
    cfg = cfg or SimConfig()
    fcp = compute_fcp(trace)
    return sum(max(0.0, tk.duration_ms - cfg.long_task_threshold_ms)
               for tk in trace.tasks if fcp <= tk.start_ms < tti_ms)


def compute_cls(trace: SimTrace, m: PageManifest, s: UserScenario) -> float:
    total = 0.0
    for shift in trace.layout_shifts:
        mod = m.module(shift.module_id)
        y = scroll_position_at(s, min(shift.at_ms, s.end_ms))
        tallest = max(shift.from_px, shift.to_px)
        if viewport_visible(mod.offset_px, tallest, y, s.viewport_height_px, 0):
            total += abs(shift.to_px - shift.from_px) / s.viewport_height_px
    return total


def compute_fid_and_deadclicks(trace: SimTrace) -> tuple[Optional[float], int]:
    fid = None
    for it in sorted(trace.interactions, key=lambda i: i.click_ms):
        if it.handled_ms is not None:
            fid = it.handled_ms - it.click_ms
            break
    return fid, sum(1 for it in trace.interactions if it.dead)


def compute_script_bytes(trace: SimTrace) -> int:
    return sum(f.bytes for f in trace.fetches)


def compute_report(trace: SimTrace, m: PageManifest, s: UserScenario,
                   cfg: Optional[SimConfig] = None) -> MetricsReport:
    cfg = cfg or SimConfig()
    tti = compute_tti(trace, cfg)
    fid, dead = compute_fid_and_deadclicks(trace)
    return MetricsReport(
        fcp_ms=compute_fcp(trace),
        lcp_ms=compute_lcp(trace, m, s),
        tti_ms=tti,
        tbt_ms=compute_tbt(trace, tti, cfg),
        cls=compute_cls(trace, m, s),
        fid_ms=fid,
        script_bytes=compute_script_bytes(trace),
        dead_clicks=dead,
    )


# --- comparison ------------------------------------------------------------

METRIC_FIELDS = (
    ("fcpMs", "fcp_ms"), ("lcpMs", "lcp_ms"), ("ttiMs", "tti_ms"), ("tbtMs", "tbt_ms"),
    ("cls", "cls"), ("fidMs", "fid_ms"), ("scriptBytes", "script_bytes"),
    ("deadClicks", "dead_clicks"),
)


@dataclass(frozen=True)
class MetricDelta:
    baseline: Optional[float]
    variant: Optional[float]
    delta: Optional[float]
    percent: Optional[float]


@dataclass(frozen=True)
class DeltaReport:
    rows: dict[str, MetricDelta]

    def __getitem__(self, metric: str) -> MetricDelta:
        return self.rows[metric]

    def to_json(self) -> dict:
        out = {}
        for name, d in self.rows.items():
            out[name] = {
                "baseline": _num(name, d.baseline),
                "variant": _num(name, d.variant),
                "delta": _num(name, d.delta),
                "percent": None if d.percent is None else round(d.percent, 2),
            }
        return out


def _num(name: str, v: Optional[float]):
    if v is None:
        return None
    if name in ("scriptBytes", "deadClicks"):
        return int(v)
    if name == "cls":
        return round(v, 4)
    return round(v, 2)


def compare_reports(baseline: MetricsReport, variant: MetricsReport) -> DeltaReport:
    """Per-metric change from ``baseline`` to ``variant``; negative percent = smaller."""
    rows = {}
    for name, attr in METRIC_FIELDS:
        b, v = getattr(baseline, attr), getattr(variant, attr)
        if b is None or v is None:
            rows[name] = MetricDelta(b, v, None, None)
            continue
        pct = (v - b) / b * 100.0 if b > 0 else None
        rows[name] = MetricDelta(b, v, v - b, pct)
    return DeltaReport(rows)


def format_delta_table(delta: DeltaReport) -> str:
    def cell(name: str, v: Optional[float]) -> str:
        if v is None:
            return "-"
        if name in ("scriptBytes", "deadClicks"):
            return f"{int(v):,}"
        if name == "cls":
            return f"{v:.4f}"
        return f"{v:.2f}"

    header = ("metric", "baseline", "mrah", "delta", "percent")
    body = []
    for name, d in delta.rows.items():
        pct = "-" if d.percent is None else f"{d.percent:+.1f}%"
        body.append((name, cell(name, d.baseline), cell(name, d.variant), cell(name, d.delta), pct))
    widths = [max(len(r[i]) for r in [header, *body]) for i in range(5)]
    lines = []
    for r in [header, *body]:
        lines.append("  ".join(c.ljust(widths[0]) if i == 0 else c.rjust(widths[i])
                               for i, c in enumerate(r)))
    return "\n".join(lines) + "\n"
