"""Deterministic discrete-event simulation of streamed SSR plus client hydration.

One run models a single page load: the HTML document streams in module by
module, script chunks download over a shared link, and a single main thread
executes chunks, hydrates modules and commits paints. Hydration of each module
starts when its trigger fires (immediately, on visibility, on idle, on click,
or on a timeout) and its code has been executed.

All times are milliseconds since navigation start.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Iterable, Optional

from .environment import Environment, NetworkProfile
from .manifest import ModuleSpec, PageManifest
from .network import FetchRequest, SharedLink
from .policy import HydrationPlan
from .scenario import UserScenario, scroll_position_at

RUNTIME_ID = "shared-runtime"


class SimulationError(ValueError):
    """Inputs that cannot be simulated together (plan/manifest mismatch, bad click target)."""


@dataclass(frozen=True)
class SimConfig:
    parse_cost_ms_per_10kb: float = 1.0
    long_task_threshold_ms: float = 50.0
    idle_fallback_ms: float = 2000.0
    supports_idle_callback: bool = True
    quiet_window_ms: float = 5000.0
    quiet_max_fetches: int = 2
    interaction_replay: str = "lost"
    suspense_placeholder_bytes: int = 200
    hydration_gap: str = "next-idle"

    def __post_init__(self) -> None:
        for f in ("parse_cost_ms_per_10kb", "long_task_threshold_ms", "idle_fallback_ms",
                  "quiet_window_ms", "suspense_placeholder_bytes", "quiet_max_fetches"):
            if getattr(self, f) < 0:
                raise ValueError(f"SimConfig.{f} must be >= 0")
        if self.interaction_replay not in ("lost", "queued"):
            raise ValueError(f"interactionReplay must be 'lost' or 'queued', got {self.interaction_replay!r}")
        if self.hydration_gap != "next-idle":
            raise ValueError("hydrationGap only supports 'next-idle'")


_CONFIG_KEYS = {
    "parseCostMsPer10KBytes": "parse_cost_ms_per_10kb",
    "longTaskThresholdMs": "long_task_threshold_ms",
    "idleFallbackMs": "idle_fallback_ms",
    "supportsIdleCallback": "supports_idle_callback",
    "quietWindowMs": "quiet_window_ms",
    "quietMaxFetches": "quiet_max_fetches",
    "interactionReplay": "interaction_replay",
    "suspensePlaceholderBytes": "suspense_placeholder_bytes",
    "hydrationGap": "hydration_gap",
}


def config_from_dict(obj: Any) -> SimConfig:
    if not isinstance(obj, dict):
        raise ValueError("config: expected an object")
    unknown = sorted(set(obj) - set(_CONFIG_KEYS))
    if unknown:
        raise ValueError(f"config: unknown key(s) {', '.join(unknown)}")
    return SimConfig(**{_CONFIG_KEYS[k]: v for k, v in obj.items()})


# --- trace records ---------------------------------------------------------

@dataclass(frozen=True)
class FetchRecord:
    id: str
    module_id: Optional[str]
    bytes: int
    request_ms: float
    first_byte_ms: float
    done_ms: float


@dataclass(frozen=True)
class TaskRecord:
    label: str
    kind: str  # "execute" | "hydrate"
    module_id: Optional[str]
    ready_ms: float
    start_ms: float
    end_ms: float

    @property
    def duration_ms(self) -> float:
        return self.end_ms - self.start_ms


@dataclass(frozen=True)
class PaintRecord:
    module_id: str
    at_ms: float
    kind: str  # "placeholder" | "content"


@dataclass(frozen=True)
class HtmlArrival:
    module_id: str
    at_ms: float
    kind: str  # "placeholder" | "content"


@dataclass(frozen=True)
class TriggerRecord:
    module_id: str
    at_ms: float
    cause: str  # "immediate" | "visible" | "idle" | "interaction" | "timeout"


@dataclass(frozen=True)
class HydrationRecord:
    module_id: str
    trigger_ms: float
    fetch_done_ms: float
    task_start_ms: float
    task_end_ms: float


@dataclass(frozen=True)
class InteractionRecord:
    module_id: str
    click_ms: float
    handled_ms: Optional[float]
    dead: bool


@dataclass(frozen=True)
class LayoutShiftRecord:
    module_id: str
    at_ms: float
    from_px: int
    to_px: int


@dataclass(frozen=True)
class SimTrace:
    head_arrival_ms: float
    end_ms: float
    fetches: tuple[FetchRecord, ...]
    tasks: tuple[TaskRecord, ...]
    paints: tuple[PaintRecord, ...]
    hydrations: tuple[HydrationRecord, ...]
    interactions: tuple[InteractionRecord, ...]
    html_arrivals: tuple[HtmlArrival, ...]
    triggers: tuple[TriggerRecord, ...]
    layout_shifts: tuple[LayoutShiftRecord, ...]
    navigation_start: float = 0.0

    @property
    def final_ms(self) -> float:
        ends = [self.head_arrival_ms, self.end_ms]
        ends += [f.done_ms for f in self.fetches]
        ends += [t.end_ms for t in self.tasks]
        ends += [p.at_ms for p in self.paints]
        return max(ends)

    def trigger_for(self, module_id: str) -> Optional[TriggerRecord]:
        for tr in self.triggers:
            if tr.module_id == module_id:
                return tr
        return None

    def hydration_for(self, module_id: str) -> Optional[HydrationRecord]:
        for h in self.hydrations:
            if h.module_id == module_id:
                return h
        return None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


# --- pure helpers ----------------------------------------------------------

def viewport_visible(offset_px: float, height_px: float, scroll_y: float,
                     viewport_height_px: float, root_margin_px: float) -> bool:
    return (offset_px < scroll_y + viewport_height_px + root_margin_px
            and offset_px + height_px > scroll_y - root_margin_px)


def head_arrival_ms(m: PageManifest, net: NetworkProfile) -> float:
    return net.rtt_ms + m.head_html_bytes / net.bytes_per_ms


@dataclass(frozen=True)
class HtmlTiming:
    module_id: str
    placeholder_ms: Optional[float]
    content_ms: float


def html_arrival_times(m: PageManifest, net: NetworkProfile,
                       placeholder_bytes: int = 200) -> list[HtmlTiming]:
    """Arrival of each module's HTML on a single in-order response stream.

    Suspense modules put only a placeholder in the in-order stream; their real
    HTML lands once both its in-order slot and the server render are done.
    """
    rate = net.bytes_per_ms
    streamed = m.head_html_bytes
    out = []
    for mod in m.modules:
        if mod.suspense:
            in_order = net.rtt_ms + (streamed + mod.html_bytes) / rate
            streamed += placeholder_bytes
            out.append(HtmlTiming(
                mod.id, net.rtt_ms + streamed / rate,
                max(in_order, mod.server_render_latency_ms + net.rtt_ms)))
        else:
            streamed += mod.html_bytes
            out.append(HtmlTiming(mod.id, None, net.rtt_ms + streamed / rate))
    return out


def next_idle(tasks: Iterable[TaskRecord], from_ms: float) -> float:
    """Earliest instant >= ``from_ms`` with no task running or waiting to run.

    A task counts as waiting from its ``ready_ms`` until it starts.
    """
    spans = sorted(
        (min(getattr(tk, "ready_ms", tk.start_ms), tk.start_ms), tk.end_ms)
        for tk in tasks
    )
    t = from_ms
    for lo, hi in spans:
        if hi <= lo:
            continue
        if lo > t:
            break
        if hi > t:
            t = hi
    return t


# --- simulation ------------------------------------------------------------

# same-instant ordering of event kinds
_TASK_END, _HTML, _SCROLL, _CLICK, _TIMEOUT, _IDLE_TIMER, _WAKE = range(7)


@dataclass
class _ModState:
    spec: ModuleSpec
    index: int
    kind: str
    root_margin: int
    rank: int
    first_html_ms: Optional[float] = None
    content_arrived: bool = False
    trigger_ms: Optional[float] = None
    chunk: str = "none"  # none | fetching | fetched | queued | executed
    chunk_done_ms: Optional[float] = None
    hydration: str = "none"  # none | waiting | queued | running | done
    hydrated_at: Optional[float] = None
    dead_clicks: list = field(default_factory=list)


class _Run:
    def __init__(self, m: PageManifest, plan: HydrationPlan, env: Environment,
                 s: UserScenario, cfg: SimConfig) -> None:
        if len(plan.plans) != len(m.modules) or any(
                p.module_id != mod.id for p, mod in zip(plan.plans, m.modules)):
            raise SimulationError("plan does not match manifest modules")
        known = {mod.id for mod in m.modules}
        for ev in s.click_events:
            if ev.click not in known:
                raise SimulationError(f"click at {ev.at_ms} ms targets unknown module {ev.click!r}")
        self.m, self.plan, self.env, self.s, self.cfg = m, plan, env, s, cfg
        self.slowdown = env.device.cpu_slowdown
        self.link = SharedLink(env.network)
        self.mods = {
            mod.id: _ModState(mod, i, p.trigger.kind, p.trigger.root_margin_px or 0, p.priority_rank)
            for i, (mod, p) in enumerate(zip(m.modules, plan.plans))
        }
        self.order = [self.mods[mod.id] for mod in m.modules]
        self.prefetch = {p.module_id for p in plan.plans if p.prefetch}
        self.throttled = plan.throttle == "one-at-a-time"

        self.heap: list = []
        self.seq = 0
        self.wakes: set[float] = set()
        self.head_ms = head_arrival_ms(m, env.network)
        self.runtime = "none" if m.shared_runtime_bytes > 0 else "executed"
        self.runtime_done_ms: Optional[float] = None

        self.running: Optional[tuple] = None
        self.ready: list = []
        self.waitlist: list = []
        self.idle_registrants: list[_ModState] = []
        self.idle_fresh = True
        self.pending_paints: list[tuple[str, str]] = []
        self.pending_clicks: list[int] = []

        self.fetch_module: dict[str, Optional[str]] = {}
        self.tasks: list[TaskRecord] = []
        self.paints: list[PaintRecord] = []
        self.hydrations: list[HydrationRecord] = []
        self.interactions: list[dict] = []
        self.html: list[HtmlArrival] = []
        self.triggers: list[TriggerRecord] = []
        self.shifts: list[LayoutShiftRecord] = []

    # event queue
    def push(self, t: float, kind: int, sub: int, payload: Any = None) -> None:
        heapq.heappush(self.heap, (t, kind, sub, self.seq, payload))
        self.seq += 1

    def run(self) -> SimTrace:
        self.push(self.head_ms, _HTML, -1, ("head",))
        for st, timing in zip(self.order, html_arrival_times(
                self.m, self.env.network, self.cfg.suspense_placeholder_bytes)):
            if timing.placeholder_ms is not None:
                self.push(timing.placeholder_ms, _HTML, st.index, ("placeholder", st))
            self.push(timing.content_ms, _HTML, st.index, ("content", st))
        for i, ev in enumerate(self.s.events):
            self.push(ev.at_ms, _SCROLL if ev.is_scroll else _CLICK, i, ev)
        for st, p in zip(self.order, self.plan.plans):
            if p.timeout_ms is not None and p.trigger.kind != "ssr-only" and p.timeout_ms <= self.s.end_ms:
                self.push(p.timeout_ms, _TIMEOUT, st.index, st)

        while self.heap:
            t = self.heap[0][0]
            for fid in self.link.advance(t):
                self.on_fetch_done(fid, t)
            while self.heap and self.heap[0][0] == t:
                _, kind, _, _, payload = heapq.heappop(self.heap)
                self.dispatch(t, kind, payload)
            self.settle(t)
            nxt = self.link.next_event_ms()
            if nxt is not None and nxt not in self.wakes:
                self.wakes.add(nxt)
                self.push(nxt, _WAKE, 0)
        return self.trace()

    def dispatch(self, t: float, kind: int, payload: Any) -> None:
        if kind == _TASK_END:
            self.on_task_end(t)
        elif kind == _HTML:
            if payload[0] == "head":
                self.on_head(t)
            else:
                self.on_html(t, payload[0], payload[1])
        elif kind == _SCROLL:
            self.on_scroll(t, payload.scroll_to)
        elif kind == _CLICK:
            self.on_click(t, payload.click)
        elif kind == _TIMEOUT:
            self.fire(payload, t, "timeout")
        elif kind == _IDLE_TIMER:
            self.fire(payload, t, "idle")
        elif kind == _WAKE:
            self.wakes.discard(t)

    # network
    def request(self, fid: str, nbytes: int, module_id: Optional[str], t: float) -> None:
        self.fetch_module[fid] = module_id
        for done in self.link.request(FetchRequest(fid, nbytes, t)):
            self.on_fetch_done(done, t)

    def request_chunk(self, st: _ModState, t: float) -> None:
        if st.chunk == "none" and st.spec.chunk_bytes > 0:
            st.chunk = "fetching"
            self.request(st.spec.id, st.spec.chunk_bytes, st.spec.id, t)

    def on_fetch_done(self, fid: str, t: float) -> None:
        if fid == RUNTIME_ID:
            self.runtime_done_ms = t
            self.runtime = "queued"
            self.enqueue(t, "execute", None, -1, -1, self.exec_ms(self.m.shared_runtime_bytes))
            return
        st = self.mods[fid]
        st.chunk = "fetched"
        st.chunk_done_ms = t
        if st.trigger_ms is not None:
            self.queue_chunk(st, t)

    def queue_chunk(self, st: _ModState, t: float) -> None:
        st.chunk = "queued"
        self.enqueue(t, "execute", st.spec.id, st.rank, st.index, self.exec_ms(st.spec.chunk_bytes))

    def exec_ms(self, nbytes: int) -> float:
        return nbytes / 10_000 * self.cfg.parse_cost_ms_per_10kb * self.slowdown

    # main thread
    def enqueue(self, t: float, kind: str, module_id: Optional[str], rank: int, index: int,
                duration: float) -> None:
        heapq.heappush(self.ready, ((t, rank, index, self.seq), kind, module_id, duration))
        self.seq += 1

    def settle(self, t: float) -> None:
        while self.running is None:
            for mid, kind in self.pending_paints:
                self.commit_paint(mid, kind, t)
            self.pending_paints.clear()
            for i in self.pending_clicks:
                self.interactions[i]["handled_ms"] = t
            self.pending_clicks.clear()
            if self.ready:
                (ready_ms, *_), kind, mid, dur = heapq.heappop(self.ready)
                self.running = (kind, mid, ready_ms, t)
                self.idle_fresh = True
                if kind == "hydrate":
                    self.mods[mid].hydration = "running"
                self.push(t + dur, _TASK_END, 0)
                return
            if self.waitlist:
                _, mid = heapq.heappop(self.waitlist)
                st = self.mods[mid]
                st.hydration = "queued"
                self.enqueue(t, "hydrate", mid, st.rank, st.index, self.hydrate_ms(st))
                continue
            if self.idle_registrants and self.idle_fresh and t <= self.s.end_ms:
                self.idle_fresh = False
                st = self.idle_registrants.pop(0)
                self.fire(st, t, "idle")
                continue
            return

    def hydrate_ms(self, st: _ModState) -> float:
        return st.spec.hydration_cost_ms * self.slowdown

    def on_task_end(self, t: float) -> None:
        kind, mid, ready_ms, start = self.running
        self.running = None
        label = f"{kind}:{mid if mid is not None else RUNTIME_ID}"
        self.tasks.append(TaskRecord(label, kind, mid, ready_ms, start, t))
        if kind == "execute":
            if mid is None:
                self.runtime = "executed"
                for st in self.order:
                    self.check_ready(st, t)
            else:
                st = self.mods[mid]
                st.chunk = "executed"
                self.check_ready(st, t)
            return
        st = self.mods[mid]
        st.hydration = "done"
        st.hydrated_at = t
        fetch_done = max([x for x in (st.chunk_done_ms, self.runtime_done_ms) if x is not None],
                         default=self.head_ms)
        self.hydrations.append(HydrationRecord(mid, st.trigger_ms, fetch_done, start, t))
        if self.cfg.interaction_replay == "queued":
            for i in st.dead_clicks:
                self.interactions[i]["handled_ms"] = t

    def check_ready(self, st: _ModState, t: float) -> None:
        if st.hydration != "none" or st.trigger_ms is None or not st.content_arrived:
            return
        if st.spec.chunk_bytes > 0 and st.chunk != "executed":
            return
        if self.runtime != "executed":
            return
        if self.throttled:
            st.hydration = "waiting"
            heapq.heappush(self.waitlist, ((t, st.rank, st.index), st.spec.id))
        else:
            st.hydration = "queued"
            self.enqueue(t, "hydrate", st.spec.id, st.rank, st.index, self.hydrate_ms(st))

    def commit_paint(self, mid: str, kind: str, t: float) -> None:
        self.paints.append(PaintRecord(mid, t, kind))
        spec = self.mods[mid].spec
        if kind == "content" and spec.suspense and spec.placeholder_height_px != spec.height_px:
            self.shifts.append(LayoutShiftRecord(mid, t, spec.placeholder_height_px, spec.height_px))

    # triggers
    def fire(self, st: _ModState, t: float, cause: str) -> None:
        if st.trigger_ms is not None or st.kind == "ssr-only":
            return
        st.trigger_ms = t
        self.triggers.append(TriggerRecord(st.spec.id, t, cause))
        if st in self.idle_registrants:
            self.idle_registrants.remove(st)
        if st.chunk == "none":
            self.request_chunk(st, t)
        elif st.chunk == "fetched":
            self.queue_chunk(st, t)
        self.check_ready(st, t)

    def visible_now(self, st: _ModState, t: float) -> bool:
        if t > self.s.end_ms:
            return False
        return viewport_visible(st.spec.offset_px, st.spec.height_px, scroll_position_at(self.s, t),
                                self.s.viewport_height_px, st.root_margin)

    def on_head(self, t: float) -> None:
        if self.m.shared_runtime_bytes > 0:
            self.request(RUNTIME_ID, self.m.shared_runtime_bytes, None, t)
        immediate = [st for st in self.order if st.kind == "immediate"]
        for st in immediate:
            self.request_chunk(st, t)
        for st in self.order:
            if st.spec.id in self.prefetch:
                self.request_chunk(st, t)
        for st in immediate:
            self.fire(st, t, "immediate")
        for st in self.order:
            if st.kind != "idle":
                continue
            if self.cfg.supports_idle_callback:
                self.idle_registrants.append(st)
            elif t + self.cfg.idle_fallback_ms <= self.s.end_ms:
                self.push(t + self.cfg.idle_fallback_ms, _IDLE_TIMER, st.index, st)

    def on_html(self, t: float, kind: str, st: _ModState) -> None:
        self.html.append(HtmlArrival(st.spec.id, t, kind))
        self.pending_paints.append((st.spec.id, kind))
        if st.first_html_ms is None:
            st.first_html_ms = t
            if st.kind == "visible" and self.visible_now(st, t):
                self.fire(st, t, "visible")
        if kind == "content":
            st.content_arrived = True
            self.check_ready(st, t)

    def on_scroll(self, t: float, y: int) -> None:
        for st in self.order:
            if (st.kind == "visible" and st.trigger_ms is None and st.first_html_ms is not None
                    and viewport_visible(st.spec.offset_px, st.spec.height_px, y,
                                         self.s.viewport_height_px, st.root_margin)):
                self.fire(st, t, "visible")

    def on_click(self, t: float, mid: str) -> None:
        st = self.mods[mid]
        idx = len(self.interactions)
        if st.hydration == "done" or not st.spec.interactive:
            self.interactions.append({"module_id": mid, "click_ms": t, "handled_ms": None, "dead": False})
            self.pending_clicks.append(idx)
            return
        self.interactions.append({"module_id": mid, "click_ms": t, "handled_ms": None, "dead": True})
        st.dead_clicks.append(idx)
        self.fire(st, t, "interaction")

    def trace(self) -> SimTrace:
        fetches = sorted(
            (FetchRecord(tm.id, self.fetch_module[tm.id], tm.bytes, tm.request_ms,
                         tm.first_byte_ms, tm.done_ms)
             for tm in self.link.timings.values()),
            key=lambda f: (f.request_ms, f.done_ms, f.id),
        )
        return SimTrace(
            head_arrival_ms=self.head_ms,
            end_ms=self.s.end_ms,
            fetches=tuple(fetches),
            tasks=tuple(self.tasks),
            paints=tuple(self.paints),
            hydrations=tuple(self.hydrations),
            interactions=tuple(InteractionRecord(**d) for d in self.interactions),
            html_arrivals=tuple(self.html),
            triggers=tuple(self.triggers),
            layout_shifts=tuple(self.shifts),
        )


def simulate(m: PageManifest, plan: HydrationPlan, env: Environment, s: UserScenario,
             cfg: Optional[SimConfig] = None) -> SimTrace:
    """Run one page load to completion and return its full event trace.

    Deferred triggers (visible, idle, timeout, interaction) only fire up to the
    scenario horizon ``s.end_ms``; work already started before the horizon is
    allowed to finish.
    """
    return _Run(m, plan, env, s, cfg or SimConfig()).run()


# --- CSV export ------------------------------------------------------------

_CSV_KIND_ORDER = {"html": 0, "paint": 1, "fetch": 2, "task": 3, "hydration": 4, "interaction": 5}


def trace_rows(trace: SimTrace) -> list[tuple[str, str, float, Optional[float], Optional[int]]]:
    rows: list[tuple] = []
    for h in trace.html_arrivals:
        rows.append(("html", f"{h.module_id}:{h.kind}", h.at_ms, h.at_ms, None))
    for p in trace.paints:
        rows.append(("paint", f"{p.module_id}:{p.kind}", p.at_ms, p.at_ms, None))
    for f in trace.fetches:
        rows.append(("fetch", f.id, f.request_ms, f.done_ms, f.bytes))
    for tk in trace.tasks:
        rows.append(("task", tk.label, tk.start_ms, tk.end_ms, None))
    for hy in trace.hydrations:
        rows.append(("hydration", hy.module_id, hy.trigger_ms, hy.task_end_ms, None))
    for it in trace.interactions:
        rows.append(("interaction", it.module_id, it.click_ms, it.handled_ms, None))
    rows.sort(key=lambda r: (r[2], _CSV_KIND_ORDER[r[0]], r[1]))
    return rows


def trace_to_csv(trace: SimTrace) -> str:
    """Plot-ready CSV: kind,id,t_start_ms,t_end_ms,bytes sorted by start then kind."""
    lines = ["kind,id,t_start_ms,t_end_ms,bytes"]
    for kind, rid, start, end, nbytes in trace_rows(trace):
        end_s = "" if end is None else f"{end:.2f}"
        bytes_s = "" if nbytes is None else str(nbytes)
        lines.append(f"{kind},{rid},{start:.2f},{end_s},{bytes_s}")
    return "\n".join(lines) + "\n"
