import random
from dataclasses import replace

import pytest

from hydrasim.engine import (SimConfig, SimulationError, TaskRecord, html_arrival_times, next_idle,
                             simulate, trace_to_csv, viewport_visible)
from hydrasim.environment import NetworkProfile, preset
from hydrasim.fixtures import product_page, scenario
from hydrasim.invariants import check_trace
from hydrasim.manifest import ModuleSpec, PageManifest, TriggerRule
from hydrasim.policy import resolve_plan
from hydrasim.runner import build
from hydrasim.scenario import UserEvent, UserScenario

import randgen

DESKTOP = preset("desktop-fast")
MOBILE = preset("mobile-slow3g")
SLOW_NET = NetworkProfile(1_600_000, 300, 6)


def mod(mid="a", offset=0, kind="immediate", **kw):
    base = dict(id=mid, priority="high", chunk_bytes=100_000, hydration_cost_ms=100, html_bytes=5000,
                server_render_latency_ms=0, suspense=False, offset_px=offset, height_px=400,
                placeholder_height_px=400, interactive=True, lcp_candidate=False,
                trigger_high_end=TriggerRule(kind, 0 if kind == "visible" else None))
    base.update(kw)
    return ModuleSpec(**base)


def page(*mods, runtime=0, head=10_000):
    return PageManifest(tuple(mods), runtime, head)


def run(m, env=DESKTOP, s=None, cfg=None):
    s = s or UserScenario(800, 10_000)
    plan = resolve_plan(m, env)
    trace = simulate(m, plan, env, s, cfg)
    assert check_trace(trace, m, plan, env, cfg or SimConfig()) == []
    return trace


# --- pure helpers ----------------------------------------------------------

def test_head_and_cumulative_html():
    m = page(mod(html_bytes=20_000))
    [t] = html_arrival_times(m, SLOW_NET)
    assert t.content_ms == 450 and t.placeholder_ms is None


def test_suspense_content_waits_for_server():
    m = page(mod(html_bytes=20_000), mod("b", 400, suspense=True, server_render_latency_ms=2000))
    a, b = html_arrival_times(m, SLOW_NET)
    assert b.placeholder_ms == pytest.approx(451)
    assert b.content_ms == 2300


def test_suspense_does_not_block_later_modules():
    m = page(mod(suspense=True, server_render_latency_ms=5000, html_bytes=1000), mod("b", 400, html_bytes=2000))
    a, b = html_arrival_times(m, SLOW_NET)
    assert b.content_ms == pytest.approx(300 + 12_200 / 200)
    assert a.content_ms == 5300


@pytest.mark.parametrize("offset, height, scroll, margin, expected", [
    (1800, 400, 0, 200, False),
    (1800, 400, 900, 200, True),
    (1800, 400, 1000, 0, False),
    (0, 100, 100, 0, False),
    (0, 100, 99, 0, True),
])
def test_viewport_visible(offset, height, scroll, margin, expected):
    assert viewport_visible(offset, height, scroll, 800, margin) is expected


def _task(a, b):
    return TaskRecord("x", "execute", None, a, a, b)


def test_next_idle_examples():
    assert next_idle([], 123) == 123
    assert next_idle([_task(100, 400)], 200) == 400
    assert next_idle([_task(100, 200), _task(200, 350)], 150) == 350
    assert next_idle([_task(100, 200), _task(250, 350)], 150) == 200


def test_next_idle_counts_queued_time():
    waiting = TaskRecord("x", "execute", None, 180, 200, 300)
    assert next_idle([_task(100, 200), waiting], 150) == 300


# --- single module hand trace ---------------------------------------------

def test_single_immediate_module_hand_trace():
    trace = run(page(mod()))
    # head 40 + 10000/1250 = 48; fetch 48 -> 88 first byte -> +80 = 168
    [f] = trace.fetches
    assert (f.request_ms, f.first_byte_ms, f.done_ms) == pytest.approx((48, 88, 168))
    ex, hy = trace.tasks
    assert (ex.kind, ex.start_ms, ex.end_ms) == ("execute", 168, pytest.approx(178))
    assert (hy.kind, hy.start_ms, hy.end_ms) == ("hydrate", pytest.approx(178), pytest.approx(278))
    [h] = trace.hydrations
    assert h.task_start_ms >= ex.end_ms
    assert [p.at_ms for p in trace.paints] == [52]


def test_cpu_slowdown_scales_tasks():
    env = replace(DESKTOP, device=replace(DESKTOP.device, cpu_slowdown=4.0))
    trace = run(page(mod()), env)
    assert [t.duration_ms for t in trace.tasks] == pytest.approx([40, 400])


def test_runtime_executes_before_hydration():
    trace = run(page(mod(chunk_bytes=10_000), runtime=50_000))
    kinds = [(t.kind, t.module_id) for t in trace.tasks]
    assert kinds[-1] == ("hydrate", "a")
    assert ("execute", None) in kinds
    assert trace.hydrations[0].task_start_ms >= max(t.end_ms for t in trace.tasks if t.kind == "execute")


# --- triggers --------------------------------------------------------------

def test_ssr_only_module_is_inert():
    ssr = TriggerRule("ssr-only")
    footer = mod("footer", 400, kind="ssr-only", chunk_bytes=0, trigger_low_end=ssr)
    s = UserScenario(800, 8000, (UserEvent(1000, scroll_to=400), UserEvent(2000, click="footer")))
    for env in (DESKTOP, MOBILE):
        trace = run(page(mod(), footer), env, s)
        assert not [f for f in trace.fetches if f.module_id == "footer"]
        assert not [t for t in trace.tasks if t.module_id == "footer"]
        assert trace.hydration_for("footer") is None
        assert trace.trigger_for("footer") is None
        # the click is dead but nothing fires
        assert trace.interactions[0].dead


def test_visible_fires_on_scroll():
    below = mod("b", 2000, kind="visible")
    s = UserScenario(800, 8000, (UserEvent(1000, scroll_to=1100), UserEvent(1500, scroll_to=1500)))
    trace = run(page(mod(), below), s=s)
    assert trace.trigger_for("b").at_ms == 1500
    assert trace.trigger_for("b").cause == "visible"


def test_visible_fires_on_html_arrival_when_in_view():
    trace = run(page(mod("a", kind="visible")))
    arrival = [h.at_ms for h in trace.html_arrivals if h.module_id == "a"][0]
    assert trace.trigger_for("a").at_ms == arrival


def test_visible_needs_html():
    # scrolled into view before its HTML streamed in: fires at arrival instead
    slow = mod("a", 0, kind="visible", html_bytes=500_000)
    s = UserScenario(800, 8000, (UserEvent(10, scroll_to=0),))
    trace = run(page(slow), s=s)
    assert trace.trigger_for("a").at_ms == pytest.approx(40 + 510_000 / 1250)


def test_idle_fires_after_busy_period():
    lazy = mod("b", 400, kind="idle")
    trace = run(page(mod(), lazy))
    tr = trace.trigger_for("b")
    assert tr.cause == "idle"
    assert not any(t.start_ms < tr.at_ms < t.end_ms for t in trace.tasks)


def test_idle_fallback_without_callback():
    lazy = mod("b", 400, kind="idle")
    cfg = SimConfig(supports_idle_callback=False)
    trace = run(page(mod(), lazy), cfg=cfg)
    assert trace.trigger_for("b").at_ms == pytest.approx(48 + 2000)


def test_timeout_exact():
    lazy = mod("b", 5000, kind="visible", timeout_high_end_ms=3000)
    trace = run(page(mod(), lazy))
    assert (trace.trigger_for("b").at_ms, trace.trigger_for("b").cause) == (3000, "timeout")


def test_timeout_beyond_horizon_never_fires():
    lazy = mod("b", 5000, kind="visible", timeout_high_end_ms=20_000)
    trace = run(page(mod(), lazy))
    assert trace.trigger_for("b") is None


def test_prefetch_does_not_execute_early():
    lazy = mod("b", 5000, kind="visible", chunk_bytes=5000)
    s = UserScenario(800, 8000, (UserEvent(4000, scroll_to=4500),))
    trace = run(page(mod(), lazy), s=s)
    f = [f for f in trace.fetches if f.module_id == "b"][0]
    assert f.request_ms == pytest.approx(48)
    ex = [t for t in trace.tasks if t.module_id == "b" and t.kind == "execute"][0]
    assert ex.start_ms >= 4000


def test_low_end_has_no_prefetch():
    lazy = mod("b", 5000, kind="visible", chunk_bytes=5000)
    trace = run(page(mod(), lazy), MOBILE)
    assert [f.module_id for f in trace.fetches] == ["a"]


# --- clicks ----------------------------------------------------------------

def test_dead_click_fires_interaction_trigger():
    lazy = mod("b", 400, kind="interaction")
    s = UserScenario(800, 8000, (UserEvent(1000, click="b"),))
    trace = run(page(mod(), lazy), s=s)
    [it] = trace.interactions
    assert it.dead and it.handled_ms is None
    assert trace.trigger_for("b").cause == "interaction"
    assert trace.hydration_for("b") is not None


def test_queued_replay_handles_at_hydration_end():
    lazy = mod("b", 400, kind="interaction")
    s = UserScenario(800, 8000, (UserEvent(1000, click="b"),))
    trace = run(page(mod(), lazy), s=s, cfg=SimConfig(interaction_replay="queued"))
    [it] = trace.interactions
    assert it.dead and it.handled_ms == trace.hydration_for("b").task_end_ms


def test_click_on_hydrated_module_waits_for_free_thread():
    # hydration of a runs 178..278; a click on already hydrated b at 200 waits until 278
    b = mod("b", 400, chunk_bytes=1000, hydration_cost_ms=1)
    trace = run(page(b, replace(mod(), id="a", offset_px=800)),
                s=UserScenario(800, 8000, (UserEvent(200, click="b"),)))
    assert trace.hydration_for("b").task_end_ms < 200
    [it] = trace.interactions
    busy = [t for t in trace.tasks if t.start_ms < 200 < t.end_ms]
    assert not it.dead
    assert it.handled_ms == (busy[0].end_ms if busy else 200)


def test_click_unknown_module():
    s = UserScenario(800, 8000, (UserEvent(100, click="nope"),))
    m = page(mod())
    with pytest.raises(SimulationError, match="nope"):
        simulate(m, resolve_plan(m, DESKTOP), DESKTOP, s)


def test_plan_mismatch():
    m = page(mod())
    other = page(mod("z"))
    with pytest.raises(SimulationError):
        simulate(m, resolve_plan(other, DESKTOP), DESKTOP, UserScenario(800, 100))


# --- throttle ---------------------------------------------------------------

def test_throttle_spaces_hydrations():
    mods = [mod(f"m{i}", i * 100, chunk_bytes=2000, hydration_cost_ms=10) for i in range(4)]
    trace = run(page(*mods), MOBILE)
    hs = sorted(trace.hydrations, key=lambda h: h.task_start_ms)
    assert len(hs) == 4
    for a, b in zip(hs, hs[1:]):
        assert b.task_start_ms >= a.task_end_ms


# --- walk-through on the calibrated fixture --------------------------------

@pytest.mark.parametrize("env_name", ["desktop-fast", "mobile-slow3g"])
def test_walkthrough_recommendations_after_scroll(env_name):
    m, env = product_page(), preset(env_name)
    s = scenario("walkthrough")
    pm, plan = build(m, env, "mrah")
    trace = simulate(pm, plan, env, s)
    h = trace.hydration_for("recommendations")
    assert h is not None and h.task_start_ms >= 3000
    assert trace.trigger_for("recommendations").at_ms == 3000


def test_footer_idle_on_desktop_and_absent_on_mobile():
    m, s = product_page(), scenario("idle")
    pm, plan = build(m, DESKTOP, "mrah")
    desk = simulate(pm, plan, DESKTOP, s)
    assert desk.trigger_for("footer").cause == "idle"
    assert desk.hydration_for("footer") is not None
    pm, plan = build(m, MOBILE, "mrah")
    mob = simulate(pm, plan, MOBILE, s)
    assert desk.trigger_for("footer") is not None and mob.trigger_for("footer") is None
    assert not [f for f in mob.fetches if f.module_id == "footer"]


# --- determinism, csv, randomized invariants -------------------------------

def test_csv_is_stable_and_sorted():
    m, s = product_page(), scenario("walkthrough")
    pm, plan = build(m, MOBILE, "mrah")
    a = trace_to_csv(simulate(pm, plan, MOBILE, s))
    b = trace_to_csv(simulate(pm, plan, MOBILE, s))
    assert a == b
    lines = a.splitlines()
    assert lines[0] == "kind,id,t_start_ms,t_end_ms,bytes"
    starts = [float(l.split(",")[2]) for l in lines[1:]]
    assert starts == sorted(starts)
    assert "fetch,shared-runtime,370.00," in a


@pytest.mark.parametrize("seed", range(40))
def test_random_runs_keep_invariants(seed):
    rng = random.Random(1000 + seed)
    m = randgen.manifest(rng)
    env = randgen.environment(rng)
    s = randgen.scenario(rng, [x.id for x in m.modules])
    cfg = SimConfig(interaction_replay=rng.choice(["lost", "queued"]),
                    supports_idle_callback=rng.random() < 0.8)
    for policy in ("mrah", "baseline"):
        pm, plan = build(m, env, policy)
        t1 = simulate(pm, plan, env, s, cfg)
        assert check_trace(t1, pm, plan, env, cfg) == []
        assert simulate(pm, plan, env, s, cfg).to_json() == t1.to_json()


def test_throttle_with_zero_cost_hydration():
    mods = [mod("a", 0, chunk_bytes=2000, hydration_cost_ms=0),
            mod("b", 100, chunk_bytes=2000, hydration_cost_ms=20)]
    trace = run(page(*mods), MOBILE)
    a, b = trace.hydrations
    assert a.task_start_ms == a.task_end_ms <= b.task_start_ms


def test_checker_flags_tampered_traces():
    m = page(mod())
    plan = resolve_plan(m, DESKTOP)
    good = simulate(m, plan, DESKTOP, UserScenario(800, 5000))
    ex, hy = good.tasks
    overlapping = replace(good, tasks=(ex, replace(hy, start_ms=ex.start_ms + 1, end_ms=ex.start_ms + 101)))
    errs = check_trace(overlapping, m, plan, DESKTOP)
    assert any("overlap" in e for e in errs)
    early = replace(good, hydrations=(replace(good.hydrations[0], task_start_ms=10, task_end_ms=110),))
    assert check_trace(early, m, plan, DESKTOP)
