"""Slow, obviously-correct re-statements of metric and trigger definitions."""

import math

from hydrasim.engine import html_arrival_times
from hydrasim.scenario import scroll_position_at


def naive_tti(trace, window, limit=50, max_fetches=2):
    """Integer-grid scan; exact when every event time in ``trace`` is an integer."""
    fcp = int(min(p.at_ms for p in trace.paints))
    horizon = int(max([fcp] + [t.end_ms for t in trace.tasks] + [f.done_ms for f in trace.fetches]
                      + [t.start_ms for t in trace.tasks])) + 1
    size = horizon + int(window) + 2
    busy = [False] * size
    long_start = [0] * size
    in_flight = [0] * size
    for tk in trace.tasks:
        for x in range(int(tk.start_ms), int(tk.end_ms)):
            busy[x] = True
        if tk.end_ms - tk.start_ms > limit:
            long_start[int(tk.start_ms)] += 1
    for f in trace.fetches:
        for x in range(int(f.request_ms), int(f.done_ms)):
            in_flight[x] += 1
    long_pre = [0]
    crowd_pre = [0]
    for x in range(size):
        long_pre.append(long_pre[-1] + long_start[x])
        crowd_pre.append(crowd_pre[-1] + (in_flight[x] > max_fetches))
    w = int(window)
    for t in range(fcp, horizon + 1):
        if busy[t]:
            continue
        if long_pre[t + w] - long_pre[t]:
            continue
        if crowd_pre[t + w] - crowd_pre[t]:
            continue
        return float(t)
    raise AssertionError("oracle found no window")


def naive_tbt(trace, tti, limit=50):
    fcp = min(p.at_ms for p in trace.paints)
    total = 0.0
    for tk in trace.tasks:
        if tk.start_ms < fcp or tk.start_ms >= tti:
            continue
        over = (tk.end_ms - tk.start_ms) - limit
        if over > 0:
            total += over
    return total


def visible_trigger_scan(m, module_id, s, net, placeholder_bytes=200):
    """Minimum over {first HTML arrival} plus later scroll times at which the module intersects."""
    mod = m.module(module_id)
    timing = next(t for t in html_arrival_times(m, net, placeholder_bytes) if t.module_id == module_id)
    first = timing.content_ms if timing.placeholder_ms is None else min(timing.placeholder_ms, timing.content_ms)
    margin = mod.trigger_high_end.root_margin_px
    cands = [first] + [ev.at_ms for ev in s.events if ev.is_scroll and ev.at_ms >= first]
    best = math.inf
    for t in cands:
        if t > s.end_ms:
            continue
        y = scroll_position_at(s, t)
        top, bottom = mod.offset_px, mod.offset_px + mod.height_px
        if top < y + s.viewport_height_px + margin and bottom > y - margin:
            best = min(best, t)
    return None if best == math.inf else best
