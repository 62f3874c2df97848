"""Scripted user: viewport height plus a timeline of scrolls and clicks."""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass, field
from typing import Any, Optional


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class UserEvent:
    at_ms: float
    scroll_to: Optional[int] = None
    click: Optional[str] = None

    def __post_init__(self) -> None:
        if (self.scroll_to is None) == (self.click is None):
            raise ScenarioError("event must have exactly one of scrollTo or click")

    @property
    def is_scroll(self) -> bool:
        return self.scroll_to is not None


@dataclass(frozen=True)
class UserScenario:
    viewport_height_px: int
    end_ms: float
    events: tuple[UserEvent, ...] = ()
    _scroll_times: tuple[float, ...] = field(init=False, repr=False, compare=False)
    _scroll_ys: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.viewport_height_px <= 0:
            raise ScenarioError("viewportHeightPx must be > 0")
        last = 0.0
        for i, ev in enumerate(self.events):
            if not (ev.at_ms >= 0 and ev.at_ms != float("inf")):
                raise ScenarioError(f"events[{i}]: atMs must be finite and >= 0")
            if ev.at_ms < last:
                raise ScenarioError(f"events[{i}]: events not sorted by atMs ({ev.at_ms} after {last})")
            if ev.scroll_to is not None and ev.scroll_to < 0:
                raise ScenarioError(f"events[{i}]: scrollTo must be >= 0")
            last = ev.at_ms
        if self.end_ms < last:
            raise ScenarioError(f"endMs {self.end_ms} is before the last event at {last}")
        scrolls = [ev for ev in self.events if ev.is_scroll]
        object.__setattr__(self, "_scroll_times", tuple(ev.at_ms for ev in scrolls))
        object.__setattr__(self, "_scroll_ys", tuple(ev.scroll_to for ev in scrolls))

    @property
    def scroll_events(self) -> list[UserEvent]:
        return [ev for ev in self.events if ev.is_scroll]

    @property
    def click_events(self) -> list[UserEvent]:
        return [ev for ev in self.events if not ev.is_scroll]


def scroll_position_at(s: UserScenario, t: float) -> int:
    """Scroll offset at time ``t``; right-continuous, starts at 0."""
    if not 0 <= t <= s.end_ms:
        raise ScenarioError(f"t={t} outside [0, {s.end_ms}]")
    i = bisect.bisect_right(s._scroll_times, t)
    return s._scroll_ys[i - 1] if i else 0


def scenario_from_dict(obj: Any) -> UserScenario:
    if not isinstance(obj, dict):
        raise ScenarioError("scenario: expected an object")
    unknown = sorted(set(obj) - {"viewportHeightPx", "endMs", "events"})
    if unknown:
        raise ScenarioError(f"scenario: unknown key(s) {', '.join(unknown)}")
    try:
        events = []
        for i, ev in enumerate(obj.get("events", [])):
            extra = sorted(set(ev) - {"atMs", "scrollTo", "click"})
            if extra:
                raise ScenarioError(f"events[{i}]: unknown key(s) {', '.join(extra)}")
            events.append(UserEvent(float(ev["atMs"]), ev.get("scrollTo"), ev.get("click")))
        return UserScenario(int(obj["viewportHeightPx"]), float(obj["endMs"]), tuple(events))
    except (KeyError, TypeError) as exc:
        raise ScenarioError(f"scenario: missing or malformed field {exc}") from None


def parse_scenario(text: str) -> UserScenario:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return scenario_from_dict(obj)


def scenario_to_dict(s: UserScenario) -> dict:
    events = []
    for ev in s.events:
        if ev.is_scroll:
            events.append({"atMs": ev.at_ms, "scrollTo": ev.scroll_to})
        else:
            events.append({"atMs": ev.at_ms, "click": ev.click})
    return {"viewportHeightPx": s.viewport_height_px, "endMs": s.end_ms, "events": events}
