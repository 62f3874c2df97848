import pytest
from hypothesis import given, strategies as st

from hydrasim.fixtures import scenario
from hydrasim.scenario import (ScenarioError, UserEvent, UserScenario, parse_scenario,
                               scenario_to_dict, scroll_position_at)
import json


def test_empty_scenario():
    s = parse_scenario('{"viewportHeightPx": 800, "events": [], "endMs": 10000}')
    assert s.events == () and s.end_ms == 10000


def test_walkthrough_fixture():
    s = scenario("walkthrough")
    assert len(s.events) == 2
    assert s.events[0] == UserEvent(3000, scroll_to=1800)
    assert s.events[1] == UserEvent(5000, click="recommendations")


def test_unsorted_rejected():
    text = json.dumps({"viewportHeightPx": 800, "endMs": 9000,
                       "events": [{"atMs": 5000, "scrollTo": 10}, {"atMs": 3000, "scrollTo": 20}]})
    with pytest.raises(ScenarioError, match="sorted"):
        parse_scenario(text)


def test_end_before_last_event_rejected():
    with pytest.raises(ScenarioError, match="endMs"):
        UserScenario(800, 100, (UserEvent(200, scroll_to=5),))


def test_event_needs_exactly_one_action():
    with pytest.raises(ScenarioError):
        UserEvent(1, scroll_to=3, click="x")
    with pytest.raises(ScenarioError):
        parse_scenario('{"viewportHeightPx": 800, "endMs": 10, "events": [{"atMs": 1}]}')


def test_scroll_no_events():
    assert scroll_position_at(UserScenario(800, 10000), 4000) == 0


def test_scroll_step_boundary():
    s = UserScenario(800, 10000, (UserEvent(3000, scroll_to=1800),))
    assert scroll_position_at(s, 2999) == 0
    assert scroll_position_at(s, 3000) == 1800


def test_two_scrolls():
    s = UserScenario(800, 10000, (UserEvent(1000, scroll_to=500), UserEvent(2000, scroll_to=900)))
    assert scroll_position_at(s, 1500) == 500


def test_scroll_out_of_range():
    with pytest.raises(ScenarioError):
        scroll_position_at(UserScenario(800, 100), 101)


def test_round_trip():
    s = scenario("walkthrough")
    assert parse_scenario(json.dumps(scenario_to_dict(s))) == s


@given(st.lists(st.tuples(st.integers(0, 10_000), st.integers(0, 5000)), max_size=8),
       st.integers(0, 10_000))
def test_scroll_is_piecewise_constant(raw, t):
    raw = sorted(raw)
    s = UserScenario(800, 10_000, tuple(UserEvent(a, scroll_to=y) for a, y in raw))
    times = sorted({a for a, _ in raw})
    # between consecutive change points the position does not move
    lo = max([a for a in times if a <= t], default=0)
    assert scroll_position_at(s, t) == scroll_position_at(s, lo)
    expected = 0
    for a, y in raw:
        if a <= t:
            expected = y
    assert scroll_position_at(s, t) == expected
