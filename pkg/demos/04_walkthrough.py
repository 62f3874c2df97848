"""
A user scrolls to the recommendations and clicks
================================================

Recommendations hydrate only after the scroll brings them near the
viewport. On the phone the footer stays cold.
"""

from hydrasim import preset, product_page, run_policy, scenario

m, s = product_page(), scenario("walkthrough")
for env_name in ("desktop-fast", "mobile-slow3g"):
    trace, report = run_policy(m, preset(env_name), s, "mrah")
    print(f"\n{env_name}")
    for tr in trace.triggers:
        h = trace.hydration_for(tr.module_id)
        done = f"{h.task_end_ms:.1f}" if h else "-"
        print(f"  {tr.module_id:16s} {tr.cause:11s} at {tr.at_ms:8.1f}  hydrated {done}")
    print("  clicks:", [(i.module_id, i.dead, i.handled_ms) for i in trace.interactions])

# %%
# With replay enabled, a click that lands before hydration is handled once it finishes.
from hydrasim import SimConfig, UserEvent, UserScenario

early = UserScenario(800, 8000, (UserEvent(400, click="header"),))
trace, report = run_policy(m, preset("mobile-slow3g"), early, "mrah", SimConfig(interaction_replay="queued"))
print(trace.interactions[0], "fid", report.fid_ms)
