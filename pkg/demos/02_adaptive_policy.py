"""
Device-aware hydration plans
============================

The same manifest resolves to different plans on capable and constrained
devices. Low-end clients drop timeouts, skip prefetching and hydrate one
module at a time.
"""

from hydrasim import PRESET_NAMES, is_low_end, preset, product_page, resolve_plan

m = product_page()
for name in PRESET_NAMES:
    env = preset(name)
    plan = resolve_plan(m, env)
    print(f"\n{name}  low_end={is_low_end(env.device, env.signals)}  throttle={plan.throttle}")
    for p in plan.plans:
        print(f"  {p.module_id:16s} {p.trigger.kind:10s} timeout={p.timeout_ms} prefetch={p.prefetch}")

# %%
# The memory cut-off for "low end" is a parameter.
from hydrasim import DeviceProfile, ConnectionSignals

dev = DeviceProfile(cpu_slowdown=2, device_memory_gb=2, cores=4)
sig = ConnectionSignals("4g")
print([is_low_end(dev, sig, low_memory_gb=g) for g in (1, 2, 4)])
