"""Resolve a page manifest and a client environment into a hydration plan."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .environment import LOW_MEMORY_GB, Environment, is_low_end
from .manifest import PageManifest, TriggerRule

PRIORITY_RANK = {"high": 0, "medium": 1, "low": 2}


@dataclass(frozen=True)
class ModulePlan:
    module_id: str
    trigger: TriggerRule
    timeout_ms: Optional[float]
    prefetch: bool
    priority_rank: int

    def to_json(self) -> dict:
        return {
            "moduleId": self.module_id,
            "trigger": self.trigger.to_json(),
            "timeoutMs": self.timeout_ms,
            "prefetch": self.prefetch,
            "priorityRank": self.priority_rank,
        }


@dataclass(frozen=True)
class HydrationPlan:
    plans: tuple[ModulePlan, ...]
    throttle: str  # "parallel" | "one-at-a-time"
    low_end: bool

    def for_module(self, module_id: str) -> ModulePlan:
        for p in self.plans:
            if p.module_id == module_id:
                return p
        raise KeyError(module_id)

    def to_json(self) -> dict:
        return {
            "lowEnd": self.low_end,
            "throttle": self.throttle,
            "plans": [p.to_json() for p in self.plans],
        }


def resolve_plan(m: PageManifest, env: Environment,
                 low_memory_gb: float = LOW_MEMORY_GB) -> HydrationPlan:
    low_end = is_low_end(env.device, env.signals, low_memory_gb)
    plans = []
    for mod in m.modules:
        trigger = mod.trigger_low_end if low_end else mod.trigger_high_end
        timeout = mod.timeout_low_end_ms if low_end else mod.timeout_high_end_ms
        if trigger.kind == "ssr-only":
            timeout = None
        plans.append(ModulePlan(
            module_id=mod.id,
            trigger=trigger,
            timeout_ms=timeout,
            prefetch=trigger.kind == "visible" and not low_end,
            priority_rank=PRIORITY_RANK[mod.priority],
        ))
    return HydrationPlan(tuple(plans), "one-at-a-time" if low_end else "parallel", low_end)


def plan_for_baseline(m: PageManifest) -> HydrationPlan:
    """Eager plan for a bundled manifest: everything immediate, nothing deferred."""
    immediate = TriggerRule("immediate")
    plans = tuple(
        ModulePlan(mod.id, immediate, None, False, PRIORITY_RANK[mod.priority])
        for mod in m.modules
    )
    return HydrationPlan(plans, "parallel", False)
