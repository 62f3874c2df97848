"""Deterministic simulator for streamed SSR pages with adaptive, per-module hydration."""

from .engine import (SimConfig, SimTrace, SimulationError, html_arrival_times, next_idle,
                     simulate, trace_to_csv, viewport_visible)
from .environment import (ConnectionSignals, DeviceProfile, Environment, NetworkProfile,
                          PRESET_NAMES, is_low_end, preset)
from .manifest import (ManifestError, ModuleSpec, PageManifest, TriggerRule, baseline_transform,
                       parse_manifest, serialize_manifest, validate_manifest)
from .fixtures import product_page, scenario
from .metrics import DeltaReport, MetricsReport, compare_reports, compute_report, format_delta_table
from .network import FetchRequest, fetch_schedule
from .policy import HydrationPlan, ModulePlan, plan_for_baseline, resolve_plan
from .scenario import UserEvent, UserScenario, parse_scenario, scroll_position_at
from .runner import run_policy, run_comparison

__version__ = "0.1.0"
