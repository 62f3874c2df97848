"""Page model: renderable modules, their geometry, costs and hydration triggers.

A manifest is an ordered, single-column list of modules. Each module carries
its server HTML size, its client chunk size, the main-thread cost of hydrating
it at 1x CPU, and the trigger rules used on high-end and low-end clients.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Any, Optional

TRIGGER_KINDS = ("immediate", "visible", "idle", "interaction", "ssr-only")
PRIORITIES = ("high", "medium", "low")

_MODULE_KEYS = {
    "id", "priority", "chunkBytes", "hydrationCostMs", "htmlBytes",
    "serverRenderLatencyMs", "suspense", "offsetPx", "heightPx",
    "placeholderHeightPx", "interactive", "lcpCandidate", "trigger",
    "triggerLowEnd", "timeoutMs", "timeoutLowEndMs",
}
_MODULE_REQUIRED = _MODULE_KEYS - {"triggerLowEnd", "timeoutMs", "timeoutLowEndMs"}
_TOP_KEYS = {"sharedRuntimeBytes", "headHtmlBytes", "modules", "bundled"}
_TOP_REQUIRED = _TOP_KEYS - {"bundled"}


class ManifestError(ValueError):
    """Raised when a manifest cannot be parsed or violates an invariant."""


@dataclass(frozen=True)
class TriggerRule:
    kind: str
    root_margin_px: Optional[int] = None

    def to_json(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind}
        if self.root_margin_px is not None:
            out["rootMarginPx"] = self.root_margin_px
        return out


@dataclass(frozen=True)
class ModuleSpec:
    id: str
    priority: str
    chunk_bytes: int
    hydration_cost_ms: float
    html_bytes: int
    server_render_latency_ms: float
    suspense: bool
    offset_px: int
    height_px: int
    placeholder_height_px: int
    interactive: bool
    lcp_candidate: bool
    trigger_high_end: TriggerRule
    trigger_low_end: Optional[TriggerRule] = None
    timeout_high_end_ms: Optional[float] = None
    timeout_low_end_ms: Optional[float] = None

    def __post_init__(self) -> None:
        if self.trigger_low_end is None:
            object.__setattr__(self, "trigger_low_end", self.trigger_high_end)

    @property
    def is_ssr_only(self) -> bool:
        return (self.trigger_high_end.kind == "ssr-only"
                and self.trigger_low_end.kind == "ssr-only")


@dataclass(frozen=True)
class PageManifest:
    """Ordered module list plus the shared runtime and document head sizes.

    ``bundled`` marks the output of :func:`baseline_transform`: every module's
    code lives in the shared runtime, so a zero ``chunk_bytes`` no longer
    implies the module is server-only.
    """

    modules: tuple[ModuleSpec, ...]
    shared_runtime_bytes: int
    head_html_bytes: int
    bundled: bool = False

    def module(self, module_id: str) -> ModuleSpec:
        for mod in self.modules:
            if mod.id == module_id:
                return mod
        raise KeyError(module_id)

    @property
    def total_script_bytes(self) -> int:
        return self.shared_runtime_bytes + sum(m.chunk_bytes for m in self.modules)


@dataclass(frozen=True)
class Violation:
    module_id: Optional[str]
    field: str
    message: str

    def __str__(self) -> str:
        where = f"module {self.module_id!r}" if self.module_id else "manifest"
        return f"{where}: {self.field}: {self.message}"


def _check_trigger(rule: TriggerRule, mid: str, name: str) -> list[Violation]:
    out = []
    if rule.kind not in TRIGGER_KINDS:
        out.append(Violation(mid, f"{name}.kind", f"unknown trigger kind {rule.kind!r}"))
    if rule.kind == "visible":
        if rule.root_margin_px is None:
            out.append(Violation(mid, f"{name}.rootMarginPx", "required for visible trigger"))
        elif rule.root_margin_px < 0:
            out.append(Violation(mid, f"{name}.rootMarginPx", "must be >= 0"))
    elif rule.root_margin_px is not None:
        out.append(Violation(mid, f"{name}.rootMarginPx", "only allowed for visible trigger"))
    return out


def validate_manifest(m: PageManifest) -> list[Violation]:
    """Return every invariant violation in ``m``; an empty list means valid."""
    out: list[Violation] = []
    if not m.modules:
        out.append(Violation(None, "modules", "at least one module required"))
        return out
    if m.shared_runtime_bytes < 0:
        out.append(Violation(None, "sharedRuntimeBytes", "must be >= 0"))
    if m.head_html_bytes < 0:
        out.append(Violation(None, "headHtmlBytes", "must be >= 0"))

    seen: set[str] = set()
    prev_offset: Optional[int] = None
    for mod in m.modules:
        mid = mod.id
        if not mid:
            out.append(Violation(mid, "id", "must be non-empty"))
        elif mid in seen:
            out.append(Violation(mid, "id", "duplicate id"))
        seen.add(mid)
        if mod.priority not in PRIORITIES:
            out.append(Violation(mid, "priority", f"unknown priority {mod.priority!r}"))
        out += _check_trigger(mod.trigger_high_end, mid, "trigger")
        out += _check_trigger(mod.trigger_low_end, mid, "triggerLowEnd")
        if mod.chunk_bytes < 0:
            out.append(Violation(mid, "chunkBytes", "must be >= 0"))
        elif m.bundled:
            if mod.chunk_bytes != 0:
                out.append(Violation(mid, "chunkBytes", "bundled manifest must have no per-module chunks"))
        elif (mod.chunk_bytes == 0) != mod.is_ssr_only:
            out.append(Violation(
                mid, "chunkBytes",
                "must be 0 exactly when both triggers are ssr-only"))
        if mod.hydration_cost_ms < 0:
            out.append(Violation(mid, "hydrationCostMs", "must be >= 0"))
        if mod.html_bytes < 0:
            out.append(Violation(mid, "htmlBytes", "must be >= 0"))
        if mod.server_render_latency_ms < 0:
            out.append(Violation(mid, "serverRenderLatencyMs", "must be >= 0"))
        if mod.suspense and not mod.server_render_latency_ms > 0:
            out.append(Violation(mid, "serverRenderLatencyMs", "must be > 0 for suspense modules"))
        if mod.height_px <= 0:
            out.append(Violation(mid, "heightPx", "must be > 0"))
        if mod.placeholder_height_px < 0:
            out.append(Violation(mid, "placeholderHeightPx", "must be >= 0"))
        if mod.offset_px < 0:
            out.append(Violation(mid, "offsetPx", "must be >= 0"))
        if prev_offset is not None and mod.offset_px <= prev_offset:
            out.append(Violation(mid, "offsetPx", f"not strictly increasing ({mod.offset_px} after {prev_offset})"))
        prev_offset = mod.offset_px
        for name, val in (("timeoutMs", mod.timeout_high_end_ms),
                          ("timeoutLowEndMs", mod.timeout_low_end_ms)):
            if val is not None and val < 0:
                out.append(Violation(mid, name, "must be >= 0"))
        if mod.trigger_high_end.kind == "ssr-only" and mod.timeout_high_end_ms is not None:
            out.append(Violation(mid, "timeoutMs", "not allowed with ssr-only trigger"))
        if mod.trigger_low_end.kind == "ssr-only" and mod.timeout_low_end_ms is not None:
            out.append(Violation(mid, "timeoutLowEndMs", "not allowed with ssr-only trigger"))
    if m.modules[0].offset_px != 0:
        out.append(Violation(m.modules[0].id, "offsetPx", "first module must start at the top of the document (0)"))
    return out


def baseline_transform(m: PageManifest) -> PageManifest:
    """Monolithic variant: one bundle, every module hydrated eagerly."""
    immediate = TriggerRule("immediate")
    modules = tuple(
        replace(mod, chunk_bytes=0, trigger_high_end=immediate, trigger_low_end=immediate,
                timeout_high_end_ms=None, timeout_low_end_ms=None)
        for mod in m.modules
    )
    return PageManifest(modules=modules, shared_runtime_bytes=m.total_script_bytes,
                        head_html_bytes=m.head_html_bytes, bundled=True)


# --- JSON format -----------------------------------------------------------

def _expect(obj: dict, key: str, types: tuple, where: str) -> Any:
    val = obj[key]
    # bool is an int subclass; keep the two apart
    if isinstance(val, bool) and bool not in types:
        raise ManifestError(f"{where}: {key}: expected {types[0].__name__}, got bool")
    if not isinstance(val, types):
        raise ManifestError(f"{where}: {key}: expected {types[0].__name__}, got {type(val).__name__}")
    return val


def _check_keys(obj: Any, allowed: set, required: set, where: str) -> None:
    if not isinstance(obj, dict):
        raise ManifestError(f"{where}: expected an object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise ManifestError(f"{where}: unknown key(s) {', '.join(unknown)}")
    missing = sorted(required - set(obj))
    if missing:
        raise ManifestError(f"{where}: missing key(s) {', '.join(missing)}")


def _trigger_from_json(obj: Any, where: str) -> TriggerRule:
    _check_keys(obj, {"kind", "rootMarginPx"}, {"kind"}, where)
    kind = _expect(obj, "kind", (str,), where)
    margin = None
    if "rootMarginPx" in obj:
        margin = _expect(obj, "rootMarginPx", (int,), where)
    return TriggerRule(kind, margin)


def _module_from_json(obj: Any, index: int) -> ModuleSpec:
    where = f"modules[{index}]"
    _check_keys(obj, _MODULE_KEYS, _MODULE_REQUIRED, where)
    if isinstance(obj.get("id"), str):
        where = f"module {obj['id']!r}"
    num = (int, float)
    low = obj.get("triggerLowEnd")
    return ModuleSpec(
        id=_expect(obj, "id", (str,), where),
        priority=_expect(obj, "priority", (str,), where),
        chunk_bytes=_expect(obj, "chunkBytes", (int,), where),
        hydration_cost_ms=_expect(obj, "hydrationCostMs", num, where),
        html_bytes=_expect(obj, "htmlBytes", (int,), where),
        server_render_latency_ms=_expect(obj, "serverRenderLatencyMs", num, where),
        suspense=_expect(obj, "suspense", (bool,), where),
        offset_px=_expect(obj, "offsetPx", (int,), where),
        height_px=_expect(obj, "heightPx", (int,), where),
        placeholder_height_px=_expect(obj, "placeholderHeightPx", (int,), where),
        interactive=_expect(obj, "interactive", (bool,), where),
        lcp_candidate=_expect(obj, "lcpCandidate", (bool,), where),
        trigger_high_end=_trigger_from_json(obj["trigger"], f"{where}.trigger"),
        trigger_low_end=None if low is None else _trigger_from_json(low, f"{where}.triggerLowEnd"),
        timeout_high_end_ms=_expect(obj, "timeoutMs", num, where) if "timeoutMs" in obj else None,
        timeout_low_end_ms=_expect(obj, "timeoutLowEndMs", num, where) if "timeoutLowEndMs" in obj else None,
    )


def manifest_from_dict(obj: Any) -> PageManifest:
    _check_keys(obj, _TOP_KEYS, _TOP_REQUIRED, "manifest")
    mods = obj["modules"]
    if not isinstance(mods, list):
        raise ManifestError("manifest: modules: expected a list")
    manifest = PageManifest(
        modules=tuple(_module_from_json(mo, i) for i, mo in enumerate(mods)),
        shared_runtime_bytes=_expect(obj, "sharedRuntimeBytes", (int,), "manifest"),
        head_html_bytes=_expect(obj, "headHtmlBytes", (int,), "manifest"),
        bundled=_expect(obj, "bundled", (bool,), "manifest") if "bundled" in obj else False,
    )
    violations = validate_manifest(manifest)
    if violations:
        raise ManifestError("; ".join(str(v) for v in violations))
    return manifest


def parse_manifest(text: str) -> PageManifest:
    """Parse and validate a JSON manifest.

    Raises :class:`ManifestError` on malformed JSON (with line/column),
    unknown or missing keys, wrong value types, or any invariant violation.
    """
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return manifest_from_dict(obj)


def manifest_to_dict(m: PageManifest) -> dict:
    mods = []
    for mod in m.modules:
        d: dict[str, Any] = {
            "id": mod.id,
            "priority": mod.priority,
            "chunkBytes": mod.chunk_bytes,
            "hydrationCostMs": mod.hydration_cost_ms,
            "htmlBytes": mod.html_bytes,
            "serverRenderLatencyMs": mod.server_render_latency_ms,
            "suspense": mod.suspense,
            "offsetPx": mod.offset_px,
            "heightPx": mod.height_px,
            "placeholderHeightPx": mod.placeholder_height_px,
            "interactive": mod.interactive,
            "lcpCandidate": mod.lcp_candidate,
            "trigger": mod.trigger_high_end.to_json(),
        }
        if mod.trigger_low_end != mod.trigger_high_end:
            d["triggerLowEnd"] = mod.trigger_low_end.to_json()
        if mod.timeout_high_end_ms is not None:
            d["timeoutMs"] = mod.timeout_high_end_ms
        if mod.timeout_low_end_ms is not None:
            d["timeoutLowEndMs"] = mod.timeout_low_end_ms
        mods.append(d)
    out: dict[str, Any] = {
        "sharedRuntimeBytes": m.shared_runtime_bytes,
        "headHtmlBytes": m.head_html_bytes,
        "modules": mods,
    }
    if m.bundled:
        out["bundled"] = True
    return out


def serialize_manifest(m: PageManifest) -> str:
    return json.dumps(manifest_to_dict(m), indent=2, sort_keys=True) + "\n"
