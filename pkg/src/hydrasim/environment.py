"""Client device, connection hints and physical network models."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any

EFFECTIVE_TYPES = ("slow-2g", "2g", "3g", "4g")
PRESET_NAMES = ("desktop-fast", "desktop-slow3g", "mobile-fast", "mobile-slow3g")

LOW_MEMORY_GB = 1.0
LOW_CORES = 2


class InvalidEnvironment(ValueError):
    """Invalid environment description."""


@dataclass(frozen=True)
class DeviceProfile:
    cpu_slowdown: float
    device_memory_gb: float
    cores: int

    def __post_init__(self) -> None:
        if not self.cpu_slowdown >= 1:
            raise InvalidEnvironment(f"cpuSlowdown must be >= 1, got {self.cpu_slowdown}")
        if not self.device_memory_gb > 0:
            raise InvalidEnvironment(f"deviceMemoryGb must be > 0, got {self.device_memory_gb}")
        if self.cores < 1:
            raise InvalidEnvironment(f"cores must be >= 1, got {self.cores}")


@dataclass(frozen=True)
class ConnectionSignals:
    effective_type: str
    save_data: bool = False

    def __post_init__(self) -> None:
        if self.effective_type not in EFFECTIVE_TYPES:
            raise InvalidEnvironment(f"effectiveType must be one of {EFFECTIVE_TYPES}, got {self.effective_type!r}")


@dataclass(frozen=True)
class NetworkProfile:
    downlink_bps: float
    rtt_ms: float
    max_connections: int = 6

    def __post_init__(self) -> None:
        if not self.downlink_bps > 0:
            raise InvalidEnvironment(f"downlinkBps must be > 0, got {self.downlink_bps}")
        if not self.rtt_ms >= 0:
            raise InvalidEnvironment(f"rttMs must be >= 0, got {self.rtt_ms}")
        if self.max_connections < 1:
            raise InvalidEnvironment(f"maxConnections must be >= 1, got {self.max_connections}")

    @property
    def bytes_per_ms(self) -> float:
        return self.downlink_bps / 8.0 / 1000.0


@dataclass(frozen=True)
class Environment:
    device: DeviceProfile
    signals: ConnectionSignals
    network: NetworkProfile


_DESKTOP = DeviceProfile(cpu_slowdown=1.0, device_memory_gb=8.0, cores=8)
_MOBILE = DeviceProfile(cpu_slowdown=4.0, device_memory_gb=1.0, cores=2)
_FAST = (ConnectionSignals("4g"), NetworkProfile(10_000_000, 40.0, 6))
_SLOW3G = (ConnectionSignals("3g"), NetworkProfile(1_600_000, 300.0, 6))

_PRESETS = {
    "desktop-fast": Environment(_DESKTOP, *_FAST),
    "desktop-slow3g": Environment(_DESKTOP, *_SLOW3G),
    "mobile-fast": Environment(_MOBILE, *_FAST),
    "mobile-slow3g": Environment(_MOBILE, *_SLOW3G),
}


def preset(name: str) -> Environment:
    """Return one of the four lab environments by name."""
    try:
        return _PRESETS[name]
    except KeyError:
        raise InvalidEnvironment(f"unknown preset {name!r}; expected one of {', '.join(PRESET_NAMES)}") from None


def is_low_end(device: DeviceProfile, signals: ConnectionSignals,
               low_memory_gb: float = LOW_MEMORY_GB) -> bool:
    slow_net = signals.effective_type in ("2g", "slow-2g")
    low_mem = device.device_memory_gb <= low_memory_gb
    low_cpu = device.cores <= LOW_CORES
    return slow_net or signals.save_data or low_mem or low_cpu


def environment_from_dict(obj: Any) -> Environment:
    """Build an Environment from the JSON shape written by :func:`environment_to_dict`."""
    if not isinstance(obj, dict) or set(obj) != {"device", "signals", "network"}:
        raise InvalidEnvironment("environment: expected object with keys device, signals, network")
    try:
        dev, sig, net = obj["device"], obj["signals"], obj["network"]
        return Environment(
            device=DeviceProfile(float(dev["cpuSlowdown"]), float(dev["deviceMemoryGb"]), int(dev["cores"])),
            signals=ConnectionSignals(str(sig["effectiveType"]), bool(sig.get("saveData", False))),
            network=NetworkProfile(float(net["downlinkBps"]), float(net["rttMs"]),
                                   int(net.get("maxConnections", 6))),
        )
    except (KeyError, TypeError) as exc:
        raise InvalidEnvironment(f"environment: missing or malformed field {exc}") from None


def environment_to_dict(env: Environment) -> dict:
    return {
        "device": {"cpuSlowdown": env.device.cpu_slowdown,
                   "deviceMemoryGb": env.device.device_memory_gb,
                   "cores": env.device.cores},
        "signals": {"effectiveType": env.signals.effective_type,
                    "saveData": env.signals.save_data},
        "network": {"downlinkBps": env.network.downlink_bps,
                    "rttMs": env.network.rtt_ms,
                    "maxConnections": env.network.max_connections},
    }


def load_environment(text: str) -> Environment:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidEnvironment(f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return environment_from_dict(obj)
