"""Fluid fair-share model of a single bottleneck link.

Every request waits one round trip before its first byte; from then on all
requests that are past their first byte split the downlink evenly. At most
``max_connections`` requests hold a connection at once, later ones queue FIFO
and start their round trip when a connection frees up.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Optional

from .environment import NetworkProfile

_EPS_BYTES = 1e-6


@dataclass(frozen=True)
class FetchRequest:
    id: str
    bytes: int
    request_ms: float


@dataclass(frozen=True)
class FetchTiming:
    id: str
    bytes: int
    request_ms: float
    first_byte_ms: float
    done_ms: float


class SharedLink:
    """Incremental version of the link model, driven by the simulation clock."""

    def __init__(self, net: NetworkProfile) -> None:
        self.rate = net.bytes_per_ms
        self.rtt = net.rtt_ms
        self.max_connections = net.max_connections
        self.now = 0.0
        self._waiting: deque[FetchRequest] = deque()
        self._latency: list[tuple[float, int, FetchRequest]] = []
        self._active: dict[str, float] = {}
        self._first_byte: dict[str, float] = {}
        self._requests: dict[str, FetchRequest] = {}
        self._seq = 0
        self.timings: dict[str, FetchTiming] = {}

    @property
    def in_flight(self) -> int:
        return len(self._waiting) + len(self._latency) + len(self._active)

    def request(self, req: FetchRequest) -> list[str]:
        """Register ``req`` at ``req.request_ms``; returns ids completed while catching up."""
        if req.bytes <= 0:
            raise ValueError(f"fetch {req.id!r}: bytes must be > 0")
        if req.id in self._requests:
            raise ValueError(f"fetch {req.id!r} requested twice")
        done = self.advance(req.request_ms)
        self._requests[req.id] = req
        self._waiting.append(req)
        self._admit()
        return done

    def _admit(self) -> None:
        while self._waiting and len(self._latency) + len(self._active) < self.max_connections:
            req = self._waiting.popleft()
            fb = self.now + self.rtt
            self._first_byte[req.id] = fb
            self._latency.append((fb, self._seq, req))
            self._seq += 1
        self._latency.sort(key=lambda e: (e[0], e[1]))

    def next_event_ms(self) -> Optional[float]:
        cands = []
        if self._latency:
            cands.append(self._latency[0][0])
        if self._active:
            n = len(self._active)
            cands.append(self.now + min(self._active.values()) * n / self.rate)
        return min(cands) if cands else None

    def _transfer(self, dt: float) -> None:
        if dt <= 0 or not self._active:
            return
        share = dt * self.rate / len(self._active)
        for k in self._active:
            self._active[k] -= share

    def advance(self, t: float) -> list[str]:
        """Move the clock to ``t``; return ids of fetches finishing in ``(now, t]``."""
        if t < self.now:
            raise ValueError(f"cannot advance backwards ({t} < {self.now})")
        completed: list[str] = []
        while True:
            nxt = self.next_event_ms()
            if nxt is None or nxt > t:
                self._transfer(t - self.now)
                self.now = t
                return completed
            self._transfer(nxt - self.now)
            self.now = max(self.now, nxt)
            while self._latency and self._latency[0][0] <= self.now:
                _, _, req = self._latency.pop(0)
                self._active[req.id] = float(req.bytes)
            n = len(self._active)
            # second clause: completion instant indistinguishable from now in float
            finished = [k for k, rem in self._active.items()
                        if rem <= _EPS_BYTES or self.now + rem * n / self.rate <= self.now]
            for k in finished:
                del self._active[k]
                req = self._requests[k]
                self.timings[k] = FetchTiming(k, req.bytes, req.request_ms,
                                              self._first_byte[k], self.now)
                completed.append(k)
            self._admit()


def fetch_schedule(requests: Iterable[FetchRequest], net: NetworkProfile) -> list[FetchTiming]:
    """Timings for a fixed, time-ordered batch of requests on one link."""
    reqs = list(requests)
    link = SharedLink(net)
    for req in reqs:
        link.request(req)
    while link.in_flight:
        link.advance(link.next_event_ms())
    return [link.timings[r.id] for r in reqs]
