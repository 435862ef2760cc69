"""Deterministic satellite pass scheduling for double-downlink key exchange.

A satellite acting as a flying trusted node serves one ground station per
pass.  A key exchange between two countries needs two passes of the *same*
satellite, one over an OGS of each country; the exchange completes in the
window of the later pass and yields ``min`` of the two weather-scaled pass
yields (capped at what the request still needs).

Windows are processed in order.  At the start of a window every open
request is scored as::

    priority * remaining_fraction / options_remaining_before_deadline

and requests are then served highest score first (ties to the lowest
request id), each taking its best still-free pass pair completing in that
window (largest yield, then lowest pass ids).  Scores are frozen for the
duration of one window.  A request may complete at most one pair per window.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import WrongLinkKind
from .topology import Link, NetworkTopology


@dataclass(frozen=True)
class Pass:
    id: str
    satellite: str
    ogs: str
    window: int
    expected_yield: float
    weather_factor: float = 1.0

    @property
    def effective_yield(self) -> float:
        return self.expected_yield * self.weather_factor


@dataclass(frozen=True)
class SatRequest:
    id: str
    country: str
    counterparty: str
    required_bits: float
    priority: float = 1.0
    deadline: int = 0


@dataclass(frozen=True)
class SatelliteConfig:
    """Satellite section of a scenario."""

    passes: tuple[Pass, ...] = ()
    requests: tuple[SatRequest, ...] = ()
    window_seconds: float = 3600.0


@dataclass(frozen=True)
class SatAssignment:
    request: str
    first_pass: str   # pass over the requesting country
    second_pass: str  # pass over the counterparty
    window: int
    bits: float


@dataclass(frozen=True)
class SatSchedule:
    assignments: tuple[SatAssignment, ...]
    delivered: Mapping[str, float]
    window_seconds: float = 3600.0
    pass_ogs: Mapping[str, str] = field(default_factory=dict)

    @property
    def pass_assignments(self) -> dict[str, str]:
        """Pass id -> request id for every pass that was used."""
        out = {}
        for a in self.assignments:
            out[a.first_pass] = a.request
            out[a.second_pass] = a.request
        return out

    def bits_between(self, ogs_a: str, ogs_b: str, window: int) -> float:
        want = frozenset((ogs_a, ogs_b))
        return math.fsum(
            a.bits
            for a in self.assignments
            if a.window == window
            and frozenset((self.pass_ogs[a.first_pass], self.pass_ogs[a.second_pass])) == want
        )


def _check_passes(passes: Sequence[Pass]) -> None:
    ids = set()
    occupied = set()
    for p in passes:
        if p.id in ids:
            raise ValueError(f"duplicate pass id {p.id}")
        ids.add(p.id)
        if (p.satellite, p.window) in occupied:
            raise ValueError(f"satellite {p.satellite} has two passes in window {p.window}")
        occupied.add((p.satellite, p.window))
        if p.expected_yield < 0 or not 0.0 <= p.weather_factor <= 1.0:
            raise ValueError(f"pass {p.id} has invalid yield or weather factor")


def _pair_options(
    r: SatRequest, passes: Sequence[Pass], ogs_country: Mapping[str, str]
) -> list[tuple[Pass, Pass]]:
    """All (requesting-side, counterparty-side) pass pairs of one satellite."""
    mine = [p for p in passes if ogs_country.get(p.ogs) == r.country]
    theirs = [p for p in passes if ogs_country.get(p.ogs) == r.counterparty]
    return [
        (p, q)
        for p in mine
        for q in theirs
        if p.satellite == q.satellite and p.window != q.window
        and max(p.window, q.window) <= r.deadline
    ]


def schedule_passes(
    passes: Iterable[Pass],
    requests: Iterable[SatRequest],
    ogs_country: Mapping[str, str],
    window_seconds: float = 3600.0,
) -> SatSchedule:
    """Greedy deterministic schedule; see the module docstring for the policy.

    ``ogs_country`` maps OGS node ids to their country.  Requests that cannot
    be served (no OGS on one side, no pass pairs, or lost to higher-scored
    requests) simply end with ``delivered < required_bits``.
    """
    passes = sorted(passes, key=lambda p: p.id)
    requests = sorted(requests, key=lambda r: r.id)
    _check_passes(passes)
    for r in requests:
        if r.country == r.counterparty:
            raise ValueError(f"request {r.id} names the same country twice")
        if r.required_bits <= 0 or r.priority < 0:
            raise ValueError(f"request {r.id} has invalid bits or priority")

    options = {r.id: _pair_options(r, passes, ogs_country) for r in requests}
    remaining = {r.id: float(r.required_bits) for r in requests}
    used: set[str] = set()
    assignments: list[SatAssignment] = []
    windows = sorted({p.window for p in passes})

    for w in windows:
        scored = []
        for r in requests:
            if remaining[r.id] <= 0 or r.deadline < w:
                continue
            live = [
                (p, q) for p, q in options[r.id]
                if max(p.window, q.window) >= w and p.id not in used and q.id not in used
            ]
            now = [(p, q) for p, q in live if max(p.window, q.window) == w]
            if not now:
                continue
            score = r.priority * (remaining[r.id] / r.required_bits) / len(live)
            scored.append((-score, r.id, r, now))
        scored.sort(key=lambda s: (s[0], s[1]))
        for _, _, r, now in scored:
            free = [(p, q) for p, q in now if p.id not in used and q.id not in used]
            if not free:
                continue
            p, q = min(
                free,
                key=lambda pq: (-min(pq[0].effective_yield, pq[1].effective_yield), pq[0].id, pq[1].id),
            )
            bits = min(p.effective_yield, q.effective_yield, remaining[r.id])
            used.update((p.id, q.id))
            remaining[r.id] -= bits
            assignments.append(SatAssignment(r.id, p.id, q.id, w, bits))

    delivered = defaultdict(float)
    for a in assignments:
        delivered[a.request] += a.bits
    return SatSchedule(
        tuple(assignments),
        {r.id: delivered[r.id] for r in requests},
        window_seconds,
        {p.id: p.ogs for p in passes},
    )


def schedule_for(t: NetworkTopology, cfg: SatelliteConfig) -> SatSchedule:
    ogs_country = {n.id: n.country for n in t.nodes if n.kind == "ogs"}
    return schedule_passes(cfg.passes, cfg.requests, ogs_country, cfg.window_seconds)


def effective_feed_capacity(schedule: SatSchedule, link: Link, window: int) -> float:
    """Key rate (bits/s) a satellite feed link offers in ``window``."""
    if link.kind != "satellite_feed":
        raise WrongLinkKind(f"link {link.id} is {link.kind}, not satellite_feed", subject=link.id)
    return schedule.bits_between(link.a, link.b, window) / schedule.window_seconds


def schedule_csv(schedule: SatSchedule, requests: Iterable[SatRequest]) -> str:
    lines = ["request,first_pass,second_pass,window,bits"]
    for a in schedule.assignments:
        lines.append(f"{a.request},{a.first_pass},{a.second_pass},{a.window},{a.bits:.6f}")
    lines.append("")
    lines.append("request,required_bits,delivered_bits")
    for r in sorted(requests, key=lambda r: r.id):
        lines.append(f"{r.id},{r.required_bits:.6f},{schedule.delivered.get(r.id, 0.0):.6f}")
    return "\n".join(lines) + "\n"
