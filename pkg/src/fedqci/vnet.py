"""Split each link's key rate into national, federated and custom sub-links.

For a link whose endpoint countries are ``K``, traffic of use-cases that
involve no country of ``K`` is *external* and must fit the federated share.
Everything else belongs to the national share.  Cross-border links may also
hold back a custom reserve for bilateral protocols.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .errors import Overcommitted
from .planner import DesignProblem, DesignSolution, is_external, link_capacity, national_country
from .satellite import schedule_for
from .topology import Link, Percentage

TOL = 1e-6


@dataclass(frozen=True)
class VNetAllocation:
    link: str
    window: int
    national_share: float
    federated_share: float
    custom_reserve: float

    @property
    def capacity(self) -> float:
        return self.national_share + self.federated_share + self.custom_reserve


@dataclass(frozen=True)
class Violation:
    link: str
    window: int
    share: str  # "federated" or "national"
    flow: float
    allowed: float


def _active_links(problem: DesignProblem, solution: DesignSolution) -> list[Link]:
    t = problem.topology
    out = []
    for e in t.links:
        if e.is_candidate and e.id not in solution.built_links:
            continue
        if any(x in t.ogs_candidate_by_node and x not in solution.built_ogs for x in (e.a, e.b)):
            continue
        out.append(e)
    return out


def link_flows(
    problem: DesignProblem, solution: DesignSolution, link: Link, window: int
) -> tuple[float, float]:
    """(external, national) absolute flow on ``link`` in ``window``."""
    t = problem.topology
    countries = t.link_countries(link)
    ext = own = 0.0
    for u in problem.use_cases:
        f = abs(solution.flows.get((u.id, link.id, window), 0.0))
        if not f:
            continue
        if is_external(t, u, countries):
            ext += f
        else:
            own += f
    return ext, own


def allocate_vnets(
    problem: DesignProblem,
    solution: DesignSolution,
    custom_reserve: Mapping[str, float] | float | None = None,
) -> list[VNetAllocation]:
    """Per-link, per-window partition of capacity.

    ``custom_reserve`` gives the reserved fraction for cross-border links,
    either per link id or as one number for all of them; it defaults to the
    problem's setting (0 unless configured).  National links never carry a
    custom reserve.
    """
    t = problem.topology
    if custom_reserve is None:
        custom_reserve = problem.custom_reserve
    schedule = schedule_for(t, problem.satellite) if problem.satellite is not None else None
    out = []
    for e in _active_links(problem, solution):
        home = national_country(t, e)
        policy = t.country_by_id[home].availability_policy if home else None
        if home is None:
            frac = custom_reserve if isinstance(custom_reserve, (int, float)) else custom_reserve.get(e.id, 0.0)
        else:
            frac = 0.0
        for w in range(problem.num_windows):
            cap = link_capacity(e, w, schedule)
            ext, _ = link_flows(problem, solution, e, w)
            floor = policy.fraction * cap if isinstance(policy, Percentage) else 0.0
            custom = frac * cap
            if ext + custom > cap + TOL + 1e-9 * cap:
                raise Overcommitted(
                    f"link {e.id} window {w}: external flow {ext:.6f} + reserve {custom:.6f} > capacity {cap:.6f}",
                    subject=e.id,
                )
            federated = min(max(ext, floor), cap - custom)
            out.append(VNetAllocation(e.id, w, cap - federated - custom, federated, custom))
    return out


def enforcement_check(
    allocations: list[VNetAllocation], problem: DesignProblem, solution: DesignSolution
) -> list[Violation]:
    """Flows that do not fit their sub-link; empty when the partition holds."""
    t = problem.topology
    out = []
    for a in allocations:
        e = t.link_by_id[a.link]
        ext, own = link_flows(problem, solution, e, a.window)
        slack = TOL + 1e-9 * a.capacity
        if ext > a.federated_share + slack:
            out.append(Violation(a.link, a.window, "federated", ext, a.federated_share))
        if own > a.national_share + slack:
            out.append(Violation(a.link, a.window, "national", own, a.national_share))
    return out


def allocations_csv(allocations: list[VNetAllocation]) -> str:
    lines = ["link,window,national,federated,custom"]
    for a in allocations:
        lines.append(
            f"{a.link},{a.window},{a.national_share:.6f},{a.federated_share:.6f},{a.custom_reserve:.6f}"
        )
    return "\n".join(lines) + "\n"
