"""Multi-commodity flow MILP for federated QKD build-out.

One commodity per use-case and active window.  Flow variables exist for
both directions of every link the use-case may traverse; candidate links and
candidate ground stations get binary build variables.  Constraint families
(row-name prefixes in brackets):

* flow conservation at non-endpoint nodes                          [cons]
* demand at the source (fixed rate, or a served variable)          [demand]
* link capacity times build indicator                              [cap, ogs]
* admissibility (clearance, security level, exclusions): arcs that
  fail it are never created, which is the same as fixing them to 0
* percentage availability on national links of a country           [pct_ext, pct_own]
* point-to-point availability via synthetic transit edges          [transit]
* satellite feed capacity from the pass schedule (inside ``cap``)
* budget for the max-served objective                              [budget]

A country with ``Percentage(p)`` gives external use-cases at most ``p`` of
every national link and keeps that share free of its own traffic, so the
federated slice of each national link is a firm reservation.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import FedQCIError, Infeasible, InfeasibleInput, Unbounded, UnknownEndpoint
from .satellite import SatelliteConfig, SatSchedule, effective_feed_capacity, schedule_for
from .solver import LpProblem, LpStatus, solve_lp, solve_milp, write_lp
from .topology import (
    AvailabilityPolicy,
    Link,
    NetworkTopology,
    Percentage,
    PointToPoint,
    UseCase,
    adjacency,
    reachable,
    routable_subgraph,
)

OBJECTIVES = ("min_cost", "max_served")
FLOW_TOL = 1e-6


@dataclass(frozen=True)
class DesignProblem:
    topology: NetworkTopology
    use_cases: tuple[UseCase, ...] = ()
    objective: str = "min_cost"
    budget: float | None = None
    num_windows: int = 1
    satellite: SatelliteConfig | None = None
    custom_reserve: Mapping[str, float] = field(default_factory=dict)
    feas_tol: float = 1e-7
    int_tol: float = 1e-6

    def use_case(self, uid: str) -> UseCase:
        for u in self.use_cases:
            if u.id == uid:
                return u
        raise KeyError(uid)


@dataclass(frozen=True)
class Var:
    kind: str  # flow | build | ogs | served
    name: str
    use_case: str | None = None
    edge: str | None = None  # link id or transit key
    window: int | None = None
    direction: int = 0  # +1 for a->b, -1 for b->a


@dataclass
class MilpModel:
    lp: LpProblem
    binaries: list[int]
    variables: list[Var]
    capacities: dict[tuple[str, int], float]
    schedule: SatSchedule | None = None

    @property
    def flow_vars(self) -> list[int]:
        return [j for j, v in enumerate(self.variables) if v.kind == "flow"]

    def to_lp_text(self) -> str:
        return write_lp(self.lp, self.binaries, title="federated QKD design model")


@dataclass(frozen=True)
class DesignSolution:
    """Chosen builds and routed flows.

    ``flows`` maps ``(use_case, link, window)`` to the net rate from
    ``link.a`` towards ``link.b`` (negative when it runs the other way).
    ``transit`` holds the same for synthetic point-to-point edges, keyed
    ``country:node_a~node_b``.
    """

    built_links: frozenset[str]
    built_ogs: frozenset[str]
    flows: Mapping[tuple[str, str, int], float]
    transit: Mapping[tuple[str, str, int], float]
    served: Mapping[str, Mapping[int, float]]
    total_cost: float
    budget_shares: Mapping[str, float]
    objective_value: float = 0.0

    @property
    def built(self) -> frozenset[str]:
        return self.built_links | self.built_ogs


# -- helpers -----------------------------------------------------------------


def involved_countries(t: NetworkTopology, u: UseCase) -> frozenset[str]:
    return frozenset(t.country_of(n) for n in u.endpoints)


def is_external(t: NetworkTopology, u: UseCase, countries: Iterable[str]) -> bool:
    """True when ``u`` involves none of ``countries`` as an endpoint country."""
    return not (involved_countries(t, u) & frozenset(countries))


def national_country(t: NetworkTopology, link: Link) -> str | None:
    ca, cb = t.country_of(link.a), t.country_of(link.b)
    return ca if ca == cb else None


def transit_key(country: str, a: str, b: str) -> str:
    return f"{country}:{a}~{b}"


def _policy(t: NetworkTopology, country: str) -> AvailabilityPolicy | None:
    c = t.country_by_id.get(country)
    return c.availability_policy if c else None


def link_capacity(
    link: Link, window: int, schedule: SatSchedule | None
) -> float:
    if link.kind == "satellite_feed" and schedule is not None:
        return effective_feed_capacity(schedule, link, window)
    return link.capacity


@dataclass(frozen=True)
class _Edge:
    key: str
    a: str
    b: str
    transit_of: str | None = None  # country id for synthetic edges

    @property
    def id(self) -> str:
        return self.key


def commodity_edges(
    p: DesignProblem,
    u: UseCase,
    *,
    fixed_builds: frozenset[str] | None = None,
    failed: frozenset[str] = frozenset(),
) -> tuple[list[str], list[_Edge]]:
    """Nodes and (real or synthetic) edges use-case ``u`` may route over."""
    t = p.topology
    view = routable_subgraph(t, u)
    node_ids = [n.id for n in view.nodes]
    ogs_cand = t.ogs_candidate_by_node
    edges = []
    for e in view.links:
        if e.id in failed:
            continue
        if fixed_builds is not None:
            if e.is_candidate and e.id not in fixed_builds:
                continue
            if any(x in ogs_cand and x not in fixed_builds for x in (e.a, e.b)):
                continue
        home = national_country(t, e)
        if home is not None and isinstance(_policy(t, home), PointToPoint) and is_external(t, u, [home]):
            continue
        edges.append(_Edge(e.id, e.a, e.b))
    present = set(node_ids)
    for c in t.countries:
        pol = c.availability_policy
        if not isinstance(pol, PointToPoint) or not is_external(t, u, [c.id]):
            continue
        if c.id in u.excluded_countries:
            continue
        for a, b, rate in pol.rates:
            if rate > 0 and a in present and b in present:
                edges.append(_Edge(transit_key(c.id, a, b), a, b, transit_of=c.id))
    return node_ids, edges


def _active_windows(p: DesignProblem, u: UseCase) -> list[int]:
    return sorted(w for w in u.schedule if 0 <= w < p.num_windows)


def _check_problem(p: DesignProblem) -> None:
    if p.objective not in OBJECTIVES:
        raise ValueError(f"unknown objective {p.objective!r}")
    if p.objective == "max_served" and not (p.budget is not None and p.budget > 0):
        raise ValueError("max_served needs a positive budget")
    if p.num_windows < 1:
        raise ValueError("num_windows must be positive")
    t = p.topology
    for u in p.use_cases:
        for n in u.endpoints:
            if n not in t.node_by_id:
                raise UnknownEndpoint(f"use-case {u.id}: unknown endpoint {n}", subject=n)
        if u.required_rate <= 0 or u.endpoints[0] == u.endpoints[1] or not u.schedule:
            raise ValueError(f"use-case {u.id} violates its invariants")
        if any(w < 0 or w >= p.num_windows for w in u.schedule):
            raise ValueError(f"use-case {u.id} schedules a window outside 0..{p.num_windows - 1}")


# -- formulation -------------------------------------------------------------


class _Rows:
    def __init__(self) -> None:
        self.coefs: list[dict[int, float]] = []
        self.senses: list[str] = []
        self.rhs: list[float] = []
        self.names: list[str] = []

    def add(self, name: str, coefs: Mapping[int, float], sense: str, rhs: float) -> None:
        self.coefs.append(dict(coefs))
        self.senses.append(sense)
        self.rhs.append(float(rhs))
        self.names.append(name)

    def matrix(self, n: int) -> np.ndarray:
        A = np.zeros((len(self.coefs), n))
        for i, row in enumerate(self.coefs):
            for j, v in row.items():
                A[i, j] += v
        return A


def formulate(
    p: DesignProblem,
    *,
    fixed_builds: Iterable[str] | None = None,
    failed_links: Iterable[str] = (),
    objective: str | None = None,
) -> MilpModel:
    """Build the MILP for ``p``.

    With ``fixed_builds`` the build decisions are taken as given: listed
    candidates behave like existing links, the rest are absent, and the
    model is a pure LP.  ``failed_links`` are removed entirely.
    """
    _check_problem(p)
    t = p.topology
    objective = objective or p.objective
    fixed = frozenset(fixed_builds) if fixed_builds is not None else None
    failed = frozenset(failed_links)
    schedule = schedule_for(t, p.satellite) if p.satellite is not None else None

    per_uc = {}
    for u in p.use_cases:
        nodes, edges = commodity_edges(p, u, fixed_builds=fixed, failed=failed)
        if fixed is None:
            adj = adjacency(nodes, edges)
            if u.target not in reachable(adj, u.source):
                raise InfeasibleInput(
                    f"use-case {u.id}: {u.source} cannot reach {u.target} even with every candidate built",
                    subject=u.id,
                )
        per_uc[u.id] = (nodes, edges)

    variables: list[Var] = []
    cost: list[float] = []
    lo: list[float] = []
    hi: list[float] = []

    def new_var(v: Var, c: float = 0.0, lb: float = 0.0, ub: float = np.inf) -> int:
        variables.append(v)
        cost.append(c)
        lo.append(lb)
        hi.append(ub)
        return len(variables) - 1

    build_var: dict[str, int] = {}
    if fixed is None:
        for e in t.links:
            if e.is_candidate and e.id not in failed:
                build_var[e.id] = new_var(Var("build", f"b_{e.id}", edge=e.id), e.build_cost, 0.0, 1.0)
        for g in t.ground_station_candidates:
            build_var["ogs:" + g.node] = new_var(Var("ogs", f"g_{g.node}", edge=g.node), g.build_cost, 0.0, 1.0)

    served_var: dict[tuple[str, int], int] = {}
    flow_on: dict[tuple[str, int], list[tuple[str, int]]] = defaultdict(list)  # (edge, w) -> [(uc, var)]
    rows = _Rows()

    for u in p.use_cases:
        nodes, edges = per_uc[u.id]
        for w in _active_windows(p, u):
            balance: dict[str, dict[int, float]] = {n: {} for n in nodes}
            for e in edges:
                fw = new_var(Var("flow", f"f_{u.id}_{e.key}_{w}_fw", u.id, e.key, w, +1))
                bw = new_var(Var("flow", f"f_{u.id}_{e.key}_{w}_bw", u.id, e.key, w, -1))
                balance[e.a][fw] = balance[e.a].get(fw, 0.0) + 1.0  # out of a
                balance[e.b][fw] = balance[e.b].get(fw, 0.0) - 1.0
                balance[e.b][bw] = balance[e.b].get(bw, 0.0) + 1.0
                balance[e.a][bw] = balance[e.a].get(bw, 0.0) - 1.0
                flow_on[(e.key, w)].append((u.id, fw))
                flow_on[(e.key, w)].append((u.id, bw))
            for n in nodes:
                if n in u.endpoints:
                    continue
                if balance[n]:
                    rows.add(f"cons_{u.id}_{n}_{w}", balance[n], "=", 0.0)
            src = dict(balance[u.source])
            if objective == "max_served":
                s = new_var(Var("served", f"s_{u.id}_{w}", u.id, window=w), 0.0, 0.0, u.required_rate)
                served_var[(u.id, w)] = s
                src[s] = -1.0
                rows.add(f"demand_{u.id}_{w}", src, "=", 0.0)
            else:
                rows.add(f"demand_{u.id}_{w}", src, "=", u.required_rate)

    capacities: dict[tuple[str, int], float] = {}
    ucs = {u.id: u for u in p.use_cases}
    for e in t.links:
        for w in range(p.num_windows):
            users = flow_on.get((e.id, w))
            if not users:
                continue
            cap = link_capacity(e, w, schedule)
            capacities[(e.id, w)] = cap
            total = {j: 1.0 for _, j in users}
            gates = []
            if e.id in build_var:
                gates.append((f"cap_{e.id}_{w}", build_var[e.id]))
            for x in (e.a, e.b):
                if "ogs:" + x in build_var:
                    gates.append((f"ogs_{x}_{e.id}_{w}", build_var["ogs:" + x]))
            if gates:
                for name, g in gates:
                    rows.add(name, {**total, g: -cap}, "<=", 0.0)
            else:
                rows.add(f"cap_{e.id}_{w}", total, "<=", cap)

            home = national_country(t, e)
            pol = _policy(t, home) if home else None
            if isinstance(pol, Percentage):
                ext = {j: 1.0 for uid, j in users if is_external(t, ucs[uid], [home])}
                own = {j: 1.0 for uid, j in users if not is_external(t, ucs[uid], [home])}
                if ext:
                    rows.add(f"pct_ext_{e.id}_{w}", ext, "<=", pol.fraction * cap)
                if own:
                    rows.add(f"pct_own_{e.id}_{w}", own, "<=", (1.0 - pol.fraction) * cap)

    for c in t.countries:
        pol = c.availability_policy
        if not isinstance(pol, PointToPoint):
            continue
        for a, b, rate in pol.rates:
            key = transit_key(c.id, a, b)
            for w in range(p.num_windows):
                users = flow_on.get((key, w))
                if users:
                    rows.add(f"transit_{key}_{w}", {j: 1.0 for _, j in users}, "<=", rate)

    n = len(variables)
    if objective == "max_served":
        obj = np.zeros(n)
        for j in served_var.values():
            obj[j] = 1.0
        spend = {j: cost[j] for j in build_var.values()}
        if spend:
            rows.add("budget", spend, "<=", float(p.budget))
        maximize = True
    else:
        obj = np.array(cost, dtype=float)
        maximize = False

    lp = LpProblem(
        obj, rows.matrix(n), rows.senses, rows.rhs, np.array(lo), np.array(hi),
        maximize=maximize, var_names=[v.name for v in variables], row_names=rows.names,
    )
    return MilpModel(lp, sorted(build_var.values()), variables, capacities, schedule)


# -- solving -----------------------------------------------------------------


def _raise_for(status: LpStatus, what: str) -> None:
    if status is LpStatus.INFEASIBLE:
        raise Infeasible(f"{what} is infeasible")
    if status is LpStatus.UNBOUNDED:
        raise Unbounded(f"{what} is unbounded (model bug)")
    raise FedQCIError(f"{what}: solver stopped with status {status.value}")


def solve(p: DesignProblem, *, polish: bool = True) -> DesignSolution:
    """Exact optimum of the design MILP, with flows cleaned of circulations.

    After the MILP the build decisions and served rates are frozen and the
    total routed flow is minimised, which removes zero-cost cycles without
    touching the objective value.
    """
    model = formulate(p)
    sol = solve_milp(model.lp, model.binaries, int_tol=p.int_tol, feas_tol=p.feas_tol)
    if not sol.is_optimal:
        _raise_for(sol.status, "design problem")
    x = sol.x
    objective_value = sol.objective
    if polish and model.flow_vars:
        x = _polish(model, x, p.feas_tol)
    return _extract(p, model, x, objective_value)


def _polish(model: MilpModel, x: np.ndarray, feas_tol: float) -> np.ndarray:
    lp = model.lp
    lo, hi = lp.lo.copy(), lp.hi.copy()
    c = np.zeros(lp.num_vars)
    for j, v in enumerate(model.variables):
        if v.kind in ("build", "ogs"):
            lo[j] = hi[j] = round(x[j])
        elif v.kind == "served":
            lo[j] = hi[j] = min(max(x[j], lo[j]), hi[j])
        else:
            c[j] = 1.0
    res = solve_lp(
        LpProblem(c, lp.A, lp.senses, lp.b, lo, hi, var_names=lp.var_names, row_names=lp.row_names),
        feas_tol=feas_tol,
    )
    return res.x if res.is_optimal else x


def _extract(p: DesignProblem, model: MilpModel, x: np.ndarray, objective_value: float) -> DesignSolution:
    t = p.topology
    built_links, built_ogs = set(), set()
    net: dict[tuple[str, str, int], float] = defaultdict(float)
    served: dict[str, dict[int, float]] = {u.id: {} for u in p.use_cases}
    for j, v in enumerate(model.variables):
        if v.kind == "build" and x[j] > 0.5:
            built_links.add(v.edge)
        elif v.kind == "ogs" and x[j] > 0.5:
            built_ogs.add(v.edge)
        elif v.kind == "flow":
            net[(v.use_case, v.edge, v.window)] += v.direction * x[j]
        elif v.kind == "served":
            served[v.use_case][v.window] = float(x[j])
    if p.objective != "max_served":
        for u in p.use_cases:
            served[u.id] = {w: u.required_rate for w in _active_windows(p, u)}

    flows, transit = {}, {}
    for key in sorted(net):
        val = net[key]
        if abs(val) <= 1e-9:
            continue
        target = flows if key[1] in t.link_by_id else transit
        target[key] = float(val)

    cost = math.fsum(t.link_by_id[e].build_cost for e in sorted(built_links))
    cost += math.fsum(t.ogs_candidate_by_node[g].build_cost for g in sorted(built_ogs))
    sol = DesignSolution(
        frozenset(built_links), frozenset(built_ogs), flows, transit,
        served, cost, {}, float(objective_value),
    )
    shares = budget_distribution(sol, t)
    return DesignSolution(
        sol.built_links, sol.built_ogs, flows, transit, served, cost, shares, float(objective_value)
    )


def budget_distribution(sol: DesignSolution, t: NetworkTopology) -> dict[str, float]:
    """Charge each build to the country it sits in; cross-border links split 50/50."""
    parts: dict[str, list[float]] = defaultdict(list)
    for lid in sorted(sol.built_links):
        e = t.link_by_id[lid]
        ca, cb = t.country_of(e.a), t.country_of(e.b)
        if ca == cb:
            parts[ca].append(e.build_cost)
        else:
            parts[ca].append(e.build_cost / 2)
            parts[cb].append(e.build_cost / 2)
    for g in sorted(sol.built_ogs):
        parts[t.country_of(g)].append(t.ogs_candidate_by_node[g].build_cost)
    return {c: math.fsum(v) for c, v in sorted(parts.items())}


def flow_feasible(
    p: DesignProblem,
    builds: Iterable[str],
    *,
    failed_links: Iterable[str] = (),
    use_cases: Iterable[UseCase] | None = None,
) -> bool:
    """Can the given use-cases all be served with exactly ``builds`` built?"""
    q = p if use_cases is None else DesignProblem(
        p.topology, tuple(use_cases), "min_cost", None, p.num_windows, p.satellite,
        p.custom_reserve, p.feas_tol, p.int_tol,
    )
    model = formulate(q, fixed_builds=builds, failed_links=failed_links, objective="min_cost")
    res = solve_lp(model.lp, feas_tol=p.feas_tol)
    if res.status is LpStatus.ITERATION_LIMIT:
        _raise_for(res.status, "flow feasibility check")
    return res.is_optimal
