"""Pre-optimisation diagnostics over the existing network.

These explain why an international use-case cannot be served today:
disconnected clusters, clearance blocks, countries whose border points are
not connected internally, and single points of failure.  All checks look at
existing links only; the planner may still repair things by building
candidates.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping

from .diagnostics import Diagnostic
from .planner import DesignProblem, DesignSolution, flow_feasible
from .topology import (
    Link,
    NetworkTopology,
    UseCase,
    adjacency,
    admissible_subgraph,
    reachable,
    routable_subgraph,
)

Adjacency = Mapping[str, list[tuple[str, str]]]


def connected_components(t: NetworkTopology) -> list[frozenset[str]]:
    """Partition of all nodes by connectivity over existing links."""
    adj = adjacency(sorted(n.id for n in t.nodes), t.existing_links())
    seen: set[str] = set()
    comps = []
    for v in sorted(adj):
        if v in seen:
            continue
        comp = reachable(adj, v)
        seen |= comp
        comps.append(frozenset(comp))
    return comps


def critical_elements(t: NetworkTopology) -> tuple[frozenset[str], frozenset[str]]:
    """Bridge link ids and articulation node ids of the existing-link graph.

    Iterative Tarjan low-link DFS.  Parallel links are told apart by id, so a
    doubled connection is never reported as a bridge.
    """
    adj = adjacency(sorted(n.id for n in t.nodes), t.existing_links())
    disc: dict[str, int] = {}
    low: dict[str, int] = {}
    bridges: set[str] = set()
    arts: set[str] = set()
    timer = 0
    for root in sorted(adj):
        if root in disc:
            continue
        disc[root] = low[root] = timer
        timer += 1
        root_children = 0
        stack = [(root, None, iter(adj[root]))]
        while stack:
            v, parent_edge, it = stack[-1]
            for w, eid in it:
                if eid == parent_edge:
                    continue
                if w in disc:
                    low[v] = min(low[v], disc[w])
                else:
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, eid, iter(adj[w])))
                    break
            else:
                stack.pop()
                if not stack:
                    continue
                u = stack[-1][0]
                low[u] = min(low[u], low[v])
                if low[v] > disc[u]:
                    bridges.add(parent_edge)
                if u == root:
                    root_children += 1
                elif low[v] >= disc[u]:
                    arts.add(u)
        if root_children > 1:
            arts.add(root)
    return frozenset(bridges), frozenset(arts)


def network_diagnostics(t: NetworkTopology) -> list[Diagnostic]:
    """Topology-wide findings: clusters, bridges and articulation nodes."""
    out = []
    comps = connected_components(t)
    if len(comps) > 1:
        out.append(Diagnostic(
            "DISCONNECTED_CLUSTERS", "topology",
            f"{len(comps)} clusters over existing links",
            tuple(min(c) for c in comps),
        ))
    bridges, arts = critical_elements(t)
    for lid in sorted(bridges):
        e = t.link_by_id[lid]
        out.append(Diagnostic("BRIDGE_LINK", lid, f"{e.a} - {e.b} is a single point of failure", (e.a, e.b)))
    for nid in sorted(arts):
        out.append(Diagnostic("ARTICULATION_NODE", nid, "removing this node disconnects the network"))
    return out


# -- per use-case ------------------------------------------------------------


def _relaxed_view(t: NetworkTopology, u: UseCase) -> NetworkTopology:
    """Nodes outside excluded countries (plus endpoints), clearance ignored."""
    return admissible_subgraph(t, UseCase(
        u.id, u.endpoints, u.required_rate, u.schedule,
        clearance=10**9, excluded_countries=u.excluded_countries,
    ))


def _blocks(adj: Adjacency) -> list[frozenset[str]]:
    """Vertex sets of the biconnected components (edge-stack Tarjan)."""
    disc: dict[str, int] = {}
    low: dict[str, int] = {}
    blocks = []
    estack: list[tuple[str, str, str]] = []
    timer = 0
    for root in sorted(adj):
        if root in disc:
            continue
        disc[root] = low[root] = timer
        timer += 1
        stack = [(root, None, iter(adj[root]))]
        while stack:
            v, parent_edge, it = stack[-1]
            for w, eid in it:
                if eid == parent_edge:
                    continue
                if w not in disc:
                    estack.append((v, w, eid))
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, eid, iter(adj[w])))
                    break
                if disc[w] < disc[v]:
                    estack.append((v, w, eid))
                    low[v] = min(low[v], disc[w])
            else:
                stack.pop()
                if not stack:
                    continue
                u = stack[-1][0]
                low[u] = min(low[u], low[v])
                if low[v] >= disc[u]:
                    comp: set[str] = set()
                    while True:
                        a, b, eid = estack.pop()
                        comp |= {a, b}
                        if eid == parent_edge:
                            break
                    blocks.append(frozenset(comp))
    return blocks


def _on_simple_paths(adj: Adjacency, s: str, t: str) -> set[str]:
    """Vertices lying on at least one simple s-t path (block-cut tree walk)."""
    if s == t:
        return {s}
    if t not in reachable(adj, s):
        return set()
    blocks = _blocks(adj)
    membership: dict[str, list[int]] = {}
    for i, blk in enumerate(blocks):
        for v in blk:
            membership.setdefault(v, []).append(i)
    cuts = {v for v, bs in membership.items() if len(bs) > 1}

    def tree_node(v: str) -> tuple[str, object]:
        return ("c", v) if v in cuts else ("b", membership[v][0])

    def neighbours(x: tuple[str, object]) -> list[tuple[str, object]]:
        if x[0] == "c":
            return [("b", i) for i in membership[x[1]]]
        return [("c", v) for v in sorted(blocks[x[1]]) if v in cuts]

    start, goal = tree_node(s), tree_node(t)
    prev = {start: None}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        if x == goal:
            break
        for y in neighbours(x):
            if y not in prev:
                prev[y] = x
                queue.append(y)
    out: set[str] = {s, t}
    x = goal
    while x is not None:
        if x[0] == "b":
            out |= blocks[x[1]]
        x = prev[x]
    return out


def _route_countries(t: NetworkTopology, view: NetworkTopology, u: UseCase) -> set[str]:
    """Countries on some simple path of the country-level (black-box) graph."""
    cross = [
        Link(e.id, t.country_of(e.a), t.country_of(e.b), e.capacity)
        for e in view.existing_links()
        if t.country_of(e.a) != t.country_of(e.b)
    ]
    countries = sorted({n.country for n in view.nodes})
    cadj = adjacency(countries, cross)
    sc, tc = t.country_of(u.source), t.country_of(u.target)
    route = _on_simple_paths(cadj, sc, tc)
    return route or {sc, tc}


def _bfs_path(adj: Adjacency, s: str, goal: str) -> list[tuple[str, str]] | None:
    """(node, edge-used-to-enter) pairs along a shortest path, or None."""
    prev: dict[str, tuple[str, str] | None] = {s: None}
    queue = deque([s])
    while queue:
        v = queue.popleft()
        if v == goal:
            path = []
            while prev[v] is not None:
                u, eid = prev[v]
                path.append((v, eid))
                v = u
            path.append((s, ""))
            return path[::-1]
        for w, eid in adj.get(v, ()):
            if w not in prev:
                prev[w] = (v, eid)
                queue.append(w)
    return None


def check_use_case(t: NetworkTopology, u: UseCase) -> list[Diagnostic]:
    """Why can't ``u`` be routed over existing links?  Empty when it can.

    * ``NO_ADMISSIBLE_PATH`` whenever no admissible existing path exists.
    * ``INTERNAL_BORDER_DISCONNECT`` (subject: country) for every country on
      the black-box route whose relevant border points (and endpoints) fall
      into different internal components.
    * ``CLEARANCE_BLOCKED`` when a path would exist without clearance and
      security filtering, once those internal gaps are bridged.
    """
    view = routable_subgraph(t, u)
    adj = adjacency([n.id for n in view.nodes], view.existing_links())
    reach = reachable(adj, u.source)
    if u.target in reach:
        return []
    out = [Diagnostic(
        "NO_ADMISSIBLE_PATH", u.id,
        f"{u.source} cannot reach {u.target} over admissible existing links",
        tuple(sorted(reach)),
    )]

    relaxed = _relaxed_view(t, u)
    route = _route_countries(t, relaxed, u)
    existing = relaxed.existing_links()
    repairs: list[Link] = []
    gaps = []
    for c in sorted(route):
        members = [n.id for n in relaxed.nodes if n.country == c]
        inside = [e for e in existing if t.country_of(e.a) == c == t.country_of(e.b)]
        terminals = set(x for x in u.endpoints if t.country_of(x) == c)
        for e in existing:
            for here, there in ((e.a, e.b), (e.b, e.a)):
                if (
                    t.country_of(here) == c
                    and t.country_of(there) != c
                    and t.country_of(there) in route
                    and t.node_by_id[here].kind == "border"
                ):
                    terminals.add(here)
        terminals_sorted = sorted(terminals)
        if len(terminals_sorted) < 2:
            continue
        iadj = adjacency(members, inside)
        comp = reachable(iadj, terminals_sorted[0])
        if not all(x in comp for x in terminals_sorted):
            gaps.append(Diagnostic(
                "INTERNAL_BORDER_DISCONNECT", c,
                f"border points of {c} on the route of {u.id} are not connected inside {c}",
                tuple(terminals_sorted),
            ))
            anchor = terminals_sorted[0]
            repairs += [Link(f"~{c}:{anchor}~{x}", anchor, x, 1.0) for x in terminals_sorted[1:]]

    loose_adj = adjacency([n.id for n in relaxed.nodes], existing + repairs)
    path = _bfs_path(loose_adj, u.source, u.target)
    if path is not None:
        strict_adj = adjacency([n.id for n in view.nodes], view.existing_links() + repairs)
        if u.target not in reachable(strict_adj, u.source):
            kept_nodes = {n.id for n in view.nodes}
            kept_links = {e.id for e in view.links}
            witness = tuple(
                x for node, eid in path
                for x in (eid, node)
                if x and not x.startswith("~") and x not in kept_nodes and x not in kept_links
            )
            out.append(Diagnostic(
                "CLEARANCE_BLOCKED", u.id,
                f"a route exists only through elements above clearance {u.clearance}"
                + (f" or below security level {u.min_security_level}" if u.min_security_level else ""),
                witness,
            ))
    return out + gaps


# -- survivability -----------------------------------------------------------


@dataclass(frozen=True)
class SurvivabilityEntry:
    """Use-cases that lose their required rate when ``link`` fails.

    ``unservable`` lists use-cases that cannot be served even alone on the
    degraded network; ``contention`` is True when the others can each be
    served alone but not all together.
    """

    link: str
    unservable: frozenset[str]
    contention: bool = False


def survivability_report(
    problem: DesignProblem, solution: DesignSolution, links: Iterable[str] | None = None
) -> list[SurvivabilityEntry]:
    """Fail each existing or built link in turn and re-solve the flow LP."""
    t = problem.topology
    builds = solution.built
    if links is None:
        links = [e.id for e in t.links if not e.is_candidate or e.id in solution.built_links]
    out = []
    for lid in links:
        lost = set()
        ok = []
        for u in problem.use_cases:
            if flow_feasible(problem, builds, failed_links=[lid], use_cases=[u]):
                ok.append(u)
            else:
                lost.add(u.id)
        contention = len(ok) > 1 and not flow_feasible(
            problem, builds, failed_links=[lid], use_cases=ok
        )
        if lost or contention:
            out.append(SurvivabilityEntry(lid, frozenset(lost), contention))
    return out


__all__ = [
    "SurvivabilityEntry",
    "check_use_case",
    "connected_components",
    "critical_elements",
    "network_diagnostics",
    "survivability_report",
]
