"""Immutable data model of a federated QKD infrastructure graph.

A topology is a set of countries, their nodes (relays, border points, optical
ground stations, user sites) and the links between them.  Links are either
``existing`` or ``candidate`` builds with a cost.  Everything here is frozen;
derived indices are cached on first use.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterable, Mapping, Union

from .diagnostics import Diagnostic
from .errors import UnknownEndpoint

EARTH_RADIUS_KM = 6371.0
DEFAULT_MAX_LINK_RANGE_KM = 165.0
DEFAULT_OGS_COST = 1_000_000.0

NODE_KINDS = ("relay", "border", "ogs", "user_site")
LINK_STATUSES = ("existing", "candidate")
LINK_KINDS = ("terrestrial", "satellite_feed")


# -- availability policies ---------------------------------------------------


@dataclass(frozen=True)
class Percentage:
    """A fraction of every national link reserved for external use-cases."""

    fraction: float


@dataclass(frozen=True)
class PointToPoint:
    """Guaranteed transit rates (bits/s) between pairs of border nodes.

    ``rates`` holds ``(node_a, node_b, rate)`` triples with ``node_a < node_b``.
    """

    rates: tuple[tuple[str, str, float], ...] = ()

    @classmethod
    def from_mapping(cls, rates: Mapping[tuple[str, str], float]) -> "PointToPoint":
        triples = {}
        for (a, b), rate in rates.items():
            a, b = sorted((a, b))
            triples[(a, b)] = float(rate)
        return cls(tuple((a, b, r) for (a, b), r in sorted(triples.items())))

    def rate(self, a: str, b: str) -> float:
        a, b = sorted((a, b))
        for x, y, r in self.rates:
            if (x, y) == (a, b):
                return r
        return 0.0


AvailabilityPolicy = Union[Percentage, PointToPoint]


# -- entities ----------------------------------------------------------------


@dataclass(frozen=True)
class Country:
    id: str
    name: str = ""
    availability_policy: AvailabilityPolicy | None = None


@dataclass(frozen=True)
class Node:
    id: str
    country: str
    kind: str = "relay"
    position: tuple[float, float] = (0.0, 0.0)  # (lat, lon) degrees
    clearance_level: int = 0


@dataclass(frozen=True)
class Link:
    id: str
    a: str
    b: str
    capacity: float
    status: str = "existing"
    build_cost: float = 0.0
    required_clearance: int = 0
    kind: str = "terrestrial"

    @property
    def endpoints(self) -> frozenset[str]:
        return frozenset((self.a, self.b))

    @property
    def is_candidate(self) -> bool:
        return self.status == "candidate"

    def other(self, node_id: str) -> str:
        return self.b if node_id == self.a else self.a


@dataclass(frozen=True)
class GroundStationCandidate:
    node: str
    build_cost: float = DEFAULT_OGS_COST


@dataclass(frozen=True)
class UseCase:
    """An end-to-end key-rate demand between two nodes.

    ``schedule`` is the set of window indices in which the demand is active.
    Intermediary nodes and links must carry at least ``min_security_level``;
    no node of an ``excluded_countries`` member may be traversed.
    """

    id: str
    endpoints: tuple[str, str]
    required_rate: float
    schedule: frozenset[int] = frozenset({0})
    clearance: int = 0
    min_security_level: int = 0
    excluded_countries: frozenset[str] = frozenset()

    @property
    def source(self) -> str:
        return self.endpoints[0]

    @property
    def target(self) -> str:
        return self.endpoints[1]


@dataclass(frozen=True)
class NetworkTopology:
    countries: tuple[Country, ...] = ()
    nodes: tuple[Node, ...] = ()
    links: tuple[Link, ...] = ()
    ground_station_candidates: tuple[GroundStationCandidate, ...] = ()
    max_link_range_km: float = DEFAULT_MAX_LINK_RANGE_KM

    @cached_property
    def country_by_id(self) -> dict[str, Country]:
        return {c.id: c for c in self.countries}

    @cached_property
    def node_by_id(self) -> dict[str, Node]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def link_by_id(self) -> dict[str, Link]:
        return {e.id: e for e in self.links}

    @cached_property
    def ogs_candidate_by_node(self) -> dict[str, GroundStationCandidate]:
        return {g.node: g for g in self.ground_station_candidates}

    def country_of(self, node_id: str) -> str:
        return self.node_by_id[node_id].country

    def link_countries(self, link: Link) -> frozenset[str]:
        return frozenset((self.country_of(link.a), self.country_of(link.b)))

    def is_cross_border(self, link: Link) -> bool:
        return len(self.link_countries(link)) == 2

    def link_length_km(self, link: Link) -> float:
        return great_circle_km(
            self.node_by_id[link.a].position, self.node_by_id[link.b].position
        )

    def existing_links(self) -> list[Link]:
        """Links usable today: not candidates and not ending at an unbuilt OGS."""
        ogs = self.ogs_candidate_by_node
        return [
            e for e in self.links
            if not e.is_candidate and e.a not in ogs and e.b not in ogs
        ]

    def with_links(self, links: Iterable[Link]) -> "NetworkTopology":
        return replace(self, links=tuple(links))

    def replace_link(self, link_id: str, **changes) -> "NetworkTopology":
        return self.with_links(
            replace(e, **changes) if e.id == link_id else e for e in self.links
        )


# -- geometry ----------------------------------------------------------------


def great_circle_km(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Haversine distance between two (lat, lon) positions in degrees.

    ``1 - h`` is formed from non-negative terms so the result stays accurate
    for near-antipodal points, where ``asin(sqrt(h))`` loses precision.
    """
    lat1, lon1 = map(math.radians, a)
    lat2, lon2 = map(math.radians, b)
    s_dlat, c_dlat = math.sin((lat2 - lat1) / 2), math.cos((lat2 - lat1) / 2)
    s_dlon, c_dlon = math.sin((lon2 - lon1) / 2), math.cos((lon2 - lon1) / 2)
    h = s_dlat**2 + math.cos(lat1) * math.cos(lat2) * s_dlon**2
    g = (c_dlat * c_dlon) ** 2 + (math.sin((lat1 + lat2) / 2) * s_dlon) ** 2
    return 2 * EARTH_RADIUS_KM * math.atan2(math.sqrt(h), math.sqrt(g))


# -- validation --------------------------------------------------------------


def validate_topology(t: NetworkTopology) -> list[Diagnostic]:
    """Check every structural invariant and return all violations found.

    Never stops at the first problem.  An empty list means the topology is
    well formed.
    """
    out: list[Diagnostic] = []

    def bad(code: str, subject: str, detail: str) -> None:
        out.append(Diagnostic(code, subject, detail))

    for kind, ids in (
        ("country", [c.id for c in t.countries]),
        ("node", [n.id for n in t.nodes]),
        ("link", [e.id for e in t.links]),
    ):
        for ident, count in sorted(Counter(ids).items()):
            if count > 1:
                bad("DUPLICATE_ID", ident, f"{kind} id declared {count} times")

    for c in t.countries:
        pol = c.availability_policy
        if isinstance(pol, Percentage):
            if not 0.0 <= pol.fraction <= 1.0:
                bad("POLICY_FRACTION_RANGE", c.id, f"fraction {pol.fraction} outside [0, 1]")
        elif isinstance(pol, PointToPoint):
            for a, b, rate in pol.rates:
                if rate < 0:
                    bad("POLICY_NEGATIVE_RATE", c.id, f"rate {rate} for {a}~{b}")
                for n in (a, b):
                    node = t.node_by_id.get(n)
                    if node is None:
                        bad("UNKNOWN_NODE", n, f"referenced by availability policy of {c.id}")
                    elif node.country != c.id or node.kind != "border":
                        bad("POLICY_NON_BORDER_NODE", n, f"not a border node of {c.id}")
                if a == b:
                    bad("POLICY_SELF_PAIR", c.id, f"pair {a}~{b}")

    for n in t.nodes:
        if n.country not in t.country_by_id:
            bad("UNKNOWN_COUNTRY", n.country, f"referenced by node {n.id}")
        if n.kind not in NODE_KINDS:
            bad("BAD_NODE_KIND", n.id, f"kind {n.kind!r}")
        lat, lon = n.position
        if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
            bad("BAD_COORDINATES", n.id, f"position {n.position}")
        if n.clearance_level < 0:
            bad("NEGATIVE_CLEARANCE", n.id, f"clearance {n.clearance_level}")

    seen_pairs: set[tuple[frozenset[str], str]] = set()
    for e in t.links:
        missing = [x for x in (e.a, e.b) if x not in t.node_by_id]
        for x in missing:
            bad("UNKNOWN_NODE", x, f"endpoint of link {e.id}")
        if e.a == e.b:
            bad("SELF_LOOP", e.id, f"both endpoints are {e.a}")
        if e.status not in LINK_STATUSES:
            bad("BAD_LINK_STATUS", e.id, f"status {e.status!r}")
        if e.kind not in LINK_KINDS:
            bad("BAD_LINK_KIND", e.id, f"kind {e.kind!r}")
        if not e.capacity > 0:
            bad("NONPOSITIVE_CAPACITY", e.id, f"capacity {e.capacity}")
        if e.build_cost < 0:
            bad("NEGATIVE_COST", e.id, f"build cost {e.build_cost}")
        elif e.status == "existing" and e.build_cost != 0:
            bad("EXISTING_WITH_COST", e.id, f"existing link has cost {e.build_cost}")
        elif e.status == "candidate" and e.build_cost == 0:
            bad("CANDIDATE_WITHOUT_COST", e.id, "candidate link has zero cost")
        if e.required_clearance < 0:
            bad("NEGATIVE_CLEARANCE", e.id, f"clearance {e.required_clearance}")
        key = (e.endpoints, e.kind)
        if key in seen_pairs:
            bad("DUPLICATE_LINK", e.id, f"second {e.kind} link between {e.a} and {e.b}")
        seen_pairs.add(key)
        if missing:
            continue
        na, nb = t.node_by_id[e.a], t.node_by_id[e.b]
        if e.kind == "satellite_feed":
            if na.kind != "ogs" or nb.kind != "ogs":
                bad("SAT_FEED_NON_OGS_NODE", e.id, "satellite feeds join two ogs nodes")
        else:
            if na.country != nb.country and (na.kind != "border" or nb.kind != "border"):
                bad(
                    "CROSS_BORDER_NON_BORDER_NODE",
                    e.id,
                    f"{e.a} ({na.kind}) - {e.b} ({nb.kind}) crosses {na.country}/{nb.country}",
                )
            length = great_circle_km(na.position, nb.position)
            if length > t.max_link_range_km:
                bad(
                    "LINK_EXCEEDS_RANGE",
                    e.id,
                    f"{length:.1f} km > {t.max_link_range_km:g} km",
                )

    for g in t.ground_station_candidates:
        node = t.node_by_id.get(g.node)
        if node is None:
            bad("UNKNOWN_NODE", g.node, "referenced by ground station candidate")
        elif node.kind != "ogs":
            bad("OGS_CANDIDATE_NOT_OGS", g.node, f"node kind is {node.kind}")
        if not g.build_cost > 0:
            bad("NONPOSITIVE_OGS_COST", g.node, f"build cost {g.build_cost}")
    for ident, count in Counter(g.node for g in t.ground_station_candidates).items():
        if count > 1:
            bad("DUPLICATE_ID", ident, "ground station candidate declared twice")

    return out


# -- use-case views ----------------------------------------------------------


def _check_endpoints(t: NetworkTopology, u: UseCase) -> None:
    for n in u.endpoints:
        if n not in t.node_by_id:
            raise UnknownEndpoint(f"use-case {u.id}: unknown endpoint {n}", subject=n)


def admissible_subgraph(t: NetworkTopology, u: UseCase) -> NetworkTopology:
    """The part of ``t`` that use-case ``u`` is cleared to traverse.

    Keeps links with ``required_clearance <= u.clearance`` and nodes with
    ``clearance_level <= u.clearance`` outside the excluded countries.  The
    use-case endpoints are always kept.
    """
    _check_endpoints(t, u)
    keep = {
        n.id
        for n in t.nodes
        if n.id in u.endpoints
        or (n.clearance_level <= u.clearance and n.country not in u.excluded_countries)
    }
    return _restrict(
        t, keep, lambda e: e.required_clearance <= u.clearance
    )


def routable_subgraph(t: NetworkTopology, u: UseCase) -> NetworkTopology:
    """``admissible_subgraph`` minus elements below ``u.min_security_level``."""
    view = admissible_subgraph(t, u)
    if u.min_security_level <= 0:
        return view
    keep = {
        n.id
        for n in view.nodes
        if n.id in u.endpoints or n.clearance_level >= u.min_security_level
    }
    return _restrict(view, keep, lambda e: e.required_clearance >= u.min_security_level)


def _restrict(t: NetworkTopology, keep: set[str], link_ok) -> NetworkTopology:
    nodes = tuple(n for n in t.nodes if n.id in keep)
    links = tuple(e for e in t.links if e.a in keep and e.b in keep and link_ok(e))
    ogs = tuple(g for g in t.ground_station_candidates if g.node in keep)
    return replace(t, nodes=nodes, links=links, ground_station_candidates=ogs)


def adjacency(
    node_ids: Iterable[str], links: Iterable[Link]
) -> dict[str, list[tuple[str, str]]]:
    """Undirected adjacency ``node -> [(neighbour, link id), ...]`` in link order."""
    adj: dict[str, list[tuple[str, str]]] = {n: [] for n in node_ids}
    for e in links:
        if e.a in adj and e.b in adj:
            adj[e.a].append((e.b, e.id))
            adj[e.b].append((e.a, e.id))
    return adj


def reachable(adj: Mapping[str, list[tuple[str, str]]], start: str) -> set[str]:
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w, _ in adj.get(v, ()):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return seen


__all__ = [
    "AvailabilityPolicy",
    "Country",
    "DEFAULT_MAX_LINK_RANGE_KM",
    "DEFAULT_OGS_COST",
    "EARTH_RADIUS_KM",
    "GroundStationCandidate",
    "Link",
    "NetworkTopology",
    "Node",
    "Percentage",
    "PointToPoint",
    "UseCase",
    "adjacency",
    "admissible_subgraph",
    "great_circle_km",
    "reachable",
    "routable_subgraph",
    "validate_topology",
]
