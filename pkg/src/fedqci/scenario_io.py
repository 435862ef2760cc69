"""Scenario files (JSON, schema version 1).

The field names are a compatibility contract; see ``docs/scenario_schema.md``.
Parsing is strict: unknown keys are rejected and every cross-reference must
resolve.  All problems found are reported together, each anchored to the
first line of the file that mentions the offending key or id.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from importlib import resources
from typing import Any

from .planner import OBJECTIVES, DesignProblem
from .satellite import Pass, SatelliteConfig, SatRequest
from .topology import (
    DEFAULT_MAX_LINK_RANGE_KM,
    DEFAULT_OGS_COST,
    Country,
    GroundStationCandidate,
    Link,
    NetworkTopology,
    Node,
    Percentage,
    PointToPoint,
    UseCase,
    validate_topology,
)

SCHEMA_VERSION = 1
_REFERENCE_CODES = {"UNKNOWN_NODE", "UNKNOWN_COUNTRY"}


@dataclass(frozen=True)
class ScenarioIssue:
    code: str  # SYNTAX | SCHEMA_VERSION_UNSUPPORTED | UNRESOLVED_REFERENCE | INVARIANT_VIOLATION
    message: str
    line: int | None = None

    def __str__(self) -> str:
        where = f"line {self.line}: " if self.line else ""
        return f"{where}{self.code}: {self.message}"


class ScenarioError(ValueError):
    def __init__(self, issues: list[ScenarioIssue]):
        self.issues = issues
        super().__init__("\n".join(str(i) for i in issues))

    @property
    def codes(self) -> list[str]:
        return [i.code for i in self.issues]


class _Reader:
    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.issues: list[ScenarioIssue] = []

    def line_of(self, needle: Any) -> int | None:
        pat = re.compile(r'"' + re.escape(str(needle)) + r'"')
        for i, line in enumerate(self.lines, 1):
            if pat.search(line):
                return i
        return None

    def fail(self, code: str, message: str, anchor: Any = None) -> None:
        self.issues.append(ScenarioIssue(code, message, self.line_of(anchor) if anchor is not None else None))

    def obj(self, d: Any, where: str, required: tuple[str, ...], optional: tuple[str, ...] = ()) -> dict:
        if not isinstance(d, dict):
            self.fail("SYNTAX", f"{where} must be an object")
            return {}
        for k in required:
            if k not in d:
                self.fail("SYNTAX", f"{where}: missing key {k!r}", d.get("id", None))
        for k in d:
            if k not in required and k not in optional:
                self.fail("SYNTAX", f"{where}: unknown key {k!r}", k)
        return d

    def array(self, d: Any, where: str) -> list:
        if d is None:
            return []
        if not isinstance(d, list):
            self.fail("SYNTAX", f"{where} must be an array")
            return []
        return d

    def num(self, v: Any, where: str, anchor: Any = None) -> float:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail("SYNTAX", f"{where} must be a number, got {v!r}", anchor)
            return 0.0
        return float(v)

    def int_(self, v: Any, where: str, anchor: Any = None) -> int:
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail("SYNTAX", f"{where} must be an integer, got {v!r}", anchor)
            return 0
        return v

    def str_(self, v: Any, where: str, anchor: Any = None) -> str:
        if not isinstance(v, str) or not v:
            self.fail("SYNTAX", f"{where} must be a non-empty string, got {v!r}", anchor)
            return ""
        return v


def load_scenario(text: str, *, check_topology: bool = True) -> DesignProblem:
    """Parse scenario text.

    With ``check_topology=False`` the topology's own invariants (and its
    internal references) are left to :func:`validate_topology`; everything
    else is still enforced.
    """
    r = _Reader(text)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError([ScenarioIssue("SYNTAX", exc.msg, exc.lineno)]) from None
    if not isinstance(data, dict):
        raise ScenarioError([ScenarioIssue("SYNTAX", "top level must be an object", 1)])
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ScenarioError([ScenarioIssue(
            "SCHEMA_VERSION_UNSUPPORTED",
            f"schema_version {version!r} is not supported (expected {SCHEMA_VERSION})",
            r.line_of("schema_version"),
        )])
    r.obj(data, "scenario", ("schema_version", "topology"),
          ("description", "use_cases", "availability", "satellite", "options"))

    options = r.obj(data.get("options", {}), "options", (),
                    ("num_windows", "objective", "budget", "custom_reserve", "tolerances"))
    num_windows = r.int_(options.get("num_windows", 1), "options.num_windows", "num_windows")
    objective = options.get("objective", "min_cost")
    if objective not in OBJECTIVES:
        r.fail("INVARIANT_VIOLATION", f"objective {objective!r} not in {OBJECTIVES}", "objective")
    budget = options.get("budget")
    if budget is not None:
        budget = r.num(budget, "options.budget", "budget")
    if objective == "max_served" and not (budget and budget > 0):
        r.fail("INVARIANT_VIOLATION", "objective max_served needs a positive budget", "objective")
    if num_windows < 1:
        r.fail("INVARIANT_VIOLATION", "num_windows must be at least 1", "num_windows")
    tol = r.obj(options.get("tolerances", {}), "options.tolerances", (), ("feasibility", "integrality"))
    feas_tol = r.num(tol.get("feasibility", 1e-7), "tolerances.feasibility", "feasibility")
    int_tol = r.num(tol.get("integrality", 1e-6), "tolerances.integrality", "integrality")
    reserve_raw = r.obj(options.get("custom_reserve", {}), "options.custom_reserve", (), tuple(options.get("custom_reserve", {}) or ()))
    custom_reserve = {k: r.num(v, f"custom_reserve[{k}]", k) for k, v in sorted(reserve_raw.items())}

    topo = r.obj(data.get("topology"), "topology", ("countries", "nodes", "links"),
                 ("ground_stations", "max_link_range_km"))
    availability = r.obj(data.get("availability", {}), "availability", (), tuple(data.get("availability", {}) or ()))

    countries = []
    for c in r.array(topo.get("countries"), "topology.countries"):
        c = r.obj(c, "country", ("id",), ("name",))
        cid = r.str_(c.get("id"), "country.id")
        countries.append(Country(cid, str(c.get("name", "")), _policy(r, cid, availability.get(cid))))
    country_ids = {c.id for c in countries}
    for cid in availability:
        if cid not in country_ids:
            r.fail("UNRESOLVED_REFERENCE", f"availability names unknown country {cid!r}", cid)

    nodes = []
    for n in r.array(topo.get("nodes"), "topology.nodes"):
        n = r.obj(n, "node", ("id", "country", "kind", "lat", "lon"), ("clearance",))
        nid = r.str_(n.get("id"), "node.id")
        nodes.append(Node(
            nid, r.str_(n.get("country"), f"node {nid}.country", nid),
            r.str_(n.get("kind"), f"node {nid}.kind", nid),
            (r.num(n.get("lat"), f"node {nid}.lat", nid), r.num(n.get("lon"), f"node {nid}.lon", nid)),
            r.int_(n.get("clearance", 0), f"node {nid}.clearance", nid),
        ))

    links = []
    for e in r.array(topo.get("links"), "topology.links"):
        e = r.obj(e, "link", ("id", "a", "b", "capacity", "status"),
                  ("build_cost", "required_clearance", "kind"))
        lid = r.str_(e.get("id"), "link.id")
        links.append(Link(
            lid, r.str_(e.get("a"), f"link {lid}.a", lid), r.str_(e.get("b"), f"link {lid}.b", lid),
            r.num(e.get("capacity"), f"link {lid}.capacity", lid),
            r.str_(e.get("status"), f"link {lid}.status", lid),
            r.num(e.get("build_cost", 0.0), f"link {lid}.build_cost", lid),
            r.int_(e.get("required_clearance", 0), f"link {lid}.required_clearance", lid),
            r.str_(e.get("kind", "terrestrial"), f"link {lid}.kind", lid),
        ))

    ogs = []
    for g in r.array(topo.get("ground_stations"), "topology.ground_stations"):
        g = r.obj(g, "ground station", ("node",), ("build_cost",))
        node = r.str_(g.get("node"), "ground_station.node")
        ogs.append(GroundStationCandidate(node, r.num(g.get("build_cost", DEFAULT_OGS_COST), "build_cost", node)))

    max_range = r.num(topo.get("max_link_range_km", DEFAULT_MAX_LINK_RANGE_KM), "max_link_range_km", "max_link_range_km")
    topology = NetworkTopology(tuple(countries), tuple(nodes), tuple(links), tuple(ogs), max_range)
    node_ids = set(topology.node_by_id)

    if check_topology and not r.issues:
        for d in validate_topology(topology):
            code = "UNRESOLVED_REFERENCE" if d.code in _REFERENCE_CODES else "INVARIANT_VIOLATION"
            r.fail(code, f"{d.code} {d.subject!r}: {d.detail}", d.subject)

    use_cases = []
    for u in r.array(data.get("use_cases"), "use_cases"):
        u = r.obj(u, "use_case", ("id", "endpoints", "required_rate"),
                  ("schedule", "clearance", "min_security_level", "excluded_countries"))
        uid = r.str_(u.get("id"), "use_case.id")
        ends = u.get("endpoints")
        if not (isinstance(ends, list) and len(ends) == 2 and all(isinstance(x, str) for x in ends)):
            r.fail("SYNTAX", f"use-case {uid}: endpoints must be two node ids", uid)
            ends = ["", ""]
        for x in ends:
            if x and x not in node_ids:
                r.fail("UNRESOLVED_REFERENCE", f"use-case {uid} references unknown node {x!r}", x)
        schedule = frozenset(
            r.int_(w, f"use-case {uid}.schedule", uid)
            for w in r.array(u.get("schedule", list(range(num_windows))), f"use-case {uid}.schedule")
        )
        excluded = frozenset(r.array(u.get("excluded_countries", []), f"use-case {uid}.excluded_countries"))
        for cid in sorted(excluded):
            if cid not in country_ids:
                r.fail("UNRESOLVED_REFERENCE", f"use-case {uid} excludes unknown country {cid!r}", cid)
        uc = UseCase(
            uid, (ends[0], ends[1]), r.num(u.get("required_rate"), f"use-case {uid}.required_rate", uid),
            schedule, r.int_(u.get("clearance", 0), f"use-case {uid}.clearance", uid),
            r.int_(u.get("min_security_level", 0), f"use-case {uid}.min_security_level", uid),
            excluded,
        )
        if uc.required_rate <= 0:
            r.fail("INVARIANT_VIOLATION", f"use-case {uid}: required_rate must be positive", uid)
        if ends[0] == ends[1] and ends[0]:
            r.fail("INVARIANT_VIOLATION", f"use-case {uid}: endpoints must differ", uid)
        if not schedule:
            r.fail("INVARIANT_VIOLATION", f"use-case {uid}: schedule is empty", uid)
        if any(w < 0 or w >= num_windows for w in schedule):
            r.fail("INVARIANT_VIOLATION", f"use-case {uid}: schedule outside 0..{num_windows - 1}", uid)
        use_cases.append(uc)
    if len({u.id for u in use_cases}) != len(use_cases):
        r.fail("INVARIANT_VIOLATION", "duplicate use-case id")

    satellite = None
    if data.get("satellite") is not None:
        satellite = _satellite(r, data["satellite"], topology)

    for lid in custom_reserve:
        if lid not in topology.link_by_id:
            r.fail("UNRESOLVED_REFERENCE", f"custom_reserve names unknown link {lid!r}", lid)
        elif not 0.0 <= custom_reserve[lid] <= 1.0:
            r.fail("INVARIANT_VIOLATION", f"custom_reserve for {lid!r} outside [0, 1]", lid)

    if r.issues:
        raise ScenarioError(r.issues)
    return DesignProblem(
        topology, tuple(use_cases), objective, budget, num_windows, satellite,
        custom_reserve, feas_tol, int_tol,
    )


def parse_scenario(text: str) -> DesignProblem:
    """Fully validated :class:`DesignProblem` from scenario JSON text."""
    return load_scenario(text, check_topology=True)


def _policy(r: _Reader, cid: str, spec: Any):
    if spec is None:
        return None
    kind = spec.get("type") if isinstance(spec, dict) else None
    if kind == "percentage":
        spec = r.obj(spec, f"availability[{cid}]", ("type", "fraction"))
        return Percentage(r.num(spec.get("fraction"), f"availability[{cid}].fraction", cid))
    if kind == "point_to_point":
        spec = r.obj(spec, f"availability[{cid}]", ("type", "rates"))
        rates = {}
        for item in r.array(spec.get("rates"), f"availability[{cid}].rates"):
            item = r.obj(item, f"availability[{cid}] rate", ("a", "b", "rate"))
            a = r.str_(item.get("a"), "rate.a", cid)
            b = r.str_(item.get("b"), "rate.b", cid)
            rates[(a, b)] = r.num(item.get("rate"), "rate.rate", cid)
        return PointToPoint.from_mapping(rates)
    r.fail("SYNTAX", f"availability[{cid}].type must be 'percentage' or 'point_to_point'", cid)
    return None


def _satellite(r: _Reader, spec: Any, t: NetworkTopology) -> SatelliteConfig:
    spec = r.obj(spec, "satellite", ("passes", "requests"), ("window_seconds",))
    passes = []
    for p in r.array(spec.get("passes"), "satellite.passes"):
        p = r.obj(p, "pass", ("id", "satellite", "ogs", "window", "expected_yield"), ("weather_factor",))
        pid = r.str_(p.get("id"), "pass.id")
        ogs = r.str_(p.get("ogs"), f"pass {pid}.ogs", pid)
        node = t.node_by_id.get(ogs)
        if node is None:
            r.fail("UNRESOLVED_REFERENCE", f"pass {pid} references unknown node {ogs!r}", ogs)
        elif node.kind != "ogs":
            r.fail("INVARIANT_VIOLATION", f"pass {pid}: node {ogs!r} is not an ogs", pid)
        passes.append(Pass(
            pid, r.str_(p.get("satellite"), f"pass {pid}.satellite", pid), ogs,
            r.int_(p.get("window"), f"pass {pid}.window", pid),
            r.num(p.get("expected_yield"), f"pass {pid}.expected_yield", pid),
            r.num(p.get("weather_factor", 1.0), f"pass {pid}.weather_factor", pid),
        ))
    seen = set()
    for p in passes:
        if (p.satellite, p.window) in seen:
            r.fail("INVARIANT_VIOLATION", f"satellite {p.satellite} has two passes in window {p.window}", p.id)
        seen.add((p.satellite, p.window))
        if p.expected_yield < 0 or not 0.0 <= p.weather_factor <= 1.0:
            r.fail("INVARIANT_VIOLATION", f"pass {p.id}: bad yield or weather factor", p.id)
    requests = []
    for q in r.array(spec.get("requests"), "satellite.requests"):
        q = r.obj(q, "request", ("id", "country", "counterparty", "required_bits", "deadline"), ("priority",))
        qid = r.str_(q.get("id"), "request.id")
        req = SatRequest(
            qid, r.str_(q.get("country"), f"request {qid}.country", qid),
            r.str_(q.get("counterparty"), f"request {qid}.counterparty", qid),
            r.num(q.get("required_bits"), f"request {qid}.required_bits", qid),
            r.num(q.get("priority", 1.0), f"request {qid}.priority", qid),
            r.int_(q.get("deadline"), f"request {qid}.deadline", qid),
        )
        for cid in (req.country, req.counterparty):
            if cid and cid not in t.country_by_id:
                r.fail("UNRESOLVED_REFERENCE", f"request {qid} references unknown country {cid!r}", cid)
        if req.country == req.counterparty:
            r.fail("INVARIANT_VIOLATION", f"request {qid}: countries must differ", qid)
        if req.required_bits <= 0 or req.priority < 0:
            r.fail("INVARIANT_VIOLATION", f"request {qid}: bad required_bits or priority", qid)
        requests.append(req)
    window_seconds = r.num(spec.get("window_seconds", 3600.0), "satellite.window_seconds", "window_seconds")
    if window_seconds <= 0:
        r.fail("INVARIANT_VIOLATION", "window_seconds must be positive", "window_seconds")
    return SatelliteConfig(tuple(passes), tuple(requests), window_seconds)


# -- serialisation -----------------------------------------------------------


def _n(v: float) -> int | float:
    """Keep integral values as ints so files stay readable."""
    return int(v) if float(v).is_integer() and abs(v) < 2**53 else float(v)


def scenario_to_dict(p: DesignProblem) -> dict:
    t = p.topology
    availability = {}
    for c in t.countries:
        pol = c.availability_policy
        if isinstance(pol, Percentage):
            availability[c.id] = {"type": "percentage", "fraction": _n(pol.fraction)}
        elif isinstance(pol, PointToPoint):
            availability[c.id] = {
                "type": "point_to_point",
                "rates": [{"a": a, "b": b, "rate": _n(rate)} for a, b, rate in pol.rates],
            }
    out: dict[str, Any] = {
        "schema_version": SCHEMA_VERSION,
        "topology": {
            "max_link_range_km": _n(t.max_link_range_km),
            "countries": [{"id": c.id, "name": c.name} for c in t.countries],
            "nodes": [
                {"id": n.id, "country": n.country, "kind": n.kind,
                 "lat": _n(n.position[0]), "lon": _n(n.position[1]), "clearance": n.clearance_level}
                for n in t.nodes
            ],
            "links": [
                {"id": e.id, "a": e.a, "b": e.b, "capacity": _n(e.capacity), "status": e.status,
                 "build_cost": _n(e.build_cost), "required_clearance": e.required_clearance, "kind": e.kind}
                for e in t.links
            ],
            "ground_stations": [{"node": g.node, "build_cost": _n(g.build_cost)} for g in t.ground_station_candidates],
        },
        "use_cases": [
            {"id": u.id, "endpoints": list(u.endpoints), "required_rate": _n(u.required_rate),
             "schedule": sorted(u.schedule), "clearance": u.clearance,
             "min_security_level": u.min_security_level,
             "excluded_countries": sorted(u.excluded_countries)}
            for u in p.use_cases
        ],
        "availability": availability,
        "options": {
            "num_windows": p.num_windows,
            "objective": p.objective,
            "budget": None if p.budget is None else _n(p.budget),
            "custom_reserve": {k: _n(v) for k, v in sorted(p.custom_reserve.items())},
            "tolerances": {"feasibility": p.feas_tol, "integrality": p.int_tol},
        },
    }
    if p.satellite is not None:
        s = p.satellite
        out["satellite"] = {
            "window_seconds": _n(s.window_seconds),
            "passes": [
                {"id": x.id, "satellite": x.satellite, "ogs": x.ogs, "window": x.window,
                 "expected_yield": _n(x.expected_yield), "weather_factor": _n(x.weather_factor)}
                for x in s.passes
            ],
            "requests": [
                {"id": q.id, "country": q.country, "counterparty": q.counterparty,
                 "required_bits": _n(q.required_bits), "priority": _n(q.priority), "deadline": q.deadline}
                for q in s.requests
            ],
        }
    return out


def serialize_scenario(p: DesignProblem) -> str:
    return json.dumps(scenario_to_dict(p), indent=2) + "\n"


def fixture_text(name: str) -> str:
    """Text of a bundled scenario, e.g. ``fixture_text("fig1.json")``."""
    return resources.files("fedqci.fixtures").joinpath(name).read_text(encoding="utf-8")


def load_fixture(name: str) -> DesignProblem:
    return parse_scenario(fixture_text(name))


FIXTURES = ("fig1.json", "fig5.json", "euroqci-toy.json")
