"""Text, CSV and DOT renderings of problems and solutions.

Every number in human-facing output is printed with six decimals so that
artifacts diff cleanly between runs.  ``solution.json`` keeps full float
precision because it is read back by ``vnet`` and ``survive``.
"""
from __future__ import annotations

import json
import math
from typing import Iterable

from .diagnostics import Diagnostic
from .feasibility import SurvivabilityEntry
from .planner import DesignProblem, DesignSolution
from .satellite import SatSchedule
from .topology import NetworkTopology
from .vnet import VNetAllocation, Violation


def _q(s: str) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def emit_dot(t: NetworkTopology, solution: DesignSolution | None = None) -> str:
    """Undirected DOT graph, one cluster per country.

    Edges carry ``scope="national"`` or ``scope="international"``
    (international ones drawn orange).  Candidates are dashed until built;
    built candidates are bold and tagged ``status="built"``.
    """
    built = solution.built if solution is not None else frozenset()
    out = ["graph fedqci {", "  node [shape=circle];"]
    for c in sorted(t.countries, key=lambda c: c.id):
        out.append(f"  subgraph {_q('cluster_' + c.id)} {{")
        out.append(f"    label={_q(c.name or c.id)};")
        for n in sorted((n for n in t.nodes if n.country == c.id), key=lambda n: n.id):
            attrs = [f"country={_q(n.country)}", f"kind={_q(n.kind)}"]
            if n.kind == "border":
                attrs.append("shape=doublecircle")
            elif n.kind == "ogs":
                attrs.append("shape=triangle")
            if n.id in t.ogs_candidate_by_node:
                attrs.append(f"status={_q('built' if n.id in built else 'candidate')}")
                if n.id not in built:
                    attrs.append("style=dashed")
            out.append(f"    {_q(n.id)} [{', '.join(attrs)}];")
        out.append("  }")
    for e in sorted(t.links, key=lambda e: e.id):
        international = t.is_cross_border(e)
        attrs = [
            f"id={_q(e.id)}",
            f"scope={_q('international' if international else 'national')}",
            f"color={_q('orange' if international else 'black')}",
            f"capacity={_q(f'{e.capacity:.6f}')}",
        ]
        if e.kind != "terrestrial":
            attrs.append(f"kind={_q(e.kind)}")
        if e.is_candidate:
            if e.id in built:
                attrs += [f"status={_q('built')}", "style=bold"]
            else:
                attrs += [f"status={_q('candidate')}", "style=dashed"]
        else:
            attrs.append(f"status={_q('existing')}")
        if e.required_clearance:
            attrs.append(f"clearance={_q(str(e.required_clearance))}")
        out.append(f"  {_q(e.a)} -- {_q(e.b)} [{', '.join(attrs)}];")
    out.append("}")
    return "\n".join(out) + "\n"


def flows_csv(p: DesignProblem, s: DesignSolution) -> str:
    """One row per non-zero (use-case, edge, window), oriented by sign."""
    lines = ["use_case,window,edge,from,to,rate"]
    t = p.topology
    rows = []
    for (uid, eid, w), val in s.flows.items():
        e = t.link_by_id[eid]
        a, b = (e.a, e.b) if val >= 0 else (e.b, e.a)
        rows.append((uid, w, eid, a, b, abs(val)))
    for (uid, key, w), val in s.transit.items():
        ends = key.split(":", 1)[1].split("~")
        a, b = ends if val >= 0 else ends[::-1]
        rows.append((uid, w, key, a, b, abs(val)))
    for uid, w, eid, a, b, val in sorted(rows):
        lines.append(f"{uid},{w},{eid},{a},{b},{val:.6f}")
    return "\n".join(lines) + "\n"


def plan_report(p: DesignProblem, s: DesignSolution) -> str:
    t = p.topology
    out = [f"objective: {p.objective}", f"total_cost: {s.total_cost:.6f}"]
    if p.objective == "max_served":
        out.append(f"served_total: {math.fsum(v for ws in s.served.values() for v in ws.values()):.6f}")
    out.append("built_links: " + (", ".join(sorted(s.built_links)) or "none"))
    out.append("built_ogs: " + (", ".join(sorted(s.built_ogs)) or "none"))
    out.append("use_cases:")
    for u in p.use_cases:
        for w in sorted(u.schedule):
            got = s.served.get(u.id, {}).get(w, 0.0)
            status = "served" if got >= u.required_rate - 1e-6 else "partial" if got > 1e-9 else "unserved"
            out.append(
                f"  {u.id} window {w}: {status} {got:.6f} of {u.required_rate:.6f} "
                f"({u.source} -> {u.target})"
            )
    out.append("budget_shares:")
    for c in sorted(t.country_by_id):
        out.append(f"  {c}: {s.budget_shares.get(c, 0.0):.6f}")
    return "\n".join(out) + "\n"


def diagnostics_report(title: str, diags: Iterable[Diagnostic]) -> str:
    diags = list(diags)
    out = [f"{title}: {len(diags)} finding(s)"]
    out += [f"  {d}" for d in diags]
    return "\n".join(out) + "\n"


def vnet_report(allocs: list[VNetAllocation], violations: list[Violation]) -> str:
    out = ["link window national federated custom"]
    for a in allocs:
        out.append(
            f"{a.link} {a.window} {a.national_share:.6f} {a.federated_share:.6f} {a.custom_reserve:.6f}"
        )
    out.append(f"violations: {len(violations)}")
    for v in violations:
        out.append(f"  {v.link} window {v.window}: {v.share} flow {v.flow:.6f} > {v.allowed:.6f}")
    return "\n".join(out) + "\n"


def survivability_csv(entries: list[SurvivabilityEntry]) -> str:
    lines = ["link,unservable,contention"]
    for e in entries:
        lines.append(f"{e.link},{';'.join(sorted(e.unservable))},{int(e.contention)}")
    return "\n".join(lines) + "\n"


def survivability_report(entries: list[SurvivabilityEntry], checked: int) -> str:
    out = [f"links checked: {checked}", f"critical links: {len(entries)}"]
    for e in entries:
        lost = ", ".join(sorted(e.unservable)) or "none alone"
        tail = " (joint demand no longer fits)" if e.contention else ""
        out.append(f"  {e.link}: loses {lost}{tail}")
    return "\n".join(out) + "\n"


def schedule_report(schedule: SatSchedule, requests) -> str:
    out = ["request window first_pass second_pass bits"]
    for a in schedule.assignments:
        out.append(f"{a.request} {a.window} {a.first_pass} {a.second_pass} {a.bits:.6f}")
    out.append("delivered:")
    for q in requests:
        out.append(f"  {q.id}: {schedule.delivered.get(q.id, 0.0):.6f} of {q.required_bits:.6f}")
    return "\n".join(out) + "\n"


# -- solution files ----------------------------------------------------------


def solution_to_json(s: DesignSolution) -> str:
    def rows(m):
        return [[u, e, w, v] for (u, e, w), v in sorted(m.items())]

    data = {
        "built_links": sorted(s.built_links),
        "built_ogs": sorted(s.built_ogs),
        "total_cost": s.total_cost,
        "objective_value": s.objective_value,
        "budget_shares": dict(sorted(s.budget_shares.items())),
        "served": {u: {str(w): v for w, v in sorted(ws.items())} for u, ws in sorted(s.served.items())},
        "flows": rows(s.flows),
        "transit": rows(s.transit),
    }
    return json.dumps(data, indent=2) + "\n"


def solution_from_json(text: str) -> DesignSolution:
    d = json.loads(text)
    try:
        return DesignSolution(
            frozenset(d["built_links"]),
            frozenset(d["built_ogs"]),
            {(u, e, int(w)): float(v) for u, e, w, v in d["flows"]},
            {(u, e, int(w)): float(v) for u, e, w, v in d["transit"]},
            {u: {int(w): float(v) for w, v in ws.items()} for u, ws in d["served"].items()},
            float(d["total_cost"]),
            {k: float(v) for k, v in d["budget_shares"].items()},
            float(d.get("objective_value", 0.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed solution file: {exc}") from None
