"""Command-line front end: ``fedqci <command> <scenario.json> ...``.

Exit codes: 0 success, 1 infeasible or findings reported, 2 input error.
Reports go to stdout.  Files are written only when an output directory is
given with ``--out`` or the ``FEDQCI_OUT`` environment variable.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

from . import report
from .errors import FedQCIError, Infeasible, InfeasibleInput, Overcommitted
from .feasibility import check_use_case, network_diagnostics, survivability_report
from .planner import DesignProblem, DesignSolution, formulate, solve
from .satellite import schedule_csv, schedule_for
from .scenario_io import ScenarioError, load_scenario, parse_scenario
from .topology import validate_topology
from .vnet import allocate_vnets, allocations_csv, enforcement_check

BLOCKING = {"NO_ADMISSIBLE_PATH", "DISCONNECTED_CLUSTERS"}


class InputError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    except UnicodeDecodeError:
        raise InputError(f"{path} is not UTF-8 text") from None


def _scenario(path: str) -> DesignProblem:
    try:
        return parse_scenario(_read(path))
    except ScenarioError as exc:
        raise InputError(f"{path}:\n" + "\n".join(f"  {i}" for i in exc.issues)) from None


def _solution(path: str, p: DesignProblem) -> DesignSolution:
    try:
        s = report.solution_from_json(_read(path))
    except ValueError as exc:
        raise InputError(f"{path}: {exc}") from None
    t = p.topology
    for lid in sorted(s.built_links):
        if lid not in t.link_by_id:
            raise InputError(f"{path}: unknown link {lid!r}")
    for g in sorted(s.built_ogs):
        if g not in t.ogs_candidate_by_node:
            raise InputError(f"{path}: unknown ground station {g!r}")
    uids = {u.id for u in p.use_cases}
    for uid, lid, _ in list(s.flows) + list(s.transit):
        if uid not in uids:
            raise InputError(f"{path}: unknown use-case {uid!r}")
        if (uid, lid, _) in s.flows and lid not in t.link_by_id:
            raise InputError(f"{path}: unknown link {lid!r}")
    return s


class _Out:
    def __init__(self, directory: str | None):
        self.dir = Path(directory) if directory else None

    def write(self, name: str, text: str) -> None:
        if self.dir is None:
            return
        self.dir.mkdir(parents=True, exist_ok=True)
        (self.dir / name).write_text(text, encoding="utf-8", newline="\n")


def cmd_validate(args, out: _Out) -> int:
    try:
        p = load_scenario(_read(args.scenario), check_topology=False)
    except ScenarioError as exc:
        raise InputError(f"{args.scenario}:\n" + "\n".join(f"  {i}" for i in exc.issues)) from None
    diags = validate_topology(p.topology)
    text = report.diagnostics_report("topology", diags)
    out.write("validate.txt", text)
    sys.stdout.write(text)
    return 1 if diags else 0


def cmd_diagnose(args, out: _Out) -> int:
    p = _scenario(args.scenario)
    net = network_diagnostics(p.topology)
    parts = [report.diagnostics_report("network", net)]
    blocking = any(d.code in BLOCKING for d in net)
    for u in p.use_cases:
        diags = check_use_case(p.topology, u)
        blocking |= bool(diags)
        parts.append(report.diagnostics_report(f"use-case {u.id}", diags))
    text = "".join(parts)
    out.write("diagnose.txt", text)
    sys.stdout.write(text)
    return 1 if blocking else 0


def cmd_plan(args, out: _Out) -> int:
    p = _scenario(args.scenario)
    changes = {}
    if args.objective:
        changes["objective"] = args.objective.replace("-", "_")
    if args.budget is not None:
        changes["budget"] = args.budget
    if changes:
        p = dataclasses.replace(p, **changes)
    if p.objective == "max_served" and not (p.budget and p.budget > 0):
        raise InputError("max-served needs a positive --budget")
    try:
        s = solve(p)
    except (Infeasible, InfeasibleInput) as exc:
        sys.stdout.write(f"{exc.code}: {exc}\n")
        return 1
    text = report.plan_report(p, s)
    out.write("report.txt", text)
    out.write("flows.csv", report.flows_csv(p, s))
    out.write("design.dot", report.emit_dot(p.topology, s))
    out.write("solution.json", report.solution_to_json(s))
    if out.dir is not None:
        out.write("model.lp", formulate(p).to_lp_text())
    sys.stdout.write(text)
    return 0


def cmd_vnet(args, out: _Out) -> int:
    p = _scenario(args.scenario)
    s = _solution(args.solution, p)
    try:
        allocs = allocate_vnets(p, s)
    except Overcommitted as exc:
        sys.stdout.write(f"{exc.code}: {exc}\n")
        return 1
    violations = enforcement_check(allocs, p, s)
    text = report.vnet_report(allocs, violations)
    out.write("vnet.txt", text)
    out.write("vnet.csv", allocations_csv(allocs))
    sys.stdout.write(text)
    return 1 if violations else 0


def cmd_satsched(args, out: _Out) -> int:
    p = _scenario(args.scenario)
    if p.satellite is None:
        raise InputError(f"{args.scenario}: no satellite section")
    sched = schedule_for(p.topology, p.satellite)
    text = report.schedule_report(sched, p.satellite.requests)
    out.write("schedule.txt", text)
    out.write("schedule.csv", schedule_csv(sched, p.satellite.requests))
    sys.stdout.write(text)
    return 0


def cmd_survive(args, out: _Out) -> int:
    p = _scenario(args.scenario)
    s = _solution(args.solution, p)
    links = [e.id for e in p.topology.links if not e.is_candidate or e.id in s.built_links]
    entries = survivability_report(p, s, links)
    text = report.survivability_report(entries, len(links))
    out.write("survive.txt", text)
    out.write("survivability.csv", report.survivability_csv(entries))
    sys.stdout.write(text)
    return 1 if entries else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fedqci", description="Federated QKD network planning.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("scenario", help="scenario JSON file")
    common.add_argument("--out", default=os.environ.get("FEDQCI_OUT"), help="artifact directory (default: $FEDQCI_OUT)")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check topology invariants").set_defaults(fn=cmd_validate)
    sub.add_parser("diagnose", parents=[common], help="feasibility findings per use-case").set_defaults(fn=cmd_diagnose)
    pl = sub.add_parser("plan", parents=[common], help="solve the build-out")
    pl.add_argument("--objective", choices=("min-cost", "max-served"))
    pl.add_argument("--budget", type=float)
    pl.set_defaults(fn=cmd_plan)
    vn = sub.add_parser("vnet", parents=[common], help="partition link capacity")
    vn.add_argument("--solution", required=True, help="solution.json written by plan")
    vn.set_defaults(fn=cmd_vnet)
    sub.add_parser("satsched", parents=[common], help="schedule satellite passes").set_defaults(fn=cmd_satsched)
    sv = sub.add_parser("survive", parents=[common], help="single-link failure analysis")
    sv.add_argument("--solution", required=True, help="solution.json written by plan")
    sv.set_defaults(fn=cmd_survive)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        return args.fn(args, _Out(args.out))
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except (FedQCIError, ValueError) as exc:
        code = getattr(exc, "code", "INVALID_INPUT")
        sys.stderr.write(f"error: {code}: {exc}\n")
        return 2


cli_main = main

if __name__ == "__main__":
    sys.exit(main())
