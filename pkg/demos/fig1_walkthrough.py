"""Diagnose the four-country A-B-C-D network, then repair it and plan.

Run with ``python demos/fig1_walkthrough.py``.
"""
# %%
import dataclasses

from fedqci import check_use_case, load_fixture, network_diagnostics, solve
from fedqci.report import plan_report
from fedqci.topology import Link

p = load_fixture("fig1.json")
t = p.topology
uc = p.use_cases[0]
print(f"{len(t.nodes)} nodes, {len(t.links)} links, use-case {uc.id}: {uc.source} -> {uc.target}")

# %%
# Country C has no internal link between its two border nodes, and the only
# way through B needs clearance 2.
for d in network_diagnostics(t) + check_use_case(t, uc):
    print(" ", d)

# %%
# Offer an internal C link as a candidate and relax the clearance on B.
t = t.replace_link("b_yellow", required_clearance=1)
t = t.with_links(t.links + (Link("c_internal", "c_w", "c_e", 2000.0, "candidate", 150000.0),))
fixed = dataclasses.replace(p, topology=t)
# Existing links still fail; only the candidate closes the gap.
print("before building:", [d.code for d in check_use_case(t, uc)])

# %%
s = solve(fixed)
print(plan_report(fixed, s), end="")
