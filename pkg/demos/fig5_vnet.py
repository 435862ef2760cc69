"""Country B reserves 20% of its key rate for traffic it is not part of.

Shows the national/federated split on B's internal link and what happens
when B stops offering anything to its neighbours.
"""
# %%
import dataclasses

from fedqci import Infeasible, Percentage, allocate_vnets, enforcement_check, load_fixture, solve

p = load_fixture("fig5.json")
s = solve(p)
for (uid, lid, w), f in sorted(s.flows.items()):
    if lid == "b_int":
        print(f"{uid:12s} on b_int: {f:10.3f} bits/s")

# %%
for a in allocate_vnets(p, s):
    print(f"{a.link:8s} national {a.national_share:9.1f}  federated {a.federated_share:9.1f}")
print("enforcement violations:", enforcement_check(allocate_vnets(p, s), p, s))

# %%
# Fraction 0: the A-C use-case has nowhere to go.
countries = tuple(
    dataclasses.replace(c, availability_policy=Percentage(0.0)) if c.id == "B" else c
    for c in p.topology.countries
)
closed = dataclasses.replace(
    p, topology=dataclasses.replace(p.topology, countries=countries), use_cases=(p.use_case("external_ac"),)
)
try:
    solve(closed)
except Infeasible as exc:
    print("with p = 0:", exc.code)
