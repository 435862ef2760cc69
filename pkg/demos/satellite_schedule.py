"""Double-downlink scheduling: a request needs one pass over each end.

Three ground stations, two satellites, three requests.  Weather cuts the yield of
some passes, and the lowest-priority request loses out.
"""
# %%
from fedqci import Pass, SatRequest, schedule_passes
from fedqci.satellite import schedule_csv

ogs = {"ogs_a": "A", "ogs_b": "B", "ogs_c": "C"}
passes = [
    Pass("p1", "s1", "ogs_a", 0, 3.0e6),
    Pass("p2", "s1", "ogs_b", 1, 2.5e6, weather_factor=0.9),
    Pass("p3", "s1", "ogs_c", 2, 3.0e6),
    Pass("p4", "s2", "ogs_b", 0, 3.5e6, weather_factor=0.6),
    Pass("p5", "s2", "ogs_c", 1, 3.0e6),
    Pass("p6", "s2", "ogs_a", 2, 2.0e6),
]
requests = [
    SatRequest("gov_ab", "A", "B", 2.0e6, priority=3.0, deadline=2),
    SatRequest("gov_bc", "B", "C", 2.5e6, priority=2.0, deadline=2),
    SatRequest("lab_ac", "A", "C", 4.0e6, priority=1.0, deadline=2),
]

# %%
sched = schedule_passes(passes, requests, ogs)
for a in sched.assignments:
    print(f"{a.request}: {a.first_pass} + {a.second_pass} in window {a.window}, {a.bits:,.0f} bits")
print(schedule_csv(sched, requests), end="")
