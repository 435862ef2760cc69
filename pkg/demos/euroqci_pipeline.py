"""End-to-end run on the four-country toy: plan, partition, stress-test.

Also writes the CLI artifacts into a temporary directory to show what the
command-line tool produces for the same scenario.
"""
# %%
import contextlib
import io
import os
import tempfile

from fedqci import allocate_vnets, load_fixture, network_diagnostics, solve, survivability_report
from fedqci.cli import main
from fedqci.report import plan_report, vnet_report

p = load_fixture("euroqci-toy.json")
print("network findings:")
for d in network_diagnostics(p.topology):
    print(" ", d)

# %%
s = solve(p)
print(plan_report(p, s), end="")

# %%
print(vnet_report(allocate_vnets(p, s), []), end="")

# %%
for e in survivability_report(p, s):
    print(f"losing {e.link} breaks {sorted(e.unservable) or 'joint demand'}")

# %%
from importlib import resources

path = str(resources.files("fedqci.fixtures").joinpath("euroqci-toy.json"))
with tempfile.TemporaryDirectory() as out:
    with contextlib.redirect_stdout(io.StringIO()):
        main(["plan", path, "--out", out])
    print(sorted(os.listdir(out)))
