"""Regenerate the bundled scenario fixtures in canonical form."""
import json
from pathlib import Path

from fedqci.scenario_io import parse_scenario, serialize_scenario

OUT = Path(__file__).resolve().parents[1] / "src" / "fedqci" / "fixtures"


def node(i, c, kind, lat, lon, clearance=0):
    return {"id": i, "country": c, "kind": kind, "lat": lat, "lon": lon, "clearance": clearance}


def link(i, a, b, cap, status="existing", cost=0, clearance=0, kind="terrestrial"):
    return {"id": i, "a": a, "b": b, "capacity": cap, "status": status,
            "build_cost": cost, "required_clearance": clearance, "kind": kind}


fig1 = {
    "schema_version": 1,
    "topology": {
        "countries": [{"id": c, "name": f"Country {c}"} for c in "ABCD"],
        "nodes": [
            node("a_hq", "A", "relay", 50.0, 5.0, 1),
            node("a_x", "A", "border", 50.0, 6.0, 1),
            node("b_w", "B", "border", 50.0, 6.5, 1),
            node("b_e", "B", "border", 50.0, 7.5, 1),
            node("c_w", "C", "border", 50.0, 8.0, 1),
            node("c_e", "C", "border", 50.0, 9.5, 1),
            node("d_x", "D", "border", 50.0, 10.0, 1),
            node("d_hq", "D", "relay", 50.0, 11.0, 1),
        ],
        "links": [
            link("a_int", "a_hq", "a_x", 2000),
            link("ab", "a_x", "b_w", 2000),
            link("b_yellow", "b_w", "b_e", 2000, clearance=2),
            link("bc", "b_e", "c_w", 2000),
            link("cd", "c_e", "d_x", 2000),
            link("d_int", "d_x", "d_hq", 2000),
        ],
    },
    "use_cases": [
        {"id": "uc_ad", "endpoints": ["a_hq", "d_hq"], "required_rate": 1000, "clearance": 1},
    ],
}

fig5 = {
    "schema_version": 1,
    "topology": {
        "countries": [{"id": c, "name": f"Country {c}"} for c in "ABC"],
        "nodes": [
            node("a_hq", "A", "relay", 48.0, 10.0),
            node("a_x", "A", "border", 48.0, 10.8),
            node("b_w", "B", "border", 48.0, 11.2),
            node("b_e", "B", "border", 48.0, 12.4),
            node("c_x", "C", "border", 48.0, 12.8),
            node("c_hq", "C", "relay", 48.0, 13.6),
        ],
        "links": [
            link("a_int", "a_hq", "a_x", 10000),
            link("ab", "a_x", "b_w", 10000),
            link("b_int", "b_w", "b_e", 1000),
            link("bc", "b_e", "c_x", 10000),
            link("c_int", "c_x", "c_hq", 10000),
        ],
    },
    "use_cases": [
        {"id": "national_b", "endpoints": ["b_w", "b_e"], "required_rate": 800},
        {"id": "external_ac", "endpoints": ["a_hq", "c_hq"], "required_rate": 200},
    ],
    "availability": {"B": {"type": "percentage", "fraction": 0.2}},
}

toy = {
    "schema_version": 1,
    "topology": {
        "max_link_range_km": 600,
        "countries": [
            {"id": "GR", "name": "Greece"}, {"id": "BG", "name": "Bulgaria"},
            {"id": "RO", "name": "Romania"}, {"id": "HU", "name": "Hungary"},
        ],
        "nodes": [
            node("gr_athens", "GR", "relay", 37.98, 23.73, 2),
            node("gr_ogs", "GR", "ogs", 38.05, 23.86, 2),
            node("gr_thessaloniki", "GR", "relay", 40.64, 22.94, 2),
            node("gr_promachonas", "GR", "border", 41.37, 23.36, 2),
            node("bg_kulata", "BG", "border", 41.39, 23.36, 2),
            node("bg_sofia", "BG", "relay", 42.70, 23.32, 2),
            node("bg_ruse", "BG", "border", 43.85, 25.97, 2),
            node("ro_giurgiu", "RO", "border", 43.90, 25.97, 2),
            node("ro_bucharest", "RO", "relay", 44.43, 26.10, 2),
            node("ro_timisoara", "RO", "relay", 45.75, 21.23, 2),
            node("ro_nadlac", "RO", "border", 46.16, 20.75, 2),
            node("hu_nagylak", "HU", "border", 46.17, 20.71, 2),
            node("hu_szeged", "HU", "relay", 46.25, 20.15, 2),
            node("hu_budapest", "HU", "relay", 47.50, 19.04, 2),
            node("hu_ogs", "HU", "ogs", 47.55, 19.10, 2),
        ],
        "links": [
            link("gr_ath_the", "gr_athens", "gr_thessaloniki", 3000),
            link("gr_the_pro", "gr_thessaloniki", "gr_promachonas", 3000),
            link("gr_ath_ogs", "gr_athens", "gr_ogs", 3000),
            link("x_gr_bg", "gr_promachonas", "bg_kulata", 2500, "candidate", 150000),
            link("bg_kul_sof", "bg_kulata", "bg_sofia", 3000),
            link("bg_sof_rus", "bg_sofia", "bg_ruse", 3000),
            link("x_bg_ro", "bg_ruse", "ro_giurgiu", 3000),
            link("ro_giu_buc", "ro_giurgiu", "ro_bucharest", 4000),
            link("ro_buc_tim", "ro_bucharest", "ro_timisoara", 4000),
            link("ro_tim_nad", "ro_timisoara", "ro_nadlac", 4000),
            link("x_ro_hu", "ro_nadlac", "hu_nagylak", 3000),
            link("hu_nag_sze", "hu_nagylak", "hu_szeged", 3000),
            link("hu_sze_bud", "hu_szeged", "hu_budapest", 3000),
            link("hu_bud_ogs", "hu_budapest", "hu_ogs", 3000),
            link("sat_gr_hu", "gr_ogs", "hu_ogs", 5000, kind="satellite_feed"),
        ],
        "ground_stations": [{"node": "gr_ogs", "build_cost": 1000000}],
    },
    "use_cases": [
        {"id": "gov_ath_bud", "endpoints": ["gr_athens", "hu_budapest"], "required_rate": 1000,
         "schedule": [0, 1], "clearance": 2},
        {"id": "ro_backbone", "endpoints": ["ro_bucharest", "ro_timisoara"], "required_rate": 1500,
         "schedule": [0, 1], "clearance": 2},
    ],
    "availability": {
        "BG": {"type": "percentage", "fraction": 0.4},
        "RO": {"type": "point_to_point",
               "rates": [{"a": "ro_giurgiu", "b": "ro_nadlac", "rate": 1500}]},
    },
    "satellite": {
        "window_seconds": 3600,
        "passes": [
            {"id": "p1", "satellite": "sat1", "ogs": "gr_ogs", "window": 0, "expected_yield": 3600000},
            {"id": "p2", "satellite": "sat1", "ogs": "hu_ogs", "window": 1, "expected_yield": 5400000,
             "weather_factor": 0.8},
        ],
        "requests": [
            {"id": "r_gr_hu", "country": "GR", "counterparty": "HU", "required_bits": 3600000,
             "priority": 1, "deadline": 1},
        ],
    },
    "options": {"num_windows": 2},
}

for name, data in (("fig1.json", fig1), ("fig5.json", fig5), ("euroqci-toy.json", toy)):
    p = parse_scenario(json.dumps(data))
    (OUT / name).write_text(serialize_scenario(p), encoding="utf-8")
    print("wrote", name)
