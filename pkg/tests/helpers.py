"""Instance generators and independent oracles shared by the test modules.

Nothing here calls the package's own solver: LP oracles use scipy's HiGHS
or plain vertex enumeration, graph oracles use removal-and-recount.
"""
from __future__ import annotations

import itertools
import math
from collections import defaultdict

import numpy as np
from scipy.optimize import linprog

from fedqci.planner import DesignProblem, DesignSolution
from fedqci.satellite import Pass, SatRequest
from fedqci.topology import (
    Country,
    GroundStationCandidate,
    Link,
    NetworkTopology,
    Node,
    Percentage,
    UseCase,
)


# -- random instances --------------------------------------------------------


def random_design(rng: np.random.Generator, *, max_nodes=8, max_candidates=10,
                  max_commodities=3, max_windows=2, pow2_costs=False) -> DesignProblem:
    """Small random design problem within the acceptance-suite limits."""
    n = int(rng.integers(3, max_nodes + 1))
    k = int(rng.integers(1, 4))
    countries = tuple(
        Country(c, c, Percentage(float(rng.choice([0.2, 0.5, 1.0]))) if rng.random() < 0.4 else None)
        for c in "PQR"[:k]
    )
    nodes = tuple(
        Node(f"n{i}", countries[int(rng.integers(k))].id, "border",
             (50.0 + 0.1 * float(rng.random()), 10.0 + 0.1 * float(rng.random())),
             int(rng.integers(0, 2)))
        for i in range(n)
    )
    pairs = list(itertools.combinations(range(n), 2))
    rng.shuffle(pairs)
    n_exist = int(rng.integers(0, min(len(pairs), n) + 1))
    n_cand = int(rng.integers(1, min(max_candidates, len(pairs) - n_exist) + 1)) if len(pairs) > n_exist else 0
    links = []
    cost_pool = [2.0 ** i for i in range(n_cand)]
    rng.shuffle(cost_pool)
    for j, (a, b) in enumerate(pairs[: n_exist + n_cand]):
        cand = j >= n_exist
        if cand:
            cost = cost_pool[j - n_exist] if pow2_costs else float(rng.integers(1, 30))
        else:
            cost = 0.0
        links.append(Link(
            f"e{j}", f"n{a}", f"n{b}", float(rng.choice([1000, 2000, 3000, 4000])),
            "candidate" if cand else "existing", cost, int(rng.integers(0, 2)) if rng.random() < 0.2 else 0,
        ))
    t = NetworkTopology(countries, nodes, tuple(links))
    windows = int(rng.integers(1, max_windows + 1))
    ucs = []
    for i in range(int(rng.integers(1, max_commodities + 1))):
        a, b = rng.choice(n, size=2, replace=False)
        sched = frozenset(int(w) for w in range(windows) if rng.random() < 0.7) or frozenset({0})
        ucs.append(UseCase(f"u{i}", (f"n{a}", f"n{b}"), float(rng.choice([500, 1000, 1500, 2500])),
                           sched, int(rng.integers(0, 2))))
    return DesignProblem(t, tuple(ucs), num_windows=windows)


def random_graph_topology(rng: np.random.Generator, max_nodes=14) -> NetworkTopology:
    n = int(rng.integers(1, max_nodes + 1))
    nodes = tuple(Node(f"v{i:02d}", "X", "relay", (0.0, 0.01 * i)) for i in range(n))
    p = float(rng.uniform(0.1, 0.5))
    links = tuple(
        Link(f"l{a:02d}_{b:02d}", f"v{a:02d}", f"v{b:02d}", 1.0)
        for a, b in itertools.combinations(range(n), 2) if rng.random() < p
    )
    return NetworkTopology((Country("X", "X", None),), nodes, links)


# -- graph oracles -----------------------------------------------------------


def count_components(nodes, edges) -> int:
    parent = {v: v for v in nodes}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in edges:
        parent[find(a)] = find(b)
    return len({find(v) for v in nodes})


def removal_oracle(t: NetworkTopology) -> tuple[set[str], set[str]]:
    nodes = [n.id for n in t.nodes]
    links = t.existing_links()
    base = count_components(nodes, [(e.a, e.b) for e in links])
    bridges = {
        e.id for e in links
        if count_components(nodes, [(f.a, f.b) for f in links if f.id != e.id]) > base
    }
    arts = set()
    for v in nodes:
        rest = [x for x in nodes if x != v]
        edges = [(e.a, e.b) for e in links if v not in (e.a, e.b)]
        isolated_alone = not any(v in (e.a, e.b) for e in links)
        if not isolated_alone and count_components(rest, edges) > base:
            arts.add(v)
    return bridges, arts


def bfs_reachable(t: NetworkTopology, u: UseCase) -> bool:
    ok_nodes = {
        n.id for n in t.nodes
        if n.id in u.endpoints
        or (n.clearance_level <= u.clearance and n.country not in u.excluded_countries
            and n.clearance_level >= u.min_security_level)
    }
    adj = defaultdict(set)
    for e in t.existing_links():
        lvl = e.required_clearance
        if e.a in ok_nodes and e.b in ok_nodes and lvl <= u.clearance and (
            u.min_security_level == 0 or lvl >= u.min_security_level
        ):
            adj[e.a].add(e.b)
            adj[e.b].add(e.a)
    seen, frontier = {u.source}, [u.source]
    while frontier:
        nxt = []
        for v in frontier:
            for w in sorted(adj[v]):
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return u.target in seen


# -- LP oracles --------------------------------------------------------------


def vertex_enumeration(c, A, senses, b, lo, hi, maximize=False):
    """Optimum of a bounded LP by enumerating basic points.

    Returns ``(status, value)`` with status ``"optimal"`` or ``"infeasible"``.
    Every variable must have finite bounds.
    """
    n = len(c)
    rows = []  # (a, b, kind) with kind "le" or "eq"
    for a, s, r in zip(A, senses, b):
        a = np.asarray(a, dtype=float)
        if s == "<=":
            rows.append((a, r, "le"))
        elif s == ">=":
            rows.append((-a, -r, "le"))
        else:
            rows.append((a, r, "eq"))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        rows.append((-e, -lo[j], "le"))
        rows.append((e, hi[j], "le"))
    eqs = [r for r in rows if r[2] == "eq"]
    les = [r for r in rows if r[2] == "le"]
    best = None
    if len(eqs) >= n:
        pools = [itertools.combinations(eqs, n)]
    else:
        pools = [(tuple(eqs) + extra for extra in itertools.combinations(les, n - len(eqs)))]
    for combo in pools[0]:
        M = np.array([r[0] for r in combo]).reshape(n, n)
        rhs = np.array([r[1] for r in combo], dtype=float)
        if abs(np.linalg.det(M)) < 1e-10:
            continue
        x = np.linalg.solve(M, rhs)
        if all(r[0] @ x <= r[1] + 1e-9 for r in les) and all(abs(r[0] @ x - r[1]) <= 1e-9 for r in eqs):
            v = float(np.dot(c, x))
            if best is None or (v > best if maximize else v < best):
                best = v
    return ("infeasible", None) if best is None else ("optimal", best)


def scipy_lp(c, A, senses, b, lo, hi, maximize=False):
    A = np.asarray(A, dtype=float).reshape(len(senses), len(c))
    ub_rows, ub_rhs, eq_rows, eq_rhs = [], [], [], []
    for a, s, r in zip(A, senses, b):
        if s == "<=":
            ub_rows.append(a)
            ub_rhs.append(r)
        elif s == ">=":
            ub_rows.append(-a)
            ub_rhs.append(-r)
        else:
            eq_rows.append(a)
            eq_rhs.append(r)
    cc = -np.asarray(c, float) if maximize else np.asarray(c, float)
    res = linprog(
        cc,
        A_ub=np.array(ub_rows) if ub_rows else None, b_ub=ub_rhs or None,
        A_eq=np.array(eq_rows) if eq_rows else None, b_eq=eq_rhs or None,
        bounds=list(zip(lo, [None if math.isinf(h) else h for h in hi])),
        method="highs",
    )
    if res.status == 2:
        return "infeasible", None
    if res.status == 3:
        return "unbounded", None
    assert res.status == 0, res.message
    return "optimal", (-res.fun if maximize else res.fun)


def milp_enumeration(c, A, senses, b, lo, hi, binaries, maximize=False):
    """Best objective over all 0/1 assignments of ``binaries`` (scipy per leaf)."""
    best = None
    for bits in itertools.product((0.0, 1.0), repeat=len(binaries)):
        l2, h2 = list(lo), list(hi)
        if any(v < lo[j] - 1e-12 or v > hi[j] + 1e-12 for j, v in zip(binaries, bits)):
            continue
        for j, v in zip(binaries, bits):
            l2[j] = h2[j] = v
        status, val = scipy_lp(c, A, senses, b, l2, h2, maximize)
        if status == "unbounded":
            return "unbounded", None
        if status == "optimal" and (best is None or (val > best if maximize else val < best)):
            best = val
    return ("infeasible", None) if best is None else ("optimal", best)


# -- design oracle -----------------------------------------------------------


def _external(t: NetworkTopology, u: UseCase, country: str) -> bool:
    return country not in {t.country_of(x) for x in u.endpoints}


def design_flow_feasible(p: DesignProblem, built: set[str]) -> bool:
    """Independent multi-commodity flow LP for a fixed build set (terrestrial, percentage only)."""
    t = p.topology
    links = [e for e in t.links if not e.is_candidate or e.id in built]
    cols = {}
    for u in p.use_cases:
        ok = {
            n.id for n in t.nodes
            if n.id in u.endpoints or (n.clearance_level <= u.clearance and n.country not in u.excluded_countries)
        }
        for w in sorted(u.schedule):
            for e in links:
                if e.a in ok and e.b in ok and e.required_clearance <= u.clearance:
                    for d in (1, -1):
                        cols[(u.id, w, e.id, d)] = len(cols)
    if not cols:
        return not p.use_cases
    nvar = len(cols)
    A_eq, b_eq, A_ub, b_ub = [], [], [], []
    for u in p.use_cases:
        for w in sorted(u.schedule):
            for n in t.nodes:
                row = np.zeros(nvar)
                for (uid, ww, eid, d), j in cols.items():
                    if uid != u.id or ww != w:
                        continue
                    e = t.link_by_id[eid]
                    tail, head = (e.a, e.b) if d == 1 else (e.b, e.a)
                    if tail == n.id:
                        row[j] += 1
                    if head == n.id:
                        row[j] -= 1
                rhs = u.required_rate if n.id == u.source else -u.required_rate if n.id == u.target else 0.0
                A_eq.append(row)
                b_eq.append(rhs)
    for w in range(p.num_windows):
        for e in links:
            cap = np.zeros(nvar)
            ext = np.zeros(nvar)
            own = np.zeros(nvar)
            ca, cb = t.country_of(e.a), t.country_of(e.b)
            pol = t.country_by_id[ca].availability_policy if ca == cb else None
            for (uid, ww, eid, d), j in cols.items():
                if eid == e.id and ww == w:
                    cap[j] = 1
                    if pol is not None:
                        (ext if _external(t, p.use_case(uid), ca) else own)[j] = 1
            A_ub.append(cap)
            b_ub.append(e.capacity)
            if isinstance(pol, Percentage):
                A_ub.append(ext)
                b_ub.append(pol.fraction * e.capacity)
                A_ub.append(own)
                b_ub.append((1 - pol.fraction) * e.capacity)
    res = linprog(np.zeros(nvar), A_ub=np.array(A_ub) if A_ub else None, b_ub=b_ub or None,
                  A_eq=np.array(A_eq), b_eq=b_eq, bounds=[(0, None)] * nvar, method="highs")
    return res.status == 0


def brute_force_design(p: DesignProblem) -> tuple[float, frozenset[str]] | None:
    """Cheapest feasible candidate subset, or None when even all builds fail."""
    t = p.topology
    cands = [e for e in t.links if e.is_candidate] + list(t.ground_station_candidates)
    ids = [getattr(c, "id", None) or c.node for c in cands]
    costs = {i: c.build_cost for i, c in zip(ids, cands)}
    if not design_flow_feasible(p, set(ids)):
        return None
    subsets = sorted(
        (frozenset(s) for r in range(len(ids) + 1) for s in itertools.combinations(ids, r)),
        key=lambda s: (math.fsum(costs[i] for i in s), len(s), sorted(s)),
    )
    infeasible: list[frozenset[str]] = []
    for s in subsets:
        if any(s <= bad for bad in infeasible):
            continue
        if design_flow_feasible(p, set(s)):
            return math.fsum(costs[i] for i in s), s
        infeasible.append(s)
    return None


# -- solution invariants -----------------------------------------------------


def flow_violations(p: DesignProblem, s: DesignSolution, capacity_of=None) -> list[str]:
    """Conservation, capacity and availability breaches beyond 1e-6."""
    t = p.topology
    out = []
    cap_of = capacity_of or (lambda e, w: e.capacity)
    for u in p.use_cases:
        for w in range(p.num_windows):
            bal = defaultdict(float)
            for (uid, eid, ww), f in s.flows.items():
                if uid == u.id and ww == w:
                    e = t.link_by_id[eid]
                    bal[e.a] -= f
                    bal[e.b] += f
            for (uid, key, ww), f in s.transit.items():
                if uid == u.id and ww == w:
                    a, b = key.split(":", 1)[1].split("~")
                    bal[a] -= f
                    bal[b] += f
            for n, v in bal.items():
                if n not in u.endpoints and abs(v) >= 1e-6:
                    out.append(f"conservation {u.id} {n} w{w}: {v}")
            want = s.served[u.id].get(w, 0.0) if w in u.schedule else 0.0
            if abs(bal.get(u.target, 0.0) - want) > 1e-6:
                out.append(f"delivery {u.id} w{w}: {bal.get(u.target, 0.0)} != {want}")
    for e in t.links:
        built = not e.is_candidate or e.id in s.built_links
        for w in range(p.num_windows):
            total = sum(abs(f) for (uid, eid, ww), f in s.flows.items() if eid == e.id and ww == w)
            cap = cap_of(e, w) if built else 0.0
            if total > cap + 1e-6:
                out.append(f"capacity {e.id} w{w}: {total} > {cap}")
            ca, cb = t.country_of(e.a), t.country_of(e.b)
            pol = t.country_by_id[ca].availability_policy if ca == cb else None
            if isinstance(pol, Percentage):
                ext = sum(abs(f) for (uid, eid, ww), f in s.flows.items()
                          if eid == e.id and ww == w and _external(t, p.use_case(uid), ca))
                if ext > pol.fraction * cap + 1e-6:
                    out.append(f"availability {e.id} w{w}: {ext} > {pol.fraction * cap}")
    return out


# -- satellite ---------------------------------------------------------------


OGS = {"w1": "W", "x1": "X", "x2": "X", "y1": "Y", "z1": "Z"}
OGS_ORDER = ["w1", "x1", "y1", "x2", "z1"]
WEATHER = [1.0, 0.9, 0.7, 1.0, 0.8, 0.6]


def fixture_3x6x4():
    """Three satellites over six windows serving four requests."""
    passes = [
        Pass(f"s{i}w{w}", f"S{i}", OGS_ORDER[(3 * i + 2 * w) % 5], w,
             1e6 * (1 + (7 * i + 3 * w) % 5), WEATHER[(i + w) % 6])
        for i in range(3) for w in range(6)
    ]
    requests = [
        SatRequest("r1", "W", "X", 4e6, 1.0, 5),
        SatRequest("r2", "X", "Y", 3e6, 2.0, 3),
        SatRequest("r3", "Y", "Z", 5e6, 1.0, 5),
        SatRequest("r4", "Z", "W", 2e6, 0.5, 4),
    ]
    return passes, requests


def enumeration_oracle(passes, requests, ogs_country):
    """Window by window, try every conflict-free assignment and keep the best.

    Requests are ranked by priority * remaining_fraction / live options;
    an assignment is better when, comparing requests in rank order, it
    serves the earlier request with a higher-yield pair (pass ids break
    ties).  Returns delivered bits per request.
    """
    remaining = {r.id: r.required_bits for r in requests}
    used = set()
    for w in sorted({p.window for p in passes}):
        ranked = []
        for r in sorted(requests, key=lambda r: r.id):
            if remaining[r.id] <= 0 or r.deadline < w:
                continue
            options = [
                (p, q) for p in passes for q in passes
                if ogs_country.get(p.ogs) == r.country and ogs_country.get(q.ogs) == r.counterparty
                and p.satellite == q.satellite and p.window != q.window
                and w <= max(p.window, q.window) <= r.deadline
                and p.id not in used and q.id not in used
            ]
            now = sorted(
                (pq for pq in options if max(pq[0].window, pq[1].window) == w),
                key=lambda pq: (-min(pq[0].effective_yield, pq[1].effective_yield), pq[0].id, pq[1].id),
            )
            if now:
                score = r.priority * remaining[r.id] / r.required_bits / len(options)
                ranked.append((-score, r.id, r, now))
        ranked.sort(key=lambda x: (x[0], x[1]))
        best_key, best = None, None
        for choice in itertools.product(*[[None] + list(range(len(x[3]))) for x in ranked]):
            taken = [x[3][c] for x, c in zip(ranked, choice) if c is not None]
            ids = [pid for p, q in taken for pid in (p.id, q.id)]
            if len(ids) != len(set(ids)):
                continue
            key = tuple(-10**9 if c is None else -c for c in choice)
            if best_key is None or key > best_key:
                best_key, best = key, choice
        for x, c in zip(ranked, best or ()):
            if c is None:
                continue
            p, q = x[3][c]
            bits = min(p.effective_yield, q.effective_yield, remaining[x[2].id])
            remaining[x[2].id] -= bits
            used.update((p.id, q.id))
    return {r.id: r.required_bits - remaining[r.id] for r in requests}
