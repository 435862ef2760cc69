"""CPLEX LP-format text export (and import of the same subset).

Useful for cross-checking a model against a third-party solver.  The reader
only understands what :func:`write_lp` produces: one constraint per line,
explicit coefficients, a ``Bounds`` section and an optional ``Binaries``
section.
"""
from __future__ import annotations

import re
from typing import Iterable

import numpy as np

from .model import LpProblem

_BAD = re.compile(r"[^A-Za-z0-9_.\[\]]")


def _clean(name: str, prefix: str) -> str:
    s = _BAD.sub("_", name)
    if not s or not s[0].isalpha():
        s = prefix + s
    return s


def _num(v: float) -> str:
    return repr(float(v))


def _terms(coefs: np.ndarray, names: list[str]) -> str:
    parts = []
    for j in np.flatnonzero(coefs):
        v = coefs[j]
        sign = "-" if v < 0 else "+"
        parts.append(f"{sign} {_num(abs(v))} {names[j]}")
    if not parts:
        return f"0 {names[0]}" if names else "0"
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def write_lp(p: LpProblem, binaries: Iterable[int] = (), title: str = "") -> str:
    n = p.num_vars
    vnames = [_clean(s, "x") for s in (p.var_names or [f"x{j}" for j in range(n)])]
    rnames = [_clean(s, "r") for s in (p.row_names or [f"c{i}" for i in range(p.num_rows)])]
    if len(set(vnames)) != n:
        vnames = [f"x{j}" for j in range(n)]
    if len(set(rnames)) != p.num_rows:
        rnames = [f"c{i}" for i in range(p.num_rows)]
    out = []
    if title:
        out.append(f"\\ {title}")
    out.append("Maximize" if p.maximize else "Minimize")
    out.append(f" obj: {_terms(p.c, vnames)}")
    out.append("Subject To")
    for i in range(p.num_rows):
        out.append(f" {rnames[i]}: {_terms(p.A[i], vnames)} {p.senses[i]} {_num(p.b[i])}")
    out.append("Bounds")
    for j in range(n):
        lo, hi = p.lo[j], p.hi[j]
        if lo == hi:
            out.append(f" {vnames[j]} = {_num(lo)}")
        elif np.isinf(hi):
            out.append(f" {vnames[j]} >= {_num(lo)}")
        else:
            out.append(f" {_num(lo)} <= {vnames[j]} <= {_num(hi)}")
    bins = sorted(set(binaries))
    if bins:
        out.append("Binaries")
        out.append(" " + " ".join(vnames[j] for j in bins))
    out.append("End")
    return "\n".join(out) + "\n"


_TERM = re.compile(r"([+-]?)\s*([0-9.eE+-]+)\s+([A-Za-z][A-Za-z0-9_.\[\]]*)")


def read_lp(text: str) -> tuple[LpProblem, list[int]]:
    """Parse text produced by :func:`write_lp` back into a problem."""
    section = None
    maximize = False
    obj: dict[str, float] = {}
    rows: list[tuple[str, dict[str, float], str, float]] = []
    bounds: dict[str, tuple[float, float]] = {}
    bins: list[str] = []
    mentioned: list[str] = []

    def parse_terms(expr: str) -> dict[str, float]:
        coefs: dict[str, float] = {}
        for sign, num, name in _TERM.findall(expr):
            mentioned.append(name)
            v = float(num)
            coefs[name] = coefs.get(name, 0.0) + (-v if sign == "-" else v)
        return coefs

    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("\\"):
            continue
        head = line.lower()
        if head in ("minimize", "maximize"):
            section, maximize = "obj", head == "maximize"
            continue
        if head == "subject to":
            section = "st"
            continue
        if head in ("bounds", "binaries", "end"):
            section = head
            continue
        if section == "obj":
            obj = parse_terms(line.split(":", 1)[1])
        elif section == "st":
            name, body = line.split(":", 1)
            m = re.match(r"(.*)\s(<=|>=|=)\s(\S+)$", body.strip())
            if m is None:
                raise ValueError(f"cannot parse constraint line: {raw!r}")
            rows.append((name.strip(), parse_terms(m.group(1)), m.group(2), float(m.group(3))))
        elif section == "bounds":
            parts = line.split()
            if len(parts) == 5:
                lo, _, name, _, hi = parts
                bounds[name] = (float(lo), float(hi))
            elif parts[1] == "=":
                bounds[parts[0]] = (float(parts[2]), float(parts[2]))
            else:
                bounds[parts[0]] = (float(parts[2]), np.inf)
        elif section == "binaries":
            bins.extend(line.split())

    order = list(bounds)
    order += sorted(set(mentioned) - set(bounds))
    index = {name: j for j, name in enumerate(order)}
    n = len(order)
    c = np.zeros(n)
    for name, v in obj.items():
        c[index[name]] = v
    A = np.zeros((len(rows), n))
    for i, (_, coefs, _, _) in enumerate(rows):
        for name, v in coefs.items():
            A[i, index[name]] = v
    lo = np.array([bounds.get(name, (0.0, np.inf))[0] for name in order])
    hi = np.array([bounds.get(name, (0.0, np.inf))[1] for name in order])
    p = LpProblem(
        c, A, [r[2] for r in rows], [r[3] for r in rows], lo, hi,
        maximize=maximize, var_names=order, row_names=[r[0] for r in rows],
    )
    return p, sorted(index[b] for b in bins)
