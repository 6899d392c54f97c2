#!/usr/bin/env python3
"""External MILP adapter for `zidroop --backend external`.

usage: milp_highs.py MODEL.mps SOLUTION.txt [--time-limit SECONDS]

Reads a free-format MPS file, solves it with scipy.optimize.milp (HiGHS)
and writes `status <word>` followed by one `<column> <value>` line per column.
"""

import argparse
import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import coo_matrix


def read_mps(path):
    rows = {}          # name -> (index, type)
    obj_row = None
    cols = {}          # name -> index
    col_names = []
    integer = []
    entries = []       # (row, col, value)
    cost = []
    rhs = {}
    ranges = {}
    lo, hi = [], []
    section = None
    in_int = False
    with open(path) as f:
        for raw in f:
            line = raw.strip()
            if not line or line.startswith("*"):
                continue
            if not raw[0].isspace():
                section = line.split()[0]
                continue
            tok = line.split()
            if section == "ROWS":
                kind, name = tok
                if kind == "N" and obj_row is None:
                    obj_row = name
                elif kind != "N":
                    rows[name] = (len(rows), kind)
            elif section == "COLUMNS":
                if len(tok) >= 3 and tok[1] == "'MARKER'":
                    in_int = tok[2] == "'INTORG'"
                    continue
                name = tok[0]
                if name not in cols:
                    cols[name] = len(col_names)
                    col_names.append(name)
                    cost.append(0.0)
                    integer.append(1 if in_int else 0)
                    lo.append(0.0)
                    hi.append(np.inf)
                j = cols[name]
                for r, v in zip(tok[1::2], tok[2::2]):
                    if r == obj_row:
                        cost[j] = float(v)
                    elif r in rows:
                        entries.append((rows[r][0], j, float(v)))
            elif section == "RHS":
                for r, v in zip(tok[1::2], tok[2::2]):
                    rhs[r] = float(v)
            elif section == "RANGES":
                for r, v in zip(tok[1::2], tok[2::2]):
                    ranges[r] = float(v)
            elif section == "BOUNDS":
                kind, name = tok[0], tok[2]
                j = cols[name]
                val = float(tok[3]) if len(tok) > 3 else 0.0
                if kind == "FX":
                    lo[j] = hi[j] = val
                elif kind == "LO":
                    lo[j] = val
                elif kind == "UP":
                    hi[j] = val
                elif kind == "MI":
                    lo[j] = -np.inf
                elif kind == "PL":
                    hi[j] = np.inf
                elif kind == "BV":
                    lo[j], hi[j] = 0.0, 1.0
                    integer[j] = 1
    m = len(rows)
    rlo = np.full(m, -np.inf)
    rhi = np.full(m, np.inf)
    for name, (i, kind) in rows.items():
        b = rhs.get(name, 0.0)
        r = ranges.get(name)
        if kind == "E":
            rlo[i] = rhi[i] = b
            if r is not None:
                if r > 0:
                    rhi[i] = b + r
                else:
                    rlo[i] = b + r
        elif kind == "L":
            rhi[i] = b
            if r is not None:
                rlo[i] = b - abs(r)
        elif kind == "G":
            rlo[i] = b
            if r is not None:
                rhi[i] = b + abs(r)
    n = len(col_names)
    if entries:
        ri, ci, vv = zip(*entries)
    else:
        ri, ci, vv = (), (), ()
    a = coo_matrix((vv, (ri, ci)), shape=(m, n)).tocsr()
    return col_names, np.array(cost), np.array(lo), np.array(hi), np.array(integer), a, rlo, rhi


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("model")
    ap.add_argument("solution")
    ap.add_argument("--time-limit", type=float, default=600.0)
    args = ap.parse_args()

    names, c, lo, hi, integrality, a, rlo, rhi = read_mps(args.model)
    res = milp(c, constraints=[LinearConstraint(a, rlo, rhi)], bounds=Bounds(lo, hi),
               integrality=integrality,
               options={"time_limit": args.time_limit, "mip_rel_gap": 1e-9})
    if res.status == 0:
        status = "optimal"
    elif res.status == 2:
        status = "infeasible"
    else:
        status = "limit"
    with open(args.solution, "w") as f:
        f.write(f"status {status}\n")
        if res.x is not None:
            for name, v in zip(names, res.x):
                f.write(f"{name} {v:.17g}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
