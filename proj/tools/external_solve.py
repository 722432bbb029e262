#!/usr/bin/env python3
"""External SDP backend: solves a reachavoid sparse dump with cvxpy.

usage: external_solve.py DUMP SOLUTION [--tolerance T] [--solver NAME]

Writes "status feasible|infeasible|failed" and, when feasible, "x n" followed
by n values of the global svec vector.
"""

import argparse
import math
import sys

import numpy as np
import scipy.sparse as sp


def read_dump(path):
    with open(path) as f:
        tok = f.read().split()
    it = iter(tok)

    def expect(word):
        got = next(it)
        if got != word:
            raise ValueError(f"expected {word}, got {got}")

    expect("reachavoid-sdp")
    if next(it) != "1":
        raise ValueError("unsupported dump version")
    expect("blocks")
    dims = [int(next(it)) for _ in range(int(next(it)))]
    expect("free")
    nfree = int(next(it))
    expect("rows")
    nrows = int(next(it))
    expect("b")
    b = np.array([float(next(it)) for _ in range(nrows)])
    expect("A")
    nnz = int(next(it))
    rows, cols, vals = [], [], []
    for _ in range(nnz):
        rows.append(int(next(it)))
        cols.append(int(next(it)))
        vals.append(float(next(it)))
    nvars = sum(d * (d + 1) // 2 for d in dims) + nfree
    a = sp.csr_matrix((vals, (rows, cols)), shape=(nrows, nvars))
    expect("c")
    c = np.zeros(nvars)
    for _ in range(int(next(it))):
        i = int(next(it))
        c[i] = float(next(it))
    expect("end")
    return dims, nfree, a, b, c


def svec_map(d):
    """Sparse map from column-major vec(X) to svec(X) (upper triangle, row by row)."""
    r, cidx, v = [], [], []
    k = 0
    for p in range(d):
        for q in range(p, d):
            if p == q:
                r.append(k), cidx.append(p + d * q), v.append(1.0)
            else:
                s = math.sqrt(2.0) / 2.0
                r += [k, k]
                cidx += [p + d * q, q + d * p]
                v += [s, s]
            k += 1
    return sp.csr_matrix((v, (r, cidx)), shape=(d * (d + 1) // 2, d * d))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("dump")
    ap.add_argument("solution")
    ap.add_argument("--tolerance", type=float, default=1e-8)
    ap.add_argument("--solver", default="CLARABEL")
    args = ap.parse_args()

    import cvxpy as cp

    dims, nfree, a, b, c = read_dump(args.dump)
    mats = [cp.Variable((d, d), symmetric=True) for d in dims]
    parts = [svec_map(d) @ cp.vec(m, order="F") for d, m in zip(dims, mats)]
    if nfree:
        parts.append(cp.Variable(nfree))
    x = cp.hstack(parts) if len(parts) > 1 else parts[0]
    cons = [a @ x == b] + [m >> 0 for m in mats]
    obj = cp.Minimize(c @ x) if np.any(c) else cp.Minimize(0)
    prob = cp.Problem(obj, cons)
    tol = max(args.tolerance, 1e-10)
    opts = {}
    if args.solver == "CLARABEL":
        opts = dict(tol_feas=tol, tol_gap_abs=tol, tol_gap_rel=tol, max_iter=500)
    status = "failed"
    try:
        prob.solve(solver=args.solver, **opts)
        if prob.status in ("optimal", "optimal_inaccurate"):
            status = "feasible"
        elif prob.status in ("infeasible", "infeasible_inaccurate"):
            status = "infeasible"
    except cp.error.SolverError as e:
        print(f"solver error: {e}", file=sys.stderr)

    with open(args.solution, "w") as f:
        f.write(f"status {status}\n")
        if status == "feasible":
            vals = np.asarray(x.value).ravel()
            f.write(f"x {vals.size}\n")
            f.write("\n".join(f"{v:.17g}" for v in vals))
            f.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
