"""Goal error against the global and local a priori bounds under joint h = k refinement.

Runs once per goal weight so the effect of a weight that clashes with the free
end (``sin``) can be compared with a compatible one (``sin_half``).
"""
import argparse

import numpy as np

from viscofem.bounds import global_estimate, local_estimate
from viscofem.dual import DualData, goal_error, solve_dual
from viscofem.io import write_csv
from viscofem.kernel import KernelSpec
from viscofem.primal import solve_primal
from viscofem.problems import goal_weight, mms_smooth
from viscofem.projections import observed_orders
from viscofem.timegrid import TimePartition


def study(weight, levels, beta):
    p = mms_smooth(KernelSpec.prony([(0.4, 1.0)]))
    w = goal_weight(weight, 1)
    rows = []
    for n in levels:
        part = TimePartition.uniform(p.T, n)
        sol = solve_primal(p, part, p.mesh(n))
        d = solve_dual(DualData(z1T=w), part, p.mesh(n), p.kernel, p.params, 1, 1)
        rows.append([n, 1.0 / n, abs(goal_error(sol, w, p.exact_u1)),
                     global_estimate(sol, p, d, beta=beta).bound, local_estimate(sol, p, d).bound])
    cols = np.array(rows)
    orders = [observed_orders(cols[:, 1], cols[:, j]) for j in (2, 3, 4)]
    return [[weight] + r + [o[i] for o in orders] for i, r in enumerate(rows)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--weights", nargs="+", default=["sin", "sin_half"])
    ap.add_argument("--levels", type=int, nargs="+", default=[4, 8, 16, 32])
    ap.add_argument("--beta", type=float, default=2.0)
    ap.add_argument("--out", default="estimator_orders.csv")
    a = ap.parse_args()
    rows = [r for wname in a.weights for r in study(wname, a.levels, a.beta)]
    write_csv(a.out, ["weight", "n", "h", "goal_error", "global_bound", "local_bound",
                      "order_error", "order_global", "order_local"], rows)
    for r in rows:
        print(f"{r[0]:<9} n={r[1]:>3}  err={r[3]:.3e} ({r[6]:.2f})  global={r[4]:.3e} ({r[7]:.2f})"
              f"  local={r[5]:.3e} ({r[8]:.2f})")


if __name__ == "__main__":
    main()
