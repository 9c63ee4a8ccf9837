"""Compare the three indicator representations with the form residual and the true goal error."""
import argparse

import numpy as np

from viscofem.dual import DualData, goal_error, solve_dual
from viscofem.estimators import compute_thetas, theta_representation
from viscofem.forms import STFunction, evaluate_forms
from viscofem.kernel import KernelSpec
from viscofem.primal import solve_primal
from viscofem.problems import goal_weight, mms_smooth
from viscofem.timegrid import TimePartition

KERNELS = {
    "prony": KernelSpec.prony([(0.4, 1.0)]),
    "powerlaw": KernelSpec.powerlaw(0.2, 0.6, 1.0),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kernel", choices=sorted(KERNELS), default="prony")
    ap.add_argument("--dim", type=int, choices=(1, 2), default=1)
    ap.add_argument("--cells", type=int, default=4)
    ap.add_argument("--slabs", type=int, default=8)
    ap.add_argument("--enrich", type=int, default=2, help="dual refinement levels in space and time")
    ap.add_argument("--gauss", type=int, default=8)
    a = ap.parse_args()

    p = mms_smooth(KERNELS[a.kernel], dim=a.dim)
    w = goal_weight("sin", a.dim)
    part = TimePartition.uniform(p.T, a.slabs)
    sol = solve_primal(p, part, p.mesh(a.cells), gauss=a.gauss)
    d = solve_dual(DualData(z1T=w), part, [s.mesh for s in sol.spaces], p.kernel, p.params,
                   a.enrich, a.enrich, gauss=a.gauss)
    pieces = compute_thetas(sol, d.z, p, gauss=a.gauss)
    tots = [theta_representation(sol, d.z, p, r, pieces=pieces).total for r in (1, 2, 3)]
    U = STFunction.from_solution(sol)
    form = (evaluate_forms("B", U, d.z, p.kernel, p.params)
            - evaluate_forms("L", v=d.z, data=p, gauss=a.gauss))
    exact = goal_error(sol, w, p.exact_u1)
    for r, t in enumerate(tots, 1):
        print(f"representation {r}: {t:+.10e}")
    print(f"B(U,z) - L(z):    {form:+.10e}  (relative gap {abs(tots[0] - form) / abs(form):.1e})")
    print(f"true goal error:  {exact:+.10e}  (relative gap {abs(tots[0] - exact) / abs(exact):.2%})")
    print(f"spread across representations: {np.ptp(tots) / abs(tots[0]):.1e}")


if __name__ == "__main__":
    main()
