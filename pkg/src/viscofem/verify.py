"""Invariant suites shared by the ``verify`` command and the test suite."""
from __future__ import annotations

import numpy as np
from scipy import integrate

from .assembly import ElasticParams
from .forms import STFunction, evaluate_forms
from .kernel import KernelSpec, NonContractiveKernel, slab_weights, validate_kernel
from .mesh import interval_mesh, rectangle_mesh, refine
from .primal import galerkin_residual, solve_primal
from .problems import mms_linear, mms_smooth
from .space import space_for
from .timegrid import TimePartition


def random_stfunction(rng, partition: TimePartition, meshes, kind="cont", dirichlet=True) -> STFunction:
    n = partition.N + 1 if kind == "cont" else partition.N
    spaces = [space_for(meshes[i] if kind == "cont" else meshes[i + 1], dirichlet) for i in range(n)]
    c1 = [rng.standard_normal(s.n_free) for s in spaces]
    c2 = [rng.standard_normal(s.n_free) for s in spaces]
    return STFunction(partition.nodes, kind, spaces, c1, c2)


def random_meshes(rng, dim: int, N: int):
    """A family of per-level meshes with random local refinements (level 0 = level 1)."""
    base = interval_mesh(3) if dim == 1 else rectangle_mesh(2, 2)
    out = [base]
    for _ in range(N):
        m = out[-1]
        k = rng.integers(0, m.n_cells, size=max(1, m.n_cells // 3))
        out.append(refine(m, k) if rng.random() < 0.6 else m)
    out[0] = out[1]
    return out


def adjoint_gap(rng, kernel: KernelSpec, dim: int = 1, N: int = 3):
    part = TimePartition(np.sort(np.concatenate([[0.0, 1.0], rng.uniform(0.05, 0.95, N - 1)])))
    meshes = random_meshes(rng, dim, N)
    u = random_stfunction(rng, part, meshes)
    v = random_stfunction(rng, part, meshes)
    params = ElasticParams(0.5, 0.3) if dim == 2 else ElasticParams()
    b = evaluate_forms("B", u, v, kernel, params)
    bs = evaluate_forms("Bstar", u, v, kernel, params)
    scale = max(1.0, abs(b))
    return abs(b - bs) / scale


def kernel_contract():
    validate_kernel(KernelSpec.prony([(0.4, 1.0)]))
    try:
        validate_kernel(KernelSpec.prony([(1.2, 1.0)]))
        return False, "kappa >= 1 accepted"
    except NonContractiveKernel:
        pass
    K = KernelSpec.prony([(0.4, 1.0), (0.1, 3.0)])
    worst = 0.0
    for sn, sj in [((0.5, 0.75), (0.0, 0.25)), ((0.5, 0.75), (0.5, 0.75)), ((1.0, 1.5), (0.25, 1.0))]:
        w = slab_weights(K, sn, sj)
        for q in range(2):
            def f(s, t, q=q):
                phi = (s - sj[0]) / (sj[1] - sj[0])
                return float(K(t - s)) * (phi if q else 1 - phi) if s <= t else 0.0
            ref = integrate.dblquad(f, sn[0], sn[1], lambda t: sj[0], lambda t: min(sj[1], t),
                                    epsabs=1e-13, epsrel=1e-13)[0]
            worst = max(worst, abs(ref - w[q]))
    return worst < 1e-9, f"max slab-weight deviation {worst:.2e}"


def exact_reproduction():
    worst = 0.0
    for K in (KernelSpec.zero(), KernelSpec.prony([(0.4, 1.0)])):
        p = mms_linear(K)
        part = TimePartition.uniform(p.T, 4)
        sol = solve_primal(p, part, p.mesh(4))
        for s, c, t in zip(sol.spaces, sol.U1, part.nodes):
            worst = max(worst, np.abs(c - s.nodal_free(p.exact_u1, t)).max())
    return worst < 1e-9, f"max nodal error {worst:.2e}"


def run_suites(cfg=None):
    rng = np.random.default_rng(12345)
    out = []
    ok, msg = kernel_contract()
    out.append(("kernel_contract", ok, msg))
    gap = max(adjoint_gap(rng, K, d) for K in (KernelSpec.zero(), KernelSpec.prony([(0.4, 1.0)])) for d in (1, 2))
    out.append(("adjoint_identity", gap < 1e-10, f"max relative |B - B*| {gap:.2e}"))
    p = mms_smooth(KernelSpec.prony([(0.4, 1.0)]))
    sol = solve_primal(p, TimePartition.uniform(1.0, 4), p.mesh(4))
    g = galerkin_residual(sol)
    out.append(("galerkin_orthogonality", g < 1e-10, f"relative residual {g:.2e}"))
    ok, msg = exact_reproduction()
    out.append(("exact_reproduction", ok, msg))
    return out
