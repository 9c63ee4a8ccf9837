import numpy as np
import pytest

from viscofem.assembly import ElasticParams
from viscofem.dual import (
    DualData,
    GoalFunctional,
    dual_norms,
    energy_trace,
    enriched_meshes,
    goal_error,
    solve_dual,
    stability_report,
)
from viscofem.kernel import KernelSpec
from viscofem.mesh import interval_mesh, rectangle_mesh
from viscofem.primal import solve_primal
from viscofem.problems import goal_weight, mms_linear
from viscofem.timegrid import TimePartition

W = goal_weight("sin", 1)
PARAMS = ElasticParams()


def test_zero_data_gives_zero_dual():
    d = solve_dual(DualData(), TimePartition.uniform(1.0, 3), interval_mesh(4), KernelSpec.prony([(0.4, 1.0)]),
                   PARAMS)
    assert np.all(dual_norms(d, PARAMS) == 0.0)
    assert stability_report(d, PARAMS).ratio == 0.0


def test_zero_kernel_energy_is_conserved():
    d = solve_dual(DualData(z1T=W, z2T=lambda x: x[:, 0] ** 2), TimePartition.uniform(2.0, 13), interval_mesh(10),
                   KernelSpec.zero(), PARAMS, 0, 0)
    e = energy_trace(d, PARAMS)
    assert np.ptp(e) <= 1e-9 * e.max()


def test_z1_is_minus_time_derivative_of_z2():
    # with j2 = 0 the velocity equation of the scheme gives the relation exactly for slab means
    part = TimePartition(np.array([0.0, 0.1, 0.35, 0.5, 1.0]))
    d = solve_dual(DualData(z1T=W), part, interval_mesh(16), KernelSpec.prony([(0.4, 1.0)]), PARAMS, 0, 0)
    z = d.z
    for n, k in enumerate(part.k, start=1):
        z1m = 0.5 * (z.c1[n] + z.c1[n - 1])
        assert np.abs(z1m + (z.c2[n] - z.c2[n - 1]) / k).max() <= 1e-12 * np.abs(z1m).max()


@pytest.mark.parametrize("K", [KernelSpec.prony([(0.4, 1.0)]), KernelSpec.prony([(0.2, 0.5), (0.2, 4.0)])])
def test_no_gronwall_growth(K):
    ratios = []
    for T in (1.0, 2.0, 4.0):
        d = solve_dual(DualData(z1T=W, z2T=W), TimePartition.uniform(T, int(8 * T)), interval_mesh(8), K, PARAMS,
                       0, 0)
        ratios.append(stability_report(d, PARAMS).ratio)
    assert max(ratios) <= 1.2 * min(ratios)


def test_enriched_meshes():
    m = rectangle_mesh(2, 2)
    part = TimePartition.uniform(1.0, 3)
    fine, ms = enriched_meshes([m] * 4, part, 1, 2)
    assert fine.N == 12 and len(ms) == 13
    assert ms[0].n_cells == 4 * m.n_cells
    assert len({id(x) for x in ms}) == 1


def test_goal_presets():
    assert GoalFunctional(weight=W).dual_data().z1T is W
    with pytest.raises(ValueError):
        GoalFunctional().dual_data()
    with pytest.raises(ValueError):
        GoalFunctional(preset="general").dual_data()
    with pytest.raises(ValueError):
        GoalFunctional(preset="nope").dual_data()


def test_goal_error_vanishes_for_exact_solution():
    p = mms_linear(KernelSpec.prony([(0.4, 1.0)]))
    sol = solve_primal(p, TimePartition.uniform(1.0, 3), p.mesh(3))
    assert abs(goal_error(sol, W, p.exact_u1)) < 1e-12
    # (x, sin(pi x)) = 1/pi on (0, 1), at T = 1
    assert goal_error(sol, W, lambda x, t: 0 * x[:, 0]) == pytest.approx(1 / np.pi, rel=1e-6)
