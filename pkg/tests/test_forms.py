import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from viscofem.assembly import ElasticParams
from viscofem.forms import IncompatibleSlabbing, STFunction, evaluate_forms
from viscofem.kernel import KernelSpec
from viscofem.primal import SlabData, solve_primal
from viscofem.problems import mms_smooth
from viscofem.timegrid import TimePartition
from viscofem.verify import adjoint_gap, random_meshes, random_stfunction

KERNELS = [KernelSpec.zero(), KernelSpec.prony([(0.4, 1.0)]), KernelSpec.powerlaw(0.1, 0.6, 1.0)]


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from(KERNELS), st.sampled_from([1, 2]))
def test_adjoint_identity(seed, K, dim):
    assert adjoint_gap(np.random.default_rng(seed), K, dim) < 1e-10


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_second_variant_agrees_on_continuous_functions(seed):
    rng = np.random.default_rng(seed)
    part = TimePartition(np.array([0.0, 0.4, 1.0]))
    ms = random_meshes(rng, 1, 2)
    u, v = random_stfunction(rng, part, ms), random_stfunction(rng, part, ms)
    K, p = KernelSpec.prony([(0.3, 2.0)]), ElasticParams()
    b1 = evaluate_forms("B", u, v, K, p)
    assert evaluate_forms("B2", u, v, K, p) == pytest.approx(b1, rel=1e-10, abs=1e-12)


def test_bilinearity():
    rng = np.random.default_rng(1)
    part = TimePartition.uniform(1.0, 3)
    ms = random_meshes(rng, 2, 3)
    u, v = random_stfunction(rng, part, ms), random_stfunction(rng, part, ms)
    K, p = KernelSpec.prony([(0.4, 1.0)]), ElasticParams(0.5, 0.3)
    assert evaluate_forms("B", u.scaled(2.5), v, K, p) == pytest.approx(2.5 * evaluate_forms("B", u, v, K, p))
    assert evaluate_forms("B", u.scaled(0.0), v, K, p) == 0.0


def test_galerkin_identity_against_solver():
    p = mms_smooth(KernelSpec.prony([(0.4, 1.0)]))
    part = TimePartition.uniform(1.0, 3)
    sol = solve_primal(p, part, p.mesh(4))
    U = STFunction.from_solution(sol)
    rng = np.random.default_rng(0)
    v = random_stfunction(rng, part, [s.mesh for s in sol.spaces], kind="cont")
    # the test space is piecewise constant in time, so only the slab means of v matter
    vbar = STFunction(part.nodes, "pwc", v.spaces[1:], [0.5 * (a + b) for a, b in zip(v.c1, v.c1[1:])],
                      [0.5 * (a + b) for a, b in zip(v.c2, v.c2[1:])])
    lhs = evaluate_forms("B", U, vbar, p.kernel, p.params)
    rhs = evaluate_forms("L", v=vbar, data=p)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)


def test_zero_data_form():
    part = TimePartition.uniform(1.0, 2)
    ms = random_meshes(np.random.default_rng(2), 1, 2)
    v = random_stfunction(np.random.default_rng(3), part, ms)
    assert evaluate_forms("L", v=v, data=SlabData()) == 0.0


def test_coefficient_counts_are_checked():
    part = TimePartition.uniform(1.0, 2)
    ms = random_meshes(np.random.default_rng(2), 1, 2)
    v = random_stfunction(np.random.default_rng(3), part, ms)
    with pytest.raises(IncompatibleSlabbing):
        STFunction(part.nodes, "cont", v.spaces[:2], v.c1[:2], v.c2[:2])
    with pytest.raises(IncompatibleSlabbing):
        STFunction(part.nodes, "linear", v.spaces, v.c1, v.c2)
