import numpy as np
import pytest
from hypothesis import given, strategies as st

from viscofem.assembly import (
    ElasticParams,
    assemble_forms,
    discrete_norm,
    mass_full,
    neumann_full,
    stiffness_full,
)
from viscofem.mesh import interval_mesh, rectangle_mesh, refine
from viscofem.space import space_for


@pytest.mark.parametrize("mu0,lam0", [(0.5, 0.0), (1.0, 1.0), (0.3, 2.0)])
def test_hand_assembled_1d_stiffness(mu0, lam0):
    p = ElasticParams(mu0, lam0)
    S = stiffness_full(interval_mesh(2), p).toarray()
    assert S[1, 1] == pytest.approx(4 * p.E)
    assert S[0, 1] == pytest.approx(-2 * p.E)


def test_rigid_motions_in_stiffness_kernel():
    m = refine(rectangle_mesh(3, 2), [1, 4])
    S = stiffness_full(m, ElasticParams(0.7, 1.3))
    x, y = m.points[:, 0], m.points[:, 1]
    for field in (np.stack([np.ones_like(x), 0 * x], 1), np.stack([0 * x, np.ones_like(x)], 1),
                  np.stack([-y, x], 1)):
        assert np.abs(S @ field.ravel()).max() < 1e-12


def test_mass_integrates_area():
    m = rectangle_mesh(2, 3, lx=2.0)
    M = mass_full(m, 2)
    ones = np.zeros(2 * m.n_vertices)
    ones[0::2] = 1.0
    assert ones @ M @ ones == pytest.approx(2.0)


def test_discrete_norms():
    sp = space_for(interval_mesh(4), dirichlet=False)
    assert discrete_norm(sp, np.zeros(sp.n_free), 0) == 0.0
    assert discrete_norm(sp, np.ones(sp.n_free), 0) == pytest.approx(1.0)
    vals = []
    for n in (16, 64, 256):
        s = space_for(interval_mesh(n))
        vals.append(discrete_norm(s, s.nodal_free(lambda x: np.sin(np.pi * x[:, 0])), 1, ElasticParams(0.5, 0.0)))
    assert abs(vals[-1] - np.pi / np.sqrt(2)) < abs(vals[0] - np.pi / np.sqrt(2))
    assert vals[-1] == pytest.approx(np.pi / np.sqrt(2), rel=1e-4)


def test_neumann_load_is_boundary_length():
    m = rectangle_mesh(2, 2, tags={"top": "D", "bottom": "D"})
    b = neumann_full(m, 2, lambda x: np.stack([np.ones(len(x)), np.zeros(len(x))], 1))
    assert b[0::2].sum() == pytest.approx(1.0)
    assert b[1::2].sum() == pytest.approx(0.0)


@given(st.integers(0, 2**31 - 1))
def test_operator_symmetry(seed):
    rng = np.random.default_rng(seed)
    m = refine(rectangle_mesh(2, 2), rng.integers(0, 8, size=2), conforming=False)
    ops = assemble_forms(space_for(m), ElasticParams(0.5, 0.3))
    for A in (ops.M, ops.S):
        assert abs(A - A.T).max() < 1e-13
        v = rng.standard_normal(A.shape[0])
        assert v @ A @ v > 0
