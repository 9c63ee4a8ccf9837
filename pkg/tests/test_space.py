import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from viscofem.mesh import UnrelatedMeshes, coarsen_to, rectangle_mesh, refine, refine_uniform
from viscofem.space import prolongation, space_for, transfer

LIN = lambda x: np.stack([1 + 2 * x[:, 0] - x[:, 1], x[:, 1]], 1)


@settings(max_examples=15, deadline=None)
@given(st.lists(st.integers(0, 7), min_size=1, max_size=4))
def test_hanging_constraints_keep_linear_fields(marks):
    m = refine(refine(rectangle_mesh(2, 2), marks, conforming=False), [0], conforming=False)
    sp = space_for(m, dirichlet=False)
    full = sp.expand(sp.nodal_free(LIN))
    assert full == pytest.approx(sp.interpolate(LIN), abs=1e-13)
    # hanging vertices are not degrees of freedom
    assert sp.n_free == 2 * (m.n_vertices - len(m.hanging))


def test_dirichlet_vertices_are_zero():
    m = rectangle_mesh(3, 3)
    sp = space_for(m)
    full = sp.expand(np.ones(sp.n_free)).reshape(-1, 2)
    left = np.isclose(m.points[:, 0], 0.0)
    assert np.all(full[left] == 0.0) and np.all(full[~left] == 1.0)


def test_prolongation_and_transfer():
    m = rectangle_mesh(2, 2)
    fine = refine_uniform(refine(m, [3]))
    src, dst = space_for(m, False), space_for(fine, False)
    c = src.nodal_free(LIN)
    assert prolongation(src, fine) @ c == pytest.approx(dst.interpolate(LIN), abs=1e-13)
    assert transfer(src, dst, c) == pytest.approx(dst.nodal_free(LIN), abs=1e-13)
    # back to the coarse mesh by nodal interpolation
    assert transfer(dst, src, transfer(src, dst, c)) == pytest.approx(c, abs=1e-13)
    assert set(coarsen_to(fine, 0).cells) == set(m.cells)


def test_unrelated_forests_are_rejected():
    a, b = rectangle_mesh(2, 2), rectangle_mesh(2, 2)
    with pytest.raises(UnrelatedMeshes):
        prolongation(space_for(a), b)
