import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from viscofem.mesh import (
    UnrelatedMeshes,
    coarsen_to,
    delta_T,
    equilateral_mesh,
    interval_mesh,
    overlay,
    quality,
    rectangle_mesh,
    refine,
    refine_uniform,
    union_mesh,
)
from viscofem.timegrid import PartitionError, TimePartition


def _area(m):
    return float(m.measure.sum())


def test_empty_marking_is_identity():
    m = rectangle_mesh(2, 2)
    assert refine(m, []) is m


def test_uniform_1d_halves_all_cells():
    m = interval_mesh(4)
    r = refine(m, range(m.n_cells))
    assert r.n_cells == 8
    assert np.allclose(r.h, 0.125)


def test_single_marked_triangle_closure():
    m = rectangle_mesh(4, 4)
    r = refine(m, [5])
    assert r.n_cells > m.n_cells
    assert not r.hanging
    assert _area(r) == pytest.approx(1.0)
    assert delta_T(r) <= 3.0


@settings(max_examples=15, deadline=None)
@given(st.lists(st.integers(0, 31), min_size=1, max_size=6), st.booleans())
def test_refinement_invariants(marks, conforming):
    m = rectangle_mesh(4, 4)
    r = refine(refine(m, marks, conforming), [0, 3], conforming)
    assert _area(r) == pytest.approx(1.0, abs=1e-12)
    assert np.all(r.measure > 0)
    if conforming:
        assert not r.hanging
    counts = {}
    for hv in r.hanging:
        counts[hv] = counts.get(hv, 0) + 1
    assert all(c == 1 for c in counts.values())


def test_uniform_2d_halves_edges():
    m = rectangle_mesh(2, 2)
    r = refine_uniform(m)
    assert r.n_cells == 4 * m.n_cells
    assert r.h.max() == pytest.approx(0.5 * m.h.max())


def test_union_meshes():
    m = rectangle_mesh(2, 2)
    u = union_mesh(m, m)
    assert u.mesh is m
    fine = refine(m, range(m.n_cells))
    assert set(overlay(m, fine).cells) == set(fine.cells)
    a, b = refine(m, [0]), refine(m, [7])
    ab = overlay(a, b)
    # leaf enumeration: each overlay cell is a leaf of a or of b, and both refinements survive
    assert set(ab.cells) <= set(a.cells) | set(b.cells)
    assert set(a.cells) - set(m.cells) <= set(ab.cells) | set(b.cells)
    assert ab.n_cells > max(a.n_cells, b.n_cells)
    assert _area(ab) == pytest.approx(1.0)
    assert union_mesh(a, b).h_max <= m.h.max()


def test_union_requires_common_forest():
    with pytest.raises(UnrelatedMeshes):
        overlay(rectangle_mesh(2, 2), rectangle_mesh(2, 2))


def test_ancestor_map_and_coarsening():
    m = interval_mesh(2)
    r = refine_uniform(m, 2)
    anc = m.ancestor_map(r)
    assert list(anc) == [0, 0, 0, 0, 1, 1, 1, 1]
    assert set(coarsen_to(r, 0).cells) == set(m.cells)


def test_equilateral_quality():
    q = quality([equilateral_mesh(3)])
    assert q.c0 == pytest.approx(2 * np.sqrt(3), rel=1e-10)
    assert quality([interval_mesh(3)]).c0 == 1.0


def test_boundary_tags_1d():
    m = interval_mesh(4)
    assert list(m.dirichlet_vertices) == [0]
    assert m.boundary_measure("N") == pytest.approx(1.0)


def test_time_partition():
    p = TimePartition.uniform(2.0, 4)
    assert p.N == 4 and p.T == 2.0
    assert p.slab(2) == (0.5, 1.0)
    assert np.allclose(p.halved().k, 0.25)
    assert np.allclose(p.reversed().nodes, p.nodes)
    assert p.locate(0.5) == 1 and p.locate(0.51) == 2
    for bad in ([0.0], [0.1, 1.0], [0.0, 0.5, 0.5, 1.0]):
        with pytest.raises(PartitionError):
            TimePartition(np.array(bad))
