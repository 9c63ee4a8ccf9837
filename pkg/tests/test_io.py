import numpy as np
import pytest

from viscofem.io import (
    fmt,
    load_checkpoint,
    read_csv,
    read_mesh,
    save_checkpoint,
    solution_fields,
    write_csv,
    write_mesh,
    write_vtk,
)
from viscofem.kernel import KernelSpec
from viscofem.mesh import interval_mesh, refine
from viscofem.primal import solve_primal
from viscofem.problems import mms_smooth
from viscofem.timegrid import TimePartition


def test_fmt_round_trips_floats():
    for x in (0.1, 1 / 3, -2.5e-300, 1e17):
        assert float(fmt(x)) == x
    assert fmt(None) == "" and fmt(np.int64(3)) == "3"


def test_csv_round_trip(tmp_path):
    path = tmp_path / "a" / "t.csv"
    write_csv(path, ["a", "b"], [[1, 0.5], [2, None], ["x", 1e-20]])
    head, rows = read_csv(path)
    assert head == ["a", "b"]
    assert rows == [["1", "0.5"], ["2", ""], ["x", "9.9999999999999995e-21"]]


@pytest.mark.parametrize("dim", [1, 2])
def test_mesh_round_trip(tmp_path, dim):
    p = mms_smooth(dim=dim)
    m = refine(p.mesh(2), [0])
    write_mesh(tmp_path / "m.txt", m)
    r = read_mesh(tmp_path / "m.txt")
    assert r.n_cells == m.n_cells
    assert np.array_equal(r.points, m.points)
    assert np.array_equal(r.dirichlet_vertices, m.dirichlet_vertices)
    assert r.boundary_measure("N") == pytest.approx(m.boundary_measure("N"))


def test_read_mesh_rejects_other_files(tmp_path):
    (tmp_path / "x.txt").write_text("something else\n")
    with pytest.raises(ValueError):
        read_mesh(tmp_path / "x.txt")


def test_vtk_layout(tmp_path):
    m = mms_smooth(dim=2).mesh(2)
    write_vtk(tmp_path / "s.vtk", m, {"u": np.ones((m.n_vertices, 2))}, {"c": np.arange(m.n_cells)})
    text = (tmp_path / "s.vtk").read_text().splitlines()
    assert text[4] == f"POINTS {m.n_vertices} double"
    assert f"CELLS {m.n_cells} {4 * m.n_cells}" in text
    assert "VECTORS u double" in text and "SCALARS c double 1" in text
    assert text[text.index("VECTORS u double") + 1] == "1 1 0"


def test_checkpoint_round_trip(tmp_path):
    p = mms_smooth(KernelSpec.prony([(0.4, 1.0)]))
    sol = solve_primal(p, TimePartition.uniform(1.0, 2), interval_mesh(4))
    save_checkpoint(tmp_path / "c.npz", sol)
    c = load_checkpoint(tmp_path / "c.npz")
    assert np.array_equal(c["nodes"], sol.partition.nodes)
    assert len(c["levels"]) == 3
    u1, _ = solution_fields(sol, 2)
    assert np.array_equal(c["levels"][2]["u1"], sol.U1[2])
    assert u1.shape == (5, 1) and u1[0, 0] == 0.0
    assert "prony" in c["kernel"]
