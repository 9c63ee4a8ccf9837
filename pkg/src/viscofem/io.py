"""Checkpoints, CSV tables, legacy VTK and a plain-text mesh format."""
from __future__ import annotations

import csv
import os

import numpy as np

from .mesh import Forest, Mesh


def fmt(x) -> str:
    """17 significant digits so reruns are byte identical."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def write_csv(path, header, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in r])


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


# ------------------------------------------------------------------ meshes


def write_mesh(path, mesh: Mesh):
    """Text format: header, vertex coordinates, cells (global ids), boundary tags."""
    pts = mesh.points
    with open(path, "w") as fh:
        fh.write(f"viscofem-mesh 1 dim {mesh.dim}\n")
        fh.write(f"vertices {len(pts)}\n")
        for p in pts:
            fh.write(" ".join(fmt(c) for c in p) + "\n")
        fh.write(f"cells {mesh.n_cells}\n")
        for cv in mesh.cell_vertices:
            fh.write(" ".join(str(int(v)) for v in cv) + "\n")
        tags = []
        for key, tag in mesh.forest.btag.items():
            vs = (key,) if mesh.dim == 1 else key
            if all(v in mesh.vindex for v in vs):
                tags.append(([mesh.vindex[v] for v in vs], tag))
        fh.write(f"boundary {len(tags)}\n")
        for vs, tag in tags:
            fh.write(" ".join(str(v) for v in vs) + f" {tag}\n")


def read_mesh(path) -> Mesh:
    """Read a text mesh as the root of a new forest."""
    with open(path) as fh:
        lines = [ln.split() for ln in fh if ln.strip()]
    if lines[0][0] != "viscofem-mesh":
        raise ValueError("not a viscofem mesh file")
    dim = int(lines[0][3])
    nv = int(lines[1][1])
    pts = np.array([[float(c) for c in ln] for ln in lines[2:2 + nv]])
    i = 2 + nv
    nc = int(lines[i][1])
    cells = np.array([[int(v) for v in ln] for ln in lines[i + 1:i + 1 + nc]])
    i += 1 + nc
    nb = int(lines[i][1])
    tags = {}
    for ln in lines[i + 1:i + 1 + nb]:
        vs = tuple(int(v) for v in ln[:-1])
        key = vs[0] if dim == 1 else tuple(sorted(vs))
        tags[key] = ln[-1]
    f = Forest(dim, pts, cells, tags)
    return f.mesh(range(len(cells)))


# ------------------------------------------------------------------- vtk


def write_vtk(path, mesh: Mesh, point_data: dict | None = None, cell_data: dict | None = None):
    """Legacy ASCII unstructured grid.  Vector fields are padded to 3 components."""
    pts = mesh.points
    with open(path, "w") as fh:
        fh.write("# vtk DataFile Version 3.0\nviscofem\nASCII\nDATASET UNSTRUCTURED_GRID\n")
        fh.write(f"POINTS {len(pts)} double\n")
        for p in pts:
            q = list(p) + [0.0] * (3 - len(p))
            fh.write(" ".join(fmt(c) for c in q) + "\n")
        nv = mesh.dim + 1
        fh.write(f"CELLS {mesh.n_cells} {mesh.n_cells * (nv + 1)}\n")
        for cv in mesh.cell_vertices:
            fh.write(f"{nv} " + " ".join(str(int(v)) for v in cv) + "\n")
        ctype = 3 if mesh.dim == 1 else 5
        fh.write(f"CELL_TYPES {mesh.n_cells}\n" + f"{ctype}\n" * mesh.n_cells)
        if point_data:
            fh.write(f"POINT_DATA {len(pts)}\n")
            for name, vals in point_data.items():
                _vtk_field(fh, name, np.asarray(vals, dtype=float), len(pts))
        if cell_data:
            fh.write(f"CELL_DATA {mesh.n_cells}\n")
            for name, vals in cell_data.items():
                _vtk_field(fh, name, np.asarray(vals, dtype=float), mesh.n_cells)


def _vtk_field(fh, name, vals, n):
    vals = vals.reshape(n, -1)
    if vals.shape[1] == 1:
        fh.write(f"SCALARS {name} double 1\nLOOKUP_TABLE default\n")
        fh.write("\n".join(fmt(v) for v in vals[:, 0]) + "\n")
    else:
        fh.write(f"VECTORS {name} double\n")
        for row in vals:
            q = list(row) + [0.0] * (3 - len(row))
            fh.write(" ".join(fmt(c) for c in q) + "\n")


# ------------------------------------------------------------- checkpoints


def save_checkpoint(path, sol):
    """Time nodes, per-level meshes (as leaf sets of one forest) and coefficients."""
    f = sol.spaces[0].mesh.forest
    arrays = {
        "nodes": sol.partition.nodes,
        "coords": f.coords,
        "dim": np.array([f.dim]),
        "dirichlet": np.array([sol.spaces[0].dirichlet]),
        "params": np.array([sol.params.mu0, sol.params.lambda0]),
        "kernel": np.array([repr(sol.kernel)]),
    }
    for i, (s, u1, u2) in enumerate(zip(sol.spaces, sol.U1, sol.U2)):
        arrays[f"mesh_{i}"] = s.mesh.cell_vertices.astype(np.int64)
        arrays[f"verts_{i}"] = s.mesh.vertices.astype(np.int64)
        arrays[f"u1_{i}"] = u1
        arrays[f"u2_{i}"] = u2
    np.savez_compressed(path, **arrays)


def load_checkpoint(path) -> dict:
    """Coefficients and nodal values per level: {'nodes', 'levels': [(points, cells, u1_full, u2_full)]}.

    Meshes are returned as plain arrays; the refinement forest is not rebuilt.
    """
    z = np.load(path, allow_pickle=False)
    nodes = z["nodes"]
    coords = z["coords"]
    levels = []
    for i in range(len(nodes)):
        verts = z[f"verts_{i}"]
        levels.append({
            "points": coords[verts], "cells": z[f"mesh_{i}"],
            "u1": z[f"u1_{i}"], "u2": z[f"u2_{i}"],
        })
    return {"nodes": nodes, "levels": levels, "params": z["params"], "kernel": str(z["kernel"][0])}


def solution_fields(sol, level: int):
    """Full nodal displacement and velocity at a time level."""
    s = sol.spaces[level]
    return s.expand(sol.U1[level]).reshape(-1, s.ncomp), s.expand(sol.U2[level]).reshape(-1, s.ncomp)
