"""Hierarchical simplex meshes (intervals in 1D, triangles in 2D).

Every mesh is a set of leaves of one refinement forest.  Vertices carry
global ids in the forest, so functions on different meshes of the same
forest can be compared node by node: a vertex created by bisecting the edge
(p, q) remembers its parents, which is all that is needed for prolongation
and for hanging-node constraints.

Triangles are stored as (a, b, c) with refinement edge (a, b) and newest
vertex c.  Bisection at m = mid(a, b) gives children (c, a, m) and (b, c, m).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import count

import numpy as np


class MeshError(ValueError):
    pass


class UnrelatedMeshes(MeshError):
    pass


class DegenerateCell(MeshError):
    pass


def _ekey(a, b):
    return (a, b) if a < b else (b, a)


_forest_ids = count()


class Forest:
    """Refinement forest shared by all meshes of one family."""

    def __init__(self, dim, coords, cells, boundary_tags):
        self.dim = dim
        self.uid = next(_forest_ids)
        self._coords = [np.asarray(x, dtype=float).reshape(dim) for x in coords]
        self.cells = [tuple(int(v) for v in c) for c in cells]
        self.parent = [-1] * len(self.cells)
        self.children = [None] * len(self.cells)
        self.level = [0] * len(self.cells)
        self.edge_mid = {}
        self.vparents = {}
        # 2D: edge key -> tag; 1D: vertex id -> tag
        self.btag = dict(boundary_tags)
        self._meshes = {}
        self._coords_arr = None

    @property
    def coords(self):
        if self._coords_arr is None or len(self._coords_arr) != len(self._coords):
            self._coords_arr = np.array(self._coords)
        return self._coords_arr

    def _new_vertex(self, x):
        self._coords.append(np.asarray(x, dtype=float))
        return len(self._coords) - 1

    def midpoint(self, a, b):
        key = _ekey(a, b)
        m = self.edge_mid.get(key)
        if m is None:
            m = self._new_vertex(0.5 * (self._coords[a] + self._coords[b]))
            self.edge_mid[key] = m
            self.vparents[m] = key
            tag = self.btag.get(key) if self.dim == 2 else None
            if tag is not None:
                self.btag[_ekey(a, m)] = tag
                self.btag[_ekey(m, b)] = tag
        return m

    def bisect(self, cid):
        ch = self.children[cid]
        if ch is not None:
            return ch
        if self.dim == 1:
            a, b = self.cells[cid]
            m = self.midpoint(a, b)
            new = [(a, m), (m, b)]
        else:
            a, b, c = self.cells[cid]
            m = self.midpoint(a, b)
            new = [(c, a, m), (b, c, m)]
        ids = []
        for cell in new:
            self.cells.append(cell)
            self.parent.append(cid)
            self.children.append(None)
            self.level.append(self.level[cid] + 1)
            ids.append(len(self.cells) - 1)
        self.children[cid] = tuple(ids)
        return self.children[cid]

    def ref_edge(self, cid):
        c = self.cells[cid]
        return _ekey(c[0], c[1])

    def cell_edges(self, cid):
        a, b, c = self.cells[cid]
        return (_ekey(a, b), _ekey(b, c), _ekey(c, a))

    def ancestors(self, cid):
        out = []
        p = self.parent[cid]
        while p >= 0:
            out.append(p)
            p = self.parent[p]
        return out

    def mesh(self, cells) -> "Mesh":
        """Canonical (interned) mesh object for a leaf set."""
        arr = np.unique(np.asarray(list(cells), dtype=np.int64))
        key = arr.tobytes()
        m = self._meshes.get(key)
        if m is None:
            m = Mesh(self, arr)
            self._meshes[key] = m
        return m


class Mesh:
    """A leaf set of a forest with derived geometry.  Immutable."""

    _ids = count()

    def __init__(self, forest: Forest, cells: np.ndarray):
        self.forest = forest
        self.cells = cells
        self.uid = next(Mesh._ids)
        self._cache = {}

    def __repr__(self):
        return f"Mesh(dim={self.dim}, cells={self.n_cells}, vertices={self.n_vertices})"

    @property
    def dim(self):
        return self.forest.dim

    @property
    def n_cells(self):
        return len(self.cells)

    @cached_property
    def cell_global(self) -> np.ndarray:
        return np.array([self.forest.cells[c] for c in self.cells], dtype=np.int64)

    @cached_property
    def vertices(self) -> np.ndarray:
        return np.unique(self.cell_global)

    @property
    def n_vertices(self):
        return len(self.vertices)

    @cached_property
    def vindex(self) -> dict:
        return {int(v): i for i, v in enumerate(self.vertices)}

    @cached_property
    def cell_vertices(self) -> np.ndarray:
        return np.searchsorted(self.vertices, self.cell_global)

    @cached_property
    def points(self) -> np.ndarray:
        return self.forest.coords[self.vertices]

    @cached_property
    def cell_index(self) -> dict:
        return {int(c): i for i, c in enumerate(self.cells)}

    @cached_property
    def measure(self) -> np.ndarray:
        x = self.points[self.cell_vertices]
        if self.dim == 1:
            m = x[:, 1, 0] - x[:, 0, 0]
            m = np.abs(m)
        else:
            d1 = x[:, 1] - x[:, 0]
            d2 = x[:, 2] - x[:, 0]
            m = 0.5 * np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        if np.any(m <= 0):
            raise DegenerateCell("mesh contains a cell of zero measure")
        return m

    @cached_property
    def h(self) -> np.ndarray:
        """Cell diameters."""
        x = self.points[self.cell_vertices]
        if self.dim == 1:
            return np.abs(x[:, 1, 0] - x[:, 0, 0])
        e = [np.linalg.norm(x[:, i] - x[:, (i + 1) % 3], axis=1) for i in range(3)]
        return np.max(e, axis=0)

    @cached_property
    def rho(self) -> np.ndarray:
        """Inradius (1D: half length)."""
        if self.dim == 1:
            return 0.5 * self.h
        x = self.points[self.cell_vertices]
        per = sum(np.linalg.norm(x[:, i] - x[:, (i + 1) % 3], axis=1) for i in range(3))
        return 2.0 * self.measure / per

    @cached_property
    def edges(self) -> dict:
        """Edge key (global ids) -> list of (local cell index, local side)."""
        out = {}
        cg = self.cell_global
        if self.dim == 1:
            for k, (a, b) in enumerate(cg):
                out.setdefault(int(a), []).append((k, 0))
                out.setdefault(int(b), []).append((k, 1))
            return out
        for k, tri in enumerate(cg):
            for s in range(3):
                # side s is opposite vertex s
                key = _ekey(int(tri[(s + 1) % 3]), int(tri[(s + 2) % 3]))
                out.setdefault(key, []).append((k, s))
        return out

    @cached_property
    def hanging(self) -> dict:
        """Hanging vertex (global id) -> parent edge (global ids)."""
        if self.dim == 1:
            return {}
        out = {}
        edges = self.edges
        for v in self.vertices:
            par = self.forest.vparents.get(int(v))
            if par is not None and par in edges:
                out[int(v)] = par
        return out

    @cached_property
    def boundary_facets(self) -> list:
        """List of (cell index, side, tag) for facets on the domain boundary."""
        out = []
        bt = self.forest.btag
        for key, lst in self.edges.items():
            tag = bt.get(key)
            if tag is None:
                continue
            for k, s in lst:
                out.append((k, s, tag))
        return sorted(out)

    @cached_property
    def dirichlet_vertices(self) -> np.ndarray:
        vs = set()
        bt = self.forest.btag
        for key, lst in self.edges.items():
            if bt.get(key) == "D":
                if self.dim == 1:
                    vs.add(key)
                else:
                    vs.update(key)
        return np.array(sorted(vs), dtype=np.int64)

    def ancestor_map(self, finer: "Mesh") -> np.ndarray:
        """For each cell of `finer`, the local index of the cell of self containing it."""
        idx = self.cell_index
        out = np.empty(finer.n_cells, dtype=np.int64)
        for i, c in enumerate(finer.cells):
            c = int(c)
            while c not in idx:
                c = self.forest.parent[c]
                if c < 0:
                    raise UnrelatedMeshes("cell is not contained in the coarser mesh")
            out[i] = idx[c]
        return out

    @cached_property
    def neighbors(self) -> list:
        """Cells sharing at least one vertex (the patch S_K, including K)."""
        v2c = [[] for _ in range(self.n_vertices)]
        for k, cv in enumerate(self.cell_vertices):
            for v in cv:
                v2c[v].append(k)
        # hanging vertices also touch the big cell whose edge they lie on
        for m, (p, q) in self.hanging.items():
            for k, _ in self.edges[_ekey(p, q)]:
                v2c[self.vindex[m]].append(k)
        out = []
        for k, cv in enumerate(self.cell_vertices):
            s = set()
            for v in cv:
                s.update(v2c[v])
            out.append(sorted(s))
        return out

    def boundary_measure(self, tag):
        tot = 0.0
        for k, s, t in self.boundary_facets:
            if t == tag:
                tot += facet_geometry(self, k, s)[2]
        return tot


def facet_geometry(mesh: Mesh, k: int, side: int):
    """(endpoint coordinates, outward unit normal, measure) of a cell side."""
    x = mesh.points[mesh.cell_vertices[k]]
    if mesh.dim == 1:
        p = x[side]
        n = np.array([-1.0]) if side == 0 else np.array([1.0])
        if x[1, 0] < x[0, 0]:
            n = -n
        return (p, p), n, 1.0
    a, b = x[(side + 1) % 3], x[(side + 2) % 3]
    t = b - a
    L = float(np.hypot(*t))
    n = np.array([t[1], -t[0]]) / L
    if np.dot(n, x[side] - a) > 0:
        n = -n
    return (a, b), n, L


# --------------------------------------------------------------------------
# constructors


def interval_mesh(n, a=0.0, b=1.0, left="D", right="N") -> Mesh:
    """Uniform 1D mesh with boundary tags on the two end points."""
    xs = np.linspace(a, b, n + 1)
    cells = [(i, i + 1) for i in range(n)]
    tags = {0: left, n: right}
    forest = Forest(1, xs[:, None], cells, tags)
    return forest.mesh(range(n))


def rectangle_mesh(nx, ny, lx=1.0, ly=1.0, tags=None) -> Mesh:
    """Structured triangulation of [0,lx]x[0,ly]; tags maps side name -> 'D'/'N'."""
    tags = {"left": "D", "right": "N", "bottom": "N", "top": "N", **(tags or {})}
    xs = np.linspace(0, lx, nx + 1)
    ys = np.linspace(0, ly, ny + 1)
    vid = lambda i, j: j * (nx + 1) + i
    coords = [(x, y) for y in ys for x in xs]
    cells = []
    for j in range(ny):
        for i in range(nx):
            v00, v10, v01, v11 = vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1)
            # diagonal is the refinement edge of both halves
            cells.append((v10, v01, v00))
            cells.append((v01, v10, v11))
    bt = {}
    for i in range(nx):
        bt[_ekey(vid(i, 0), vid(i + 1, 0))] = tags["bottom"]
        bt[_ekey(vid(i, ny), vid(i + 1, ny))] = tags["top"]
    for j in range(ny):
        bt[_ekey(vid(0, j), vid(0, j + 1))] = tags["left"]
        bt[_ekey(vid(nx, j), vid(nx, j + 1))] = tags["right"]
    forest = Forest(2, coords, cells, bt)
    return forest.mesh(range(len(cells)))


def equilateral_mesh(n, tags="D") -> Mesh:
    """Triangle of side 1 split into n^2 equilateral triangles."""
    h = 1.0 / n
    s3 = np.sqrt(3.0) / 2
    vid = {}
    coords = []
    for j in range(n + 1):
        for i in range(n + 1 - j):
            vid[i, j] = len(coords)
            coords.append((i * h + 0.5 * j * h, j * h * s3))
    cells = []
    for j in range(n):
        for i in range(n - j):
            cells.append((vid[i + 1, j], vid[i, j + 1], vid[i, j]))
            if i + j < n - 1:
                cells.append((vid[i, j + 1], vid[i + 1, j], vid[i + 1, j + 1]))
    bt = {}
    for i in range(n):
        bt[_ekey(vid[i, 0], vid[i + 1, 0])] = tags
        bt[_ekey(vid[0, i], vid[0, i + 1])] = tags
        bt[_ekey(vid[n - i, i], vid[n - i - 1, i + 1])] = tags
    forest = Forest(2, coords, cells, bt)
    return forest.mesh(range(len(cells)))


# --------------------------------------------------------------------------
# refinement


def refine(mesh: Mesh, marked, conforming: bool = True) -> Mesh:
    """Bisect the marked cells (local indices) with closure.

    1D: plain bisection.  2D: newest-vertex bisection.  With conforming=True
    the closure removes all hanging nodes; otherwise it only enforces at most
    one hanging node per edge.
    """
    marked = sorted({int(k) for k in marked})
    if not marked:
        return mesh
    f = mesh.forest
    leaves = set(int(c) for c in mesh.cells)
    targets = [int(mesh.cells[k]) for k in marked]
    if f.dim == 1:
        for c in targets:
            leaves.remove(c)
            leaves.update(f.bisect(c))
        return f.mesh(leaves)
    if conforming:
        return f.mesh(_nvb_conforming(f, leaves, targets))
    return f.mesh(_nvb_one_irregular(f, leaves, targets))


def _nvb_conforming(f: Forest, leaves: set, targets: list) -> set:
    edge_cells = {}
    for c in leaves:
        for e in f.cell_edges(c):
            edge_cells.setdefault(e, set()).add(c)
    marked = set()
    stack = [f.ref_edge(c) for c in targets]
    while stack:
        e = stack.pop()
        if e in marked:
            continue
        marked.add(e)
        for c in edge_cells.get(e, ()):
            r = f.ref_edge(c)
            if r not in marked:
                stack.append(r)
    work = [c for c in leaves if f.ref_edge(c) in marked]
    while work:
        c = work.pop()
        if c not in leaves or f.ref_edge(c) not in marked:
            continue
        leaves.remove(c)
        for ch in f.bisect(c):
            leaves.add(ch)
            if f.ref_edge(ch) in marked:
                work.append(ch)
    return leaves


def _nvb_one_irregular(f: Forest, leaves: set, targets: list) -> set:
    for c in targets:
        leaves.remove(c)
        leaves.update(f.bisect(c))
    while True:
        verts = set()
        for c in leaves:
            verts.update(f.cells[c])
        bad = []
        for c in leaves:
            for a, b in f.cell_edges(c):
                m = f.edge_mid.get((a, b))
                if m is None or m not in verts:
                    continue
                if f.edge_mid.get(_ekey(a, m)) in verts or f.edge_mid.get(_ekey(m, b)) in verts:
                    bad.append(c)
                    break
        if not bad:
            return leaves
        for c in bad:
            leaves.remove(c)
            leaves.update(f.bisect(c))


def refine_uniform(mesh: Mesh, times: int = 1) -> Mesh:
    """Uniform refinement: every edge halved (two NVB generations in 2D)."""
    for _ in range(times):
        if mesh.dim == 1:
            mesh = refine(mesh, range(mesh.n_cells))
        else:
            mesh = refine(mesh, range(mesh.n_cells))
            mesh = refine(mesh, range(mesh.n_cells))
    return mesh


def coarsen_to(mesh: Mesh, level: int) -> Mesh:
    """Replace every cell by its ancestor at the given forest level (if deeper)."""
    f = mesh.forest
    out = set()
    for c in mesh.cells:
        c = int(c)
        while f.level[c] > level:
            c = f.parent[c]
        out.add(c)
    return f.mesh(out)


# --------------------------------------------------------------------------
# union (overlay) meshes


def overlay(*meshes: Mesh) -> Mesh:
    """Mutually finest mesh of meshes from one forest."""
    f = meshes[0].forest
    for m in meshes[1:]:
        if m.forest is not f:
            raise UnrelatedMeshes("meshes do not share a refinement forest")
    if all(m is meshes[0] for m in meshes):
        return meshes[0]
    cells = set()
    for m in meshes:
        cells.update(int(c) for c in m.cells)
    anc = set()
    for c in cells:
        p = f.parent[c]
        while p >= 0 and p not in anc:
            anc.add(p)
            p = f.parent[p]
    return f.mesh(cells - anc)


@dataclass
class UnionMesh:
    mesh: Mesh
    parents: tuple

    @property
    def h(self):
        return self.mesh.h

    @property
    def h_min(self):
        return float(self.mesh.h.min())

    @property
    def h_max(self):
        return float(self.mesh.h.max())


def union_mesh(a: Mesh, b: Mesh) -> UnionMesh:
    return UnionMesh(overlay(a, b), (a, b))


# --------------------------------------------------------------------------
# quality


@dataclass
class MeshQuality:
    c0: float
    delta_T: list = field(default_factory=list)
    delta_F: float = 0.0


def delta_T(mesh: Mesh) -> float:
    h2 = mesh.h**2
    worst = 0.0
    for k, nb in enumerate(mesh.neighbors):
        worst = max(worst, float(np.max(np.abs(1.0 - h2[nb] / h2[k]))))
    return worst


def quality(meshes) -> MeshQuality:
    meshes = list(meshes)
    if not meshes:
        raise MeshError("quality needs at least one mesh")
    if meshes[0].dim == 1:
        c0 = 1.0
    else:
        c0 = max(float(np.max(m.h / m.rho)) for m in meshes)
    dts = [delta_T(m) for m in meshes]
    return MeshQuality(c0, dts, max(dts))
