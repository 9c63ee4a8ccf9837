"""Continuous P1 spaces with Dirichlet and hanging-node constraints.

Coefficients come in two layouts.  *Full* vectors hold one value per
(vertex, component), vertex-major.  *Free* vectors hold the unconstrained
unknowns only; ``C @ free`` expands to full values.
"""
from __future__ import annotations

from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .mesh import Mesh, UnrelatedMeshes, overlay


class FeSpace:
    def __init__(self, mesh: Mesh, dirichlet: bool = True):
        self.mesh = mesh
        self.dirichlet = dirichlet
        self.ncomp = 1 if mesh.dim == 1 else 2

    def __repr__(self):
        return f"FeSpace({self.mesh!r}, free={self.n_free})"

    @property
    def dim(self):
        return self.mesh.dim

    @property
    def n_full(self):
        return self.mesh.n_vertices * self.ncomp

    @cached_property
    def _vertex_constraints(self):
        mesh = self.mesh
        fixed = set(int(v) for v in mesh.dirichlet_vertices) if self.dirichlet else set()
        hanging = mesh.hanging
        free = [int(v) for v in mesh.vertices if int(v) not in fixed and int(v) not in hanging]
        col = {v: i for i, v in enumerate(free)}
        memo = {}

        def row(v):
            if v in memo:
                return memo[v]
            if v in fixed:
                r = {}
            elif v in col:
                r = {col[v]: 1.0}
            else:
                p, q = hanging[v]
                r = {}
                for w in (p, q):
                    for c, x in row(w).items():
                        r[c] = r.get(c, 0.0) + 0.5 * x
            memo[v] = r
            return r

        rows, cols, vals = [], [], []
        for i, v in enumerate(mesh.vertices):
            for c, x in row(int(v)).items():
                rows.append(i)
                cols.append(c)
                vals.append(x)
        Cv = sp.csr_matrix((vals, (rows, cols)), shape=(mesh.n_vertices, len(free)))
        return Cv, np.array(free, dtype=np.int64)

    @cached_property
    def C(self) -> sp.csr_matrix:
        Cv, _ = self._vertex_constraints
        return sp.kron(Cv, sp.identity(self.ncomp), format="csr")

    @property
    def free_vertices(self):
        return self._vertex_constraints[1]

    @property
    def n_free(self):
        return self.C.shape[1]

    def expand(self, free):
        return self.C @ free

    def zeros(self):
        return np.zeros(self.n_free)

    def interpolate(self, fn, t=None) -> np.ndarray:
        """Full nodal values of a callable fn(x[, t]) -> (n,) or (n, ncomp)."""
        x = self.mesh.points
        v = fn(x) if t is None else fn(x, t)
        return np.asarray(v, dtype=float).reshape(len(x), self.ncomp).ravel()

    def nodal_free(self, fn, t=None) -> np.ndarray:
        """Free coefficients taking nodal values at the free vertices."""
        full = self.interpolate(fn, t).reshape(-1, self.ncomp)
        idx = np.searchsorted(self.mesh.vertices, self.free_vertices)
        return full[idx].ravel()


_spaces = {}


def space_for(mesh: Mesh, dirichlet: bool = True) -> FeSpace:
    key = (mesh.uid, dirichlet)
    s = _spaces.get(key)
    if s is None:
        s = _spaces[key] = FeSpace(mesh, dirichlet)
    return s


def vertex_transfer(src: Mesh, dst: Mesh) -> sp.csr_matrix:
    """Nodal interpolation of P1 functions on src into the vertices of dst.

    Exact whenever dst is finer than src (or equal); in general it is the
    nodal interpolant of the src function on dst.
    """
    key = ("vt", dst.uid)
    cached = src._cache.get(key)
    if cached is not None:
        return cached
    f = src.forest
    if dst.forest is not f:
        raise UnrelatedMeshes("meshes do not share a refinement forest")
    sidx = src.vindex
    memo = {}

    def row(v):
        r = memo.get(v)
        if r is not None:
            return r
        if v in sidx:
            r = {sidx[v]: 1.0}
        else:
            par = f.vparents.get(v)
            if par is None:
                raise UnrelatedMeshes(f"vertex {v} cannot be reached from the source mesh")
            r = {}
            for w in par:
                for c, x in row(w).items():
                    r[c] = r.get(c, 0.0) + 0.5 * x
        memo[v] = r
        return r

    rows, cols, vals = [], [], []
    for i, v in enumerate(dst.vertices):
        for c, x in row(int(v)).items():
            rows.append(i)
            cols.append(c)
            vals.append(x)
    T = sp.csr_matrix((vals, (rows, cols)), shape=(dst.n_vertices, src.n_vertices))
    src._cache[key] = T
    return T


def full_transfer(src: FeSpace, dst_mesh: Mesh) -> sp.csr_matrix:
    """Full src values -> full dst values."""
    return sp.kron(vertex_transfer(src.mesh, dst_mesh), sp.identity(src.ncomp), format="csr")


def prolongation(src: FeSpace, dst_mesh: Mesh) -> sp.csr_matrix:
    """Free src coefficients -> full values on dst_mesh."""
    key = ("prol", src.dirichlet, dst_mesh.uid)
    P = src.mesh._cache.get(key)
    if P is None:
        P = (full_transfer(src, dst_mesh) @ src.C).tocsr()
        src.mesh._cache[key] = P
    return P


def transfer(src: FeSpace, dst: FeSpace, free: np.ndarray) -> np.ndarray:
    """Move free coefficients by nodal interpolation (values at dst free vertices)."""
    full = prolongation(src, dst.mesh) @ free
    idx = np.searchsorted(dst.mesh.vertices, dst.free_vertices)
    return full.reshape(-1, dst.ncomp)[idx].ravel()


def common_mesh(*spaces: FeSpace) -> Mesh:
    return overlay(*(s.mesh for s in spaces))
