"""Global overlay of a mesh family with its facet table.

Every field built on the family is P1 on the overlay G, so cell and facet
integrals there are exact.  Facets are split at hanging midpoints so each
row has one neighbour cell (or a boundary tag).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import ElasticParams, stress_full
from .mesh import Mesh, _ekey, facet_geometry, overlay
from .space import FeSpace, prolongation


class IncompatibleDualDiscretization(ValueError):
    pass


def _gauss(a, b, n):
    x, w = np.polynomial.legendre.leggauss(n)
    return a + 0.5 * (b - a) * (x + 1.0), 0.5 * (b - a) * w



@dataclass
class FacetTable:
    cell: np.ndarray      # owning G cell
    nbr: np.ndarray       # neighbouring G cell or -1
    tag: np.ndarray       # 0 interior, 1 Neumann, 2 Dirichlet
    va: np.ndarray        # local vertex indices of the endpoints
    vb: np.ndarray
    normal: np.ndarray    # (F, dim) outward for `cell`
    length: np.ndarray    # (F,) 1 in 1D


def _subfacets(mesh: Mesh) -> FacetTable:
    f = mesh.forest
    verts = set(int(v) for v in mesh.vertices)
    edges = mesh.edges
    vidx = mesh.vindex
    rows = []

    def split(a, b):
        m = f.edge_mid.get(_ekey(a, b))
        if m is not None and m in verts:
            return split(a, m) + split(m, b)
        return [(a, b)]

    def neighbour(k, key):
        while True:
            lst = edges.get(key)
            if lst is not None:
                others = [c for c, _ in lst if c != k]
                if others:
                    return others[0]
            tag = f.btag.get(key)
            if tag is not None:
                return tag
            a, b = key
            pa, pb = f.vparents.get(a), f.vparents.get(b)
            if pa is not None and b in pa:
                key = pa
            elif pb is not None and a in pb:
                key = pb
            else:
                raise IncompatibleDualDiscretization("facet without neighbour")

    for k in range(mesh.n_cells):
        cg = mesh.cell_global[k]
        for s in range(mesh.dim + 1):
            _, n, L = facet_geometry(mesh, k, s)
            if mesh.dim == 1:
                v = int(cg[s])
                nb = neighbour(k, v)
                rows.append((k, nb, vidx[v], vidx[v], n, 1.0))
                continue
            a, b = int(cg[(s + 1) % 3]), int(cg[(s + 2) % 3])
            for p, q in split(a, b):
                nb = neighbour(k, _ekey(p, q))
                Lpq = float(np.linalg.norm(mesh.forest.coords[p] - mesh.forest.coords[q]))
                rows.append((k, nb, vidx[p], vidx[q], n, Lpq))
    cell = np.array([r[0] for r in rows])
    nbr = np.array([r[1] if isinstance(r[1], (int, np.integer)) else -1 for r in rows])
    tag = np.array([0 if isinstance(r[1], (int, np.integer)) else (1 if r[1] == "N" else 2) for r in rows])
    return FacetTable(cell, nbr, tag, np.array([r[2] for r in rows]), np.array([r[3] for r in rows]),
                      np.array([r[4] for r in rows]), np.array([r[5] for r in rows]))


class GlobalGrid:
    def __init__(self, meshes):
        uniq = {m.uid: m for m in meshes}
        self.mesh = overlay(*uniq.values())
        self.facets = _subfacets(self.mesh)
        nv = self.mesh.dim + 1
        self._mref = (np.ones((nv, nv)) + np.eye(nv)) / (nv * (nv + 1))
        self._anc = {}

    def full(self, space: FeSpace, coef) -> np.ndarray:
        return prolongation(space, self.mesh) @ coef

    def lincomb(self, terms) -> np.ndarray:
        out = 0.0
        for w, X, c in terms:
            if w != 0.0:
                out = out + w * self.full(X, c)
        return out if not np.isscalar(out) else np.zeros(self.mesh.n_vertices * (1 if self.mesh.dim == 1 else 2))

    def cell_mass(self, a, b, ncomp) -> np.ndarray:
        """Per-cell int_K a . b for full P1 vectors a, b."""
        cv = self.mesh.cell_vertices
        A = a.reshape(-1, ncomp)[cv]
        B = b.reshape(-1, ncomp)[cv]
        return self.mesh.measure * np.einsum("ij,cik,cjk->c", self._mref, A, B)

    def facet_mean(self, full, ncomp) -> np.ndarray:
        v = full.reshape(-1, ncomp)
        return 0.5 * (v[self.facets.va] + v[self.facets.vb])

    def ancestors(self, mesh: Mesh) -> np.ndarray:
        m = self._anc.get(mesh.uid)
        if m is None:
            m = self._anc[mesh.uid] = mesh.ancestor_map(self.mesh)
        return m

    def to_cells(self, mesh: Mesh, per_gcell) -> np.ndarray:
        return np.bincount(self.ancestors(mesh), weights=per_gcell, minlength=mesh.n_cells)

    def facets_to_cells(self, mesh: Mesh, per_facet) -> np.ndarray:
        return self.to_cells(mesh, np.bincount(self.facets.cell, weights=per_facet, minlength=self.mesh.n_cells))


def _tractions(grid: GlobalGrid, params: ElasticParams, u1_full):
    """(rho, tau): interior residual 1/2 (sigma_K n_K + sigma_K' n_K') and the
    Neumann traction sigma_K n_K, per facet (F, ncomp)."""
    ft = grid.facets
    sig = stress_full(grid.mesh, params, u1_full)
    own = np.einsum("fij,fj->fi", sig[ft.cell], ft.normal)
    interior = ft.tag == 0
    rho = np.zeros_like(own)
    nb = sig[ft.nbr[interior]]
    rho[interior] = 0.5 * (own[interior] - np.einsum("fij,fj->fi", nb, ft.normal[interior]))
    tau = np.where((ft.tag == 1)[:, None], own, 0.0)
    return rho, tau


