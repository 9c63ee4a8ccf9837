"""P1 assembly of mass, elasticity stiffness and loads, plus cross-space operators.

In 1D the elasticity form reduces to E * int v' w' with E = 2 mu0 + lambda0.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .mesh import DegenerateCell, Mesh, facet_geometry, overlay
from .space import FeSpace, prolongation


class UnsupportedExponent(ValueError):
    pass


@dataclass(frozen=True)
class ElasticParams:
    mu0: float = 0.5
    lambda0: float = 0.0

    def __post_init__(self):
        if not (self.mu0 > 0):
            raise ValueError("mu0 must be positive")
        if self.lambda0 < 0:
            raise ValueError("lambda0 must be non-negative")

    @property
    def E(self):
        return 2.0 * self.mu0 + self.lambda0

    def key(self):
        return (self.mu0, self.lambda0)


# ---------------------------------------------------------------- quadrature

_G1_X, _G1_W = np.polynomial.legendre.leggauss(5)
_G1_X = 0.5 * (_G1_X + 1.0)
_G1_W = 0.5 * _G1_W



def _collapsed_triangle_rule(n):
    """Gauss rule on the reference triangle via the Duffy collapse (degree 2n-1)."""
    x, w = np.polynomial.legendre.leggauss(n)
    x, w = 0.5 * (x + 1.0), 0.5 * w
    u, v = np.meshgrid(x, x, indexing="ij")
    wu, wv = np.meshgrid(w, w, indexing="ij")
    l1 = u.ravel()
    l2 = (v * (1.0 - u)).ravel()
    wt = (wu * wv * (1.0 - u)).ravel() * 2.0  # weights sum to 1
    bary = np.stack([1.0 - l1 - l2, l1, l2], axis=1)
    return bary, wt


_T_BARY, _T_W = _collapsed_triangle_rule(6)


def cell_quadrature(mesh: Mesh):
    """Points (nc, nq, dim), weights (nc, nq) and P1 basis values (nq, nv)."""
    key = "cellquad"
    q = mesh._cache.get(key)
    if q is None:
        x = mesh.points[mesh.cell_vertices]
        if mesh.dim == 1:
            phi = np.stack([1.0 - _G1_X, _G1_X], axis=1)
            w = _G1_W
        else:
            phi = _T_BARY
            w = _T_W
        pts = np.einsum("qv,cvd->cqd", phi, x)
        q = (pts, mesh.measure[:, None] * w[None, :], phi)
        mesh._cache[key] = q
    return q


def _shape(vals, n, ncomp):
    return np.asarray(vals, dtype=float).reshape(n, ncomp)


def _scatter_vector(mesh: Mesh, ncomp: int, local):
    """local: (nc, nv, ncomp) -> full vector."""
    idx = (mesh.cell_vertices[:, :, None] * ncomp + np.arange(ncomp)).ravel()
    return np.bincount(idx, weights=local.ravel(), minlength=mesh.n_vertices * ncomp)


def _scatter_matrix(mesh: Mesh, ncomp: int, local):
    """local: (nc, nd, nd) with nd = nv*ncomp -> full sparse matrix."""
    dofs = (mesh.cell_vertices[:, :, None] * ncomp + np.arange(ncomp)).reshape(mesh.n_cells, -1)
    nd = dofs.shape[1]
    rows = np.repeat(dofs, nd, axis=1).ravel()
    cols = np.tile(dofs, (1, nd)).ravel()
    n = mesh.n_vertices * ncomp
    return sp.csr_matrix((local.ravel(), (rows, cols)), shape=(n, n))


# ------------------------------------------------------------------ elements


def barycentric_gradients(mesh: Mesh) -> np.ndarray:
    """(nc, nv, dim) gradients of the P1 hat functions."""
    g = mesh._cache.get("bgrad")
    if g is not None:
        return g
    x = mesh.points[mesh.cell_vertices]
    if mesh.dim == 1:
        h = x[:, 1, 0] - x[:, 0, 0]
        if np.any(h == 0):
            raise DegenerateCell("zero-length cell")
        g = np.stack([-1.0 / h, 1.0 / h], axis=1)[:, :, None]
    else:
        A = np.concatenate([np.ones((mesh.n_cells, 3, 1)), x], axis=2)
        det = np.linalg.det(A)
        if np.any(np.abs(det) < 1e-300):
            raise DegenerateCell("zero-area cell")
        Q = np.linalg.inv(A)
        g = np.transpose(Q[:, 1:, :], (0, 2, 1))
    mesh._cache["bgrad"] = g
    return g


def mass_full(mesh: Mesh, ncomp: int) -> sp.csr_matrix:
    key = ("M", ncomp)
    M = mesh._cache.get(key)
    if M is None:
        nv = mesh.dim + 1
        ref = (np.ones((nv, nv)) + np.eye(nv)) / ((nv) * (nv + 1))
        loc = mesh.measure[:, None, None] * ref[None]
        loc = np.einsum("cij,ab->ciajb", loc, np.eye(ncomp)).reshape(mesh.n_cells, nv * ncomp, nv * ncomp)
        M = mesh._cache[key] = _scatter_matrix(mesh, ncomp, loc)
    return M


def stiffness_full(mesh: Mesh, params: ElasticParams) -> sp.csr_matrix:
    key = ("S", params.key())
    S = mesh._cache.get(key)
    if S is not None:
        return S
    g = barycentric_gradients(mesh)
    vol = mesh.measure
    if mesh.dim == 1:
        loc = params.E * vol[:, None, None] * g[:, :, 0, None] * g[:, None, :, 0]
        S = _scatter_matrix(mesh, 1, loc)
    else:
        nc = mesh.n_cells
        B = np.zeros((nc, 3, 6))
        B[:, 0, 0::2] = g[:, :, 0]
        B[:, 1, 1::2] = g[:, :, 1]
        B[:, 2, 0::2] = g[:, :, 1]
        B[:, 2, 1::2] = g[:, :, 0]
        mu, lam = params.mu0, params.lambda0
        D = np.array([[2 * mu + lam, lam, 0.0], [lam, 2 * mu + lam, 0.0], [0.0, 0.0, mu]])
        loc = vol[:, None, None] * np.einsum("cki,kl,clj->cij", B, D, B)
        S = _scatter_matrix(mesh, 2, loc)
    mesh._cache[key] = S
    return S


def stress_full(mesh: Mesh, params: ElasticParams, full: np.ndarray) -> np.ndarray:
    """Cellwise constant stress sigma_0 of a full P1 field: (nc, ncomp, dim)."""
    g = barycentric_gradients(mesh)
    if mesh.dim == 1:
        u = full[mesh.cell_vertices]
        return (params.E * np.einsum("cv,cv->c", u, g[:, :, 0]))[:, None, None]
    u = full.reshape(-1, 2)[mesh.cell_vertices]
    grad = np.einsum("cvi,cvj->cij", u, g)
    eps = 0.5 * (grad + np.transpose(grad, (0, 2, 1)))
    tr = np.trace(eps, axis1=1, axis2=2)
    return 2 * params.mu0 * eps + params.lambda0 * tr[:, None, None] * np.eye(2)


# -------------------------------------------------------------------- loads


def load_full(mesh: Mesh, ncomp: int, f, t=None) -> np.ndarray:
    """Full vector of int f . phi_i for a callable f(x[, t])."""
    pts, w, phi = cell_quadrature(mesh)
    flat = pts.reshape(-1, mesh.dim)
    vals = f(flat) if t is None else f(flat, t)
    vals = _shape(vals, len(flat), ncomp).reshape(mesh.n_cells, -1, ncomp)
    local = np.einsum("cq,qv,cqk->cvk", w, phi, vals)
    return _scatter_vector(mesh, ncomp, local)


def neumann_full(mesh: Mesh, ncomp: int, g, t=None, tag="N") -> np.ndarray:
    """Full vector of int_{Gamma_N} g . phi_i."""
    out = np.zeros(mesh.n_vertices * ncomp)
    for k, side, tg in mesh.boundary_facets:
        if tg != tag:
            continue
        cv = mesh.cell_vertices[k]
        if mesh.dim == 1:
            (p, _), _, _ = facet_geometry(mesh, k, side)
            val = _shape(g(p[None]) if t is None else g(p[None], t), 1, ncomp)[0]
            v = cv[side]
            out[v * ncomp : v * ncomp + ncomp] += val
            continue
        (a, b), _, L = facet_geometry(mesh, k, side)
        pts = a[None] + _G1_X[:, None] * (b - a)[None]
        val = _shape(g(pts) if t is None else g(pts, t), len(pts), ncomp)
        ia, ib = cv[(side + 1) % 3], cv[(side + 2) % 3]
        for s, v in ((1.0 - _G1_X, ia), (_G1_X, ib)):
            out[v * ncomp : v * ncomp + ncomp] += L * np.einsum("q,q,qk->k", _G1_W, s, val)
    return out


# ------------------------------------------------------------- operator sets


@dataclass
class OperatorSet:
    space: FeSpace
    params: ElasticParams
    M: sp.csr_matrix
    S: sp.csr_matrix


def assemble_forms(space: FeSpace, params: ElasticParams) -> OperatorSet:
    key = ("ops", space.dirichlet, params.key())
    ops = space.mesh._cache.get(key)
    if ops is None:
        C = space.C
        M = (C.T @ mass_full(space.mesh, space.ncomp) @ C).tocsr()
        S = (C.T @ stiffness_full(space.mesh, params) @ C).tocsr()
        ops = OperatorSet(space, params, M, S)
        space.mesh._cache[key] = ops
    return ops


def cross(kind: str, test: FeSpace, trial: FeSpace, params: ElasticParams | None = None):
    """Operator (phi_test_i, phi_trial_j) or a(phi_trial_j, phi_test_i) across spaces.

    kind is 'M' or 'S'.  Computed on the overlay of the two meshes.
    """
    if test is trial:
        ops = assemble_forms(test, params or ElasticParams())
        return ops.M if kind == "M" else ops.S
    key = ("cross", kind, test.dirichlet, trial.mesh.uid, trial.dirichlet, params.key() if params else None)
    A = test.mesh._cache.get(key)
    if A is None:
        O = overlay(test.mesh, trial.mesh)
        base = mass_full(O, test.ncomp) if kind == "M" else stiffness_full(O, params)
        A = (prolongation(test, O).T @ base @ prolongation(trial, O)).tocsr()
        test.mesh._cache[key] = A
    return A


def discrete_norm(space: FeSpace, free: np.ndarray, l: int, params: ElasticParams | None = None) -> float:
    if l not in (0, 1):
        raise UnsupportedExponent(f"discrete norm exponent {l} is not supported")
    ops = assemble_forms(space, params or ElasticParams())
    A = ops.M if l == 0 else ops.S
    return float(np.sqrt(max(free @ (A @ free), 0.0)))


def l2_error(space: FeSpace, free: np.ndarray, exact, t=None) -> float:
    """||u_h - u||_{L2} with the cell quadrature rule."""
    mesh = space.mesh
    pts, w, phi = cell_quadrature(mesh)
    full = (space.C @ free).reshape(-1, space.ncomp)
    uh = np.einsum("qv,cvk->cqk", phi, full[mesh.cell_vertices])
    flat = pts.reshape(-1, mesh.dim)
    ue = _shape(exact(flat) if t is None else exact(flat, t), len(flat), space.ncomp)
    d = uh - ue.reshape(mesh.n_cells, -1, space.ncomp)
    return float(np.sqrt(np.einsum("cq,cqk->", w, d * d)))


def h1_semi_error(space: FeSpace, free: np.ndarray, grad_exact, t=None) -> float:
    """||grad(u_h - u)||_{L2}; grad_exact returns (n, ncomp, dim) or (n,) in 1D."""
    mesh = space.mesh
    pts, w, _ = cell_quadrature(mesh)
    g = barycentric_gradients(mesh)
    full = (space.C @ free).reshape(-1, space.ncomp)
    gh = np.einsum("cvk,cvd->ckd", full[mesh.cell_vertices], g)
    flat = pts.reshape(-1, mesh.dim)
    ge = np.asarray(grad_exact(flat) if t is None else grad_exact(flat, t), dtype=float)
    ge = ge.reshape(mesh.n_cells, -1, space.ncomp, mesh.dim)
    d = gh[:, None] - ge
    return float(np.sqrt(np.einsum("cq,cqkd->", w, d * d)))
