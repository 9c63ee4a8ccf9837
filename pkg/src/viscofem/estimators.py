"""Dual weighted residual indicators and a posteriori bounds.

All space-time integrals are evaluated on one global overlay G of every
mesh involved (primal levels and enriched dual levels).  Each field is P1 on
G at every time, so cell and facet integrals are exact; the results are then
attributed to cells of the union meshes by walking forest ancestors.

The dual weight is W = z_ref - z_hk, where z_ref is the enriched dual
solution and z_hk its P_k P_h projection onto the test space.  With this
sign the indicator total approximates L*(U - u).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assembly import _G1_W, _G1_X, cell_quadrature, cross
from .forms import STFunction
from .grid import GlobalGrid, IncompatibleDualDiscretization, _gauss, _tractions
from .kernel import moment_matrix
from .primal import SpaceTimeSolution, _mass_solver


# ---------------------------------------------------------------- projections


def project_dual(z: STFunction, sol: SpaceTimeSolution) -> STFunction:
    """z_hk = P_k P_h z on the primal test spaces (V^n on slab n)."""
    part = sol.partition
    if not np.all(np.isin(np.round(part.nodes, 12), np.round(z.nodes, 12))):
        raise IncompatibleDualDiscretization("dual partition must refine the primal one")
    c1, c2 = [], []
    for n in range(1, part.N + 1):
        a, b = part.slab(n)
        X = sol.spaces[n]
        idx = np.where((z.nodes >= a - 1e-13) & (z.nodes <= b + 1e-13))[0]
        acc = [np.zeros(X.n_free), np.zeros(X.n_free)]
        for i0, i1 in zip(idx[:-1], idx[1:]):
            h = (z.nodes[i1] - z.nodes[i0]) / (b - a)
            for comp, c in ((0, z.c1), (1, z.c2)):
                for i in (i0, i1):
                    acc[comp] += 0.5 * h * (cross("M", X, z.spaces[i]) @ c[i])
        ms = _mass_solver(X)
        c1.append(ms(acc[0]))
        c2.append(ms(acc[1]))
    return STFunction(part.nodes, "pwc", list(sol.spaces[1:]), c1, c2)


# ------------------------------------------------------------------- thetas


@dataclass
class ThetaBreakdown:
    theta0: np.ndarray
    theta: list                   # per slab n: (4, n_cells of union mesh n)
    theta5: dict                  # rep-specific, see keys below
    rep: int
    union_meshes: list
    extras: dict = field(default_factory=dict)

    def theta5_total(self):
        return float(sum(v.sum() for v in self.theta5.values()))

    @property
    def total(self):
        return float(self.theta0.sum() + sum(t.sum() for t in self.theta) + self.theta5_total())

    def cellwise(self) -> list:
        """Per slab n, per union cell: Theta_1..4 plus the rep-2 Theta_5 share."""
        out = []
        for n, t in enumerate(self.theta, start=1):
            c = t.sum(axis=0)
            if self.rep == 2:
                c = c + self.theta5[n]
            out.append(c)
        return out


@dataclass
class _ThetaContext:
    grid: GlobalGrid
    sol: SpaceTimeSolution
    z: STFunction
    zhk: STFunction
    problem: object


def _weight_full(ctx, t, n_coarse, i_fine, comp):
    """W = z_ref - z_hk at time t (fine interval i_fine, coarse slab n)."""
    zr = ctx.grid.lincomb(ctx.z.value(t, i_fine, comp))
    c = ctx.zhk.c1 if comp == 1 else ctx.zhk.c2
    return zr - ctx.grid.full(ctx.zhk.spaces[n_coarse - 1], c[n_coarse - 1])


def compute_thetas(sol: SpaceTimeSolution, z: STFunction, problem, zhk: STFunction | None = None,
                   grid: GlobalGrid | None = None, gauss: int = 4) -> dict:
    """All indicator pieces for every representation at once."""
    zhk = zhk or project_dual(z, sol)
    meshes = [s.mesh for s in sol.spaces] + [s.mesh for s in z.spaces]
    grid = grid or GlobalGrid(meshes)
    ctx = _ThetaContext(grid, sol, z, zhk, problem)
    part, params, kernel = sol.partition, sol.params, sol.kernel
    G = grid.mesh
    nc = sol.spaces[0].ncomp
    ft = grid.facets
    N = part.N
    unions = [None] + [sol.union_mesh(n) for n in range(1, N + 1)]

    # slab endpoint fields on G
    U1 = [grid.full(s, c) for s, c in zip(sol.spaces, sol.U1)]
    U2 = [grid.full(s, c) for s, c in zip(sol.spaces, sol.U2)]
    rho_tau = [_tractions(grid, params, u) for u in U1]

    # Theta_0 on the initial mesh
    W1_0 = _weight_full(ctx, 0.0, 1, 1, 1)
    W2_0 = _weight_full(ctx, 0.0, 1, 1, 2)
    th0 = grid.cell_mass(U1[0], W1_0, nc) + grid.cell_mass(U2[0], W2_0, nc)
    th0 -= _cell_load(grid, problem.u0, None, W1_0, nc)
    th0 -= _cell_load(grid, problem.v0, None, W2_0, nc)
    theta0 = grid.to_cells(sol.spaces[0].mesh, th0)

    fine_of = []  # fine interval indices of each coarse slab
    for n in range(1, N + 1):
        a, b = part.slab(n)
        fine_of.append([i + 1 for i in range(len(z.nodes) - 1)
                        if z.nodes[i] >= a - 1e-13 and z.nodes[i + 1] <= b + 1e-13])

    theta = []
    th3_hist = [np.zeros(G.n_cells) for _ in range(N + 1)]
    rep1, rep2, rep3 = {}, {}, {}
    for n in range(1, N + 1):
        a, b = part.slab(n)
        k = b - a
        acc = np.zeros((4, G.n_cells))
        du1 = (U1[n] - U1[n - 1]) / k
        du2 = (U2[n] - U2[n - 1]) / k
        for i in fine_of[n - 1]:
            fa, fb = z.nodes[i - 1], z.nodes[i]
            ts, ws = _gauss(fa, fb, gauss)
            for t, w in zip(ts, ws):
                th = (t - a) / k
                W1 = _weight_full(ctx, t, n, i, 1)
                W2 = _weight_full(ctx, t, n, i, 2)
                u2t = (1 - th) * U2[n - 1] + th * U2[n]
                acc[0] += w * grid.cell_mass(du1 - u2t, W1, nc)
                acc[1] += w * (grid.cell_mass(du2, W2, nc) - _cell_load(grid, problem.f, t, W2, nc))
                rho = (1 - th) * rho_tau[n - 1][0] + th * rho_tau[n][0]
                tau = (1 - th) * rho_tau[n - 1][1] + th * rho_tau[n][1]
                Wb = grid.facet_mean(W2, nc)
                f3 = ft.length * np.einsum("fc,fc->f", tau, Wb) - _facet_load(grid, problem.g, t, W2, nc)
                f4 = ft.length * np.einsum("fc,fc->f", rho, Wb)
                acc[2] += w * np.bincount(ft.cell, weights=f3, minlength=G.n_cells)
                acc[3] += w * np.bincount(ft.cell, weights=f4, minlength=G.n_cells)
            if kernel.is_zero:
                continue
            Wb_ends = np.stack([grid.facet_mean(_weight_full(ctx, s, n, i, 2), nc) for s in (fa, fb)], axis=1)
            for j in range(1, n + 1):
                Wm = moment_matrix(kernel, (fa, fb), part.slab(j))
                R = np.stack([rho_tau[j - 1][0], rho_tau[j][0]], axis=1)
                Tq = np.stack([rho_tau[j - 1][1], rho_tau[j][1]], axis=1)
                val5 = -ft.length * np.einsum("pq,fpc,fqc->f", Wm, Wb_ends, R)
                val3 = -ft.length * np.einsum("pq,fpc,fqc->f", Wm, Wb_ends, Tq)
                cells = grid.facets_to_cells(unions[j], val5)
                rep1[(n, j)] = rep1.get((n, j), 0.0) + cells
                th3_hist[n] += np.bincount(ft.cell, weights=val3, minlength=G.n_cells)
        acc[2] += th3_hist[n]
        theta.append(np.stack([grid.to_cells(unions[n], acc[r]) for r in range(4)]))

    # Theta_5 groupings, all indexed by cells of the union mesh carrying r_d
    for n in range(1, N + 1):
        rep2[n] = np.zeros(unions[n].n_cells)
    for (nW, j), cells in rep1.items():
        rep3[(j, nW)] = cells
        rep2[j] = rep2[j] + cells
    return {
        "theta0": theta0, "theta": theta, "rep1": rep1, "rep2": rep2, "rep3": rep3,
        "unions": unions[1:], "grid": grid, "zhk": zhk,
    }


def theta_representation(sol: SpaceTimeSolution, z: STFunction, problem, rep: int = 2,
                         zhk: STFunction | None = None, pieces: dict | None = None) -> ThetaBreakdown:
    if rep not in (1, 2, 3):
        raise ValueError("rep must be 1, 2 or 3")
    pieces = pieces or compute_thetas(sol, z, problem, zhk)
    return ThetaBreakdown(pieces["theta0"], pieces["theta"], pieces[f"rep{rep}"], rep, pieces["unions"],
                          {"grid": pieces["grid"], "zhk": pieces["zhk"]})


def _cell_load(grid: GlobalGrid, fn, t, W_full, nc):
    """Per G cell int_K fn . W (fn callable or None)."""
    if fn is None:
        return np.zeros(grid.mesh.n_cells)
    mesh = grid.mesh
    pts, w, phi = cell_quadrature(mesh)
    flat = pts.reshape(-1, mesh.dim)
    vals = fn(flat) if t is None else fn(flat, t)
    vals = np.asarray(vals, dtype=float).reshape(mesh.n_cells, -1, nc)
    Wq = np.einsum("qv,cvk->cqk", phi, W_full.reshape(-1, nc)[mesh.cell_vertices])
    return np.einsum("cq,cqk,cqk->c", w, vals, Wq)


def _facet_load(grid: GlobalGrid, g, t, W_full, nc):
    """Per facet int_f g . W over Neumann facets."""
    ft = grid.facets
    out = np.zeros(len(ft.cell))
    if g is None:
        return out
    sel = np.where(ft.tag == 1)[0]
    if sel.size == 0:
        return out
    X = grid.mesh.points
    Wv = W_full.reshape(-1, nc)
    if grid.mesh.dim == 1:
        p = X[ft.va[sel]]
        vals = np.asarray(g(p, t), dtype=float).reshape(len(sel), nc)
        out[sel] = np.einsum("fc,fc->f", vals, Wv[ft.va[sel]])
        return out
    a, b = X[ft.va[sel]], X[ft.vb[sel]]
    pts = a[:, None] + _G1_X[None, :, None] * (b - a)[:, None]
    vals = np.asarray(g(pts.reshape(-1, 2), t), dtype=float).reshape(len(sel), len(_G1_X), nc)
    Wq = (1 - _G1_X)[None, :, None] * Wv[ft.va[sel]][:, None] + _G1_X[None, :, None] * Wv[ft.vb[sel]][:, None]
    out[sel] = ft.length[sel] * np.einsum("q,fqc,fqc->f", _G1_W, vals, Wq)
    return out


from .bounds import (  # noqa: E402,F401  re-exported
    EdgeResidual, EstimateReport, NeumannResidual, compute_residuals, dual_factors,
    example1_bound, global_estimate, local_estimate,
)
