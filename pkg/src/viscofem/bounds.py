"""Facet residuals and the computable a posteriori bounds.

r_d is -1/2 the jump of sigma_0(U1) n across interior facets and g_d the
discrete viscoelastic traction on Neumann facets.  Both are constant on each
facet of the global overlay G and linear in time on a slab (g_d up to its
history part, which is evaluated pointwise).  Cell sums over a coarser mesh
keep only G facets lying on the boundary of that mesh's cells.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .assembly import _G1_W, _G1_X, ElasticParams, assemble_forms, cell_quadrature
from .grid import GlobalGrid, _gauss, _tractions
from .kernel import KernelSpec, l2_norm_on, point_weights, tail_factors
from .mesh import Mesh, overlay
from .primal import SpaceTimeSolution, _mass_solver
from .space import space_for, transfer


# ---------------------------------------------------------------- residuals


def facet_cell_sums(grid: GlobalGrid, mesh: Mesh, per_facet) -> np.ndarray:
    """Sum per-facet values over the boundary facets of each cell of ``mesh``."""
    ft = grid.facets
    anc = grid.ancestors(mesh)
    inner = ft.nbr >= 0
    on_bnd = np.ones(len(ft.cell), dtype=bool)
    on_bnd[inner] = anc[ft.cell[inner]] != anc[ft.nbr[inner]]
    owner = anc[ft.cell]
    return np.bincount(owner, weights=np.where(on_bnd, per_facet, 0.0), minlength=mesh.n_cells)


def linear_time_sq(a, b, k):
    """int over a slab of length k of |(1-s) a + s b|^2 (rowwise)."""
    return k * (np.sum(a * a, -1) + np.sum(a * b, -1) + np.sum(b * b, -1)) / 3.0


def endpoint_bound(na, nb, k):
    """sqrt(2/3) k^(1/2) (||r(t_{n-1})|| + ||r(t_n)||)."""
    return np.sqrt(2.0 / 3.0) * np.sqrt(k) * (na + nb)


@dataclass
class EdgeResidual:
    """Per slab n the values of r_d at t_{n-1} and t_n on every G facet."""

    grid: GlobalGrid
    unions: list
    nodes: np.ndarray
    left: list
    right: list

    def at(self, n, t):
        a, b = self.nodes[n - 1], self.nodes[n]
        th = (t - a) / (b - a)
        return (1 - th) * self.left[n - 1] + th * self.right[n - 1]

    def cell_sq(self, mesh, values) -> np.ndarray:
        """||r||^2_{dK} per cell of mesh for facet values (F, ncomp)."""
        L = self.grid.facets.length
        return facet_cell_sums(self.grid, mesh, L * np.sum(values * values, -1))

    def slab_norm(self, n, mesh=None, exact=True) -> np.ndarray:
        """||r_d||_{dK^n} per cell, exact or by the endpoint bound."""
        mesh = mesh or self.unions[n - 1]
        k = self.nodes[n] - self.nodes[n - 1]
        a, b = self.left[n - 1], self.right[n - 1]
        if exact:
            L = self.grid.facets.length
            return np.sqrt(facet_cell_sums(self.grid, mesh, L * linear_time_sq(a, b, k)))
        return endpoint_bound(np.sqrt(self.cell_sq(mesh, a)), np.sqrt(self.cell_sq(mesh, b)), k)


@dataclass
class NeumannResidual:
    """g_d on Neumann G facets.  ``tau`` holds sigma_0(U1(t_i)) n per node i."""

    grid: GlobalGrid
    unions: list
    nodes: np.ndarray
    tau: list
    kernel: KernelSpec

    def at(self, n, t):
        a, b = self.nodes[n - 1], self.nodes[n]
        th = (t - a) / (b - a)
        val = (1 - th) * self.tau[n - 1] + th * self.tau[n]
        if self.kernel.is_zero:
            return val
        for j in range(1, n + 1):
            w = point_weights(self.kernel, t, (self.nodes[j - 1], self.nodes[j]))
            val = val - w[0] * self.tau[j - 1] - w[1] * self.tau[j]
        return val

    @property
    def left(self):
        return [self.at(n, self.nodes[n - 1]) for n in range(1, len(self.nodes))]

    @property
    def right(self):
        return [self.at(n, self.nodes[n]) for n in range(1, len(self.nodes))]


def compute_residuals(sol: SpaceTimeSolution, kernel: KernelSpec | None = None, g=None,
                      grid: GlobalGrid | None = None):
    """(EdgeResidual, NeumannResidual) of a primal solution.

    ``g`` is accepted for interface symmetry; g_d does not depend on it.
    """
    kernel = sol.kernel if kernel is None else kernel
    grid = grid or GlobalGrid([s.mesh for s in sol.spaces])
    rt = [_tractions(grid, sol.params, grid.full(s, c)) for s, c in zip(sol.spaces, sol.U1)]
    unions = [sol.union_mesh(n) for n in range(1, sol.N + 1)]
    nodes = sol.partition.nodes
    edge = EdgeResidual(grid, unions, nodes, [r[0] for r in rt[:-1]],
                        [r[0] for r in rt[1:]])
    neu = NeumannResidual(grid, unions, nodes, [r[1] for r in rt], kernel)
    return edge, neu


# ------------------------------------------------------------ dual factors


def _laplacian(space, coef, params):
    """Discrete operator A_h: (A_h w, chi) = a(w, chi) on the space."""
    return _mass_solver(space)(assemble_forms(space, params).S @ coef)


def _norms(space, coef, params):
    """(L2, energy, discrete second-order) norms of a free vector."""
    ops = assemble_forms(space, params)
    l2 = float(np.sqrt(max(coef @ (ops.M @ coef), 0.0)))
    en = float(np.sqrt(max(coef @ (ops.S @ coef), 0.0)))
    lap = _laplacian(space, coef, params)
    return l2, en, float(np.sqrt(max(lap @ (ops.M @ lap), 0.0)))


def dual_factors(z, params: ElasticParams) -> dict:
    """Maxima over fine nodes and interval midpoints of the dual norms.

    Keys are (component, spatial order, time order); spatial order 1 uses the
    energy norm and order 2 the discrete operator A_h.
    """
    z = getattr(z, "z", z)
    out = {}

    def put(key, v):
        out[key] = max(out.get(key, 0.0), v)

    for i in range(len(z.nodes)):
        for comp, c in ((1, z.c1[i]), (2, z.c2[i])):
            for order, v in enumerate(_norms(z.spaces[i], c, params)):
                put((comp, order, 0), v)
    for i in range(len(z.nodes) - 1):
        X = space_for(_overlay_pair(z.spaces[i].mesh, z.spaces[i + 1].mesh), z.spaces[i].dirichlet)
        h = z.nodes[i + 1] - z.nodes[i]
        for comp, c in ((1, z.c1), (2, z.c2)):
            a = transfer(z.spaces[i], X, c[i])
            b = transfer(z.spaces[i + 1], X, c[i + 1])
            for order, v in enumerate(_norms(X, 0.5 * (a + b), params)):
                put((comp, order, 0), v)
            for order, v in enumerate(_norms(X, (b - a) / h, params)):
                put((comp, order, 1), v)
    return out


def _overlay_pair(a, b):
    return a if a is b else overlay(a, b)


def global_dual_factor(fac: dict, alpha, beta, gamma) -> float:
    return max(fac[(1, alpha, 0)], fac[(2, beta, 0)], fac[(1, 0, min(alpha, 1))], fac[(2, 0, gamma)])


def local_dual_factor(fac: dict, alpha) -> float:
    return max(fac[(1, alpha, 0)], fac[(2, 2, 0)], fac[(1, 0, 1)], fac[(2, 0, 1)], fac[(2, 1, 1)])


# ------------------------------------------------------------ slab context


def _half_gauss(a, b, n):
    """Gauss points on both halves of [a, b] (exact for |t - mid| factors)."""
    m = 0.5 * (a + b)
    t1, w1 = _gauss(a, m, n)
    t2, w2 = _gauss(m, b, n)
    return np.concatenate([t1, t2]), np.concatenate([w1, w2])


def _facet_points(grid: GlobalGrid):
    """Neumann facets: indices, quadrature points (F, q, dim) and weights (F, q)."""
    ft = grid.facets
    sel = np.where(ft.tag == 1)[0]
    X = grid.mesh.points
    if grid.mesh.dim == 1:
        return sel, X[ft.va[sel]][:, None, :], np.ones((len(sel), 1))
    a, b = X[ft.va[sel]], X[ft.vb[sel]]
    pts = a[:, None] + _G1_X[None, :, None] * (b - a)[:, None]
    return sel, pts, ft.length[sel][:, None] * _G1_W[None, :]


class _Context:
    """Fields of a primal solution on the global overlay, per slab."""

    def __init__(self, sol: SpaceTimeSolution, problem, gauss: int = 4, grid: GlobalGrid | None = None):
        self.sol, self.problem, self.gauss = sol, problem, gauss
        self.edge, self.neu = compute_residuals(sol, grid=grid)
        self.grid = g = self.edge.grid
        self.nc = sol.spaces[0].ncomp
        self.kernel, self.params = sol.kernel, sol.params
        self.nodes = sol.partition.nodes
        self.N = sol.N
        self.unions = self.edge.unions
        self.U1 = [g.full(s, c) for s, c in zip(sol.spaces, sol.U1)]
        self.U2 = [g.full(s, c) for s, c in zip(sol.spaces, sol.U2)]
        self.qpts, self.qw, self.phi = cell_quadrature(g.mesh)
        self.fsel, self.fpts, self.fw = _facet_points(g)
        self._lap = {}

    # -- mesh functions
    def hbar(self, n) -> np.ndarray:
        """h of the union cell of slab n containing each G cell."""
        u = self.unions[n - 1]
        return u.h[self.grid.ancestors(u)]

    def k(self, n):
        return self.nodes[n] - self.nodes[n - 1]

    # -- cell integrals on G
    def cell_sq(self, full) -> np.ndarray:
        return self.grid.cell_mass(full, full, self.nc)

    def _fn_at_q(self, fn, t):
        m = self.grid.mesh
        flat = self.qpts.reshape(-1, m.dim)
        vals = fn(flat) if t is None else fn(flat, t)
        return np.asarray(vals, dtype=float).reshape(m.n_cells, -1, self.nc)

    def cell_sq_diff(self, full, fn, t) -> np.ndarray:
        """Per G cell int_K |full - fn(t)|^2 (fn may be None)."""
        if fn is None:
            return self.cell_sq(full)
        m = self.grid.mesh
        uq = np.einsum("qv,cvk->cqk", self.phi, full.reshape(-1, self.nc)[m.cell_vertices])
        d = uq - self._fn_at_q(fn, t)
        return np.einsum("cq,cqk->c", self.qw, d * d)

    def fn_slab_mean(self, fn, n, face=False):
        if fn is None:
            return None
        ts, ws = _gauss(self.nodes[n - 1], self.nodes[n], max(self.gauss, 6))
        ev = self._g_at_q if face else self._fn_at_q
        return sum(w * ev(fn, t) for t, w in zip(ts, ws)) / self.k(n)

    # -- Neumann facet integrals
    def _g_at_q(self, g, t):
        F, q, dim = self.fpts.shape
        vals = np.asarray(g(self.fpts.reshape(-1, dim), t), dtype=float)
        return vals.reshape(F, q, self.nc)

    def neumann_sq(self, const, g, t, gbar=None) -> np.ndarray:
        """Per G facet int_f |const - g(t) + gbar|^2 on Neumann facets."""
        out = np.zeros(len(self.grid.facets.cell))
        if self.fsel.size == 0:
            return out
        d = np.zeros((len(self.fsel),) + self.fpts.shape[1:2] + (self.nc,))
        if const is not None:
            d += const[self.fsel][:, None, :]
        if g is not None:
            d -= self._g_at_q(g, t)
        if gbar is not None:
            d += gbar
        out[self.fsel] = np.einsum("fq,fqc->f", self.fw, d * d)
        return out

    # -- discrete operator applied to U1 on union meshes
    def lap_ends(self, j):
        """A_h U1(t_{j-1}), A_h U1(t_j) on union mesh j, as full G vectors."""
        if j not in self._lap:
            X = space_for(self.unions[j - 1], True)
            out = []
            for lvl in (j - 1, j):
                c = transfer(self.sol.spaces[lvl], X, self.sol.U1[lvl])
                out.append(self.grid.full(X, _laplacian(X, c, self.params)))
            self._lap[j] = tuple(out)
        return self._lap[j]

    def conv_rd(self, j, t):
        """(K * r_d)^j(t) per G facet."""
        w = point_weights(self.kernel, t, (self.nodes[j - 1], self.nodes[j]))
        return w[0] * self.edge.left[j - 1] + w[1] * self.edge.right[j - 1]

    def rd_weighted(self, values, j, power) -> float:
        """(sum over cells K of union mesh j of h_K^power ||values||^2_dK)^(1/2)."""
        u = self.unions[j - 1]
        return float(np.sqrt(np.sum(u.h ** power * self.edge.cell_sq(u, values))))

    def facet_weighted(self, per_facet, j, power) -> float:
        u = self.unions[j - 1]
        return float(np.sqrt(np.sum(u.h ** power * facet_cell_sums(self.grid, u, per_facet))))


# ------------------------------------------------------------ reports


@dataclass(frozen=True)
class EstimateReport:
    """Per-slab terms of a bound.  The generic constant is taken as 1."""

    kind: str              # "global" or "local"
    upsilon0: float
    terms: dict            # name -> (N,) array
    factors: dict          # name -> (N,) array (slab means for time-dependent ones)
    dual_factor: float
    dual_norms: dict = field(default_factory=dict)
    settings: dict = field(default_factory=dict)

    @property
    def per_slab(self) -> np.ndarray:
        return sum(self.terms.values())

    @property
    def total(self) -> float:
        return float(self.upsilon0 + self.per_slab.sum())

    @property
    def bound(self) -> float:
        return self.dual_factor * self.total


_MODES = ("L1_kernel", "L2_kernel", "convolved_residual")


def _upsilon0(ctx: _Context, p1, p2):
    sp0 = ctx.sol.spaces[0]
    h0 = sp0.mesh.h[ctx.grid.ancestors(sp0.mesh)]
    a = ctx.cell_sq_diff(ctx.U1[0], ctx.problem.u0, None)
    b = ctx.cell_sq_diff(ctx.U2[0], ctx.problem.v0, None)
    return float(np.sqrt(np.sum(h0 ** (2 * p1) * a)) + np.sqrt(np.sum(h0 ** (2 * p2) * b)))


def _resolve_factor(ctx, z, dual_factor, pick):
    if dual_factor is not None:
        return float(dual_factor), {}
    if z is None:
        return 1.0, {}
    fac = dual_factors(z, ctx.params)
    return pick(fac), fac


def global_estimate(sol: SpaceTimeSolution, problem, z=None, alpha: int = 2, beta: int = 2, gamma: int = 1,
                    mode: str = "L1_kernel", dual_factor: float | None = None, gauss: int = 4,
                    grid: GlobalGrid | None = None) -> EstimateReport:
    """Weighted bound built from the global projections P_h and P_k.

    ``z`` (a DualSolution or STFunction) supplies the dual norm factor unless
    ``dual_factor`` is given; without either the factor is 1.
    """
    if alpha not in (0, 1, 2) or beta not in (1, 2) or gamma not in (0, 1):
        raise ValueError("need alpha in {0,1,2}, beta in {1,2}, gamma in {0,1}")
    if mode not in _MODES:
        raise ValueError(f"unknown mode {mode!r}")
    ctx = _Context(sol, problem, gauss, grid)
    K, T, N = ctx.kernel, ctx.nodes[-1], ctx.N
    if mode == "L2_kernel" and not K.is_zero:
        K.squared()
    pr = problem
    names = ("h", "h_dK", "k", "k_dK")
    terms = {nm: np.zeros(N) for nm in names}
    zeta = np.array([ctx.unions[n].h.min() ** (beta - 2.0) for n in range(N)])
    zetaN = np.zeros(N)
    hmax = np.array([u.h.max() for u in ctx.unions])
    hmin = np.array([u.h.min() for u in ctx.unions])
    for n in range(1, N + 1):
        a, b = ctx.nodes[n - 1], ctx.nodes[n]
        k = b - a
        hb = ctx.hbar(n)
        du1 = (ctx.U1[n] - ctx.U1[n - 1]) / k
        du2 = (ctx.U2[n] - ctx.U2[n - 1]) / k
        dU2 = np.sqrt(np.sum(ctx.cell_sq(ctx.U2[n] - ctx.U2[n - 1])))
        lapL, lapR = ctx.lap_ends(n)
        dlap = np.sqrt(np.sum(ctx.cell_sq(lapR - lapL)))
        ts, ws = _half_gauss(a, b, gauss)
        fbar = ctx.fn_slab_mean(pr.f, n)
        gbar = ctx.fn_slab_mean(pr.g, n, face=True)
        hist = None
        if not K.is_zero:
            hist = []
            for t in ts:
                H = 0.0
                for j in range(1, n + 1):
                    w = point_weights(K, t, (ctx.nodes[j - 1], ctx.nodes[j]))
                    L, R = ctx.lap_ends(j)
                    H = H + w[0] * L + w[1] * R
                hist.append(H)
            hmean = sum(w * H for w, H in zip(ws, hist)) / k
        for q, (t, w) in enumerate(zip(ts, ws)):
            th = (t - a) / k
            u2t = (1 - th) * ctx.U2[n - 1] + th * ctx.U2[n]
            e1 = np.sqrt(np.sum(hb ** (2 * alpha) * ctx.cell_sq(du1 - u2t)))
            e2 = np.sqrt(np.sum(hb ** (2 * beta) * ctx.cell_sq_diff(du2, pr.f, t)))
            terms["h"][n - 1] += w * (e1 + e2)
            # facet terms
            R3 = ctx.rd_weighted(ctx.edge.at(n, t), n, 3)
            G3 = ctx.facet_weighted(ctx.neumann_sq(ctx.neu.at(n, t), pr.g, t), n, 3)
            if mode == "convolved_residual":
                conv = sum(zeta[j - 1] * ctx.rd_weighted(ctx.conv_rd(j, t), j, 3) for j in range(1, n + 1))
                zN = 0.0
                hdk = zeta[n - 1] * (R3 + G3) + conv
            else:
                if mode == "L1_kernel":
                    knt = np.sqrt(K.mass(0.0, T - t))
                    tail = sum(tail_factors(K, t, (ctx.nodes[j - 1], ctx.nodes[j]), T)[1] * hmax[j - 1] ** (beta - 0.5)
                               for j in range(n, N + 1)) if not K.is_zero else 0.0
                else:
                    knt = l2_norm_on(K, 0.0, T - t)
                    tail = sum(np.sqrt(ctx.k(j)) * hmax[j - 1] ** (beta - 0.5) for j in range(n, N + 1))
                zN = hmin[n - 1] ** -1.5 * knt * tail
                hdk = (zeta[n - 1] + zN) * R3 + zeta[n - 1] * G3
            zetaN[n - 1] += w * zN / k
            terms["h_dK"][n - 1] += w * hdk
            # time terms
            ek1 = abs(th - 0.5) * dU2
            ekl = abs(th - 0.5) * dlap
            ekh = np.sqrt(np.sum(ctx.cell_sq(hist[q] - hmean))) if hist is not None else 0.0
            ekf = 0.0
            if pr.f is not None:
                d = ctx._fn_at_q(pr.f, t) - fbar
                ekf = np.sqrt(np.sum(np.einsum("cq,cqk->c", ctx.qw, d * d)))
            terms["k"][n - 1] += w * (k ** min(alpha, 1) * ek1 + k ** gamma * (ekl + ekh + ekf))
            if pr.g is not None:
                egs = ctx.neumann_sq(None, pr.g, t, gbar)
                terms["k_dK"][n - 1] += w * k ** gamma * ctx.facet_weighted(egs, n, -1)
    ups0 = _upsilon0(ctx, alpha, beta)
    fac, norms = _resolve_factor(ctx, z, dual_factor, lambda f: global_dual_factor(f, alpha, beta, gamma))
    factors = {"zeta_n": zeta, "zeta_nN": zetaN, "h_min": hmin, "h_max": hmax}
    return EstimateReport("global", ups0, terms, factors, fac, norms,
                          {"alpha": alpha, "beta": beta, "gamma": gamma, "mode": mode})


def local_estimate(sol: SpaceTimeSolution, problem, z=None, alpha: int = 2, kernel_mode: str = "L2",
                   dual_factor: float | None = None, exact_facets: bool = True, gauss: int = 4,
                   grid: GlobalGrid | None = None) -> EstimateReport:
    """Bound built from a local interpolant on each space-time cell.

    Facet norms over a slab are exact by default; ``exact_facets=False`` uses
    the endpoint bound for the r_d terms instead.
    """
    if alpha not in (1, 2):
        raise ValueError("alpha must be 1 or 2")
    if kernel_mode not in ("L2", "L1"):
        raise ValueError(f"unknown kernel mode {kernel_mode!r}")
    ctx = _Context(sol, problem, gauss, grid)
    K, N, pr = ctx.kernel, ctx.N, problem
    if kernel_mode == "L2" and not K.is_zero:
        K.squared()
    hmax = np.array([u.h.max() for u in ctx.unions])
    terms = {"n1": np.zeros(N), "n2": np.zeros(N)}
    parts = {nm: np.zeros(N) for nm in ("interior", "facet_rd", "facet_g")}
    for n in range(1, N + 1):
        a, b = ctx.nodes[n - 1], ctx.nodes[n]
        k = b - a
        u = ctx.unions[n - 1]
        hb = ctx.hbar(n)
        du1 = (ctx.U1[n] - ctx.U1[n - 1]) / k
        du2 = (ctx.U2[n] - ctx.U2[n - 1]) / k
        ts, ws = _half_gauss(a, b, gauss)
        s1 = np.zeros_like(hb)
        s2 = np.zeros_like(hb)
        gsq = np.zeros(len(ctx.grid.facets.cell))
        for t, w in zip(ts, ws):
            th = (t - a) / k
            u2t = (1 - th) * ctx.U2[n - 1] + th * ctx.U2[n]
            s1 += w * ctx.cell_sq(du1 - u2t)
            s2 += w * ctx.cell_sq_diff(du2, pr.f, t)
            gsq += w * ctx.neumann_sq(ctx.neu.at(n, t), pr.g, t)
        interior = (np.sqrt(np.sum(hb ** (2 * alpha) * s1)) + k * np.sqrt(s1.sum())
                    + np.sqrt(np.sum(hb ** 4 * s2)) + k * np.sqrt(s2.sum()))
        if exact_facets:
            rsq = ctx.edge.slab_norm(n, u) ** 2
        else:
            rsq = ctx.edge.slab_norm(n, u, exact=False) ** 2
        gK = facet_cell_sums(ctx.grid, u, gsq)
        fr = sum(c * np.sqrt(np.sum(u.h ** p * rsq)) for c, p in ((1.0, 3), (k, -1), (k, 1)))
        fg = sum(c * np.sqrt(np.sum(u.h ** p * gK)) for c, p in ((1.0, 3), (k, -1), (k, 1)))
        parts["interior"][n - 1] = np.sqrt(k) * interior
        parts["facet_rd"][n - 1] = np.sqrt(k) * fr
        parts["facet_g"][n - 1] = np.sqrt(k) * fg
        terms["n1"][n - 1] = np.sqrt(k) * (interior + fr + fg)
        if K.is_zero:
            continue
        if kernel_mode == "L2":
            acc = 0.0
            for t, w in zip(ts, ws):
                r = ctx.edge.at(n, t)
                for j in range(n, N + 1):
                    cj, dj = ctx.nodes[j - 1], ctx.nodes[j]
                    kl2 = l2_norm_on(K, max(t, cj) - t, dj - t)
                    kj = dj - cj
                    inner = (ctx.rd_weighted(r, j, 3) + kj * ctx.rd_weighted(r, j, -1)
                             + kj * ctx.rd_weighted(r, j, 1))
                    acc += w * np.sqrt(kj) * kl2 * inner
            terms["n2"][n - 1] = acc
        else:
            i1 = i2 = 0.0
            for t, w in zip(ts, ws):
                c = [ctx.rd_weighted(ctx.conv_rd(j, t), j, -1) for j in range(1, n + 1)]
                i1 += w * sum(c) ** 2
                i2 += w * sum(hmax[j] * c[j] for j in range(n)) ** 2
            terms["n2"][n - 1] = np.sqrt(k) * ((hmax[n - 1] ** 2 + k) * np.sqrt(i1) + (hmax[n - 1] + k) * np.sqrt(i2))
    ups0 = _upsilon0(ctx, alpha, 2)
    fac, norms = _resolve_factor(ctx, z, dual_factor, lambda f: local_dual_factor(f, alpha))
    factors = dict(parts, h_max=hmax)
    return EstimateReport("local", ups0, terms, factors, fac, norms, {"alpha": alpha, "kernel_mode": kernel_mode})


def example1_bound(sol: SpaceTimeSolution, problem, **kw) -> EstimateReport:
    """Bound on ||e1(T)|| with alpha = 0, beta = gamma = 1.  The dual factor is
    replaced by the stability constant, taken as 1."""
    return global_estimate(sol, problem, None, alpha=0, beta=1, gamma=1, dual_factor=1.0, **kw)
