"""cG(1)cG(1) time stepping for the velocity-displacement system.

On slab I_n = (t_{n-1}, t_n] the trial function is linear in time with end
values U^{n-1} in V^{n-1} and U^n in V^n; tests are constant in time in V^n.
With mass M, stiffness S and cross operators X_{n,r} (test V^n, trial V^r):

    M_n U1^n - M_{n,n-1} U1^{n-1} - k/2 (M_{n,n-1} U2^{n-1} + M_n U2^n) = F1
    M_n U2^n - M_{n,n-1} U2^{n-1} + k/2 (S_n U1^n + S_{n,n-1} U1^{n-1})
        - sum_j (wL^{nj} S_{n,j-1} U1^{j-1} + wR^{nj} S_{n,j} U1^j) = F2

The first equation gives U1^n = y + k/2 U2^n, which turns the second into an
SPD system for U2^n.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import exp
from typing import Callable, Optional

import numpy as np
import scipy.sparse.linalg as spla

from .assembly import ElasticParams, assemble_forms, cross, load_full, neumann_full
from .kernel import KernelSpec, prony_increment_weights, slab_weights, validate_kernel
from .mesh import Mesh, overlay
from .space import FeSpace, prolongation, space_for
from .timegrid import TimePartition


class LinearSolveFailure(RuntimeError):
    pass


class MeshFamilyViolation(ValueError):
    pass


@dataclass
class Discrete:
    """A spatial P1 function given by free coefficients on a space."""

    space: FeSpace
    coef: np.ndarray


@dataclass
class SlabData:
    """Volume/traction loads and initial values for the slab scheme.

    f: momentum volume load, g: Neumann traction, l1: load of the velocity
    equation (zero for the physical problem).  u0, v0 are callables or
    Discrete values.
    """

    f: Optional[Callable] = None
    g: Optional[Callable] = None
    l1: Optional[Callable] = None
    u0: object = None
    v0: object = None
    gauss: int = 4


def project(space: FeSpace, data) -> np.ndarray:
    """L2 projection P_h onto the space (callable or Discrete input)."""
    if data is None:
        return np.zeros(space.n_free)
    if isinstance(data, Discrete):
        rhs = cross("M", space, data.space) @ data.coef
    else:
        rhs = space.C.T @ load_full(space.mesh, space.ncomp, data)
    return _mass_solver(space)(rhs)


def _mass_solver(space: FeSpace):
    key = ("Msolve", space.dirichlet)
    s = space.mesh._cache.get(key)
    if s is None:
        M = assemble_forms(space, ElasticParams()).M
        s = space.mesh._cache[key] = spla.factorized(M.tocsc())
    return s


def slab_loads(space: FeSpace, slab, data: SlabData):
    """(F1, F2): time integrals over the slab of the loads against constant tests."""
    a, b = slab
    xg, wg = np.polynomial.legendre.leggauss(data.gauss)
    ts = a + 0.5 * (b - a) * (xg + 1.0)
    ws = 0.5 * (b - a) * wg
    mesh, nc = space.mesh, space.ncomp
    F1 = np.zeros(space.n_full)
    F2 = np.zeros(space.n_full)
    for t, w in zip(ts, ws):
        if data.f is not None:
            F2 += w * load_full(mesh, nc, data.f, t)
        if data.g is not None:
            F2 += w * neumann_full(mesh, nc, data.g, t)
        if data.l1 is not None:
            F1 += w * load_full(mesh, nc, data.l1, t)
    return space.C.T @ F1, space.C.T @ F2


# ------------------------------------------------------------------ solution


@dataclass
class SpaceTimeSolution:
    partition: TimePartition
    spaces: list
    U1: list
    U2: list
    kernel: KernelSpec
    params: ElasticParams
    info: dict = field(default_factory=dict)

    @property
    def N(self):
        return self.partition.N

    def union_mesh(self, n) -> Mesh:
        return overlay(self.spaces[n - 1].mesh, self.spaces[n].mesh)

    def on_mesh(self, level: int, mesh: Mesh, comp: int = 1) -> np.ndarray:
        """Full nodal values of U_comp^level on a (finer or overlay) mesh."""
        U = self.U1 if comp == 1 else self.U2
        return prolongation(self.spaces[level], mesh) @ U[level]

    def slab_values(self, n, comp: int = 1, mesh: Mesh | None = None):
        """(start, end) full values of the slab-n trial function on its union mesh."""
        mesh = mesh or self.union_mesh(n)
        return self.on_mesh(n - 1, mesh, comp), self.on_mesh(n, mesh, comp)

    def at(self, t: float, mesh: Mesh, comp: int = 1) -> np.ndarray:
        tn = self.partition.nodes
        n = self.partition.locate(t)
        a, b = tn[n - 1], tn[n]
        th = (t - a) / (b - a)
        u0, u1 = self.slab_values(n, comp, mesh)
        return (1 - th) * u0 + th * u1

    def n_dofs(self) -> int:
        """Total space-time degrees of freedom (both components, all levels)."""
        return int(sum(2 * s.n_free for s in self.spaces))


# ------------------------------------------------------------------- history


class _History:
    """Convolution history grouped by space.

    ``term(n)`` returns {space: vector} such that the history contribution of
    all slabs before n to the momentum equation of slab n equals
    sum_X S_{n,X} vector_X, plus the coefficient of U1^{n-1} coming from slab n.
    """

    def __init__(self, kernel: KernelSpec, partition: TimePartition, mode: str):
        self.kernel = kernel
        self.part = partition
        self.mode = mode
        if mode == "auto":
            self.mode = "prony" if kernel.kind == "prony" else "dense"
        self.levels = []  # (space, U1)
        self.H = None
        if self.mode == "prony":
            self.H = [dict() for _ in kernel.terms]

    def push(self, space: FeSpace, U1: np.ndarray):
        self.levels.append((space, U1))

    def _add(self, acc, space, vec, c):
        if c == 0.0:
            return
        cur = acc.get(space)
        acc[space] = c * vec if cur is None else cur + c * vec

    def earlier(self, n: int) -> dict:
        """Contribution of slabs j < n (as {space: vector})."""
        acc = {}
        if self.kernel.is_zero or n == 1:
            return acc
        slab_n = self.part.slab(n)
        if self.mode == "prony":
            k = slab_n[1] - slab_n[0]
            for (g, lam), H in zip(self.kernel.terms, self.H):
                c = g * (1.0 - exp(-lam * k)) / lam
                for sp_, v in H.items():
                    self._add(acc, sp_, v, c)
            return acc
        for j in range(1, n):
            wl, wr = slab_weights(self.kernel, slab_n, self.part.slab(j))
            s0, u0 = self.levels[j - 1]
            s1, u1 = self.levels[j]
            self._add(acc, s0, u0, wl)
            self._add(acc, s1, u1, wr)
        return acc

    def advance(self, n: int):
        """Update accumulators after level n is known (Prony mode)."""
        if self.mode != "prony" or self.kernel.is_zero:
            return
        a, b = self.part.slab(n)
        k = b - a
        s0, u0 = self.levels[n - 1]
        s1, u1 = self.levels[n]
        for (g, lam), H in zip(self.kernel.terms, self.H):
            decay = exp(-lam * k)
            for key in list(H):
                H[key] = decay * H[key]
            wl, wr = prony_increment_weights(lam, k)
            self._add(H, s0, u0, wl)
            self._add(H, s1, u1, wr)


# -------------------------------------------------------------------- solver


def _check_meshes(meshes, N):
    if isinstance(meshes, Mesh):
        return [meshes] * (N + 1)
    meshes = list(meshes)
    if len(meshes) != N + 1:
        raise MeshFamilyViolation(f"expected {N + 1} meshes, got {len(meshes)}")
    f = meshes[0].forest
    if any(m.forest is not f for m in meshes):
        raise MeshFamilyViolation("all meshes must come from one refinement forest")
    if meshes[0] is not meshes[1]:
        raise MeshFamilyViolation("the mesh at t_0 must equal the mesh at t_1")
    return meshes


def _system_solver(space: FeSpace, params: ElasticParams, shift: float):
    key = ("sys", space.dirichlet, params.key(), round(shift, 15))
    s = space.mesh._cache.get(key)
    if s is None:
        ops = assemble_forms(space, params)
        A = (ops.M + shift * ops.S).tocsc()
        try:
            s = spla.factorized(A)
        except RuntimeError as e:
            raise LinearSolveFailure(str(e)) from e
        space.mesh._cache[key] = s
    return s


def step_slab(n, part, spaces, U1, U2, hist: _History, kernel, params, F1, F2):
    """Solve slab n given levels 0..n-1; returns (U1^n, U2^n)."""
    a, b = part.slab(n)
    k = b - a
    X, Xp = spaces[n], spaces[n - 1]
    ops = assemble_forms(X, params)
    Mx = cross("M", X, Xp, params)
    Sx = cross("S", X, Xp, params)
    wl_nn, wr_nn = slab_weights(kernel, (a, b), (a, b)) if not kernel.is_zero else (0.0, 0.0)
    msolve = _mass_solver(X)
    y = msolve(Mx @ (U1[n - 1] + 0.5 * k * U2[n - 1]) + F1)
    rhs = F2 + Mx @ U2[n - 1] - (0.5 * k - wl_nn) * (Sx @ U1[n - 1])
    for sp_, v in hist.earlier(n).items():
        rhs += cross("S", X, sp_, params) @ v
    c = 0.5 * k - wr_nn
    rhs -= c * (ops.S @ y)
    u2 = _system_solver(X, params, 0.5 * k * c)(rhs)
    u1 = y + 0.5 * k * u2
    if not (np.all(np.isfinite(u1)) and np.all(np.isfinite(u2))):
        raise LinearSolveFailure(f"non-finite solution on slab {n}")
    return u1, u2


def march(data: SlabData, kernel: KernelSpec, params: ElasticParams, partition: TimePartition,
          meshes, history: str = "auto", dirichlet: bool = True) -> SpaceTimeSolution:
    validate_kernel(kernel)
    meshes = _check_meshes(meshes, partition.N)
    spaces = [space_for(m, dirichlet) for m in meshes]
    U1 = [project(spaces[0], data.u0)]
    U2 = [project(spaces[0], data.v0)]
    hist = _History(kernel, partition, history)
    hist.push(spaces[0], U1[0])
    for n in range(1, partition.N + 1):
        F1, F2 = slab_loads(spaces[n], partition.slab(n), data)
        u1, u2 = step_slab(n, partition, spaces, U1, U2, hist, kernel, params, F1, F2)
        U1.append(u1)
        U2.append(u2)
        hist.push(spaces[n], u1)
        hist.advance(n)
    return SpaceTimeSolution(partition, spaces, U1, U2, kernel, params, {"data": data})


def problem_data(problem, gauss: int = 4) -> SlabData:
    return SlabData(f=problem.f, g=problem.g, u0=problem.u0, v0=problem.v0, gauss=gauss)


def solve_primal(problem, partition: TimePartition, meshes, history: str = "auto", gauss: int = 4) -> SpaceTimeSolution:
    sol = march(problem_data(problem, gauss), problem.kernel, problem.params, partition, meshes, history)
    sol.info["problem"] = problem
    return sol


# ------------------------------------------------------------ self-checks


def slab_residuals(sol: SpaceTimeSolution, data: SlabData | None = None):
    """Residual vectors B(U, phi) - L(phi) for every test basis function.

    Uses the dense convolution sum, independent of the history recurrence.
    Returns a list: entry 0 is the initial-value pair, entry n the slab-n pair.
    """
    data = data or sol.info["data"]
    part, sps, U1, U2 = sol.partition, sol.spaces, sol.U1, sol.U2
    kernel, params = sol.kernel, sol.params
    X0 = sps[1]
    M0 = cross("M", X0, sps[0], params)
    out = []
    r1 = M0 @ U1[0] - _rhs_init(X0, data.u0)
    r2 = M0 @ U2[0] - _rhs_init(X0, data.v0)
    out.append((r1, r2))
    for n in range(1, part.N + 1):
        a, b = part.slab(n)
        k = b - a
        X, Xp = sps[n], sps[n - 1]
        M, S = cross("M", X, X, params), cross("S", X, X, params)
        Mx, Sx = cross("M", X, Xp, params), cross("S", X, Xp, params)
        F1, F2 = slab_loads(X, (a, b), data)
        r1 = M @ U1[n] - Mx @ U1[n - 1] - 0.5 * k * (Mx @ U2[n - 1] + M @ U2[n]) - F1
        r2 = M @ U2[n] - Mx @ U2[n - 1] + 0.5 * k * (S @ U1[n] + Sx @ U1[n - 1]) - F2
        if not kernel.is_zero:
            for j in range(1, n + 1):
                wl, wr = slab_weights(kernel, (a, b), part.slab(j))
                r2 -= wl * (cross("S", X, sps[j - 1], params) @ U1[j - 1])
                r2 -= wr * (cross("S", X, sps[j], params) @ U1[j])
        out.append((r1, r2))
    return out


def _rhs_init(space, data):
    if data is None:
        return np.zeros(space.n_free)
    if isinstance(data, Discrete):
        return cross("M", space, data.space) @ data.coef
    return space.C.T @ load_full(space.mesh, space.ncomp, data)


def residual_scale(sol: SpaceTimeSolution, data: SlabData | None = None) -> float:
    """Size of the individual terms entering the residual (for relative checks)."""
    data = data or sol.info["data"]
    s = 0.0
    for n in range(1, sol.N + 1):
        X = sol.spaces[n]
        ops = assemble_forms(X, sol.params)
        k = sol.partition.k[n - 1]
        s = max(s, np.abs(ops.M @ sol.U2[n]).max(), np.abs(ops.M @ sol.U1[n]).max(),
                k * np.abs(ops.S @ sol.U1[n]).max())
        F1, F2 = slab_loads(X, sol.partition.slab(n), data)
        s = max(s, np.abs(F2).max(initial=0.0), np.abs(F1).max(initial=0.0))
    return float(max(s, 1e-300))


def galerkin_residual(sol: SpaceTimeSolution, data: SlabData | None = None, relative: bool = True) -> float:
    res = slab_residuals(sol, data)
    m = max(max(np.abs(r1).max(initial=0.0), np.abs(r2).max(initial=0.0)) for r1, r2 in res)
    return m / residual_scale(sol, data) if relative else m


def energy(sol: SpaceTimeSolution, level: int) -> float:
    """||U2||^2 + ||U1||_V^2 at a time level."""
    ops = assemble_forms(sol.spaces[level], sol.params)
    u1, u2 = sol.U1[level], sol.U2[level]
    return float(u2 @ (ops.M @ u2) + u1 @ (ops.S @ u1))
