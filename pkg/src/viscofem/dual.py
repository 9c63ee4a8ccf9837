"""Backward dual problem, solved by time reversal on enriched discretizations.

With w(tau) = z(T - tau) the dual equations

    -z1' + A z2 - int_t^T K(s-t) A z2(s) ds = j1,    -z2' - z1 = j2,

become the forward system with displacement role y1 = w2, velocity role
y2 = w1, velocity-equation load j2(T - tau), momentum load j1(T - tau),
no traction and initial values y1(0) = z2T, y2(0) = z1T.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .assembly import ElasticParams, cell_quadrature, discrete_norm
from .forms import STFunction
from .kernel import KernelSpec
from .mesh import Mesh, refine_uniform
from .primal import SlabData, SpaceTimeSolution, march
from .space import prolongation
from .timegrid import TimePartition


@dataclass
class DualData:
    j1: Optional[Callable] = None
    j2: Optional[Callable] = None
    z1T: object = None
    z2T: object = None


@dataclass
class GoalFunctional:
    """Goal presets.  end_time_displacement: L*(e) = (e1(T), weight)."""

    preset: str = "end_time_displacement"
    weight: object = None
    data: Optional[DualData] = None

    def dual_data(self) -> DualData:
        if self.preset == "end_time_displacement":
            if self.weight is None:
                raise ValueError("end_time_displacement needs a weight function")
            return DualData(z1T=self.weight)
        if self.preset == "general":
            if self.data is None:
                raise ValueError("general goal needs DualData")
            return self.data
        raise ValueError(f"unknown goal preset {self.preset!r}")


@dataclass
class DualSolution:
    z: STFunction
    reversed: SpaceTimeSolution
    partition: TimePartition
    meshes: list
    data: DualData
    info: dict = field(default_factory=dict)


def _reverse_time(fn, T):
    if fn is None:
        return None
    return lambda x, t: fn(x, T - t)


def enriched_meshes(meshes, partition: TimePartition, refine_h: int, refine_k: int):
    """Fine partition and per-node meshes (node i of the fine partition)."""
    fine = partition.halved(refine_k) if refine_k > 0 else partition
    r = 2**refine_k
    refined = {}

    def ref(m):
        if m.uid not in refined:
            refined[m.uid] = refine_uniform(m, refine_h) if refine_h > 0 else m
        return refined[m.uid]

    out = [ref(meshes[0])]
    for n in range(1, partition.N + 1):
        out.extend([ref(meshes[n])] * r)
    return fine, out


def solve_dual(data: DualData, partition: TimePartition, meshes, kernel: KernelSpec,
               params: ElasticParams, refine_h: int = 1, refine_k: int = 1,
               history: str = "auto", gauss: int = 4) -> DualSolution:
    if isinstance(meshes, Mesh):
        meshes = [meshes] * (partition.N + 1)
    fine, fmeshes = enriched_meshes(meshes, partition, refine_h, refine_k)
    T = partition.T
    rev = fine.reversed()
    rmeshes = fmeshes[::-1]
    rmeshes[0] = rmeshes[1]
    sdata = SlabData(
        f=_reverse_time(data.j1, T), l1=_reverse_time(data.j2, T), g=None,
        u0=data.z2T, v0=data.z1T, gauss=gauss,
    )
    y = march(sdata, kernel, params, rev, rmeshes, history)
    # back to forward time: z1 = y2, z2 = y1
    z = STFunction(fine.nodes, "cont", y.spaces[::-1], y.U2[::-1], y.U1[::-1])
    return DualSolution(z, y, fine, rmeshes[::-1], data)


def dual_norms(dsol: DualSolution, params: ElasticParams):
    """Per fine node (||z1||, ||z2||_V)."""
    z = dsol.z
    return np.array([
        (discrete_norm(s, c1, 0, params), discrete_norm(s, c2, 1, params))
        for s, c1, c2 in zip(z.spaces, z.c1, z.c2)
    ])


@dataclass
class StabilityReport:
    ratio: float
    max_z1: float
    max_z2V: float
    terminal: float
    norms: np.ndarray
    energy_ratio: float = 1.0


def stability_report(dsol: DualSolution, params: ElasticParams) -> StabilityReport:
    """max_t (||z1|| + ||z2||_V) relative to the terminal norms; energy_ratio uses the l2 pairing."""
    nrm = dual_norms(dsol, params)
    term = float(nrm[-1].sum())
    peak = float(nrm.sum(axis=1).max())
    ratio = peak / term if term > 0 else 0.0
    en = np.hypot(nrm[:, 0], nrm[:, 1])
    eratio = float(en.max() / en[-1]) if en[-1] > 0 else 0.0
    return StabilityReport(ratio, float(nrm[:, 0].max()), float(nrm[:, 1].max()), term, nrm, eratio)


def energy_trace(dsol: DualSolution, params: ElasticParams) -> np.ndarray:
    nrm = dual_norms(dsol, params)
    return nrm[:, 0] ** 2 + nrm[:, 1] ** 2


def goal_error(sol: SpaceTimeSolution, weight, exact_u1, refine: int = 3) -> float:
    """(U1(T) - u1(T), weight) by quadrature on a refined final mesh."""
    X = sol.spaces[-1]
    m = refine_uniform(X.mesh, refine)
    pts, wq, phi = cell_quadrature(m)
    full = (prolongation(X, m) @ sol.U1[-1]).reshape(-1, X.ncomp)
    uh = np.einsum("qv,cvk->cqk", phi, full[m.cell_vertices])
    flat = pts.reshape(-1, m.dim)
    d = uh - np.asarray(exact_u1(flat, sol.partition.T), dtype=float).reshape(m.n_cells, -1, X.ncomp)
    w = np.asarray(weight(flat), dtype=float).reshape(m.n_cells, -1, X.ncomp)
    return float(np.einsum("cq,cqk,cqk->", wq, d, w))
