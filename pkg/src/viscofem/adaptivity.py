"""Goal-oriented adaptive loop driven by the cellwise (rep-2) indicators."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bounds import global_estimate
from .dual import GoalFunctional, goal_error, solve_dual
from .estimators import compute_thetas, theta_representation
from .mesh import Mesh, refine
from .primal import solve_primal
from .timegrid import TimePartition


class BudgetExceeded(RuntimeError):
    def __init__(self, msg, history):
        super().__init__(msg)
        self.history = history


_SPLITS = ("indicator", "space", "time", "both")


@dataclass
class AdaptConfig:
    goal: GoalFunctional
    tolerance: float = 1e-3
    theta: float = 0.5
    max_iter: int = 6
    split: str = "indicator"
    rep: int = 2
    refine_h: int = 1
    refine_k: int = 1
    strategy: str = "adaptive"    # or "uniform": mark every cell of every slab
    conforming: bool = True
    max_dofs: int | None = None

    def __post_init__(self):
        if not 0.0 < self.theta <= 1.0:
            raise ValueError("marking fraction must lie in (0, 1]")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.split not in _SPLITS:
            raise ValueError(f"split must be one of {_SPLITS}")
        if self.rep not in (1, 2, 3):
            raise ValueError("rep must be 1, 2 or 3")
        if self.strategy not in ("adaptive", "uniform"):
            raise ValueError("strategy must be 'adaptive' or 'uniform'")


@dataclass
class AdaptStep:
    iteration: int
    dofs_space: int
    dofs_time: int
    dofs_total: int
    estimate: float
    true_error: float | None
    marked_space: int = 0
    marked_time: int = 0


@dataclass
class AdaptResult:
    history: list
    partition: TimePartition
    meshes: list
    converged: bool
    solution: object = None
    extras: dict = field(default_factory=dict)

    @property
    def cumulative_dofs(self) -> int:
        return int(sum(s.dofs_total for s in self.history))


def dorfler(values, theta: float) -> np.ndarray:
    """Indices of a minimal set carrying theta of the total; ties by index."""
    v = np.abs(np.asarray(values, dtype=float))
    order = np.lexsort((np.arange(len(v)), -v))
    tot = v.sum()
    if tot == 0.0:
        return np.arange(len(v)) if theta >= 1.0 else np.zeros(0, dtype=int)
    csum = np.cumsum(v[order])
    m = int(np.searchsorted(csum, theta * tot * (1 - 1e-14))) + 1
    return np.sort(order[:min(m, len(v))])


def _refine_slabs(partition: TimePartition, meshes, space_marks: dict, time_marks: set, conforming: bool):
    """Apply spatial marks (slab -> cells of meshes[n]) then halve marked slabs."""
    new = list(meshes)
    for n, cells in space_marks.items():
        new[n] = refine(meshes[n], cells, conforming)
    new[0] = new[1]
    nodes = [partition.nodes[0]]
    out = [new[0]]
    for n in range(1, partition.N + 1):
        a, b = partition.slab(n)
        if n in time_marks:
            nodes.append(0.5 * (a + b))
            out.append(new[n])
        nodes.append(b)
        out.append(new[n])
    return TimePartition(np.array(nodes)), out


def adapt_loop(problem, partition: TimePartition, meshes, config: AdaptConfig, raise_on_budget: bool = True,
               on_step=None):
    """Solve, estimate, mark and refine until |Theta total| <= tolerance."""
    if isinstance(meshes, Mesh):
        meshes = [meshes] * (partition.N + 1)
    meshes = list(meshes)
    data = config.goal.dual_data()
    weight = config.goal.weight if config.goal.preset == "end_time_displacement" else None
    history = []
    sol = None
    for it in range(config.max_iter + 1):
        sol = solve_primal(problem, partition, meshes)
        dual = solve_dual(data, partition, meshes, problem.kernel, problem.params,
                          config.refine_h, config.refine_k)
        pieces = compute_thetas(sol, dual.z, problem)
        br = theta_representation(sol, dual.z, problem, config.rep, pieces=pieces)
        est = abs(br.total)
        err = None
        if problem.has_exact and weight is not None:
            err = goal_error(sol, weight, problem.exact_u1)
        dofs_space = int(sum(2 * s.n_free for s in sol.spaces[1:]))
        step = AdaptStep(it, dofs_space, partition.N, sol.n_dofs(), est, err)
        history.append(step)
        if on_step is not None:
            on_step(step)
        if est <= config.tolerance:
            return AdaptResult(history, partition, meshes, True, sol, {"theta": br})
        if it == config.max_iter or (config.max_dofs and sol.n_dofs() > config.max_dofs):
            break
        space_marks, time_marks = _mark(sol, br, problem, config, pieces)
        step.marked_space = int(sum(len(c) for c in space_marks.values()))
        step.marked_time = len(time_marks)
        partition, meshes = _refine_slabs(partition, meshes, space_marks, time_marks, config.conforming)
    res = AdaptResult(history, partition, meshes, False, sol)
    if raise_on_budget:
        raise BudgetExceeded(f"tolerance {config.tolerance:g} not reached", res)
    return res


def _mark(sol, br, problem, config: AdaptConfig, pieces):
    N = sol.N
    cells = br.cellwise()
    if config.strategy == "uniform":
        picked = {n: np.arange(len(cells[n - 1])) for n in range(1, N + 1)}
    else:
        flat = np.concatenate(cells)
        idx = dorfler(flat, config.theta)
        offs = np.cumsum([0] + [len(c) for c in cells])
        picked = {}
        for i in idx:
            n = int(np.searchsorted(offs, i, side="right"))
            picked.setdefault(n, []).append(int(i - offs[n - 1]))
    split = config.split
    if split == "indicator":
        rep = global_estimate(sol, problem, dual_factor=1.0, grid=pieces["grid"])
        tshare = rep.terms["k"] + rep.terms["k_dK"]
        sshare = rep.terms["h"] + rep.terms["h_dK"]
    space_marks, time_marks = {}, set()
    for n, union_cells in picked.items():
        use_time = split in ("time", "both") or (split == "indicator" and tshare[n - 1] > sshare[n - 1])
        use_space = split in ("space", "both") or (split == "indicator" and not use_time)
        if use_time:
            time_marks.add(n)
        if use_space:
            u = br.union_meshes[n - 1]
            anc = sol.spaces[n].mesh.ancestor_map(u)
            space_marks[n] = sorted(set(int(anc[c]) for c in union_cells))
    return space_marks, time_marks
