"""L2 projections in space and time, the local interpolant I_hk, and rate studies."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import h1_semi_error, l2_error
from .mesh import Mesh, refine_uniform
from .primal import Discrete, project
from .space import FeSpace, space_for
from .timegrid import TimePartition


class SingularMass(RuntimeError):
    pass


def ph_project(space: FeSpace, v, t=None) -> Discrete:
    """P_h v for a callable v(x) (or v(x, t) when t is given) or a Discrete."""
    if t is not None and callable(v):
        fn = lambda x: v(x, t)
    else:
        fn = v
    coef = project(space, fn)
    if not np.all(np.isfinite(coef)):
        raise SingularMass("mass solve produced non-finite values")
    return Discrete(space, coef)


def _gauss(a, b, n):
    x, w = np.polynomial.legendre.leggauss(n)
    return a + 0.5 * (b - a) * (x + 1.0), 0.5 * (b - a) * w


def pk_project(v, partition: TimePartition, order: int = 8) -> np.ndarray:
    """Slab averages of a time function v(t) (scalar or array valued)."""
    out = []
    for a, b in partition.slabs():
        ts, ws = _gauss(a, b, order)
        out.append(sum(w * np.asarray(v(t), dtype=float) for t, w in zip(ts, ws)) / (b - a))
    return np.array(out)


def ihk_interpolate(v, slab, space: FeSpace) -> np.ndarray:
    """Nodal interpolant at the slab midpoint (free coefficients, constant in time)."""
    tm = 0.5 * (slab[0] + slab[1])
    return space.nodal_free(v, tm)


def ihk_error(v, space: FeSpace, partition: TimePartition, order: int = 6) -> float:
    """(sum_n int_{I_n} ||I_hk v - v(t)||^2 dt)^(1/2)."""
    tot = 0.0
    for slab in partition.slabs():
        c = ihk_interpolate(v, slab, space)
        ts, ws = _gauss(*slab, order)
        for t, w in zip(ts, ws):
            tot += w * l2_error(space, c, v, t) ** 2
    return float(np.sqrt(tot))


def ihk_grad_error(v, grad_v, space: FeSpace, partition: TimePartition, order: int = 6) -> float:
    tot = 0.0
    for slab in partition.slabs():
        c = ihk_interpolate(v, slab, space)
        ts, ws = _gauss(*slab, order)
        for t, w in zip(ts, ws):
            tot += w * h1_semi_error(space, c, grad_v, t) ** 2
    return float(np.sqrt(tot))


def observed_orders(hs, errs):
    hs, errs = np.asarray(hs, float), np.asarray(errs, float)
    out = [np.nan]
    for i in range(1, len(hs)):
        out.append(np.log(errs[i - 1] / errs[i]) / np.log(hs[i - 1] / hs[i]))
    return np.array(out)


@dataclass
class RateRow:
    level: int
    h: float
    err_l2: float
    err_grad: float
    order_l2: float
    order_grad: float


def verify_projection_rates(meshes, v, grad_v, dirichlet: bool = True) -> list:
    """Errors ||E_h v|| and ||grad E_h v|| with observed orders over a mesh family."""
    hs, e0, e1 = [], [], []
    for m in meshes:
        sp_ = space_for(m, dirichlet)
        c = ph_project(sp_, v).coef
        hs.append(float(m.h.max()))
        e0.append(l2_error(sp_, c, v))
        e1.append(h1_semi_error(sp_, c, grad_v))
    o0, o1 = observed_orders(hs, e0), observed_orders(hs, e1)
    return [RateRow(i, hs[i], e0[i], e1[i], o0[i], o1[i]) for i in range(len(hs))]


def uniform_family(mesh: Mesh, levels: int) -> list:
    out = [mesh]
    for _ in range(levels - 1):
        out.append(refine_uniform(out[-1]))
    return out


def ehk_split(space: FeSpace, v, partition: TimePartition, n: int, t: float):
    """(E_hk v, E_h v, E_k P_h v) at time t in slab n, as free-coefficient
    differences on the space (v is represented by P_h v(t) where needed).

    Returned vectors are the coefficient parts; the identity
    E_hk = E_h + E_k P_h holds for them up to the common -v(t) term.
    """
    a, b = partition.slab(n)
    ph_t = project(space, lambda x: v(x, t))
    ts, ws = _gauss(a, b, 8)
    pkph = sum(w * project(space, lambda x, s=s: v(x, s)) for s, w in zip(ts, ws)) / (b - a)
    return pkph, ph_t, pkph - ph_t
