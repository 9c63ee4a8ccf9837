"""Space-time functions and exact evaluation of the forms B, B2, B*, L, L*.

A space-time function is either continuous and piecewise linear in time
(``kind='cont'``, one spatial value per time node) or piecewise constant in
time (``kind='pwc'``, one value per slab, right continuous).  Spatial values
are free coefficient vectors on FeSpaces of one forest, so products between
different meshes are exact through cross operators.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import ElasticParams, cross, load_full, neumann_full
from .kernel import KernelSpec, moment_matrix
from .primal import Discrete, SpaceTimeSolution


class IncompatibleSlabbing(ValueError):
    pass


@dataclass
class STFunction:
    nodes: np.ndarray
    kind: str
    spaces: list
    c1: list
    c2: list

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        n = len(self.nodes) - 1
        want = n + 1 if self.kind == "cont" else n
        if self.kind not in ("cont", "pwc"):
            raise IncompatibleSlabbing(f"unknown kind {self.kind!r}")
        if not (len(self.spaces) == len(self.c1) == len(self.c2) == want):
            raise IncompatibleSlabbing("coefficient lists do not match the time nodes")

    @classmethod
    def from_solution(cls, sol: SpaceTimeSolution) -> "STFunction":
        return cls(sol.partition.nodes, "cont", list(sol.spaces), list(sol.U1), list(sol.U2))

    def slab_of(self, a, b):
        """Index n (1-based) of the slab of this function containing (a, b)."""
        n = int(np.searchsorted(self.nodes, 0.5 * (a + b)))
        if not (self.nodes[n - 1] <= a + 1e-13 and b <= self.nodes[n] + 1e-13):
            raise IncompatibleSlabbing("interval straddles a slab of the function")
        return n

    def value(self, t, n, comp):
        """Value at time t in slab n as a list of (weight, space, coef)."""
        c = self.c1 if comp == 1 else self.c2
        if self.kind == "pwc":
            return [(1.0, self.spaces[n - 1], c[n - 1])]
        a, b = self.nodes[n - 1], self.nodes[n]
        th = (t - a) / (b - a)
        out = []
        if th != 1.0:
            out.append((1.0 - th, self.spaces[n - 1], c[n - 1]))
        if th != 0.0:
            out.append((th, self.spaces[n], c[n]))
        return out

    def ends(self, a, b, comp):
        n = self.slab_of(a, b)
        return self.value(a, n, comp), self.value(b, n, comp)

    def scaled(self, s):
        return STFunction(self.nodes, self.kind, self.spaces, [s * c for c in self.c1], [s * c for c in self.c2])


def combine(x: STFunction, y: STFunction, a=1.0, b=1.0) -> list:
    """Formal linear combination a*x + b*y (kept as a list of weighted functions)."""
    return [(a, x), (b, y)]


# ---------------------------------------------------------------- lincomb algebra


def _ip(kind, A, B, params):
    s = 0.0
    for wa, Xa, ca in A:
        for wb, Xb, cb in B:
            if wa == 0.0 or wb == 0.0:
                continue
            s += wa * wb * float(ca @ (cross(kind, Xa, Xb, params) @ cb))
    return s


def _neg(A):
    return [(-w, X, c) for w, X, c in A]


def _scale(A, s):
    return [(s * w, X, c) for w, X, c in A]


def _merged_nodes(*fs):
    nodes = np.unique(np.concatenate([f.nodes for f in fs]))
    T = fs[0].nodes[-1]
    for f in fs:
        if abs(f.nodes[-1] - T) > 1e-12 or f.nodes[0] != 0.0:
            raise IncompatibleSlabbing("functions live on different time intervals")
    # collapse roundoff duplicates
    keep = np.concatenate([[True], np.diff(nodes) > 1e-12 * max(1.0, T)])
    return nodes[keep]


def _lin(kind, uL, uR, vL, vR, h, params):
    """int over an interval of length h of (u, v) for linear-in-time u, v."""
    return h * (
        _ip(kind, uL, vL, params) / 3.0 + _ip(kind, uL, vR, params) / 6.0
        + _ip(kind, uR, vL, params) / 6.0 + _ip(kind, uR, vR, params) / 3.0
    )


def _history(u: STFunction, v: STFunction, nodes, kernel, params, swap=False):
    """int_0^T int_0^t K(t-s) a(u1(s), v2(t)) ds dt."""
    if kernel.is_zero:
        return 0.0
    m = len(nodes) - 1
    ends_u = [u.ends(nodes[i], nodes[i + 1], 1) for i in range(m)]
    ends_v = [v.ends(nodes[i], nodes[i + 1], 2) for i in range(m)]
    pairs = [(i, j) for i in range(m) for j in range(i + 1)]
    if swap:
        pairs = sorted(pairs, key=lambda p: (p[1], p[0]))
    tot = 0.0
    for i, j in pairs:
        W = moment_matrix(kernel, (nodes[i], nodes[i + 1]), (nodes[j], nodes[j + 1]))
        for p in range(2):
            for q in range(2):
                if W[p, q] != 0.0:
                    tot += W[p, q] * _ip("S", ends_u[j][q], ends_v[i][p], params)
    return tot


def form_B(u: STFunction, v: STFunction, kernel: KernelSpec, params: ElasticParams, variant: int = 1) -> float:
    if u.kind != "cont":
        raise IncompatibleSlabbing("the trial argument must be continuous in time")
    nodes = _merged_nodes(u, v)
    tot = 0.0
    for i in range(len(nodes) - 1):
        a, b = nodes[i], nodes[i + 1]
        h = b - a
        u1L, u1R = u.ends(a, b, 1)
        u2L, u2R = u.ends(a, b, 2)
        v1L, v1R = v.ends(a, b, 1)
        v2L, v2R = v.ends(a, b, 2)
        d1, d2 = u1R + _neg(u1L), u2R + _neg(u2L)
        tot += _ip("M", d2, _scale(v2L + v2R, 0.5), params)
        tot += _ip("M", d1, _scale(v1L + v1R, 0.5), params)
        tot += _lin("S", u1L, u1R, v2L, v2R, h, params)
        tot -= _lin("M", u2L, u2R, v1L, v1R, h, params)
    tot -= _history(u, v, nodes, kernel, params, swap=(variant == 2))
    n0 = (nodes[0], nodes[1])
    tot += _ip("M", u.ends(*n0, 1)[0], v.ends(*n0, 1)[0], params)
    tot += _ip("M", u.ends(*n0, 2)[0], v.ends(*n0, 2)[0], params)
    return tot


def form_Bstar(v: STFunction, z: STFunction, kernel: KernelSpec, params: ElasticParams) -> float:
    if v.kind != "cont" or z.kind != "cont":
        raise IncompatibleSlabbing("B* needs arguments continuous in time")
    nodes = _merged_nodes(v, z)
    tot = 0.0
    for i in range(len(nodes) - 1):
        a, b = nodes[i], nodes[i + 1]
        h = b - a
        v1L, v1R = v.ends(a, b, 1)
        v2L, v2R = v.ends(a, b, 2)
        z1L, z1R = z.ends(a, b, 1)
        z2L, z2R = z.ends(a, b, 2)
        tot -= _ip("M", _scale(v1L + v1R, 0.5), z1R + _neg(z1L), params)
        tot -= _ip("M", _scale(v2L + v2R, 0.5), z2R + _neg(z2L), params)
        tot += _lin("S", v1L, v1R, z2L, z2R, h, params)
        tot -= _lin("M", v2L, v2R, z1L, z1R, h, params)
    tot -= _history(v, z, nodes, kernel, params, swap=True)
    nT = (nodes[-2], nodes[-1])
    tot += _ip("M", v.ends(*nT, 1)[1], z.ends(*nT, 1)[1], params)
    tot += _ip("M", v.ends(*nT, 2)[1], z.ends(*nT, 2)[1], params)
    return tot


def _gauss(a, b, n):
    x, w = np.polynomial.legendre.leggauss(n)
    return a + 0.5 * (b - a) * (x + 1.0), 0.5 * (b - a) * w


def _load_pair(A, fn, t, neumann=False):
    s = 0.0
    for w, X, c in A:
        if w == 0.0:
            continue
        vec = neumann_full(X.mesh, X.ncomp, fn, t) if neumann else load_full(X.mesh, X.ncomp, fn, t)
        s += w * float(c @ (X.C.T @ vec))
    return s


def _init_pair(A, data):
    if data is None:
        return 0.0
    s = 0.0
    for w, X, c in A:
        if isinstance(data, Discrete):
            s += w * float(c @ (cross("M", X, data.space) @ data.coef))
        else:
            s += w * float(c @ (X.C.T @ load_full(X.mesh, X.ncomp, data)))
    return s


def form_L(v: STFunction, f, g, u0, v0, gauss: int = 4, partition_nodes=None) -> float:
    """L(v).  Time integrals use ``gauss`` points per interval of the merged grid."""
    nodes = v.nodes if partition_nodes is None else np.union1d(v.nodes, partition_nodes)
    tot = 0.0
    for i in range(len(nodes) - 1):
        a, b = nodes[i], nodes[i + 1]
        n = v.slab_of(a, b)
        for t, w in zip(*_gauss(a, b, gauss)):
            V = v.value(t, n, 2)
            if f is not None:
                tot += w * _load_pair(V, f, t)
            if g is not None:
                tot += w * _load_pair(V, g, t, neumann=True)
    n0 = (v.nodes[0], v.nodes[1])
    tot += _init_pair(v.ends(*n0, 1)[0], u0) + _init_pair(v.ends(*n0, 2)[0], v0)
    return tot


def form_Lstar(v: STFunction, j1, j2, z1T, z2T, gauss: int = 4) -> float:
    tot = 0.0
    nodes = v.nodes
    for i in range(len(nodes) - 1):
        a, b = nodes[i], nodes[i + 1]
        n = i + 1
        for t, w in zip(*_gauss(a, b, gauss)):
            if j1 is not None:
                tot += w * _load_pair(v.value(t, n, 1), j1, t)
            if j2 is not None:
                tot += w * _load_pair(v.value(t, n, 2), j2, t)
    nT = (nodes[-2], nodes[-1])
    tot += _init_pair(v.ends(*nT, 1)[1], z1T) + _init_pair(v.ends(*nT, 2)[1], z2T)
    return tot


def evaluate_forms(which: str, u=None, v=None, kernel: KernelSpec | None = None,
                   params: ElasticParams | None = None, data=None, gauss: int = 4) -> float:
    """Evaluate one of B, B2, Bstar (two arguments) or L, Lstar (one argument v).

    For L, data carries f, g, u0, v0 (a ProblemSpec or SlabData).  For Lstar,
    data is a DualData.
    """
    kernel = kernel or KernelSpec.zero()
    params = params or ElasticParams()
    if which == "B":
        return form_B(u, v, kernel, params, 1)
    if which == "B2":
        return form_B(u, v, kernel, params, 2)
    if which == "Bstar":
        return form_Bstar(u, v, kernel, params)
    if which == "L":
        return form_L(v, data.f, data.g, data.u0, data.v0, gauss)
    if which == "Lstar":
        return form_Lstar(v, data.j1, data.j2, data.z1T, data.z2T, gauss)
    raise ValueError(f"unknown form {which!r}")
