"""Problem specifications, manufactured solutions and the pulse scenario.

Data callables take points x of shape (n, dim) and a time t and return
(n,) values in 1D or (n, 2) values in 2D.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .assembly import ElasticParams
from .kernel import KernelSpec, QuadratureFailure, validate_kernel
from .mesh import Mesh, interval_mesh, rectangle_mesh


class ProblemError(ValueError):
    pass


def _zero1(x, t=None):
    return np.zeros(len(x))


def _zero2(x, t=None):
    return np.zeros((len(x), 2))


@dataclass
class ProblemSpec:
    name: str
    dim: int
    params: ElasticParams
    kernel: KernelSpec
    make_mesh: Callable[[int], Mesh]
    f: Callable
    g: Callable
    u0: Callable
    v0: Callable
    T: float = 1.0
    exact_u1: Optional[Callable] = None
    exact_u2: Optional[Callable] = None
    # extra metadata (e.g. the time profile of a traction pulse)
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        validate_kernel(self.kernel)
        if self.dim not in (1, 2):
            raise ProblemError("dim must be 1 or 2")

    @property
    def ncomp(self):
        return 1 if self.dim == 1 else 2

    @property
    def has_exact(self):
        return self.exact_u1 is not None

    def with_kernel(self, kernel: KernelSpec) -> "ProblemSpec":
        if self.info.get("rebuild") is None:
            raise ProblemError(f"problem {self.name} cannot change its kernel")
        return self.info["rebuild"](kernel)

    def mesh(self, n: int) -> Mesh:
        m = self.make_mesh(n)
        if m.dirichlet_vertices.size == 0:
            raise ProblemError("Dirichlet boundary has zero measure")
        return m


# --------------------------------------------------------------- convolutions


def conv_linear(kernel: KernelSpec, t: float) -> float:
    """int_0^t K(t-s) s ds."""
    if kernel.is_zero or t <= 0:
        return 0.0
    if kernel.kind == "prony":
        out = 0.0
        for g, l in kernel.terms:
            out += g * (l * t - 1.0 + np.exp(-l * t)) / l**2
        return out
    return _quad_conv(kernel, t, lambda s: s)


def conv_sin(kernel: KernelSpec, t: float) -> float:
    """int_0^t K(t-s) sin(s) ds."""
    if kernel.is_zero or t <= 0:
        return 0.0
    if kernel.kind == "prony":
        out = 0.0
        for g, l in kernel.terms:
            out += g * (l * np.sin(t) - np.cos(t) + np.exp(-l * t)) / (1.0 + l**2)
        return out
    return _quad_conv(kernel, t, np.sin)


def _quad_conv(kernel, t, fn):
    # K(r) = c r^(rho-1) e^(-eta r): algebraic endpoint weight at r = 0
    val, err = integrate.quad(
        lambda r: kernel.c * np.exp(-kernel.eta * r) * fn(t - r),
        0.0, t, weight="alg", wvar=(kernel.rho - 1.0, 0.0), epsabs=1e-13, epsrel=1e-12, limit=200,
    )
    if not np.isfinite(val) or err > 1e-9 * max(1.0, abs(val)):
        raise QuadratureFailure(f"convolution quadrature did not converge at t={t}")
    return float(val)


def _time_scalar(fn):
    cache = {}

    def wrapped(t):
        t = float(t)
        v = cache.get(t)
        if v is None:
            v = cache[t] = fn(t)
        return v

    return wrapped


# ----------------------------------------------------------------- problems


def mms_linear(kernel: KernelSpec | None = None, params: ElasticParams | None = None, T: float = 1.0) -> ProblemSpec:
    """u1 = x t on (0,1), clamped at 0, traction at 1."""
    kernel = kernel or KernelSpec.zero()
    params = params or ElasticParams(0.5, 0.0)
    E = params.E
    hist = _time_scalar(lambda t: conv_linear(kernel, t))

    def g(x, t):
        return np.full(len(x), E * (t - hist(t)))

    return ProblemSpec(
        "mms_linear", 1, params, kernel, lambda n: interval_mesh(n),
        f=_zero1, g=g,
        u0=lambda x: np.zeros(len(x)),
        v0=lambda x: x[:, 0].copy(),
        T=T,
        exact_u1=lambda x, t: x[:, 0] * t,
        exact_u2=lambda x, t: x[:, 0].copy(),
        info={"rebuild": lambda k: mms_linear(k, params, T)},
    )


def mms_smooth(kernel: KernelSpec | None = None, dim: int = 1, params: ElasticParams | None = None, T: float = 1.0) -> ProblemSpec:
    """u1 = sin(pi x) sin(t) in 1D, (sin(pi x) sin(pi y), 0) sin(t) in 2D."""
    if dim not in (1, 2):
        raise ProblemError("dim must be 1 or 2")
    kernel = kernel or KernelSpec.zero()
    params = params or ElasticParams(0.5, 0.0 if dim == 1 else 0.5)
    hist = _time_scalar(lambda t: conv_sin(kernel, t))
    pi = np.pi
    rebuild = lambda k: mms_smooth(k, dim, params, T)

    if dim == 1:
        E = params.E

        def f(x, t):
            s = np.sin(pi * x[:, 0])
            return s * (-np.sin(t) + E * pi**2 * (np.sin(t) - hist(t)))

        def g(x, t):
            return E * pi * np.cos(pi * x[:, 0]) * (np.sin(t) - hist(t))

        return ProblemSpec(
            "mms_smooth", 1, params, kernel, lambda n: interval_mesh(n),
            f=f, g=g,
            u0=lambda x: np.zeros(len(x)),
            v0=lambda x: np.sin(pi * x[:, 0]),
            T=T,
            exact_u1=lambda x, t: np.sin(pi * x[:, 0]) * np.sin(t),
            exact_u2=lambda x, t: np.sin(pi * x[:, 0]) * np.cos(t),
            info={"rebuild": rebuild},
        )

    mu, lam = params.mu0, params.lambda0

    def w(x):
        return np.sin(pi * x[:, 0]) * np.sin(pi * x[:, 1])

    def vec(a, b=None):
        out = np.zeros((len(a), 2))
        out[:, 0] = a
        if b is not None:
            out[:, 1] = b
        return out

    def f(x, t):
        sx, cx = np.sin(pi * x[:, 0]), np.cos(pi * x[:, 0])
        sy, cy = np.sin(pi * x[:, 1]), np.cos(pi * x[:, 1])
        q = np.sin(t) - hist(t)
        div1 = -(2 * mu + lam) * pi**2 * sx * sy - mu * pi**2 * sx * sy
        div2 = (mu + lam) * pi**2 * cx * cy
        return vec(-sx * sy * np.sin(t) - div1 * q, -div2 * q)

    def g(x, t):
        sx, cx = np.sin(pi * x[:, 0]), np.cos(pi * x[:, 0])
        sy, cy = np.sin(pi * x[:, 1]), np.cos(pi * x[:, 1])
        wx, wy = pi * cx * sy, pi * sx * cy
        s11, s12, s22 = (2 * mu + lam) * wx, mu * wy, lam * wx
        n = np.zeros((len(x), 2))
        tol = 1e-12
        n[np.abs(x[:, 0] - 1.0) < tol, 0] = 1.0
        n[np.abs(x[:, 1]) < tol, 1] = -1.0
        n[np.abs(x[:, 1] - 1.0) < tol, 1] = 1.0
        q = np.sin(t) - hist(t)
        return q * vec(s11 * n[:, 0] + s12 * n[:, 1], s12 * n[:, 0] + s22 * n[:, 1])

    return ProblemSpec(
        "mms_smooth", 2, params, kernel, lambda n: rectangle_mesh(n, n),
        f=f, g=g,
        u0=_zero2,
        v0=lambda x: vec(w(x)),
        T=T,
        exact_u1=lambda x, t: vec(w(x) * np.sin(t)),
        exact_u2=lambda x, t: vec(w(x) * np.cos(t)),
        info={"rebuild": rebuild},
    )


@dataclass(frozen=True)
class TabulatedSeries:
    """Piecewise linear g(t) from samples."""

    times: tuple
    values: tuple

    def __call__(self, t):
        return float(np.interp(t, self.times, self.values))

    @classmethod
    def from_csv(cls, path):
        """Two columns (time, value); a non-numeric header row is skipped."""
        with open(path) as fh:
            first = fh.readline().split(",")[0].strip()
        try:
            float(first)
            skip = 0
        except ValueError:
            skip = 1
        data = np.loadtxt(path, delimiter=",", ndmin=2, skiprows=skip)
        return cls(tuple(data[:, 0]), tuple(data[:, 1]))


def pulse_profile(duration: float = 0.5):
    def p(t):
        return float(np.sin(np.pi * t / duration) ** 2) if 0.0 <= t <= duration else 0.0

    return p


def scenario_bar(
    amplitude: float = 1.0,
    kernel: KernelSpec | None = None,
    params: ElasticParams | None = None,
    T: float = 1.0,
    length: float = 2.0,
    center: float = 0.5,
    width: float = 0.3,
    profile: Callable | None = None,
) -> ProblemSpec:
    """Clamped bar pulled by a traction pulse on part of its right end."""
    kernel = kernel or KernelSpec.prony([(0.5, 1.0)])
    params = params or ElasticParams(1.0, 1.0)
    profile = profile or pulse_profile()

    def g(x, t):
        out = np.zeros((len(x), 2))
        if amplitude == 0.0:
            return out
        right = np.abs(x[:, 0] - length) < 1e-12
        s = np.clip(1.0 - ((x[:, 1] - center) / width) ** 2, 0.0, None) ** 2
        out[:, 0] = np.where(right, amplitude * s * profile(t), 0.0)
        return out

    return ProblemSpec(
        "scenario_bar", 2, params, kernel,
        lambda n: rectangle_mesh(2 * n, n, lx=length, ly=1.0),
        f=_zero2, g=g, u0=_zero2, v0=_zero2, T=T,
        info={
            "rebuild": lambda k: scenario_bar(amplitude, k, params, T, length, center, width, profile),
            "length": length,
        },
    )


PROBLEMS = {
    "mms_linear": mms_linear,
    "mms_smooth": mms_smooth,
    "scenario_bar": scenario_bar,
}


def goal_weight(name: str, dim: int, length: float = 2.0) -> Callable:
    """End-time goal weights by name.

    sin_half vanishes at x = 0 and has zero slope at x = 1, so it is compatible
    with a clamped left end and a free right end.  bump sits near the middle of x = length.
    """
    if name == "sin_half":
        if dim == 1:
            return lambda x: np.sin(0.5 * np.pi * x[:, 0])
        return lambda x: np.stack([np.sin(0.5 * np.pi * x[:, 0]), np.zeros(len(x))], axis=1)
    if name == "sin":
        if dim == 1:
            return lambda x: np.sin(np.pi * x[:, 0])
        return lambda x: np.stack([np.sin(np.pi * x[:, 0]) * x[:, 1], np.zeros(len(x))], axis=1)
    if name == "ones":
        return (lambda x: np.ones(len(x))) if dim == 1 else (lambda x: np.stack([np.ones(len(x)), np.zeros(len(x))], 1))
    if name == "bump":
        if dim == 1:
            return lambda x: np.exp(-((x[:, 0] - 1.0) ** 2) / 0.05)
        return lambda x: np.stack([np.exp(-((x[:, 0] - length) ** 2 + (x[:, 1] - 0.5) ** 2) / 0.05),
                                   np.zeros(len(x))], axis=1)
    raise ProblemError(f"unknown goal weight {name!r}")


def get_problem(name: str, **kw) -> ProblemSpec:
    try:
        return PROBLEMS[name](**kw)
    except KeyError:
        raise ProblemError(f"unknown problem {name!r}") from None
