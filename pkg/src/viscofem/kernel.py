"""Memory kernels and the time moments needed by the slab scheme.

Two kernel families are supported, both nonnegative and nonincreasing:

* Prony sums          K(t) = sum_i gamma_i * exp(-lambda_i t)
* tempered power law  K(t) = c * t**(rho - 1) * exp(-eta t),  0 < rho <= 1

All time integrals of the form int K(r) * poly(r) dr are evaluated through
power moments of the kernel, which are available in closed form through the
regularized incomplete gamma function.  The weak singularity of the power law
at r = 0 is therefore never sampled.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb, exp, factorial, gamma, inf, isfinite, sqrt

import numpy as np
from scipy import integrate, special


class KernelError(ValueError):
    pass


class NonContractiveKernel(KernelError):
    pass


class NonPositiveParameter(KernelError):
    pass


class QuadratureFailure(RuntimeError):
    pass


class KernelNotSquareIntegrable(KernelError):
    pass


class NonContiguousSlab(ValueError):
    pass


QUAD_RTOL = 1e-10
QUAD_ATOL = 1e-14

_GL_X, _GL_W = np.polynomial.legendre.leggauss(30)
_GL_X2, _GL_W2 = np.polynomial.legendre.leggauss(40)


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "zero"
    terms: tuple = ()
    c: float = 0.0
    rho: float = 1.0
    eta: float = 0.0
    # finite horizon used only to admit eta = 0 power laws
    horizon: float = inf

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def prony(cls, terms):
        return cls("prony", terms=tuple((float(g), float(l)) for g, l in terms))

    @classmethod
    def powerlaw(cls, c, rho, eta=0.0, horizon=inf):
        return cls("powerlaw", c=float(c), rho=float(rho), eta=float(eta), horizon=float(horizon))

    @property
    def is_zero(self):
        if self.kind == "zero":
            return True
        if self.kind == "prony":
            return all(g == 0.0 for g, _ in self.terms)
        return self.c == 0.0

    @property
    def kappa(self):
        """L1 mass on (0, inf); for eta = 0 power laws the mass on (0, horizon)."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "prony":
            return sum(g / l for g, l in self.terms)
        if self.eta > 0:
            return self.c * gamma(self.rho) / self.eta**self.rho
        return self.c * self.horizon**self.rho / self.rho

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(t)
        if self.kind == "prony":
            out = np.zeros_like(t)
            for g, l in self.terms:
                out = out + g * np.exp(-l * t)
            return out
        with np.errstate(divide="ignore"):
            return self.c * t ** (self.rho - 1.0) * np.exp(-self.eta * t)

    def squared(self):
        """Kernel whose values are K(t)**2 (same family, not validated)."""
        if self.kind == "zero":
            return self
        if self.kind == "prony":
            terms = tuple(
                (g1 * g2, l1 + l2) for g1, l1 in self.terms for g2, l2 in self.terms
            )
            return KernelSpec("prony", terms=terms)
        if self.rho <= 0.5:
            raise KernelNotSquareIntegrable(
                f"power-law kernel with rho={self.rho} is not locally square integrable"
            )
        return KernelSpec("powerlaw", c=self.c**2, rho=2 * self.rho - 1, eta=2 * self.eta)

    def mass(self, a, b):
        """int_a^b K(r) dr for 0 <= a <= b."""
        if b <= a:
            return 0.0
        return float(power_moments(self, a, b, 0)[0])


def validate_kernel(spec: KernelSpec, horizon: float = inf) -> float:
    """Check the kernel parameters and return its L1 mass kappa (< 1)."""
    if spec.kind == "zero":
        return 0.0
    if spec.kind == "prony":
        if not spec.terms:
            raise NonPositiveParameter("prony kernel needs at least one term")
        for g, l in spec.terms:
            if not (g > 0 and l > 0):
                raise NonPositiveParameter(f"prony term ({g}, {l}) must be positive")
        kappa = spec.kappa
    elif spec.kind == "powerlaw":
        if not spec.c > 0:
            raise NonPositiveParameter("power-law amplitude c must be > 0")
        if not 0 < spec.rho <= 1:
            raise NonPositiveParameter("power-law exponent rho must lie in (0, 1]")
        if spec.eta < 0:
            raise NonPositiveParameter("tempering rate eta must be >= 0")
        if spec.eta == 0:
            h = min(horizon, spec.horizon)
            if not isfinite(h):
                raise NonContractiveKernel("untempered power law has infinite mass on (0, inf)")
            kappa = spec.c * h**spec.rho / spec.rho
        else:
            kappa = spec.kappa
    else:
        raise KernelError(f"unknown kernel type {spec.kind!r}")
    if kappa >= 1.0:
        raise NonContractiveKernel(f"kernel mass kappa={kappa:.6g} must be < 1")
    return kappa


def finite_horizon_mass(spec: KernelSpec, horizon: float) -> float:
    return spec.mass(0.0, horizon)


# --------------------------------------------------------------------------
# power moments


def _lower_gamma_diff(s, x0, x1):
    """Gamma(s) * (P(s, x1) - P(s, x0)) for 0 <= x0 <= x1, cancellation-aware."""
    if x1 <= x0:
        return 0.0
    if x0 > s:
        return gamma(s) * (special.gammaincc(s, x0) - special.gammaincc(s, x1))
    return gamma(s) * (special.gammainc(s, x1) - special.gammainc(s, x0))


def _exp_moment(lam, L, m):
    """int_0^L exp(-lam x) x^m dx."""
    if lam * L < 1e-3:
        # series keeps relative accuracy for tiny lam*L
        total, term, k = 0.0, 1.0, 0
        while True:
            add = term * L ** (m + k + 1) / (m + k + 1)
            total += add
            k += 1
            term *= -lam / k
            if abs(add) <= 1e-17 * abs(total) or k > 40:
                return total
    return factorial(m) / lam ** (m + 1) * special.gammainc(m + 1, lam * L)


def _powerlaw_origin_moment(c, rho, eta, x, k):
    """c * int_0^x r^(rho-1+k) exp(-eta r) dr."""
    s = rho + k
    if eta == 0.0 or eta * x < 1e-8:
        return c * x**s / s
    return c * gamma(s) * special.gammainc(s, eta * x) / eta**s


def _powerlaw_span(c, rho, eta, a, b, k):
    s = rho + k
    if eta == 0.0:
        return c * (b**s - a**s) / s
    return c * _lower_gamma_diff(s, eta * a, eta * b) / eta**s


def power_moments(spec: KernelSpec, a: float, b: float, mmax: int = 3) -> np.ndarray:
    """Return [int_a^b K(r) (r - a)^m dr for m = 0..mmax], with 0 <= a <= b."""
    out = np.zeros(mmax + 1)
    L = b - a
    if L <= 0 or spec.is_zero:
        return out
    if spec.kind == "prony":
        for g, l in spec.terms:
            ea = exp(-l * a)
            for m in range(mmax + 1):
                out[m] += g * ea * _exp_moment(l, L, m)
        return out
    c, rho, eta = spec.c, spec.rho, spec.eta
    if a == 0.0:
        for m in range(mmax + 1):
            out[m] = _powerlaw_origin_moment(c, rho, eta, L, m)
        return out
    if L <= a:
        # kernel is smooth on [a, b]; Gauss-Legendre converges geometrically
        def gl(xs, ws):
            r = a + 0.5 * L * (xs + 1.0)
            kr = c * r ** (rho - 1.0) * np.exp(-eta * r)
            return np.array([0.5 * L * np.sum(ws * kr * (r - a) ** m) for m in range(mmax + 1)])

        v1, v2 = gl(_GL_X, _GL_W), gl(_GL_X2, _GL_W2)
        err = np.abs(v1 - v2)
        if np.any(err > QUAD_RTOL * np.abs(v2) + QUAD_ATOL):
            raise QuadratureFailure(f"power moments on [{a}, {b}] did not converge")
        return v2
    # binomial expansion around the origin; b > 2a keeps cancellation bounded
    raw = [_powerlaw_span(c, rho, eta, a, b, k) for k in range(mmax + 1)]
    for m in range(mmax + 1):
        out[m] = sum(comb(m, k) * raw[k] * (-a) ** (m - k) for k in range(m + 1))
    return out


# --------------------------------------------------------------------------
# slab moments

_CHEB = 0.5 * (1 - np.cos(np.pi * (np.arange(4) + 0.5) / 4))
_VINV = np.linalg.inv(np.vander(_CHEB, 4, increasing=True))
_G2 = np.array([0.5 - 0.5 / sqrt(3), 0.5 + 0.5 / sqrt(3)])


def _inner_product_profile(A, B, C, D, r):
    """g[p, q](r) = int psi_p(t) phi_q(t - r) dt over the admissible t range."""
    lo = max(A, C + r)
    hi = min(B, D + r)
    g = np.zeros((2, 2))
    if hi <= lo:
        return g
    t = lo + (hi - lo) * _G2
    w = 0.5 * (hi - lo)
    psi = np.array([(B - t) / (B - A), (t - A) / (B - A)])
    s = t - r
    phi = np.array([(D - s) / (D - C), (s - C) / (D - C)])
    return w * psi @ phi.T


def _moment_matrix_raw(spec, A, B, C, D):
    W = np.zeros((2, 2))
    rmin, rmax = max(0.0, A - D), B - C
    if rmax <= rmin:
        return W
    bps = sorted({rmin, rmax, *(x for x in (A - C, A - D, B - C, B - D) if rmin < x < rmax)})
    for a, b in zip(bps[:-1], bps[1:]):
        L = b - a
        if L <= 1e-15 * max(1.0, rmax):
            continue
        samples = np.array([_inner_product_profile(A, B, C, D, a + x * L) for x in _CHEB])
        coef = np.einsum("mi,ipq->mpq", _VINV, samples)
        mom = power_moments(spec, a, b, 3) / L ** np.arange(4)
        W += np.einsum("m,mpq->pq", mom, coef)
    return W


@lru_cache(maxsize=200_000)
def _moment_matrix_cached(spec, kl, ke, gap):
    return _moment_matrix_raw(spec, gap, gap + kl, 0.0, ke)


def moment_matrix(spec: KernelSpec, later, earlier) -> np.ndarray:
    """W[p, q] = int_{later} psi_p(t) int_{earlier, s<=t} K(t-s) phi_q(s) ds dt.

    psi_p / phi_q are the two linear nodal shapes (left, right) of the slabs.
    The result only depends on slab lengths and their offset, which is used
    as a cache key.
    """
    A, B = later
    C, D = earlier
    if C > B:
        raise ValueError("earlier slab must start before the later slab ends")
    if spec.is_zero:
        return np.zeros((2, 2))
    key = (round(B - A, 14), round(D - C, 14), round(A - C, 14))
    return _moment_matrix_cached(spec, *key).copy()


def slab_weights(spec: KernelSpec, slab_n, slab_j):
    """Convolution weights of the two nodal shapes on slab_j against a constant test on slab_n."""
    W = moment_matrix(spec, slab_n, slab_j)
    w = W.sum(axis=0)
    return float(w[0]), float(w[1])


def point_weights(spec: KernelSpec, t: float, slab) -> np.ndarray:
    """[int_{C}^{min(D,t)} K(t-s) phi_q(s) ds for q = 0, 1]."""
    C, D = slab
    if t <= C or spec.is_zero:
        return np.zeros(2)
    a, b = t - min(D, t), t - C
    m = power_moments(spec, a, b, 1)
    # phi_1(t - r) = (t - a - C)/(D - C) - (r - a)/(D - C)
    k = D - C
    w1 = ((t - a - C) * m[0] - m[1]) / k
    return np.array([m[0] - w1, w1])


class PiecewiseLinearPath:
    """Scalar (or vector) path linear on each slab of a partition."""

    def __init__(self, nodes, values):
        self.nodes = np.asarray(nodes, dtype=float)
        self.values = np.asarray(values, dtype=float)

    def slab(self, j):
        return self.nodes[j - 1], self.nodes[j]


def history_pieces(spec: KernelSpec, t: float, path: PiecewiseLinearPath) -> list:
    """Per-slab pieces (K*y)^j(t) = int_{t_{j-1}}^{t_j ^ t} K(t-s) y(s) ds, j = 1..N."""
    nodes = path.nodes
    if t < nodes[0] - 1e-14 or t > nodes[-1] * (1 + 1e-14) + 1e-14:
        raise ValueError("t outside partition range")
    pieces = []
    for j in range(1, len(nodes)):
        C, D = nodes[j - 1], nodes[j]
        if C >= t:
            pieces.append(np.zeros_like(path.values[0]))
            continue
        w = point_weights(spec, t, (C, D))
        pieces.append(w[0] * path.values[j - 1] + w[1] * path.values[j])
    return pieces


def pointwise_history(spec: KernelSpec, t: float, path: PiecewiseLinearPath):
    """int_0^t K(t-s) y(s) ds for a piecewise linear path y."""
    pieces = history_pieces(spec, t, path)
    return sum(pieces) if pieces else 0.0


@dataclass
class PronyHistoryState:
    """Accumulators H_i(t) = int_0^t exp(-lambda_i (t-s)) y(s) ds, one row per term."""

    rates: np.ndarray
    values: np.ndarray
    time: float = 0.0

    @classmethod
    def start(cls, spec: KernelSpec, shape, time=0.0):
        rates = np.array([l for _, l in spec.terms], dtype=float)
        return cls(rates, np.zeros((len(rates),) + tuple(np.atleast_1d(shape))), time)

    def evaluate(self, spec: KernelSpec):
        gam = np.array([g for g, _ in spec.terms])
        return np.tensordot(gam, self.values, axes=1)


def prony_increment_weights(lam: float, k: float):
    """Exact weights (left, right) of int_{I} exp(-lam (t_n - s)) y(s) ds for linear y."""
    # x = t_n - s; left shape = x/k, right shape = 1 - x/k
    j0 = _exp_moment(lam, k, 0)
    j1 = _exp_moment(lam, k, 1)
    return j1 / k, j0 - j1 / k


def prony_history_advance(state: PronyHistoryState, new_slab, left, right) -> PronyHistoryState:
    t0, t1 = new_slab
    if abs(t0 - state.time) > 1e-12 * max(1.0, abs(t0)):
        raise NonContiguousSlab(f"slab starts at {t0}, history is at {state.time}")
    k = t1 - t0
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    vals = np.empty_like(state.values)
    for i, lam in enumerate(state.rates):
        wl, wr = prony_increment_weights(lam, k)
        vals[i] = exp(-lam * k) * state.values[i] + wl * left + wr * right
    return PronyHistoryState(state.rates, vals, t1)


def tail_factors(spec: KernelSpec, t: float, slab_j, T: float, want_l2: bool = False):
    """Weight factors (K_nT, K_nj, K_nT_L2) of the global estimate at time t."""
    if t > T:
        raise ValueError("t must not exceed T")
    C, D = slab_j
    knt = sqrt(spec.mass(0.0, T - t))
    lo = max(t, C)
    knj = sqrt(spec.mass(lo - t, D - t)) if D > lo else 0.0
    kl2 = float("nan")
    if want_l2:
        kl2 = l2_norm_on(spec, 0.0, T - t)
    return knt, knj, kl2


def l2_norm_on(spec: KernelSpec, a: float, b: float) -> float:
    """(int_a^b K(r)^2 dr)^(1/2)."""
    if spec.is_zero or b <= a:
        return 0.0
    return sqrt(spec.squared().mass(a, b))


def quad_mass(spec: KernelSpec, a: float, b: float) -> float:
    """Adaptive-quadrature oracle for int_a^b K (independent of the moment code)."""
    val, _ = integrate.quad(lambda r: float(spec(r)), a, b, limit=400, epsabs=1e-14, epsrel=1e-12)
    return val
