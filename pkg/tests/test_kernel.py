import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from viscofem.kernel import (
    KernelNotSquareIntegrable,
    KernelSpec,
    NonContiguousSlab,
    NonContractiveKernel,
    NonPositiveParameter,
    PiecewiseLinearPath,
    PronyHistoryState,
    l2_norm_on,
    point_weights,
    pointwise_history,
    prony_history_advance,
    quad_mass,
    slab_weights,
    tail_factors,
    validate_kernel,
)


def _dbl(K, sn, sj):
    out = []
    for q in range(2):
        def f(s, t, q=q):
            phi = (s - sj[0]) / (sj[1] - sj[0])
            return float(K(t - s)) * (phi if q else 1 - phi)
        out.append(integrate.dblquad(f, sn[0], sn[1], lambda t: sj[0], lambda t: min(sj[1], t),
                                     epsabs=1e-13, epsrel=1e-13)[0])
    return out


def test_tempered_power_law_mass():
    K = KernelSpec.powerlaw(0.2, 0.5, 1.0)
    assert validate_kernel(K) == pytest.approx(0.2 * math.gamma(0.5), rel=1e-12)
    assert K.kappa == pytest.approx(0.35449, abs=1e-5)
    assert K.kappa == pytest.approx(quad_mass(K, 0, np.inf), rel=1e-8)


def test_validation_errors():
    with pytest.raises(NonContractiveKernel):
        validate_kernel(KernelSpec.prony([(1.5, 1.0)]))
    with pytest.raises(NonPositiveParameter):
        validate_kernel(KernelSpec.prony([(-0.1, 1.0)]))
    with pytest.raises(NonPositiveParameter):
        validate_kernel(KernelSpec.powerlaw(0.1, 1.5, 1.0))
    with pytest.raises(NonContractiveKernel):
        validate_kernel(KernelSpec.powerlaw(0.1, 0.5, 0.0))
    # an untempered power law is fine on a finite horizon
    assert validate_kernel(KernelSpec.powerlaw(0.1, 0.5, 0.0, horizon=1.0)) == pytest.approx(0.2)


def test_slab_weights_constant_kernel():
    K = KernelSpec.powerlaw(0.3, 1.0, 0.0, horizon=1.0)
    assert slab_weights(K, (0, 1), (0, 1)) == pytest.approx((0.1, 0.05), abs=1e-14)
    assert slab_weights(K, (1, 2), (0, 1)) == pytest.approx((0.15, 0.15), abs=1e-14)
    assert slab_weights(KernelSpec.zero(), (1, 2), (0, 1)) == (0.0, 0.0)


@pytest.mark.parametrize("K", [
    KernelSpec.prony([(0.4, 1.0), (0.1, 6.0)]),
    KernelSpec.powerlaw(0.2, 0.5, 1.0),
    KernelSpec.powerlaw(0.1, 0.3, 2.0),
])
@pytest.mark.parametrize("sn,sj", [((0.5, 0.75), (0.0, 0.25)), ((0.5, 0.75), (0.5, 0.75)), ((0.3, 1.0), (0.1, 0.3))])
def test_slab_weights_against_double_quadrature(K, sn, sj):
    if K.kind == "powerlaw" and sn == sj:
        pytest.skip("singular diagonal handled by the moment test below")
    assert slab_weights(K, sn, sj) == pytest.approx(_dbl(K, sn, sj), abs=1e-9)


def test_singular_diagonal_slab_weight():
    # K = c t^(rho-1): int_0^k int_0^t c (t-s)^(rho-1) ds dt = c k^(rho+1) / (rho (rho+1))
    c, rho, k = 0.2, 0.5, 0.3
    w = slab_weights(KernelSpec.powerlaw(c, rho, 0.0, horizon=1.0), (0.0, k), (0.0, k))
    assert sum(w) == pytest.approx(c * k ** (rho + 1) / (rho * (rho + 1)), rel=1e-12)


def test_point_history_closed_form():
    K = KernelSpec.prony([(0.4, 1.0)])
    path = PiecewiseLinearPath([0.0, 0.5, 1.2, 2.0], np.ones(4))
    assert pointwise_history(K, 2.0, path) == pytest.approx(0.4 * (1 - math.exp(-2)), abs=1e-14)
    assert pointwise_history(K, 2.0, path) == pytest.approx(0.34587, abs=1e-5)
    assert pointwise_history(KernelSpec.zero(), 1.0, path) == 0.0


@given(st.floats(0.05, 0.95), st.floats(0.1, 0.45), st.floats(0.3, 5.0))
def test_point_weights_match_quadrature(t, g, lam):
    K = KernelSpec.prony([(g, lam)])
    w = point_weights(K, t, (0.0, 1.0))
    ref = [integrate.quad(lambda s: g * math.exp(-lam * (t - s)) * (1 - s), 0, t)[0],
           integrate.quad(lambda s: g * math.exp(-lam * (t - s)) * s, 0, t)[0]]
    assert w == pytest.approx(ref, abs=1e-12)


def test_prony_recurrence():
    K = KernelSpec.prony([(1.0, 1.0)])
    st0 = PronyHistoryState.start(K, ())
    st1 = prony_history_advance(st0, (0.0, 1.0), 1.0, 1.0)
    st2 = prony_history_advance(st1, (1.0, 2.0), 1.0, 1.0)
    assert float(st2.evaluate(K)) == pytest.approx(1 - math.exp(-2), abs=1e-14)
    with pytest.raises(NonContiguousSlab):
        prony_history_advance(st1, (1.5, 2.0), 1.0, 1.0)
    zero = prony_history_advance(st0, (0.0, 1.0), 0.0, 0.0)
    assert float(zero.evaluate(K)) == 0.0


@given(st.lists(st.floats(-2, 2), min_size=6, max_size=6))
def test_prony_recurrence_matches_dense_history(vals):
    K = KernelSpec.prony([(0.3, 0.7), (0.1, 4.0)])
    nodes = np.array([0.0, 0.2, 0.45, 0.5, 0.9, 1.3])
    path = PiecewiseLinearPath(nodes, np.array(vals))
    state = PronyHistoryState.start(K, ())
    for j in range(1, len(nodes)):
        state = prony_history_advance(state, path.slab(j), vals[j - 1], vals[j])
        dense = pointwise_history(K, nodes[j], path)
        assert float(state.evaluate(K)) == pytest.approx(dense, abs=1e-10)


def test_tail_factors():
    assert tail_factors(KernelSpec.zero(), 0.0, (0, 1), 1.0)[:2] == (0.0, 0.0)
    Kc = KernelSpec.powerlaw(0.5, 1.0, 0.0, horizon=1.0)
    assert tail_factors(Kc, 0.0, (0, 1), 1.0)[0] == pytest.approx(math.sqrt(0.5), abs=1e-14)
    K = KernelSpec.prony([(0.4, 1.0)])
    assert tail_factors(K, 0.0, (0, 1), 20.0)[0] == pytest.approx(0.63246, abs=1e-5)
    with pytest.raises(ValueError):
        tail_factors(K, 2.0, (0, 1), 1.0)


@given(st.floats(0.0, 1.0), st.floats(0.01, 1.0))
def test_prony_l2_norm_closed_form(a, width):
    g, lam = 0.4, 1.3
    b = a + width
    exact = math.sqrt(g * g * (math.exp(-2 * lam * a) - math.exp(-2 * lam * b)) / (2 * lam))
    assert l2_norm_on(KernelSpec.prony([(g, lam)]), a, b) == pytest.approx(exact, rel=1e-12)


def test_l2_norm_needs_square_integrable_kernel():
    with pytest.raises(KernelNotSquareIntegrable):
        l2_norm_on(KernelSpec.powerlaw(0.1, 0.4, 1.0), 0.0, 1.0)


def test_mms_oracle_values():
    # symbolic integrals used by the manufactured solutions
    lin = 1 - 0.4 * integrate.quad(lambda s: math.exp(-(1 - s)) * s, 0, 1)[0]
    assert lin == pytest.approx(0.85285, abs=1e-5)
    t = math.pi / 2
    sin_conv = integrate.quad(lambda s: 0.4 * math.exp(-(t - s)) * math.sin(s), 0, t)[0]
    assert sin_conv == pytest.approx(0.24157, abs=1e-5)
