import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from viscofem.kernel import KernelSpec
from viscofem.problems import (
    PROBLEMS,
    ProblemError,
    TabulatedSeries,
    conv_linear,
    conv_sin,
    get_problem,
    goal_weight,
    mms_linear,
    mms_smooth,
    scenario_bar,
)

KERNELS = [KernelSpec.prony([(0.4, 1.0), (0.2, 3.0)]), KernelSpec.powerlaw(0.2, 0.5, 1.0)]


def _conv(K, t, fn):
    # substitution s = t - r^2 removes the r^(rho-1) endpoint singularity
    if K.kind == "powerlaw":
        e = 1.0 / K.rho
        return integrate.quad(lambda u: K.c * e * math.exp(-K.eta * u**e) * fn(t - u**e), 0, t**K.rho,
                              epsabs=1e-13, epsrel=1e-12)[0]
    return integrate.quad(lambda s: float(K(t - s)) * fn(s), 0, t, epsabs=1e-13, epsrel=1e-12)[0]


@pytest.mark.parametrize("K", KERNELS)
@given(t=st.floats(0.01, 3.0))
def test_convolutions_match_quadrature(K, t):
    assert conv_linear(K, t) == pytest.approx(_conv(K, t, lambda s: s), abs=1e-10)
    assert conv_sin(K, t) == pytest.approx(_conv(K, t, math.sin), abs=1e-10)


def test_frozen_convolution_values():
    K = KernelSpec.prony([(0.4, 1.0)])
    assert 1 - conv_linear(K, 1.0) == pytest.approx(0.85285, abs=1e-5)
    assert conv_sin(K, math.pi / 2) == pytest.approx(0.24157, abs=1e-5)
    assert conv_linear(KernelSpec.zero(), 1.0) == 0.0


@pytest.mark.parametrize("K", [KernelSpec.zero()] + KERNELS)
def test_smooth_mms_strong_form_1d(K):
    p = mms_smooth(K)
    E = p.params.E
    x = np.array([[0.13], [0.5], [0.77]])
    for t in (0.2, 0.9):
        hist = _conv(K, t, math.sin)
        f_ref = np.sin(np.pi * x[:, 0]) * (-math.sin(t) + E * np.pi**2 * (math.sin(t) - hist))
        assert np.asarray(p.f(x, t)).ravel() == pytest.approx(f_ref, abs=1e-9)
        g_ref = -E * np.pi * (math.sin(t) - hist)
        assert np.asarray(p.g(np.array([[1.0]]), t)).ravel() == pytest.approx([g_ref], abs=1e-9)


def test_linear_mms_data():
    p = mms_linear(KernelSpec.prony([(0.4, 1.0)]))
    assert p.g(np.array([[1.0]]), 1.0)[0] / p.params.E == pytest.approx(1 - 0.4 * math.exp(-1), abs=1e-14)
    x = np.linspace(0, 1, 5)[:, None]
    dt = 1e-6
    assert (p.exact_u1(x, 0.3 + dt) - p.exact_u1(x, 0.3)) / dt == pytest.approx(p.exact_u2(x, 0.3), abs=1e-8)


def test_registry_and_errors():
    assert set(PROBLEMS) >= {"mms_linear", "mms_smooth", "scenario_bar"}
    assert get_problem("mms_smooth", dim=2).dim == 2
    with pytest.raises(ProblemError):
        get_problem("nope")
    with pytest.raises(ProblemError):
        mms_smooth(dim=3)
    with pytest.raises(ProblemError):
        goal_weight("nope", 1)
    p = scenario_bar()
    assert p.kernel.kappa == pytest.approx(0.5)
    assert mms_smooth().with_kernel(KernelSpec.prony([(0.1, 1.0)])).kernel.kappa == pytest.approx(0.1)


def test_goal_weights():
    x = np.array([[0.0, 0.5], [1.0, 0.5], [2.0, 0.5]])
    w = goal_weight("sin_half", 1)(x[:, :1])
    assert w == pytest.approx([0.0, 1.0, 0.0], abs=1e-14)
    b = goal_weight("bump", 2, 2.0)(x)
    assert b.shape == (3, 2) and b[2, 0] == pytest.approx(1.0) and np.all(b[:, 1] == 0)


def test_tabulated_series(tmp_path):
    f = tmp_path / "p.csv"
    f.write_text("t,value\n0,0\n0.5,1\n1,0\n")
    s = TabulatedSeries.from_csv(str(f))
    assert s(0.25) == pytest.approx(0.5)
    p = scenario_bar(profile=s)
    assert p.mesh(2).n_cells > 0
