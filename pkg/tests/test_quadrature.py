import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as hs

from afmsqueeze import states as st
from afmsqueeze.errors import ConfigurationError, DomainError
from afmsqueeze.fockoracle import FockSpace, build_excited, direct_variance
from afmsqueeze.observables import bare_squeeze_parameter, ladder, observe_params, stats_arrays
from afmsqueeze.quadrature import (
    QuadratureStats,
    energy_correlation,
    squeeze_factor,
    squeezing_rate,
    variance_polar,
    variance_xp,
)
from afmsqueeze.spinwave import ModelParams

STATES = [(0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (2, 1)]


def _stats(r, varphi=math.pi, n=0, m=0, eps=1e-14):
    return variance_xp(st.eigenstate_amplitudes(st.CompositeTransform.squeezed(r, varphi), n, m, eps))


def test_vacuum_variance_is_half():
    s = _stats(0.0)
    assert (s.var_x, s.var_p) == pytest.approx((0.5, 0.5), abs=1e-15)
    assert s.uncertainty_product == pytest.approx(0.25)


@pytest.mark.parametrize("n, m", STATES)
@pytest.mark.parametrize("r", [0.1, 0.6, 1.2])
def test_number_state_closed_form(n, m, r):
    # quadratures see only (η+ζ)/√2, whose occupation is (n+m)/2 here
    s = _stats(r, math.pi, n, m)
    assert s.var_x == pytest.approx((n + m + 1) * math.exp(-2 * r) / 2, abs=1e-10)
    assert s.var_p == pytest.approx((n + m + 1) * math.exp(2 * r) / 2, rel=1e-10)


@pytest.mark.parametrize("varphi", [0.0, 0.7, math.pi / 2, 2.5, -1.1])
def test_vacuum_closed_form_any_phase(varphi):
    r = 0.8
    s = _stats(r, varphi)
    assert s.var_x == pytest.approx((math.cosh(2 * r) + math.cos(varphi) * math.sinh(2 * r)) / 2, abs=1e-10)
    assert s.var_p == pytest.approx((math.cosh(2 * r) - math.cos(varphi) * math.sinh(2 * r)) / 2, abs=1e-10)


@pytest.mark.parametrize("varphi", [0.0, math.pi])
def test_covariance_vanishes_for_real_phase(varphi):
    assert _stats(0.9, varphi, 1, 0).cov_xp == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("n, m", [(0, 0), (1, 0), (1, 1)])
@pytest.mark.parametrize("varphi", [0.6, 2.0])
def test_covariance_matches_fock_oracle(n, m, varphi):
    r = 0.5
    ct = st.CompositeTransform.squeezed(r, varphi)
    s = variance_xp(st.eigenstate_amplitudes(ct, n, m, 1e-14))
    fs = FockSpace(50)
    ref = direct_variance(build_excited(ct, fs, n, m), fs)
    assert s.cov_xp == pytest.approx(ref.cov_xp, abs=1e-8)
    assert np.hypot(s.var_x - ref.var_x, s.var_p - ref.var_p) < 1e-8


def test_polar_endpoints():
    s = QuadratureStats(var_x=0.2, var_p=1.25)
    assert variance_polar(s, 0.0) == pytest.approx(0.2)
    assert variance_polar(s, math.pi / 2) == pytest.approx(1.25)
    assert variance_polar(s, math.pi / 4) == pytest.approx(0.725)
    assert variance_polar(s, math.pi) == pytest.approx(0.2)


def test_polar_vectorized():
    s = QuadratureStats(var_x=0.2, var_p=1.25)
    nu = np.linspace(0, np.pi, 7)
    assert variance_polar(s, nu).shape == (7,)


@given(hs.floats(0.0, 1.5), hs.floats(-math.pi, math.pi))
def test_polar_extremes_are_covariance_eigenvalues(r, varphi):
    s = _stats(r, varphi, eps=1e-12)
    nu = np.linspace(0, np.pi, 4001)
    q = variance_polar(s, nu)
    mean, half = (s.var_x + s.var_p) / 2, math.hypot((s.var_x - s.var_p) / 2, s.cov_xp)
    assert q.min() == pytest.approx(mean - half, abs=1e-5 * max(1.0, half))
    assert q.max() == pytest.approx(mean + half, rel=1e-6)
    assert (mean - half) * (mean + half) >= 0.25 - 1e-9


@given(hs.floats(0.01, 2.0), hs.floats(-math.pi, math.pi), hs.integers(0, 2), hs.integers(0, 2))
def test_uncertainty_relation(r, varphi, n, m):
    s = _stats(r, varphi, n, m, eps=1e-12)
    assert s.satisfies_uncertainty()
    assert s.var_x_err == s.var_p_err >= 0


def test_error_bound_scales_with_tail():
    coarse, fine = _stats(1.0, eps=1e-6), _stats(1.0, eps=1e-14)
    assert coarse.var_x_err > fine.var_x_err
    assert abs(coarse.var_x - fine.var_x) <= coarse.var_x_err


@pytest.mark.parametrize("current, reference, expected", [
    (0.5, None, 0.0),
    (0.25, None, 10 * math.log10(2)),
    (0.05, None, 10.0),
    (2.0, 1.0, -10 * math.log10(2)),
])
def test_squeeze_factor_values(current, reference, expected):
    kind = "OX" if reference is None else "O_T_P"
    assert squeeze_factor(kind, current, reference) == pytest.approx(expected)


def test_squeeze_factor_3db():
    assert squeeze_factor("OX", 0.25) == pytest.approx(3.0103, abs=1e-4)


@pytest.mark.parametrize("kind, current, reference, exc", [
    ("bogus", 1.0, 1.0, ConfigurationError),
    ("O_T_X", 1.0, None, DomainError),
    ("OX", 0.0, None, DomainError),
    ("O_Kz_E", 1.0, -1.0, DomainError),
])
def test_squeeze_factor_errors(kind, current, reference, exc):
    with pytest.raises(exc):
        squeeze_factor(kind, current, reference)


def test_rate_of_constant_and_linear():
    x = np.linspace(0, 1, 6)
    assert squeezing_rate(x, np.full(6, 3.0)) == pytest.approx(np.zeros(6))
    assert squeezing_rate(x, 2 - 5 * x) == pytest.approx(np.full(6, -5.0))


def test_rate_reversed_axis():
    x = np.linspace(1, 0, 5)
    assert squeezing_rate(x, x**2)[2] == pytest.approx(1.0)


@pytest.mark.parametrize("axis", [[0.0, 1.0], [0.0, 2.0, 1.0], [0.0, 1.0, 1.0]])
def test_rate_rejects_bad_axes(axis):
    with pytest.raises(ConfigurationError):
        squeezing_rate(axis, np.zeros(len(axis)))


def test_correlation_perfect_and_anti():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    assert energy_correlation(x, 3 * x + 1).pearson == pytest.approx(1.0)
    c = energy_correlation(x, -x)
    assert c.pearson == pytest.approx(-1.0) and c.sign == -1


def test_correlation_errors():
    with pytest.raises(DomainError):
        energy_correlation([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(ConfigurationError):
        energy_correlation([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(ConfigurationError):
        energy_correlation([1.0, 2.0, 3.0], [1.0, 2.0])


def test_bare_zone_centre_squeezing():
    r = bare_squeeze_parameter(ModelParams())
    assert r == pytest.approx(1.498490356826648, abs=1e-12)
    assert _stats(r).var_x == pytest.approx(0.0249688085, abs=1e-9)


def test_observe_params_reports_all_states():
    obs = observe_params(ModelParams(kBT=0.5), states=STATES, grid=32)
    assert set(obs.stats) == set(STATES)
    assert all(s.satisfies_uncertainty() for s in obs.stats.values())
    assert obs.stats[(1, 0)].var_x == pytest.approx(2 * obs.stats[(0, 0)].var_x, rel=1e-9)


def test_thermal_trend_of_zone_centre_squeezing():
    # within the stable range the X fluctuation shrinks as the temperature rises
    T = np.linspace(0.2, 0.9, 5)
    vx, vp, E = stats_arrays(ladder(ModelParams(), "kBT", T, grid=48))
    assert np.all(squeezing_rate(T, vx) < 0)
    assert np.all(np.diff(E) < 0)


def test_anisotropy_trend_of_zone_centre_squeezing():
    K = np.array([0.01, 0.05, 0.1, 0.2])
    vx, vp, E = stats_arrays(ladder(replace(ModelParams(), kBT=0.5), "K_z", K, grid=48))
    assert np.all(np.diff(vx) > 0)
    assert np.all(np.diff(E) > 0)
