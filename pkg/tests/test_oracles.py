import math

import numpy as np
import pytest
import scipy.integrate

from invlap import oracles
from invlap.oracles import (BEHAVIORS, COSINE4T, DELAYED_STEP, HEAVISIDE,
                            benchmark_laplace_1d, benchmark_laplace_1d_flux,
                            benchmark_time_series_1d, crank_nicolson_1d,
                            pair_catalog)


# ---------------------------------------------------------------------------
# analytic pair catalog
# ---------------------------------------------------------------------------

def test_catalog_contents():
    names = {p.name for p in pair_catalog()}
    assert {"1/p", "1/p^2", "1/(p+1)", "1/(p^2+1)", "p/(p^2+16)",
            "exp(-0.08p)/p"} <= names


def test_pair_point_values():
    by_name = {p.name: p for p in pair_catalog()}
    assert by_name["1/p"].time_function(7.0) == pytest.approx(1.0)
    assert by_name["p/(p^2+16)"].time_function(1.0) == pytest.approx(math.cos(4.0))
    # midpoint convention exactly at the jump
    assert by_name["exp(-0.08p)/p"].time_function(0.08) == pytest.approx(0.5)


@pytest.mark.parametrize("pair", pair_catalog(), ids=lambda p: p.name)
@pytest.mark.parametrize("p", [1.0, 2.0 + 1.0j, 10.0])
def test_forward_transform_quadrature(pair, p):
    # each catalog pair must satisfy the forward integral to 1e-6 relative
    def integrand_re(t):
        return (pair.time_function(t) * np.exp(-p * t)).real

    def integrand_im(t):
        return (pair.time_function(t) * np.exp(-p * t)).imag

    upper = 60.0 / abs(np.real(p))  # exp(-Re(p) t) < 1e-26 beyond
    points = [0.08] if pair.discontinuous else None
    re, _ = scipy.integrate.quad(integrand_re, 0.0, upper, limit=400, points=points)
    im, _ = scipy.integrate.quad(integrand_im, 0.0, upper, limit=400, points=points)
    got = complex(re, im)
    want = complex(pair.image(p))
    assert abs(got - want) <= 1e-6 * abs(want)


# ---------------------------------------------------------------------------
# transformed 1D benchmark solution
# ---------------------------------------------------------------------------

def test_laplace_antisymmetry_center():
    for p in (0.5, 3.0 + 2.0j):
        assert benchmark_laplace_1d(1.5, p) == 0.0


def test_laplace_boundary_value():
    assert benchmark_laplace_1d(3.0, 2.5, HEAVISIDE) == pytest.approx(2.0 / 2.5)
    assert benchmark_laplace_1d(0.0, 2.5, HEAVISIDE) == pytest.approx(-2.0 / 2.5)


def test_laplace_small_p_steady_profile():
    # p phibar -> steady profile (4/3) x - 2 as p -> 0
    p = 1e-8
    val = p * benchmark_laplace_1d(1.0 / 3.0, p, HEAVISIDE)
    assert val.real == pytest.approx(-14.0 / 9.0, rel=1e-6)


def test_laplace_large_q_stable():
    v = benchmark_laplace_1d(1.0 / 3.0, 1e8)
    assert np.isfinite(v)
    assert abs(v) < 1.0


def test_laplace_flux_consistent_with_difference_quotient():
    p = 2.0 + 1.0j
    x = 0.7
    h = 1e-6
    dphi = (benchmark_laplace_1d(x + h, p) - benchmark_laplace_1d(x - h, p)) / (2 * h)
    assert benchmark_laplace_1d_flux(x, p) == pytest.approx(-dphi, rel=1e-8)


def test_laplace_domain_checks():
    with pytest.raises(ValueError):
        benchmark_laplace_1d(-0.1, 1.0)
    with pytest.raises(ValueError):
        benchmark_laplace_1d(1.0, 0.0)


# ---------------------------------------------------------------------------
# eigenfunction series
# ---------------------------------------------------------------------------

def test_series_reaches_steady_state():
    sv = benchmark_time_series_1d(1.0 / 3.0, 50.0, HEAVISIDE)
    assert sv.potential == pytest.approx(-14.0 / 9.0)
    assert sv.flux == pytest.approx(-4.0 / 3.0)


def test_series_starts_from_rest():
    sv = benchmark_time_series_1d(1.0 / 3.0, 1e-4, HEAVISIDE, n_terms=400)
    assert not sv.truncated
    assert sv.potential == pytest.approx(0.0, abs=1e-6)


def test_series_delayed_step_causality():
    assert benchmark_time_series_1d(1.0 / 3.0, 0.05, DELAYED_STEP).potential == 0.0
    late = benchmark_time_series_1d(1.0 / 3.0, 1.08, DELAYED_STEP)
    heav = benchmark_time_series_1d(1.0 / 3.0, 1.0, HEAVISIDE)
    assert late.potential == pytest.approx(heav.potential)


def test_series_truncation_flagged():
    sv = benchmark_time_series_1d(1.0 / 3.0, 1e-4, HEAVISIDE, n_terms=5)
    assert sv.truncated
    assert sv.bound > oracles.SERIES_BOUND_TOL


def test_series_rejects_cosine():
    with pytest.raises(ValueError):
        benchmark_time_series_1d(1.0, 1.0, COSINE4T)


# ---------------------------------------------------------------------------
# Crank-Nicolson reference
# ---------------------------------------------------------------------------

def test_fd_matches_series_heaviside():
    ts = np.geomspace(0.01, 10.0, 25)
    fd = crank_nicolson_1d(1.0 / 3.0, ts, HEAVISIDE, nx=300, dt=1e-3)
    series = [benchmark_time_series_1d(1.0 / 3.0, t, HEAVISIDE) for t in ts]
    pot_err = np.abs(fd.potential - np.array([s.potential for s in series]))
    assert np.max(pot_err) < 1e-3


def test_fd_steady_value():
    fd = crank_nicolson_1d(1.0 / 3.0, np.array([10.0]), HEAVISIDE, nx=300, dt=1e-3)
    assert fd.potential[0] == pytest.approx(-14.0 / 9.0, abs=1e-3)
    assert fd.flux[0] == pytest.approx(-4.0 / 3.0, abs=2e-3)


def test_fd_second_order_in_time():
    errs = []
    for dt in (4e-3, 2e-3):
        fd = crank_nicolson_1d(1.0 / 3.0, np.array([0.5]), HEAVISIDE,
                               nx=1500, dt=dt)
        ref = benchmark_time_series_1d(1.0 / 3.0, 0.5, HEAVISIDE)
        errs.append(abs(fd.potential[0] - ref.potential))
    assert 2.5 < errs[0] / errs[1] < 6.0


def test_fd_cosine_bounded_with_quarter_pi_period():
    ts = np.linspace(20.0, 20.0 + 2.0 * np.pi, 300)
    fd = crank_nicolson_1d(1.0 / 3.0, ts, COSINE4T, nx=200, dt=2e-3)
    assert np.max(np.abs(fd.potential)) < 2.0  # bounded forced oscillation
    peaks = [ts[i] for i in range(1, ts.size - 1)
             if fd.potential[i] > fd.potential[i - 1]
             and fd.potential[i] > fd.potential[i + 1]]
    spacings = np.diff(peaks)
    assert np.allclose(spacings, np.pi / 2.0, rtol=0.05)


def test_fd_delayed_step_zero_before_delay():
    ts = np.array([0.02, 0.05, 0.5])
    fd = crank_nicolson_1d(1.0 / 3.0, ts, DELAYED_STEP, nx=200, dt=1e-3)
    assert np.allclose(fd.potential[:2], 0.0, atol=1e-12)
    assert fd.potential[2] < -0.1


def test_fd_argument_validation():
    with pytest.raises(ValueError):
        crank_nicolson_1d(1.0, np.array([1.0]), HEAVISIDE, nx=8)
    with pytest.raises(ValueError):
        crank_nicolson_1d(1.0, np.array([0.005]), HEAVISIDE, dt=1e-2)


def test_behavior_registry():
    assert set(BEHAVIORS) == {"heaviside", "cosine4t", "delayed-step"}
    assert BEHAVIORS["delayed-step"].tau == pytest.approx(0.08)
