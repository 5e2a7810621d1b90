import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import roots_genlaguerre

from hermrand.errors import DomainError
from hermrand.lp_analysis import (
    alpha_star,
    estrad_prediction,
    lower_bound_certificate,
    lp_norm_radial,
    lp_norm_radial_detail,
    lp_norms_radial,
    lp_rate,
    square_function_lp,
    square_function_sweep,
)
from hermrand.special_fn import radial_hermite, sphere_volume
from hermrand.spectral import Explicit, PowerLaw

mp.mp.dps = 30


def mp_radial_lp(n, d, p):
    a = mp.mpf(d) / 2 - 1
    c = mp.sqrt(2 / (2 * mp.pi ** (mp.mpf(d) / 2) / mp.gamma(mp.mpf(d) / 2)))
    norm = mp.sqrt(mp.factorial(n) / mp.gamma(n + a + 1))

    def f(rho):
        r = rho * rho
        return abs(c * norm * mp.laguerre(n, a, r) * mp.exp(-r / 2)) ** p * rho ** (d - 1)

    # |ψ_n|^p has kinks at the zeros, so they go into the breakpoints.
    zeros = [mp.sqrt(mp.findroot(lambda r: mp.laguerre(n, a, r), float(x)))
             for x in roots_genlaguerre(n, float(a))[0]] if n else []
    nu = 4 * n + d
    pts = sorted([mp.mpf(0)] + zeros + [mp.sqrt(nu) * k / 4 for k in range(1, 9)]) + [mp.inf]
    vol = 2 * mp.pi ** (mp.mpf(d) / 2) / mp.gamma(mp.mpf(d) / 2)
    return float((vol * mp.quad(f, pts)) ** (1 / mp.mpf(p)))


@pytest.mark.parametrize("n,d,p", [(0, 2, 3.0), (3, 3, 4.0), (10, 2, 2.5), (25, 4, 6.0), (8, 5, 1.0)])
def test_lp_norm_matches_mpmath(n, d, p):
    assert lp_norm_radial(n, d, p) == pytest.approx(mp_radial_lp(n, d, p), rel=1e-9)


def test_gaussian_closed_form():
    # ψ_0 = c e^{-ρ²/2} sqrt(1/Γ(d/2)):  ‖ψ_0‖_p^p = ψ_0(0)^p (2π/p)^{d/2}.
    for d in (2, 3, 4):
        for p in (1.0, 3.0, 7.5):
            top = radial_hermite(0, d, 0.0)
            want = top * (2 * math.pi / p) ** (d / (2 * p))
            assert lp_norm_radial(0, d, p) == pytest.approx(want, rel=1e-11)


@given(st.integers(0, 300), st.sampled_from([2, 3, 4, 6]))
def test_l2_normalization(n, d):
    assert lp_norm_radial(n, d, 2.0) == pytest.approx(1.0, abs=1e-9)


def test_detail_reports_certified_tail():
    r = lp_norm_radial_detail(400, 3, 4.0)
    assert r.converged
    assert r.tail_bound < 1e-10 * r.integral
    assert r.quad_error < 1e-8 * r.integral
    assert r.r_end > 4 * 400 + 3
    assert r.value == pytest.approx(r.integral ** 0.25)


def test_batch_matches_single_and_keeps_order():
    ns = [30, 5, 30, 120]
    batch = [r.value for r in lp_norms_radial(ns, 3, 5.0)]
    single = [lp_norm_radial(n, 3, 5.0) for n in ns]
    assert np.allclose(batch, single, rtol=1e-9)
    assert batch[0] == batch[2]


@pytest.mark.parametrize("d", [2, 3])
def test_sup_norm_against_dense_grid(d):
    for n in (0, 7, 40):
        rho = np.linspace(0, math.sqrt(4 * n + d) + 4, 200_001)
        brute = np.max(np.abs(radial_hermite(n, d, rho)))
        assert lp_norm_radial(n, d, math.inf) == pytest.approx(brute, rel=1e-6)


def test_norms_grow_with_p_for_large_n():
    # Monotone interpolation bound: log ‖f‖_p is convex in 1/p.
    n, d = 60, 3
    ps = [2.0, 3.0, 4.0, 6.0]
    logs = [math.log(lp_norm_radial(n, d, p)) for p in ps]
    inv = [1 / p for p in ps]
    for i in range(1, len(ps) - 1):
        t = (inv[i] - inv[i + 1]) / (inv[i - 1] - inv[i + 1])
        assert logs[i] <= t * logs[i - 1] + (1 - t) * logs[i + 1] + 1e-12


def test_domain_errors():
    with pytest.raises(DomainError):
        lp_norm_radial(1, 1, 2.0)
    with pytest.raises(DomainError):
        lp_norm_radial(1, 2, 0.5)
    with pytest.raises(DomainError):
        lp_norm_radial(-1, 2, 2.0)
    with pytest.raises(DomainError):
        estrad_prediction(2, 1.5)


# ---------------------------------------------------------------------------
# Predictions and rates
# ---------------------------------------------------------------------------

def test_predictions():
    p = estrad_prediction(3, math.inf)
    assert p.regime == "above" and p.exponent == pytest.approx(0.25)
    assert estrad_prediction(3, 3.0).regime == "at"
    assert estrad_prediction(3, 3.0).exponent == pytest.approx(-0.25)
    assert estrad_prediction(3, 3.0).log_correction
    b = estrad_prediction(4, 2.2)
    assert b.regime == "below" and b.exponent == pytest.approx(-2 * (0.5 - 1 / 2.2))
    assert estrad_prediction(2, 6.0).exponent == pytest.approx(-1 / 6)


@given(st.integers(2, 8), st.floats(2.0, 50.0))
def test_prediction_continuous_at_critical_p(d, p):
    # Both branches give -1/4 at p₁ = 2d/(d-1).
    p1 = 2 * d / (d - 1)
    above = d / 2 * (0.5 - 1 / p1) - 0.5
    below = -d / 2 * (0.5 - 1 / p1)
    assert above == pytest.approx(-0.25) and below == pytest.approx(-0.25)
    e = estrad_prediction(d, p).exponent
    assert e >= -0.25 - 1e-12 if p >= p1 else e <= 0


def test_lp_rate_small_range():
    r = lp_rate(3, 6.0, [40, 60, 90, 135, 200])
    assert r.fit.slope == pytest.approx(r.prediction.exponent, abs=0.05)
    assert r.band_ratio < 1.5


def test_lower_bound_certificate():
    for n, d in [(10, 3), (200, 4), (50, 2)]:
        eps, c, m = lower_bound_certificate(n, d)
        assert 0 < eps <= 1
        assert m > 0


# ---------------------------------------------------------------------------
# Critical exponent and square function
# ---------------------------------------------------------------------------

def test_alpha_star_power_laws():
    # S_N = Σ n^{d/2-1-2κ} ~ N^{d/2-2κ}.
    r = alpha_star(PowerLaw(0.5), 4, 100_000)
    assert r.alpha_star == pytest.approx(1.0, abs=0.01)
    assert r.d_over_alpha == pytest.approx(4.0, rel=0.01)
    r = alpha_star(PowerLaw(1.0), 3, 100_000)
    assert r.bounded and math.isinf(r.d_over_alpha)
    r = alpha_star(Explicit((1.0, 1.0)), 3, 10_000)
    assert r.bounded
    with pytest.raises(DomainError):
        alpha_star(PowerLaw(1.0), 3, 10)


def test_square_function_of_single_mode_is_lp_norm():
    for d, p in [(2, 3.0), (3, 5.0)]:
        rule = Explicit((0.0, 0.0, 2.0))
        got = square_function_lp(rule, d, p, 4 * 2 + d)
        assert got == pytest.approx(2 * lp_norm_radial(2, d, p), rel=1e-9)


def test_square_function_two_modes_against_mpmath():
    d, p = 3, 4.0
    rule = Explicit((1.0, 0.5))
    a = mp.mpf(d) / 2 - 1
    c = mp.sqrt(2 / (4 * mp.pi))

    def psi(n, rho):
        r = rho * rho
        return c * mp.sqrt(mp.factorial(n) / mp.gamma(n + a + 1)) * mp.laguerre(n, a, r) * mp.exp(-r / 2)

    f = lambda rho: (psi(0, rho) ** 2 + 0.25 * psi(1, rho) ** 2) ** 2 * rho ** 2
    want = float((4 * mp.pi * mp.quad(f, [0, 2, 5, mp.inf])) ** 0.25)
    assert square_function_lp(rule, d, p, 7.0) == pytest.approx(want, rel=1e-9)


def test_square_function_sweep_monotone():
    sw = square_function_sweep(PowerLaw(0.5), 4, 3.0, [24, 44, 84, 164, 324])
    assert np.all(np.diff(sw.values) > 0)
    assert sw.verdict in ("stabilizes", "diverges", "undecided")
    assert all(t < 1e-12 for t in sw.tail_bounds)
    with pytest.raises(DomainError):
        square_function_sweep(PowerLaw(0.5), 1, 3.0, [10])
    with pytest.raises(DomainError):
        square_function_sweep(PowerLaw(0.5), 3, 1.0, [10])
