import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import roots_genlaguerre, roots_hermite

from hermrand.errors import DomainError, SearchFailed
from hermrand.special_fn import (
    erdelyi_envelope,
    hermite_batch,
    hermite_derivative,
    hermite_eigenvalue,
    hermite_functions,
    hermite_tensor,
    iter_hermite,
    laguerre_batch,
    laguerre_derivative_identity_check,
    laguerre_functions,
    laguerre_ode_residual,
    laguerre_poly,
    radial_hermite,
    radial_hermite_derivative_iter,
    sphere_volume,
    szeg_lower_region,
)

mp.mp.dps = 40
ALPHAS = (0.0, 0.5, 1.0, 1.5)


def mp_hermite_function(k, t):
    t = mp.mpf(t)
    norm = mp.sqrt(mp.power(2, k) * mp.factorial(k) * mp.sqrt(mp.pi))
    return mp.hermite(k, t) * mp.exp(-t * t / 2) / norm


def mp_laguerre_function(n, a, r):
    r = mp.mpf(r)
    norm = mp.sqrt(mp.factorial(n) / mp.gamma(n + a + 1))
    return norm * mp.laguerre(n, a, r) * mp.exp(-r / 2) * r ** (mp.mpf(a) / 2)


# ---------------------------------------------------------------------------
# Hermite functions
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("k,t", [(0, 0.0), (1, 0.7), (5, -1.3), (50, 1.3), (200, 12.5),
                                 (400, 30.0), (1000, 44.0)])
def test_hermite_matches_mpmath(k, t):
    got = hermite_functions(k, t)[k]
    want = float(mp_hermite_function(k, t))
    assert got == pytest.approx(want, rel=1e-11, abs=1e-300)


def test_hermite_far_tail_underflows_gracefully():
    v = hermite_functions(10, 60.0)
    assert np.all(np.isfinite(v))
    assert float(mp_hermite_function(10, 60.0)) == pytest.approx(v[10], rel=1e-10, abs=1e-300)


def test_hermite_orthonormal_by_gauss_hermite():
    x, w = roots_hermite(80)
    H = hermite_functions(60, x) * np.exp(x * x / 2)
    gram = (H * w) @ H.T
    assert np.max(np.abs(gram - np.eye(61))) < 1e-11


@given(st.integers(0, 300), st.floats(-25, 25))
def test_hermite_parity(k, t):
    a = hermite_functions(k, t)[k]
    b = hermite_functions(k, -t)[k]
    assert b == pytest.approx((-1) ** k * a, rel=1e-12, abs=1e-300)


@given(st.integers(0, 120), st.floats(-12, 12))
def test_hermite_derivative_finite_difference(k, t):
    step = 1e-6
    fd = (hermite_functions(k, t + step)[k] - hermite_functions(k, t - step)[k]) / (2 * step)
    assert hermite_derivative(k, t) == pytest.approx(fd, rel=1e-5, abs=1e-8)


def test_hermite_high_order_stays_finite():
    t = np.linspace(-500, 500, 101)
    last = None
    for k, v in iter_hermite(t, 100_000):
        last = v
    assert np.all(np.isfinite(last))
    assert np.max(np.abs(last)) < 1.0


def test_hermite_batch_and_tensor():
    b = hermite_batch(0.3, 7)
    assert b.values.shape == (8,)
    with pytest.raises(DomainError):
        hermite_batch(0.3, -1)
    x = np.array([0.2, -0.4, 1.1])
    want = np.prod([hermite_functions(a, xi)[a] for a, xi in zip((2, 0, 3), x)])
    assert hermite_tensor((2, 0, 3), x) == pytest.approx(want, rel=1e-14)
    assert hermite_eigenvalue((2, 0, 3)) == 13
    with pytest.raises(DomainError):
        hermite_tensor((1, -1), [0, 0])
    with pytest.raises(DomainError):
        hermite_tensor((1, 1), [0, 0, 0])


# ---------------------------------------------------------------------------
# Laguerre
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("n,r", [(0, 0.3), (3, 2.0), (30, 50.0), (200, 10.0), (200, 800.0),
                                 (500, 2100.0)])
def test_laguerre_functions_match_mpmath(alpha, n, r):
    got = laguerre_functions(alpha, r, n)[n]
    want = float(mp_laguerre_function(n, alpha, r))
    assert got == pytest.approx(want, rel=1e-10, abs=1e-300)


@pytest.mark.parametrize("alpha", ALPHAS)
def test_laguerre_poly_matches_mpmath(alpha):
    for n, r in [(1, 0.5), (10, 3.0), (60, 100.0)]:
        want = float(mp.laguerre(n, alpha, r))
        assert laguerre_poly(alpha, n, r) == pytest.approx(want, rel=1e-11)


def test_laguerre_poly_huge_values_survive_in_logs():
    b = laguerre_batch(0.5, 5000.0, 300)
    want = mp.log(abs(mp.laguerre(300, 0.5, 5000)))
    assert b.poly_log_abs[300] == pytest.approx(float(want), rel=1e-12)
    assert b.poly_sign[300] == int(mp.sign(mp.laguerre(300, 0.5, 5000)))
    assert b.nu[3] == 4 * 3 + 2 * 0.5 + 2
    assert len(b.log_poly) == 301


@pytest.mark.parametrize("alpha", ALPHAS)
def test_laguerre_orthonormal_by_gauss_laguerre(alpha):
    x, w = roots_genlaguerre(40, alpha)
    # 𝓛_n = ℓ_n e^{-r/2} r^{α/2}; strip the weight so the quadrature is exact.
    L = laguerre_functions(alpha, x, 30) * np.exp(x / 2) * x ** (-alpha / 2)
    gram = (L * w) @ L.T
    assert np.max(np.abs(gram - np.eye(31))) < 1e-8


@pytest.mark.parametrize("alpha", ALPHAS)
def test_laguerre_ode_residual_small(alpha):
    r = np.concatenate([np.linspace(1e-3, 50, 200), np.linspace(700, 900, 50)])
    for n in (1, 2, 17, 200):
        assert np.max(laguerre_ode_residual(alpha, n, r)) < 1e-8


@given(st.sampled_from(ALPHAS), st.integers(1, 80), st.floats(0.0, 300.0))
def test_laguerre_derivative_identity(alpha, n, r):
    assert laguerre_derivative_identity_check(alpha, n, r) < 1e-6


def test_derivative_identity_check_absolute_for_small_values():
    # L_1^{(0)} = 1 - r, L_0^{(1)} = 1: residual is the plain FD error.
    assert laguerre_derivative_identity_check(0.0, 1, 0.3) < 1e-9
    assert laguerre_derivative_identity_check(0.0, 1, 0.0) < 1e-9
    # Far beyond the turning point the values overflow doubles but the check does not.
    assert laguerre_derivative_identity_check(1.5, 300, 3000.0) < 1e-6


def test_laguerre_domain_errors():
    with pytest.raises(DomainError):
        laguerre_batch(-1.0, 1.0, 3)
    with pytest.raises(DomainError):
        laguerre_batch(0.0, -1.0, 3)
    with pytest.raises(DomainError):
        laguerre_derivative_identity_check(0.0, 0, 1.0)


# ---------------------------------------------------------------------------
# Radial Hermite functions
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_radial_hermite_matches_mpmath(d):
    a = d / 2 - 1
    c = math.sqrt(2 / sphere_volume(d))
    for n, rho in [(0, 0.0), (3, 1.2), (40, 5.0), (150, 24.0)]:
        r = mp.mpf(rho) ** 2
        want = c * mp.sqrt(mp.factorial(n) / mp.gamma(n + a + 1)) * mp.laguerre(n, a, r) * mp.exp(-r / 2)
        assert radial_hermite(n, d, rho) == pytest.approx(float(want), rel=1e-10, abs=1e-300)


def test_radial_hermite_origin_value():
    assert radial_hermite(0, 2, 0.0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-15)


@pytest.mark.parametrize("d", [2, 3])
def test_radial_hermite_eigenfunction(d):
    # -ψ'' - (d-1)/ρ ψ' + ρ² ψ = (4n + d) ψ, checked by finite differences.
    rho = np.linspace(0.3, 6.0, 40)
    h = 1e-4
    for n in (0, 4, 9):
        f0, fp, fm = (radial_hermite(n, d, rho + s) for s in (0.0, h, -h))
        lap = (fp - 2 * f0 + fm) / h ** 2 + (d - 1) / rho * (fp - fm) / (2 * h)
        resid = -lap + rho ** 2 * f0 - (4 * n + d) * f0
        assert np.max(np.abs(resid)) < 1e-5


@given(st.sampled_from([2, 3, 4]), st.integers(0, 60), st.floats(0.05, 12.0))
def test_radial_derivative_finite_difference(d, n, rho):
    h = 1e-6
    fd = (radial_hermite(n, d, rho + h) - radial_hermite(n, d, rho - h)) / (2 * h)
    for k, psi, dpsi in radial_hermite_derivative_iter(d, np.array([rho]), n):
        pass
    assert dpsi[0] == pytest.approx(fd, rel=1e-5, abs=1e-7)


def test_radial_domain_errors():
    with pytest.raises(DomainError):
        radial_hermite(0, 1, 0.0)
    with pytest.raises(DomainError):
        radial_hermite(-1, 2, 0.0)


# ---------------------------------------------------------------------------
# Envelope and small-r lower bound
# ---------------------------------------------------------------------------

def test_envelope_regimes():
    n, a = 10, 0.5
    nu = 4 * n + 2 * a + 2
    for r, regime in [(0.5 / nu, "origin"), (1.0, "bulk"), (nu, "turning"), (2 * nu, "tail")]:
        assert erdelyi_envelope(n, a, r)[1] == regime
    v, reg = erdelyi_envelope(n, a, np.array([1.0, nu]))
    assert list(reg) == ["bulk", "turning"]
    assert v[1] == pytest.approx(nu ** -0.25 * nu ** (-1 / 12))


@pytest.mark.parametrize("alpha", ALPHAS)
def test_envelope_dominates_laguerre_functions(alpha):
    # The envelope carries no constant; a modest one must suffice uniformly.
    for n in (5, 50, 300):
        nu = 4 * n + 2 * alpha + 2
        r = np.linspace(1e-4, 3 * nu, 4000)
        ratio = np.abs(laguerre_functions(alpha, r, n)[n]) / erdelyi_envelope(n, alpha, r)[0]
        assert np.max(ratio) < 10


def test_szeg_lower_region():
    # L_1^{(0)} = 1 - r: c = 1/2 and 1 - r >= 1/2 up to r = ε² = 1/2.
    eps, c = szeg_lower_region(1, 0.0)
    assert c == pytest.approx(0.5)
    assert eps == pytest.approx(math.sqrt(0.5), rel=1e-5)
    for n in (10, 100, 1000):
        eps, c = szeg_lower_region(n, 1.0)
        r = np.linspace(0, eps ** 2 / n, 100)[1:]
        assert np.all(laguerre_poly(1.0, n, r) >= c * n)
    with pytest.raises(DomainError):
        szeg_lower_region(0, 1.0)
    with pytest.raises(SearchFailed):
        szeg_lower_region(3, 0.0, eps_floor=50.0)
