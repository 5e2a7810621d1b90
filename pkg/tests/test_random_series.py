import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hermrand.errors import BudgetExceeded, ConfigError, DomainError, HTooSmall
from hermrand.random_series import (
    RandomLaw,
    bernstein_exponent,
    bernstein_ratios,
    default_grid,
    domain_radius,
    draw_noise,
    mode_count,
    modulus_of_continuity,
    modulus_on_uniform_grid,
    rho_lambda,
    salem_zygmund_experiment,
    sample_partial_sum,
    single_mode_bernstein_ratio,
    splitmix64,
    stream_statistics,
    sup_norm,
    sup_reducer,
    trial_seed,
)
from hermrand.special_fn import hermite_functions, hermite_tensor, radial_hermite
from hermrand.spectral import BucketConstant, PowerLaw, SpectralLayout, bucket_max_sq, level_members

LAWS = [RandomLaw("rademacher"), RandomLaw("gaussian"), RandomLaw("uniform", 2.0)]


# ---------------------------------------------------------------------------
# Noise
# ---------------------------------------------------------------------------

@given(st.integers(0, 2 ** 64 - 1), st.integers(0, 50), st.integers(0, 50),
       st.sampled_from(LAWS))
def test_noise_is_counter_based(seed, start, count, law):
    full = draw_noise(law, start + count, seed)
    part = draw_noise(law, count, seed, start=start)
    assert np.array_equal(full[start:], part)


@pytest.mark.parametrize("law", LAWS)
def test_noise_moments(law):
    x = draw_noise(law, 200_000, 7)
    m2 = law.second_moment
    assert abs(x.mean()) < 5 * math.sqrt(m2 / x.size)
    assert x.var() == pytest.approx(m2, rel=0.02)
    if law.kind == "rademacher":
        assert set(np.unique(x)) == {-1.0, 1.0}
    if law.kind == "uniform":
        assert np.all(np.abs(x) < law.a)
    if law.kind == "gaussian":
        assert np.mean(np.abs(x) > 1.96) == pytest.approx(0.05, abs=0.003)


def test_law_validation_and_round_trip():
    for law in LAWS:
        assert RandomLaw.from_dict(law.to_dict()) == law
    assert RandomLaw("uniform", 3.0).sigma == pytest.approx(math.sqrt(3.0))
    with pytest.raises(ConfigError):
        RandomLaw("cauchy")
    with pytest.raises(ConfigError):
        RandomLaw("uniform", 0.0)
    with pytest.raises(DomainError):
        draw_noise(LAWS[0], -1, 0)


def test_seed_mixing():
    seeds = {trial_seed(42, t) for t in range(10_000)}
    assert len(seeds) == 10_000
    assert trial_seed(1, 0) != trial_seed(2, 0)
    # splitmix64 reference value for input 0.
    assert splitmix64(0) == 0xE220A8397B1DCDAF


# ---------------------------------------------------------------------------
# Partial sums
# ---------------------------------------------------------------------------

def test_one_d_partial_sum_matches_explicit_sum():
    rule = PowerLaw(0.6)
    grid = np.linspace(-6, 6, 301)
    s = sample_partial_sum(rule, LAWS[1], 41.0, 1, "oneD", grid, seed=5)
    n = mode_count(41.0, 1, "oneD")
    assert n == 21
    x = draw_noise(LAWS[1], n, 5)
    H = hermite_functions(n - 1, grid)
    c = np.array([1.0] + [k ** -0.6 for k in range(1, n)])
    assert np.allclose(s.values, (c * x) @ H, rtol=1e-13, atol=1e-14)
    assert sup_norm(s) == pytest.approx(np.max(np.abs(s.values)))
    assert s.spacing == pytest.approx(grid[1] - grid[0])


def test_radial_partial_sum_matches_explicit_sum():
    rule = BucketConstant(power=-1.0)
    grid = np.linspace(0, 5, 101)
    s = sample_partial_sum(rule, LAWS[0], 30.0, 3, "radial", grid, seed=9)
    n = mode_count(30.0, 3, "radial")
    x = draw_noise(LAWS[0], n, 9)
    want = np.zeros_like(grid)
    for k in range(n):
        j = 2 * k + 1
        want += math.sqrt(1.0 / j) * x[k] * radial_hermite(k, 3, grid)
    assert np.allclose(s.values, want, rtol=1e-12, atol=1e-14)


def test_tensor_partial_sum_matches_explicit_sum():
    rule = PowerLaw(0.4)
    rng = np.random.default_rng(3)
    grid = rng.uniform(-3, 3, size=(40, 2))
    lam = 12.0
    s = sample_partial_sum(rule, LAWS[0], lam, 2, "tensor", grid, seed=2)
    x = draw_noise(LAWS[0], mode_count(lam, 2, "tensor"), 2)
    want = np.zeros(40)
    k = 0
    for m in range(int((lam - 2) // 2) + 1):
        for a in level_members(m, 2):
            c = 1.0 if k == 0 else k ** -0.4
            want += c * x[k] * hermite_tensor(a, grid)
            k += 1
    assert np.allclose(s.values, want, rtol=1e-12, atol=1e-14)
    with pytest.raises(BudgetExceeded):
        sample_partial_sum(rule, LAWS[0], 400.0, 3, "tensor", np.zeros((1, 3)), budget_modes=100)


def test_mode_checks():
    with pytest.raises(DomainError):
        sample_partial_sum(PowerLaw(1), LAWS[0], 10, 2, "oneD", np.zeros(3))
    with pytest.raises(DomainError):
        sample_partial_sum(PowerLaw(1), LAWS[0], 10, 1, "radial", np.zeros(3))
    with pytest.raises(ConfigError):
        sample_partial_sum(PowerLaw(1), LAWS[0], 10, 1, "spherical", np.zeros(3))
    assert mode_count(0.5, 1, "oneD") == 0
    assert mode_count(10, 2, "tensor") == SpectralLayout(2).modes_below_level(5)


def test_default_grids():
    lam = 50.0
    R = domain_radius(lam)
    g = default_grid(lam, "oneD", spacing=0.1)
    assert g[0] <= -R and g[-1] >= R and np.allclose(np.diff(g), 0.1)
    g = default_grid(lam, "radial", 3, spacing=0.1)
    assert g[0] == 0 and g[-1] >= R
    g = default_grid(4.0, "tensor", 2, spacing=0.5)
    assert g.shape[1] == 2


def test_stream_matches_single_samples_bitwise():
    rule = BucketConstant(power=-5 / 6, log_power=-2.0)
    grid = default_grid(64, "oneD", spacing=0.02)
    seeds = [trial_seed(11, t) for t in range(5)]
    lams = [16.0, 32.0, 64.0]
    sups = stream_statistics(rule, LAWS[0], 1, "oneD", grid, seeds, lams, sup_reducer, chunk=2)
    for i, s in enumerate(seeds):
        for k, lam in enumerate(lams):
            assert sups[i, k] == sup_norm(sample_partial_sum(rule, LAWS[0], lam, 1, "oneD", grid, s))
    threaded = stream_statistics(rule, LAWS[0], 1, "oneD", grid, seeds, lams, sup_reducer,
                                 chunk=2, workers=3)
    assert np.array_equal(sups, threaded)


def test_stream_blocks():
    rule = PowerLaw(0.5)
    grid = np.linspace(0, 4, 50)
    seeds = [1, 2]
    lams = [10.0, 30.0]
    ident = lambda f: f.copy()
    blocks = stream_statistics(rule, LAWS[1], 2, "radial", grid, seeds, lams, ident, blocks=True)
    full = stream_statistics(rule, LAWS[1], 2, "radial", grid, seeds, lams, ident)
    assert np.allclose(blocks[:, 0] + blocks[:, 1], full[:, 1], atol=1e-14)
    with pytest.raises(ConfigError):
        stream_statistics(rule, LAWS[1], 2, "radial", grid, seeds, [30.0, 10.0], ident)
    with pytest.raises(DomainError):
        stream_statistics(rule, LAWS[1], 2, "tensor", grid, seeds, lams, ident)


# ---------------------------------------------------------------------------
# Modulus of continuity
# ---------------------------------------------------------------------------

@given(st.lists(st.floats(-10, 10), min_size=3, max_size=60), st.integers(2, 10))
def test_modulus_against_pairwise_brute_force(vals, w):
    v = np.asarray(vals)
    x = np.arange(v.size) * 0.1
    h = w * 0.1
    brute = max(abs(v[i] - v[k]) for i in range(v.size) for k in range(v.size)
                if abs(x[i] - x[k]) <= h + 1e-12)
    assert modulus_on_uniform_grid(v, 0.1, [h])[0] == pytest.approx(brute)


def test_modulus_of_smooth_function():
    s = sample_partial_sum(PowerLaw(2.0), LAWS[0], 5.0, 1, "oneD", np.linspace(-5, 5, 10_001), 0)
    hs = [0.002, 0.01, 0.05]
    m = modulus_of_continuity(s, hs)
    assert np.all(np.diff(m) > 0)
    slope = np.polyfit(np.log(hs), np.log(m), 1)[0]
    assert slope == pytest.approx(1.0, abs=0.02)
    with pytest.raises(HTooSmall):
        modulus_of_continuity(s, [0.001])


# ---------------------------------------------------------------------------
# Bernstein and Salem-Zygmund
# ---------------------------------------------------------------------------

def test_bernstein_ratio_of_single_mode():
    # h_0 = π^{-1/4} e^{-t²/2}: |h_0'|/|h_0| sup ratio = max |t e^{-t²/2}| = e^{-1/2}.
    assert single_mode_bernstein_ratio(0) == pytest.approx(math.exp(-0.5), rel=1e-4)
    r = bernstein_ratios(1, 16.0, 4, 0)
    assert r.shape == (4,) and np.all(r > 0)


def test_bernstein_exponent_is_clamped():
    for d in (1, 2):
        s = bernstein_exponent(d)
        assert 0.5 <= s <= 1.0


def test_rho_lambda_brute_force():
    rule = BucketConstant(power=-0.5, log_power=-1.0)
    mx = bucket_max_sq(rule, 1, 100)
    want = sum(j ** (-1 / 6) * mx[j] for j in range(1, 51))
    assert rho_lambda(rule, 1, 100.0, radial=False) == pytest.approx(want, rel=1e-13)
    want = sum(j ** (-1 / 6) * mx[j] for j in range(1, 101))
    assert rho_lambda(rule, 1, 100.0, radial=False, full=True) == pytest.approx(want, rel=1e-13)


def test_salem_zygmund_small_run_is_reproducible():
    rule = BucketConstant(power=-5 / 6, log_power=-2.0)
    a = salem_zygmund_experiment(rule, LAWS[0], 1, [16, 32, 64], trials=24, seed=3)
    b = salem_zygmund_experiment(rule, LAWS[0], 1, [16, 32, 64], trials=24, seed=3, workers=2)
    assert np.array_equal(a.sups, b.sups)
    assert a.sups.shape == (24, 3)
    for q in (0.5, 0.9, 0.99):
        ratios = np.asarray(a.sup_quantiles[q]) / np.sqrt(np.log(a.lambdas) * np.asarray(a.rho))
        assert np.allclose(ratios, a.normalized_ratio[q])
    assert a.spread(0.5) >= 1.0
