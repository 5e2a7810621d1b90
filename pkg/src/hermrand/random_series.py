"""Random partial sums of oscillator eigenfunctions and their sup-norm statistics.

Noise is counter-based: the draw attached to mode ``n`` depends only on the
seed and ``n``, so partial sums for nested cutoffs share one realization.
Fields are accumulated mode by mode in ascending order with elementwise
updates, which keeps every result bitwise reproducible whatever the number of
worker threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d
from scipy.special import ndtri

from .errors import BudgetExceeded, ConfigError, DomainError, HTooSmall
from .fitting import RateFit, fit_rate
from .spectral import (
    CoefficientRule,
    SpectralLayout,
    bucket_max_sq,
    level_members,
    mode_coefficients,
    sup_grid_spacing,
)
from .special_fn import (
    hermite_functions,
    iter_hermite,
    iter_radial_hermite,
    radial_hermite_derivative_iter,
)

MODES = ("oneD", "radial", "tensor")
TENSOR_MODE_BUDGET = 1_000_000
TRIAL_CHUNK = 32
_MASK64 = (1 << 64) - 1


# ---------------------------------------------------------------------------
# Noise
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RandomLaw:
    """Law of the i.i.d. multipliers X_n.

    ``kind`` is ``rademacher``, ``gaussian`` or ``uniform``; the uniform law
    lives on [-a, a].  ``sigma`` is the subgaussian parameter used in reports:
    1 for Rademacher and Gaussian, a/sqrt(3) (the standard deviation) for the
    uniform law, which is strictly subgaussian.
    """

    kind: str = "rademacher"
    a: float = 1.0

    def __post_init__(self):
        if self.kind not in ("rademacher", "gaussian", "uniform"):
            raise ConfigError(f"unknown law {self.kind!r}")
        if not self.a > 0:
            raise ConfigError("uniform half-width must be positive")

    @property
    def sigma(self) -> float:
        return self.a / math.sqrt(3.0) if self.kind == "uniform" else 1.0

    @property
    def second_moment(self) -> float:
        return self.a * self.a / 3.0 if self.kind == "uniform" else 1.0

    def to_dict(self) -> dict:
        return {"kind": self.kind, "a": self.a}

    @classmethod
    def from_dict(cls, data: dict) -> "RandomLaw":
        return cls(str(data.get("kind", "rademacher")), float(data.get("a", 1.0)))


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def trial_seed(seed: int, trial: int) -> int:
    """Per-trial key: splitmix64 of seed + golden-ratio increment · (trial + 1)."""
    return splitmix64((int(seed) + 0x9E3779B97F4A7C15 * (int(trial) + 1)) & _MASK64)


def _raw_stream(seed: int, start: int, count: int) -> np.ndarray:
    """Raw 64-bit words ``start .. start+count-1`` of the Philox stream keyed by seed."""
    gen = np.random.Philox(key=int(seed) & _MASK64)
    block, skip = divmod(start, 4)
    if block:
        gen.advance(block)
    return gen.random_raw(count + skip)[skip:]


def draw_noise(law: RandomLaw, count: int, seed: int, start: int = 0) -> np.ndarray:
    """``count`` draws of ``law``; entry ``i`` is the draw for counter ``start + i``."""
    if count < 0:
        raise DomainError("count must be >= 0")
    if count == 0:
        return np.zeros(0)
    raw = _raw_stream(seed, start, count)
    if law.kind == "rademacher":
        return 1.0 - 2.0 * (raw >> np.uint64(63)).astype(float)
    u = ((raw >> np.uint64(11)).astype(float) + 0.5) * 2.0 ** -53
    if law.kind == "gaussian":
        return ndtri(u)
    return law.a * (2.0 * u - 1.0)


# ---------------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------------

def domain_radius(lam: float) -> float:
    """Radius of the region that carries the sup of a field with cutoff λ."""
    return math.sqrt(lam) + 3.0 * lam ** (1.0 / 6.0)


def default_grid(lam: float, mode: str, d: int = 1, spacing: float | None = None) -> np.ndarray:
    """Uniform grid at the Bernstein spacing over the truncation domain.

    oneD: [-R, R]; radial: radii [0, R]; tensor: cube [-R, R]^d as (P, d).
    """
    if spacing is None:
        spacing = sup_grid_spacing(lam, bernstein_exponent(1 if mode == "oneD" else max(d, 2)), d=d)
    R = domain_radius(lam)
    k = int(math.ceil(R / spacing))
    if mode == "radial":
        return np.arange(k + 1) * spacing
    axis = np.arange(-k, k + 1) * spacing
    if mode == "oneD":
        return axis
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


# ---------------------------------------------------------------------------
# Field sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FieldSample:
    lam: float
    seed: int
    d: int
    mode: str
    grid: np.ndarray
    values: np.ndarray
    law: RandomLaw = field(default_factory=RandomLaw)

    @property
    def spacing(self) -> float:
        g = self.grid if self.grid.ndim == 1 else self.grid[:, -1]
        diffs = np.diff(np.unique(g))
        return float(diffs.min()) if diffs.size else math.inf


def mode_count(lam: float, d: int, mode: str) -> int:
    """Number of modes with eigenvalue <= λ."""
    if mode == "oneD":
        return max(0, int(math.floor((lam - 1) / 2)) + 1)
    if mode == "radial":
        return max(0, int(math.floor((lam - d) / 4)) + 1)
    layout = SpectralLayout(d)
    m_top = int(math.floor((lam - d) / 2))
    return layout.modes_below_level(m_top + 1) if m_top >= 0 else 0


def _check_mode(mode: str, d: int) -> None:
    if mode not in MODES:
        raise ConfigError(f"unknown sampling mode {mode!r}")
    if mode == "oneD" and d != 1:
        raise DomainError("oneD mode needs d = 1")
    if mode == "radial" and d < 2:
        raise DomainError("radial mode needs d >= 2")
    if mode == "tensor" and d > 3:
        raise BudgetExceeded("tensor sampling is limited to d <= 3")


def _basis_stream(mode: str, d: int, grid: np.ndarray, n_modes: int):
    if n_modes <= 0:
        return iter(())
    if mode == "oneD":
        return iter_hermite(grid, n_modes - 1)
    return iter_radial_hermite(d, grid, n_modes - 1)


def _pairwise_sum(terms: np.ndarray) -> np.ndarray:
    """Sum along axis 0 by a fixed balanced tree."""
    while terms.shape[0] > 1:
        half = terms.shape[0] // 2
        head = terms[: 2 * half: 2] + terms[1: 2 * half: 2]
        terms = np.concatenate([head, terms[2 * half:]], axis=0) if terms.shape[0] % 2 else head
    return terms[0] if terms.shape[0] else np.zeros(terms.shape[1:])


def sample_partial_sum(rule: CoefficientRule, law: RandomLaw, lam: float, d: int,
                       mode: str = "oneD", grid=None, seed: int = 0,
                       budget_modes: int = TENSOR_MODE_BUDGET) -> FieldSample:
    """One realization of Σ_{λ_n <= λ} c_n X_n φ_n on ``grid``."""
    _check_mode(mode, d)
    grid = default_grid(lam, mode, d) if grid is None else np.asarray(grid, dtype=float)
    n_modes = mode_count(lam, d, mode)
    if mode == "tensor":
        if n_modes > budget_modes:
            raise BudgetExceeded(f"{n_modes} tensor modes exceed the budget of {budget_modes}")
        values = _tensor_sum(rule, law, lam, d, grid, seed, n_modes)
    else:
        c, _, _ = mode_coefficients(rule, d, max(n_modes - 1, 0), radial=(mode == "radial"))
        x = draw_noise(law, n_modes, seed)
        values = np.zeros(grid.shape)
        for n, phi in _basis_stream(mode, d, grid, n_modes):
            w = c[n] * x[n]
            if w != 0:
                values = values + w * phi
    return FieldSample(float(lam), int(seed), d, mode, grid, values, law)


def _tensor_sum(rule, law, lam, d, grid, seed, n_modes):
    grid = np.atleast_2d(grid)
    if grid.shape[-1] != d:
        raise DomainError("tensor grid must have shape (P, d)")
    values = np.zeros(grid.shape[0])
    if n_modes == 0:
        return values
    c, _, _ = mode_coefficients(rule, d, n_modes - 1)
    x = draw_noise(law, n_modes, seed)
    m_top = int(math.floor((lam - d) / 2))
    tables = [hermite_functions(m_top, grid[:, i]) for i in range(d)]
    start = 0
    for m in range(m_top + 1):
        members = level_members(m, d)
        w = c[start:start + len(members)] * x[start:start + len(members)]
        terms = np.empty((len(members), grid.shape[0]))
        for k, alpha in enumerate(members):
            prod = tables[0][alpha[0]]
            for i in range(1, d):
                prod = prod * tables[i][alpha[i]]
            terms[k] = w[k] * prod
        values = values + _pairwise_sum(terms)
        start += len(members)
    return values


def sup_norm(sample: FieldSample) -> float:
    """max |values| over the grid, a lower estimate of the true sup."""
    return float(np.max(np.abs(sample.values))) if sample.values.size else 0.0


def modulus_of_continuity(sample: FieldSample, h_list: Sequence[float]) -> list[float]:
    """m(h) = max over grid pairs with |x - y| <= h of |u(x) - u(y)|.

    Needs a uniform 1-D (or radial) grid.  For a radial field the modulus in
    ℝ^d equals the modulus of the radial profile, since collinear points
    realize every radius difference.
    """
    grid = np.asarray(sample.grid, dtype=float)
    if grid.ndim != 1:
        raise DomainError("modulus_of_continuity needs a 1-D or radial grid")
    return modulus_on_uniform_grid(sample.values, float(grid[1] - grid[0]), h_list)


def modulus_on_uniform_grid(values: np.ndarray, spacing: float, h_list: Sequence[float]) -> list[float]:
    out = []
    for h in h_list:
        if h < 2 * spacing * (1 - 1e-12):
            raise HTooSmall(f"h={h} is below twice the grid spacing {spacing}")
        w = int(math.floor(h / spacing * (1 + 1e-12)))
        size = min(w + 1, values.size)
        hi = maximum_filter1d(values, size=size, mode="nearest")
        lo = minimum_filter1d(values, size=size, mode="nearest")
        out.append(float(np.max(hi - lo)))
    return out


# ---------------------------------------------------------------------------
# Streaming over many trials and cutoffs
# ---------------------------------------------------------------------------

def stream_statistics(rule: CoefficientRule, law: RandomLaw, d: int, mode: str,
                      grid: np.ndarray, seeds: Sequence[int], lambdas: Sequence[float],
                      reducer: Callable[[np.ndarray], np.ndarray], *, blocks: bool = False,
                      workers: int = 1, chunk: int = TRIAL_CHUNK) -> np.ndarray:
    """Apply ``reducer`` to partial sums of every seed at every cutoff.

    Returns an array of shape (len(seeds), len(lambdas)) plus whatever
    trailing shape ``reducer`` produces.  ``reducer`` receives the field
    array of shape (trials_in_chunk, P).  With ``blocks=True`` the field is
    reset after each cutoff, so entry k describes the block of modes with
    eigenvalue in (λ_{k-1}, λ_k].  Chunks of seeds run in parallel threads but
    the per-chunk arithmetic does not depend on ``workers``.
    """
    if mode == "tensor":
        raise DomainError("streaming is implemented for oneD and radial modes")
    _check_mode(mode, d)
    lambdas = [float(v) for v in lambdas]
    if sorted(lambdas) != lambdas:
        raise ConfigError("cutoffs must be increasing")
    counts = [mode_count(v, d, mode) for v in lambdas]
    n_modes = counts[-1] if counts else 0
    c, _, _ = mode_coefficients(rule, d, max(n_modes - 1, 0), radial=(mode == "radial"))
    grid = np.asarray(grid, dtype=float)
    seeds = [int(s) for s in seeds]

    def run_chunk(chunk_seeds):
        noise = np.stack([draw_noise(law, n_modes, s) for s in chunk_seeds]) if n_modes else \
            np.zeros((len(chunk_seeds), 0))
        weights = noise * c[None, :n_modes]
        field_ = np.zeros((len(chunk_seeds), grid.size))
        tmp = np.empty_like(field_)
        results = []
        k = 0
        # Cutoffs below the first mode give empty sums.
        while k < len(counts) and counts[k] == 0:
            results.append(reducer(field_))
            k += 1
        for n, phi in _basis_stream(mode, d, grid, n_modes):
            np.multiply(weights[:, n, None], phi[None, :], out=tmp)
            field_ += tmp
            while k < len(counts) and counts[k] == n + 1:
                results.append(reducer(field_))
                if blocks:
                    field_[:] = 0.0
                k += 1
        return np.stack(results, axis=1)

    pieces = [seeds[i:i + chunk] for i in range(0, len(seeds), chunk)]
    if workers > 1 and len(pieces) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_chunk, pieces))
    else:
        parts = [run_chunk(p) for p in pieces]
    return np.concatenate(parts, axis=0)


def sup_reducer(field_: np.ndarray) -> np.ndarray:
    return np.max(np.abs(field_), axis=1)


# ---------------------------------------------------------------------------
# Bernstein probe
# ---------------------------------------------------------------------------

def _ratio_one(c: np.ndarray, d: int, grid: np.ndarray) -> float:
    """‖u'‖_∞ / ‖u‖_∞ for u = Σ c_n φ_n (oneD if d == 1, radial otherwise)."""
    n_modes = c.size
    u = np.zeros(grid.size)
    du = np.zeros(grid.size)
    if d == 1:
        # u' = Σ_n h_n (sqrt((n+1)/2) c_{n+1} - sqrt(n/2) c_{n-1}).
        cc = np.concatenate([c, [0.0, 0.0]])
        for n, h in iter_hermite(grid, n_modes):
            u += cc[n] * h
            up = math.sqrt((n + 1) / 2) * cc[n + 1]
            dn = math.sqrt(n / 2) * cc[n - 1] if n >= 1 else 0.0
            du += (up - dn) * h
    else:
        for n, psi, dpsi in radial_hermite_derivative_iter(d, grid, n_modes - 1):
            u += c[n] * psi
            du += c[n] * dpsi
    return float(np.max(np.abs(du)) / np.max(np.abs(u)))


def bernstein_ratios(d: int, lam: float, trials: int, seed: int,
                     spacing: float | None = None) -> np.ndarray:
    """‖∇u‖_∞/‖u‖_∞ for ``trials`` random Gaussian coefficient vectors in E(λ)."""
    mode = "oneD" if d == 1 else "radial"
    n_modes = mode_count(lam, d, mode)
    if n_modes == 0:
        raise DomainError("no modes below the cutoff")
    if spacing is None:
        spacing = 0.05 / lam
    grid = default_grid(lam, mode, d, spacing)
    out = []
    for t in range(trials):
        c = draw_noise(RandomLaw("gaussian"), n_modes, trial_seed(seed, t))
        # A zero field cannot occur for Gaussian draws, but keep the guard.
        while not np.any(c):
            c = draw_noise(RandomLaw("gaussian"), n_modes, trial_seed(seed, t + trials))
        out.append(_ratio_one(c, d, grid))
    return np.asarray(out)


def bernstein_probe(d: int, lambda_list: Sequence[float], trials: int, seed: int = 0,
                    spacing_rule: Callable[[float], float] | None = None) -> RateFit:
    """Fit the exponent s in ‖∇u‖_∞ <= C λ^s ‖u‖_∞ from random fields.

    Uses the median ratio over trials at each λ; d = 1 samples the 1-D
    series, d >= 2 the radial series.
    """
    pairs = []
    for lam in lambda_list:
        spacing = spacing_rule(lam) if spacing_rule else None
        pairs.append((float(lam), float(np.median(bernstein_ratios(d, lam, trials, seed, spacing)))))
    return fit_rate(pairs, min_points=min(5, len(pairs)))


def single_mode_bernstein_ratio(n: int, spacing: float | None = None) -> float:
    """‖h_n'‖_∞ / ‖h_n‖_∞ for the 1-D Hermite function of order n."""
    lam = 2 * n + 1
    c = np.zeros(n + 1)
    c[n] = 1.0
    spacing = 0.05 / lam if spacing is None else spacing
    return _ratio_one(c, 1, default_grid(lam, "oneD", 1, spacing))


#: λ values and trial count of the built-in calibration probe.
CALIBRATION_LAMBDAS = (8, 16, 32, 64, 128)
CALIBRATION_TRIALS = 8
CALIBRATION_SEED = 20240607


@lru_cache(maxsize=None)
def bernstein_exponent(d: int) -> float:
    """Calibrated Bernstein exponent s(d), used for every sup-grid spacing.

    Runs a small deterministic probe once per process and clamps the result
    to [1/2, 1]; s = 1 (spacing 0.05/λ) is the fallback if the probe fails.
    The lower clamp keeps the spacing at or below a twentieth of the
    shortest local wavelength ~ λ^{-1/2}.
    """
    try:
        fit = bernstein_probe(d, CALIBRATION_LAMBDAS, CALIBRATION_TRIALS, CALIBRATION_SEED)
    except Exception:  # calibration must never break a run
        return 1.0
    if not math.isfinite(fit.slope):
        return 1.0
    return float(min(1.0, max(0.5, fit.slope)))


# ---------------------------------------------------------------------------
# Salem-Zygmund experiment
# ---------------------------------------------------------------------------

QUANTILES = (0.5, 0.9, 0.99)


@dataclass(frozen=True)
class SalemZygmundReport:
    """Sup-norm statistics of random partial sums across cutoffs.

    ``rho`` uses Σ_{j<=⌊λ/2⌋} and ``rho_full`` uses Σ_{j<=λ}; the normalized
    quantiles are given for both.
    """

    lambdas: list
    rho: list
    rho_full: list
    sup_quantiles: dict
    normalized_ratio: dict
    normalized_ratio_full: dict
    trials: int
    seed: int
    sups: np.ndarray = field(repr=False, default=None)

    def spread(self, q: float = 0.99, full: bool = False) -> float:
        vals = np.asarray((self.normalized_ratio_full if full else self.normalized_ratio)[q])
        return float(vals.max() / vals.min())


def rho_lambda(rule: CoefficientRule, d: int, lam: float, radial: bool, full: bool = False) -> float:
    """Σ_{1<=j<=J} j^γ(d) max_{n∈I(j)}|c_n|² with J = ⌊λ/2⌋ (or ⌊λ⌋ if ``full``)."""
    J = int(math.floor(lam if full else lam / 2))
    if J < 1:
        return 0.0
    mx = bucket_max_sq(rule, d, J, radial=radial)
    j = np.arange(1, J + 1, dtype=float)
    return float(math.fsum(j ** SpectralLayout(d).gamma * mx[1:]))


def salem_zygmund_experiment(rule: CoefficientRule, law: RandomLaw, d: int,
                             lambda_list: Sequence[float], trials: int = 512, seed: int = 0,
                             *, workers: int = 1) -> SalemZygmundReport:
    """Quantiles of M_λ = ‖u_λ‖_∞ and of M_λ / sqrt(ln λ · ρ_λ).

    One grid, fine enough for the largest λ, serves every cutoff, and every
    trial reuses its noise across cutoffs.
    """
    mode = "oneD" if d == 1 else "radial"
    lambdas = sorted(float(v) for v in lambda_list)
    grid = default_grid(lambdas[-1], mode, d)
    seeds = [trial_seed(seed, t) for t in range(trials)]
    sups = stream_statistics(rule, law, d, mode, grid, seeds, lambdas, sup_reducer, workers=workers)
    radial = mode == "radial"
    rho = [rho_lambda(rule, d, v, radial) for v in lambdas]
    rho_full = [rho_lambda(rule, d, v, radial, full=True) for v in lambdas]
    sup_q, norm_q, norm_full_q = {}, {}, {}
    for q in QUANTILES:
        qs = np.quantile(sups, q, axis=0)
        sup_q[q] = qs.tolist()
        with np.errstate(divide="ignore", invalid="ignore"):
            norm_q[q] = (qs / np.sqrt(np.log(lambdas) * np.asarray(rho))).tolist()
            norm_full_q[q] = (qs / np.sqrt(np.log(lambdas) * np.asarray(rho_full))).tolist()
    return SalemZygmundReport(lambdas, rho, rho_full, sup_q, norm_q, norm_full_q,
                              trials, int(seed), sups)
