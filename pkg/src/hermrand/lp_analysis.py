"""Lᵖ norms of radial Hermite functions, square functions and growth exponents.

Radial integrals are taken in ρ = |x|:

    ‖ψ_n‖_p^p = Vol(S^{d-1}) ∫_0^∞ |ψ_n(ρ)|^p ρ^{d-1} dρ,

with panel boundaries forced at the images ρ = sqrt(r) of the envelope seams
r = 1/ν, ν/2, ν, 3ν/2 and a fine panel width inside the turning-point window.
Beyond a cut ``r_end`` the integral is replaced by a certified bound built
from the exponential tail of the Erdélyi envelope.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import Degenerate, DomainError
from .fitting import RateFit, fit_rate
from .quadrature import integrate, subdivide
from .random_series import domain_radius
from .spectral import SLOPE_MARGIN, CoefficientRule, mode_coefficients, sup_grid_spacing
from .special_fn import (
    DEFAULT_TAIL_GAMMA,
    iter_radial_hermite,
    radial_constant,
    sphere_volume,
    szeg_lower_region,
)

__all__ = [
    "RateFit",
    "fit_rate",
    "EstradPrediction",
    "estrad_prediction",
    "LpNormResult",
    "lp_norm_radial",
    "lp_norm_radial_detail",
    "lp_norms_radial",
    "LpRateResult",
    "lp_rate",
    "lower_bound_certificate",
    "SquareFunctionSweep",
    "AlphaStarResult",
    "alpha_star",
    "square_function_lp",
    "square_function_sweep",
]

#: Safety constant multiplying the envelope in every certified tail bound.
TAIL_SAFETY = 10.0
#: Absolute size targeted for the certified tail remainder.
TAIL_TARGET = 1e-16
#: Largest number of per-n seam sets inserted in one batched integration.
MAX_SEAM_SETS = 64


# ---------------------------------------------------------------------------
# Predicted exponents
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EstradPrediction:
    """Predicted growth exponent of ‖ψ_n‖_{L^p} in n.

    ``regime`` is ``above``, ``at`` or ``below`` the critical p₁ = 2d/(d-1);
    only ``above`` comes with a matching lower bound.
    """

    d: int
    p: float
    p1: float
    regime: str
    exponent: float
    log_correction: bool


def estrad_prediction(d: int, p: float) -> EstradPrediction:
    if d < 2:
        raise DomainError("radial predictions need d >= 2")
    if p < 2:
        raise DomainError("predictions cover p >= 2")
    p1 = 2 * d / (d - 1)
    inv = 0.0 if math.isinf(p) else 1.0 / p
    if math.isclose(p, p1, rel_tol=1e-12):
        return EstradPrediction(d, p, p1, "at", -0.25, True)
    if p > p1:
        return EstradPrediction(d, p, p1, "above", d / 2 * (0.5 - inv) - 0.5, False)
    return EstradPrediction(d, p, p1, "below", -d / 2 * (0.5 - inv), False)


# ---------------------------------------------------------------------------
# Radial Lᵖ norms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LpNormResult:
    n: int
    d: int
    p: float
    value: float
    integral: float
    tail_bound: float
    quad_error: float
    r_end: float
    converged: bool


def _tail_integral_bound(b: float, a: float, R: float) -> float:
    """Upper bound of ∫_R^∞ r^a e^{-b r} dr for b > max(a, 0)/R."""
    a_pos = max(a, 0.0)
    rate = b - a_pos / R
    if rate <= 0:
        return math.inf
    return math.exp(a * math.log(R) - b * R) / rate


def _lp_tail(p: float, d: int, R: float, gamma: float) -> float:
    """Certified bound on c(d)^{p-2} ∫_R^∞ |𝓛_n|^p r^{α(1-p/2)} dr.

    Uses |𝓛_n(r)| <= C e^{-γ r} for r >= 3ν/2 with C = ``TAIL_SAFETY``.
    """
    alpha = d / 2 - 1
    c = radial_constant(d)
    pref = TAIL_SAFETY ** p * c ** (p - 2)
    return pref * _tail_integral_bound(gamma * p, alpha * (1 - p / 2), R)


def recurrence_noise(n_max: int, p: float) -> float:
    """Relative accuracy of |ψ_n|^p from the forward recurrence, ~ p·n·eps."""
    return 64 * np.finfo(float).eps * max(n_max, 1) * max(p, 1.0)


def _choose_r_end(nu_max: float, bound) -> float:
    r = 1.5 * nu_max + 10.0 * nu_max ** (1 / 3) + 10.0
    while bound(r) > TAIL_TARGET:
        r *= 1.25
    return r


def _radial_breakpoints(nus: Sequence[float], rho_end: float) -> np.ndarray:
    """Panel boundaries in ρ: every seam, plus a uniform mesh over the
    oscillatory range.

    The mesh width is the smaller of half the shortest wavelength π/sqrt(ν)
    and the turning-window width ν^{1/3}/4 mapped to ρ, both for the largest
    ν; that satisfies the window constraint of every smaller ν too, since
    ν^{1/3}/(8 sqrt(ν)) decreases in ν.  With many ν only ``MAX_SEAM_SETS``
    of them (evenly spread, always including the largest) contribute seams;
    the mesh already resolves the others and seams for every n would
    multiply the panel count.
    """
    nus = sorted(nus)
    nu_max = nus[-1]
    if len(nus) > MAX_SEAM_SETS:
        pick = np.unique(np.linspace(0, len(nus) - 1, MAX_SEAM_SETS).round().astype(int))
        nus = [nus[i] for i in pick]
    seams = [0.0, rho_end]
    for nu in nus:
        for r in (1 / nu, nu / 2, nu, 1.5 * nu, max(nu - 5 * nu ** (1 / 3), 0.0),
                  nu + 5 * nu ** (1 / 3)):
            seams.append(math.sqrt(r))
    seams = np.unique([q for q in seams if q <= rho_end])
    osc_end = min(rho_end, math.sqrt(nu_max + 5 * nu_max ** (1 / 3)))
    width = min(math.pi / math.sqrt(nu_max), nu_max ** (1 / 3) / (8 * math.sqrt(nu_max)))
    mesh = subdivide([0.0, osc_end], width)
    return np.unique(np.concatenate([mesh, seams]))


def lp_norms_radial(ns: Sequence[int], d: int, p: float, *, tol: float = 1e-10,
                    rtol: float = 0.0, gamma: float = DEFAULT_TAIL_GAMMA,
                    max_panels: int = 2_000_000) -> list[LpNormResult]:
    """‖ψ_n‖_{L^p(ℝ^d)} for several n sharing one recurrence pass per node."""
    if d < 2:
        raise DomainError("radial norms need d >= 2")
    if not p >= 1:
        raise DomainError("p must be >= 1")
    ns = [int(n) for n in ns]
    if any(n < 0 for n in ns):
        raise DomainError("n must be >= 0")
    order = sorted(set(ns))
    n_max = order[-1]
    if math.isinf(p):
        return _sup_norms(order, d, ns)
    alpha = d / 2 - 1
    nus = [4 * n + 2 * alpha + 2 for n in order]
    r_end = _choose_r_end(max(nus), lambda R: _lp_tail(p, d, R, gamma))
    rho_end = math.sqrt(r_end)
    vol = sphere_volume(d)
    rows = {n: i for i, n in enumerate(order)}

    def f(rho):
        out = np.empty((len(order), rho.size))
        w = vol * rho ** (d - 1)
        for n, psi in iter_radial_hermite(d, rho, n_max):
            if n in rows:
                out[rows[n]] = np.abs(psi) ** p * w
        return out

    res = integrate(f, _radial_breakpoints(nus, rho_end), m_out=len(order), tol=tol,
                    rtol=rtol, noise=recurrence_noise(n_max, p), max_panels=max_panels)
    tail = _lp_tail(p, d, r_end, gamma)
    results = {}
    for n, i in rows.items():
        integral = float(res.value[i])
        results[n] = LpNormResult(n, d, p, integral ** (1 / p), integral, tail,
                                  float(res.error[i]), r_end, res.converged)
    return [results[n] for n in ns]


def _sup_norms(order, d, ns):
    n_max = order[-1]
    lam = 4 * n_max + d
    spacing = sup_grid_spacing(lam, d=d)
    rho = np.arange(0.0, domain_radius(lam) + spacing, spacing)
    want = set(order)
    results = {}
    for n, psi in iter_radial_hermite(d, rho, n_max):
        if n in want:
            v = float(np.max(np.abs(psi)))
            results[n] = LpNormResult(n, d, math.inf, v, v, 0.0, 0.0, float(rho[-1] ** 2), True)
    return [results[n] for n in ns]


def lp_norm_radial_detail(n: int, d: int, p: float, **kwargs) -> LpNormResult:
    return lp_norms_radial([n], d, p, **kwargs)[0]


def lp_norm_radial(n: int, d: int, p: float, **kwargs) -> float:
    """‖ψ_n‖_{L^p(ℝ^d)}; p may be ``math.inf``."""
    return lp_norm_radial_detail(n, d, p, **kwargs).value


@dataclass(frozen=True)
class LpRateResult:
    d: int
    p: float
    ns: list
    values: list
    fit: RateFit
    prediction: EstradPrediction
    band_ratio: float


def lp_rate(d: int, p: float, ns: Sequence[int], **kwargs) -> LpRateResult:
    """Fit the growth exponent of ‖ψ_n‖_p over ``ns`` and the band ratio
    max/min of ‖ψ_n‖_p / n^{predicted exponent}."""
    pred = estrad_prediction(d, p)
    vals = [r.value for r in lp_norms_radial(ns, d, p, **kwargs)]
    fit = fit_rate(list(zip(ns, vals)))
    scaled = np.asarray(vals) / np.asarray(ns, dtype=float) ** pred.exponent
    return LpRateResult(d, p, list(ns), vals, fit, pred, float(scaled.max() / scaled.min()))


def lower_bound_certificate(n: int, d: int, grid_points: int = 256) -> tuple[float, float, float]:
    """(ε, c, m) with m = min over |x| <= ε/sqrt(n) of |ψ_n(x)| / n^{d/4-1/2}."""
    alpha = d / 2 - 1
    eps, c = szeg_lower_region(n, alpha)
    rho = np.linspace(0.0, eps / math.sqrt(n), grid_points + 1)[1:]
    for k, psi in iter_radial_hermite(d, rho, n):
        pass
    return eps, c, float(np.min(np.abs(psi)) / n ** (d / 4 - 0.5))


# ---------------------------------------------------------------------------
# Critical exponent
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AlphaStarResult:
    alpha_star: float
    d_over_alpha: float
    bounded: bool
    fit: RateFit | None
    partial_sums: np.ndarray


def alpha_star(rule: CoefficientRule, d: int, N_max: int = 1_000_000,
               bounded_slope: float = 0.02, points: int = 64) -> AlphaStarResult:
    """Growth exponent of S_N = Σ_{n=1}^N n^{d/2-1} |c_n|² over the last decade.

    ``c_n`` are the radial-mode coefficients.  The exponent is clamped at 0 and
    S_N counts as bounded (d/α⋆ = ∞) when the fitted slope is below
    ``bounded_slope``.
    """
    if N_max < 1000:
        raise DomainError("N_max must be at least 1000")
    c, _, _ = mode_coefficients(rule, d, N_max, radial=True)
    n = np.arange(1, N_max + 1, dtype=float)
    S = np.cumsum(n ** (d / 2 - 1) * c[1:] ** 2)
    Ns = np.unique(np.geomspace(N_max / 10, N_max, points).astype(int))
    vals = S[Ns - 1]
    if np.all(vals == vals[-1]) or vals[-1] <= 0:
        return AlphaStarResult(0.0, math.inf, True, None, S)
    fit = fit_rate(list(zip(Ns, vals)))
    a = max(fit.slope, 0.0)
    bounded = fit.slope < bounded_slope
    return AlphaStarResult(a, math.inf if bounded else d / a, bool(bounded), fit, S)


# ---------------------------------------------------------------------------
# Square function
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SquareFunctionSweep:
    """‖(Σ_{λ_n<=λ} |c_n ψ_n|²)^{1/2}‖_{L^p} along increasing cutoffs.

    ``slope`` is the log-log slope over the last decade of cutoffs and
    ``cauchy_tail`` the relative change of the value over that decade.
    ``verdict`` is ``stabilizes`` (|slope| < margin), ``diverges``
    (slope > margin) or ``undecided``.
    """

    d: int
    p: float
    lambdas: list
    values: list
    tail_bounds: list
    slope: float
    cauchy_tail: float
    verdict: str


def _square_tail(p: float, d: int, R: float, gamma: float, mass: float) -> float:
    """Bound on ∫_{|x|^2 > R} F^{p/2} with F <= c² C² e^{-2γr} Σ|c_n|²."""
    alpha = d / 2 - 1
    c = radial_constant(d)
    pref = 0.5 * sphere_volume(d) * (c * c * TAIL_SAFETY ** 2 * mass) ** (p / 2)
    return pref * _tail_integral_bound(gamma * p, alpha, R)


def square_function_sweep(rule: CoefficientRule, d: int, p: float, lambdas: Sequence[float], *,
                          tol: float = 1e-12, rtol: float = 1e-9,
                          gamma: float = DEFAULT_TAIL_GAMMA) -> SquareFunctionSweep:
    if d < 2:
        raise DomainError("square functions are computed for radial series, d >= 2")
    if p < 2:
        raise DomainError("p must be >= 2")
    lambdas = sorted(float(v) for v in lambdas)
    counts = [max(0, int(math.floor((v - d) / 4)) + 1) for v in lambdas]
    n_top = max(counts) - 1
    if n_top < 0:
        raise DomainError("no radial modes below the cutoffs")
    c, _, _ = mode_coefficients(rule, d, n_top, radial=True)
    c2 = c * c
    mass = float(c2.sum())
    nu_max = 4 * n_top + d
    r_end = _choose_r_end(nu_max, lambda R: _square_tail(p, d, R, gamma, mass))
    vol = sphere_volume(d)
    checkpoints = {}
    for i, k in enumerate(counts):
        checkpoints.setdefault(k - 1, []).append(i)

    def f(rho):
        out = np.zeros((len(lambdas), rho.size))
        F = np.zeros(rho.size)
        w = vol * rho ** (d - 1)
        for n, psi in iter_radial_hermite(d, rho, n_top):
            F += c2[n] * psi * psi
            for i in checkpoints.get(n, ()):
                out[i] = F ** (p / 2) * w
        return out

    nus = [4 * n + d for n in sorted({k - 1 for k in counts if k > 0})]
    res = integrate(f, _radial_breakpoints(nus, math.sqrt(r_end)), m_out=len(lambdas),
                    tol=tol, rtol=rtol, noise=recurrence_noise(n_top, p), max_panels=2_000_000)
    values = (np.maximum(res.value, 0.0) ** (1 / p)).tolist()
    tail = _square_tail(p, d, r_end, gamma, mass)
    lam = np.asarray(lambdas)
    vals = np.asarray(values)
    last = lam >= lam[-1] / 10
    if np.count_nonzero(last) >= 2 and np.all(vals[last] > 0):
        slope = float(np.polyfit(np.log(lam[last]), np.log(vals[last]), 1)[0])
        first = vals[last][0]
        cauchy = float(abs(vals[-1] - first) / vals[-1])
    else:
        slope, cauchy = math.nan, math.nan
    if not math.isfinite(slope):
        verdict = "undecided"
    elif abs(slope) < SLOPE_MARGIN:
        verdict = "stabilizes"
    elif slope > SLOPE_MARGIN:
        verdict = "diverges"
    else:
        verdict = "undecided"
    return SquareFunctionSweep(d, p, lambdas, values, [tail] * len(lambdas), slope, cauchy, verdict)


def square_function_lp(rule: CoefficientRule, d: int, p: float, lam: float, **kwargs) -> float:
    """‖(Σ_{4n+d<=λ} |c_n ψ_n|²)^{1/2}‖_{L^p(ℝ^d)} for radial coefficients c_n."""
    return square_function_sweep(rule, d, p, [lam], **kwargs).values[0]
