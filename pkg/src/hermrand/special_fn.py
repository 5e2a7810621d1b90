"""Hermite functions, Laguerre functions and radial eigenfunctions of -Δ+|x|².

All recurrences run on a scaled mantissa with a per-point log scale, so the
Gaussian weight never leaves the representable range: the weight lives in the
log scale, the mantissa carries the polynomial.  Values that are genuinely
below the smallest double flush to zero.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, SearchFailed

_BIG = 1e150
_SMALL = 1e-150
_LOG_BIG = math.log(_BIG)

#: Tail rate used by :func:`erdelyi_envelope` beyond ``r = 3ν/2``.
DEFAULT_TAIL_GAMMA = 0.05


def _rescale(cur, prev, scale):
    big = np.abs(cur) > _BIG
    if big.any():
        cur = np.where(big, cur * _SMALL, cur)
        prev = np.where(big, prev * _SMALL, prev)
        scale = np.where(big, scale + _LOG_BIG, scale)
    small = (np.abs(cur) < _SMALL) & (np.abs(prev) < _SMALL) & (cur != 0)
    if small.any():
        cur = np.where(small, cur * _BIG, cur)
        prev = np.where(small, prev * _BIG, prev)
        scale = np.where(small, scale - _LOG_BIG, scale)
    return cur, prev, scale


def _exp_scaled(mant, log_scale):
    with np.errstate(over="ignore", under="ignore"):
        return mant * np.exp(log_scale)


# ---------------------------------------------------------------------------
# 1-D Hermite functions
# ---------------------------------------------------------------------------

def iter_hermite(t, k_max: int) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(k, h_k(t))`` for ``k = 0..k_max``, L²(ℝ)-normalized.

    Upward recurrence h_{k+1} = sqrt(2/(k+1)) t h_k - sqrt(k/(k+1)) h_{k-1}.
    """
    t = np.asarray(t, dtype=float)
    scale = -0.5 * t * t - 0.25 * math.log(math.pi)
    prev = np.zeros_like(t)
    cur = np.ones_like(t)
    yield 0, _exp_scaled(cur, scale)
    for k in range(k_max):
        nxt = math.sqrt(2.0 / (k + 1)) * t * cur - math.sqrt(k / (k + 1.0)) * prev
        prev, cur = cur, nxt
        cur, prev, scale = _rescale(cur, prev, scale)
        yield k + 1, _exp_scaled(cur, scale)


def hermite_functions(k_max: int, t) -> np.ndarray:
    """Array ``H[k, ...] = h_k(t)`` for ``0 <= k <= k_max``."""
    t = np.asarray(t, dtype=float)
    out = np.empty((k_max + 1,) + t.shape)
    for k, v in iter_hermite(t, k_max):
        out[k] = v
    return out


@dataclass(frozen=True)
class HermiteBatch:
    t: float
    k_max: int
    values: np.ndarray


def hermite_batch(t: float, k_max: int) -> HermiteBatch:
    if k_max < 0:
        raise DomainError("k_max must be >= 0")
    return HermiteBatch(float(t), int(k_max), hermite_functions(k_max, float(t)))


def hermite_derivative(k: int, t):
    """h_k'(t) = 2^{-1/2} (sqrt(k) h_{k-1}(t) - sqrt(k+1) h_{k+1}(t))."""
    if k < 0:
        raise DomainError("k must be >= 0")
    H = hermite_functions(k + 1, t)
    lower = H[k - 1] if k >= 1 else 0.0
    return (math.sqrt(k) * lower - math.sqrt(k + 1) * H[k + 1]) / math.sqrt(2.0)


def hermite_tensor(alpha: Sequence[int], x) -> float | np.ndarray:
    """Tensor Hermite function φ_α(x) = Π_i h_{α_i}(x_i).

    ``x`` may be a single point of length d or an array of shape (..., d).
    The eigenvalue of φ_α is 2|α| + d.
    """
    alpha = [int(a) for a in alpha]
    if any(a < 0 for a in alpha):
        raise DomainError("multi-index entries must be >= 0")
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != len(alpha):
        raise DomainError("point dimension does not match multi-index length")
    out = hermite_functions(alpha[0], x[..., 0])[alpha[0]]
    for i in range(1, len(alpha)):
        out = out * hermite_functions(alpha[i], x[..., i])[alpha[i]]
    return float(out) if out.ndim == 0 else out


def hermite_eigenvalue(alpha: Sequence[int]) -> int:
    return 2 * sum(alpha) + len(alpha)


# ---------------------------------------------------------------------------
# Laguerre polynomials and functions
# ---------------------------------------------------------------------------

def _check_alpha(alpha: float) -> None:
    if not alpha > -1:
        raise DomainError(f"Laguerre type parameter must exceed -1, got {alpha}")


def iter_laguerre_normalized(alpha: float, r, n_max: int):
    """Yield ``(n, mantissa, log_scale)`` with sqrt(n!/Γ(n+α+1)) L_n^{(α)}(r) =
    mantissa * exp(log_scale).

    Classical recurrence (n+1)L_{n+1} = (2n+1+α-r)L_n - (n+α)L_{n-1} with the
    normalization folded into each step:

        ℓ_{n+1} = [(2n+1+α-r) ℓ_n - sqrt(n(n+α)) ℓ_{n-1}] / sqrt((n+1)(n+α+1)).
    """
    _check_alpha(alpha)
    r = np.asarray(r, dtype=float)
    scale = np.full(r.shape, -0.5 * gammaln(alpha + 1.0))
    prev = np.zeros_like(r)
    cur = np.ones_like(r)
    yield 0, cur, scale
    for n in range(n_max):
        nxt = ((2 * n + 1 + alpha - r) * cur - math.sqrt(n * (n + alpha)) * prev) / math.sqrt(
            (n + 1) * (n + alpha + 1)
        )
        prev, cur = cur, nxt
        cur, prev, scale = _rescale(cur, prev, scale)
        yield n + 1, cur, scale


def _log_weight(alpha: float, r: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        lw = -0.5 * r + 0.5 * alpha * np.log(r)
    if alpha == 0:
        lw = np.where(r == 0, 0.0, lw)
    return lw


def iter_laguerre_functions(alpha: float, r, n_max: int) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(n, 𝓛_n^{(α)}(r))``, the L²(0,∞)-normalized Laguerre functions

    𝓛_n^{(α)}(r) = sqrt(n!/Γ(n+α+1)) L_n^{(α)}(r) e^{-r/2} r^{α/2}.
    """
    r = np.asarray(r, dtype=float)
    lw = _log_weight(alpha, r)
    for n, mant, scale in iter_laguerre_normalized(alpha, r, n_max):
        yield n, _exp_scaled(mant, scale + lw)


def laguerre_functions(alpha: float, r, n_max: int) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    out = np.empty((n_max + 1,) + r.shape)
    for n, v in iter_laguerre_functions(alpha, r, n_max):
        out[n] = v
    return out


@dataclass(frozen=True)
class LaguerreBatch:
    """Laguerre data at one point ``r`` for all degrees ``0..n_max``.

    ``poly_sign`` is -1/+1, or 0 as the flag for an exact zero (in which case
    ``poly_log_abs`` holds 0 and carries no meaning).
    """

    alpha: float
    r: float
    n_max: int
    fn_values: np.ndarray
    poly_sign: np.ndarray
    poly_log_abs: np.ndarray
    nu: np.ndarray = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "nu", 4 * np.arange(self.n_max + 1) + 2 * self.alpha + 2)

    @property
    def log_poly(self) -> list[tuple[int, float]]:
        return list(zip(self.poly_sign.tolist(), self.poly_log_abs.tolist()))

    def poly_values(self) -> np.ndarray:
        """L_n^{(α)}(r) as floats (may overflow to ±inf for large r, n)."""
        with np.errstate(over="ignore"):
            return self.poly_sign * np.exp(self.poly_log_abs)


def laguerre_log_poly(alpha: float, r, n_max: int):
    """Sign and log|L_n^{(α)}(r)| arrays of shape ``(n_max+1,) + r.shape``."""
    r = np.asarray(r, dtype=float)
    sign = np.empty((n_max + 1,) + r.shape, dtype=np.int8)
    logabs = np.empty((n_max + 1,) + r.shape)
    for n, mant, scale in iter_laguerre_normalized(alpha, r, n_max):
        sign[n] = np.sign(mant).astype(np.int8)
        norm = 0.5 * (gammaln(n + alpha + 1.0) - gammaln(n + 1.0))
        with np.errstate(divide="ignore"):
            la = np.log(np.abs(mant)) + scale + norm
        logabs[n] = np.where(mant == 0, 0.0, la)
    return sign, logabs


def laguerre_batch(alpha: float, r: float, n_max: int) -> LaguerreBatch:
    _check_alpha(alpha)
    if r < 0:
        raise DomainError("r must be >= 0")
    if n_max < 0:
        raise DomainError("n_max must be >= 0")
    fn = laguerre_functions(alpha, float(r), n_max)
    sign, logabs = laguerre_log_poly(alpha, float(r), n_max)
    return LaguerreBatch(float(alpha), float(r), int(n_max), fn, sign, logabs)


def laguerre_poly(alpha: float, n: int, r) -> np.ndarray:
    """L_n^{(α)}(r) as floats, via the scaled recurrence."""
    sign, logabs = laguerre_log_poly(alpha, r, n)
    with np.errstate(over="ignore"):
        return sign[n] * np.exp(logabs[n])


def _normalized_at(alpha: float, r: np.ndarray, n: int):
    """Mantissa and log scale of ℓ_n = sqrt(n!/Γ(n+α+1)) L_n^{(α)} at ``r``."""
    for k, mant, scale in iter_laguerre_normalized(alpha, r, n):
        pass
    return mant, scale


def laguerre_derivative_identity_check(alpha: float, n: int, r: float, step: float = 1e-6) -> float:
    """Relative residual of d/dr L_n^{(α)}(r) = -L_{n-1}^{(α+1)}(r) by finite differences.

    Works with the normalized ℓ_n, for which the identity reads
    ℓ_n' = -sqrt(n) ℓ_{n-1}^{(α+1)}; all values are kept as mantissa and
    log scale relative to the scale at ``r``, so nothing overflows.  The
    residual is divided by max(|L_{n-1}^{(α+1)}(r)|, 1).  A central
    difference is used, or a one-sided one at ``r < step`` so the stencil
    stays in r >= 0.
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    if r >= step:
        pts, w = np.array([r - step, r + step]), np.array([-0.5, 0.5])
    else:
        pts, w = np.array([r, r + step, r + 2 * step]), np.array([-1.5, 2.0, -0.5])
    mant, scale = _normalized_at(alpha, pts, n)
    sm, ss = _normalized_at(alpha + 1, np.array([float(r)]), n - 1)
    ref = float(ss[0])
    fd = float(np.sum(w * mant * np.exp(scale - ref))) / step
    target = -math.sqrt(n) * float(sm[0])
    # |L_{n-1}^{(α+1)}| = K sqrt(n) |ℓ_{n-1}^{(α+1)}| with K = sqrt(Γ(n+α+1)/n!).
    log_k = 0.5 * (gammaln(n + alpha + 1.0) - gammaln(n + 1.0))
    floor = math.exp(min(700.0, -log_k - ref))
    return abs(fd - target) / max(abs(target), floor)


def laguerre_ode_residual(alpha: float, n: int, r) -> np.ndarray:
    """Relative residual of r L'' + (α+1-r) L' + n L = 0 for L = L_n^{(α)}.

    Derivatives come from L' = -L_{n-1}^{(α+1)} and L'' = L_{n-2}^{(α+2)}.
    The residual is divided by the sum of the magnitudes of the three terms,
    with a common log scale factored out so nothing overflows.
    """
    r = np.asarray(r, dtype=float)
    s0, l0 = laguerre_log_poly(alpha, r, n)
    s0, l0 = s0[n], l0[n]
    if n >= 1:
        s1, l1 = laguerre_log_poly(alpha + 1, r, n - 1)
        s1, l1 = -s1[n - 1], l1[n - 1]
    else:
        s1, l1 = np.zeros_like(s0), np.zeros_like(l0)
    if n >= 2:
        s2, l2 = laguerre_log_poly(alpha + 2, r, n - 2)
        s2, l2 = s2[n - 2], l2[n - 2]
    else:
        s2, l2 = np.zeros_like(s0), np.zeros_like(l0)
    with np.errstate(divide="ignore"):
        terms_log = [
            l2 + np.log(np.abs(r)),
            l1 + np.log(np.abs(alpha + 1 - r)),
            l0 + (math.log(n) if n > 0 else -np.inf),
        ]
    signs = [
        s2 * np.sign(r),
        s1 * np.sign(alpha + 1 - r),
        s0 * (1 if n > 0 else 0),
    ]
    terms_log = [np.where(s != 0, t, -np.inf) for s, t in zip(signs, terms_log)]
    top = np.maximum.reduce(terms_log)
    top = np.where(np.isfinite(top), top, 0.0)
    vals = [s * np.exp(t - top) for s, t in zip(signs, terms_log)]
    total = vals[0] + vals[1] + vals[2]
    scale = np.abs(vals[0]) + np.abs(vals[1]) + np.abs(vals[2])
    return np.where(scale > 0, np.abs(total) / np.where(scale > 0, scale, 1.0), 0.0)


# ---------------------------------------------------------------------------
# Radial Hermite functions
# ---------------------------------------------------------------------------

def sphere_volume(d: int) -> float:
    """Surface measure of S^{d-1} = 2 π^{d/2} / Γ(d/2)."""
    return 2.0 * math.pi ** (d / 2) / math.gamma(d / 2)


def radial_constant(d: int) -> float:
    """c(d) = sqrt(2) / sqrt(Vol(S^{d-1}))."""
    return math.sqrt(2.0 / sphere_volume(d))


@dataclass(frozen=True)
class RadialBasis:
    d: int

    def __post_init__(self):
        if self.d < 2:
            raise DomainError("radial basis needs d >= 2")

    @property
    def c_of_d(self) -> float:
        return radial_constant(self.d)

    @property
    def alpha(self) -> float:
        return self.d / 2 - 1

    def eigenvalue(self, n):
        return 4 * np.asarray(n) + self.d

    def __call__(self, n: int, radius):
        return radial_hermite(n, self.d, radius)


def iter_radial_hermite(d: int, radius, n_max: int) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(n, ψ_n(radius))`` for ``n = 0..n_max``.

    ψ_n(x) = c(d) sqrt(n!/Γ(n+d/2)) L_n^{(d/2-1)}(|x|²) e^{-|x|²/2}; this form
    is continuous at the origin for every d >= 2.
    """
    if d < 2:
        raise DomainError("radial Hermite functions need d >= 2")
    radius = np.asarray(radius, dtype=float)
    r = radius * radius
    lw = -0.5 * r + math.log(radial_constant(d))
    for n, mant, scale in iter_laguerre_normalized(d / 2 - 1, r, n_max):
        yield n, _exp_scaled(mant, scale + lw)


def radial_hermite(n: int, d: int, radius):
    """ψ_n at points of norm ``radius`` (scalar or array)."""
    if d < 2:
        raise DomainError("radial Hermite functions need d >= 2")
    if n < 0:
        raise DomainError("n must be >= 0")
    radius = np.asarray(radius, dtype=float)
    out = None
    for k, v in iter_radial_hermite(d, radius, n):
        out = v
    return float(out) if out.ndim == 0 else out


def radial_hermite_derivative_iter(d: int, radius, n_max: int):
    """Yield ``(n, ψ_n, dψ_n/d|x|)`` using L_n' = -L_{n-1}^{(α+1)}.

    With ℓ_n = sqrt(n!/Γ(n+α+1)) L_n^{(α)} one has ℓ_n' = -sqrt(n) ℓ_{n-1}^{(α+1)},
    hence dψ_n/dρ = 2ρ c(d) e^{-ρ²/2} (ℓ_n'(ρ²) - ℓ_n(ρ²)/2).
    """
    alpha = d / 2 - 1
    radius = np.asarray(radius, dtype=float)
    r = radius * radius
    lw = -0.5 * r + math.log(radial_constant(d))
    main = iter_laguerre_normalized(alpha, r, n_max)
    shifted = iter_laguerre_normalized(alpha + 1, r, max(n_max - 1, 0))
    prev_shift = None
    for n, mant, scale in main:
        psi = _exp_scaled(mant, scale + lw)
        if n == 0:
            dl = np.zeros_like(r)
        else:
            if prev_shift is None or prev_shift[0] != n - 1:
                prev_shift = next(shifted)
            _, sm, ss = prev_shift
            dl = -math.sqrt(n) * _exp_scaled(sm, ss + lw)
        yield n, psi, 2 * radius * (dl - 0.5 * psi)


# ---------------------------------------------------------------------------
# Erdélyi envelope and the small-r lower bound
# ---------------------------------------------------------------------------

REGIMES = ("origin", "bulk", "turning", "tail")


def erdelyi_envelope(n: int, alpha: float, r, gamma: float = DEFAULT_TAIL_GAMMA):
    """Constant-free Erdélyi bound for |𝓛_n^{(α)}(r)|, with ν = 4n + 2α + 2.

    Returns ``(value, regime)``; for array ``r`` both are arrays.
    Regimes: ``origin`` r <= 1/ν, ``bulk`` 1/ν <= r <= ν/2, ``turning``
    ν/2 <= r <= 3ν/2, ``tail`` r >= 3ν/2.
    """
    _check_alpha(alpha)
    nu = 4 * n + 2 * alpha + 2
    r_arr = np.asarray(r, dtype=float)
    rv = r_arr * nu
    with np.errstate(divide="ignore", invalid="ignore"):
        origin = rv ** (alpha / 2)
        bulk = rv ** -0.25
        turning = nu ** -0.25 * (nu ** (1 / 3) + np.abs(nu - r_arr)) ** -0.25
        tail = np.exp(-gamma * r_arr)
    idx = np.select(
        [r_arr <= 1 / nu, r_arr <= nu / 2, r_arr <= 1.5 * nu],
        [0, 1, 2],
        default=3,
    )
    value = np.choose(idx, [origin, bulk, turning, tail])
    regime = np.array(REGIMES, dtype=object)[idx]
    if r_arr.ndim == 0:
        return float(value), str(regime)
    return value, regime


def szeg_lower_region(n: int, alpha: float, *, grid_points: int = 256, eps_floor: float = 1e-3):
    """Search for (ε, c) with |L_n^{(α)}(r)| >= c n^α on (0, ε²/n).

    The candidate constant is c = L_n^{(α)}(0) / (2 n^α); ε is the largest
    value <= 1 (bisection to relative 1e-6) for which the grid minimum over
    (0, ε²/n] stays above c n^α.
    """
    _check_alpha(alpha)
    if n < 1:
        raise DomainError("n must be >= 1")
    log_l0 = gammaln(n + alpha + 1) - gammaln(n + 1) - gammaln(alpha + 1)
    log_target = log_l0 - math.log(2.0)
    c = math.exp(log_target - alpha * math.log(n))

    def ok(eps: float) -> bool:
        r = np.linspace(0.0, eps * eps / n, grid_points + 1)[1:]
        sign, logabs = laguerre_log_poly(alpha, r, n)
        s, la = sign[n], logabs[n]
        return bool(np.all((s > 0) & (la >= log_target)))

    if ok(1.0):
        return 1.0, c
    if not ok(eps_floor):
        raise SearchFailed(f"no epsilon >= {eps_floor} for n={n}, alpha={alpha}")
    lo, hi = eps_floor, 1.0
    while hi - lo > 1e-6 * hi:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return lo, c
