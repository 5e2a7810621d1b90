"""Eigenvalue buckets, spectral functions and coefficient-space norms.

Modes of the d-dimensional oscillator are ordered by eigenvalue with
multiplicity; inside one eigenvalue level the multi-indices are listed in
lexicographic order.  Level ``m`` has eigenvalue ``2m + d`` and lands in the
bucket ``j = m + d // 2``, so every non-empty bucket holds exactly one level.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.special import comb

from .errors import BudgetExceeded, ConfigError, DomainError
from .special_fn import hermite_functions, iter_hermite

#: Largest bucket the spectral function will sum over.
MAX_BUCKET_SIZE = 100_000
#: Slope margin used by every finite-range convergence verdict.
SLOPE_MARGIN = 0.05


# ---------------------------------------------------------------------------
# Layout
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectralLayout:
    """Dimension-dependent constants and the mode/bucket bookkeeping.

    ``gamma`` is the exponent in the spectral-function bound
    sup_x Σ_{n∈I(j)} |φ_n(x)|² ≲ j^gamma and ``beta = d - 1 - gamma``.
    """

    d: int
    gamma: float = field(init=False)
    beta: float = field(init=False)

    def __post_init__(self):
        if self.d < 1:
            raise DomainError("dimension must be >= 1")
        g = -1.0 / 6.0 if self.d == 1 else self.d / 2 - 1
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "beta", self.d - 1 - g)

    def level_eigenvalue(self, m):
        return 2 * np.asarray(m) + self.d

    def level_size(self, m) -> int:
        return int(comb(m + self.d - 1, self.d - 1, exact=True)) if m >= 0 else 0

    def level_of_bucket(self, j: int) -> int | None:
        m = j - self.d // 2
        return m if m >= 0 else None

    def bucket_of_level(self, m):
        return np.asarray(m) + self.d // 2

    def bucket_size(self, j: int) -> int:
        m = self.level_of_bucket(j)
        return 0 if m is None else self.level_size(m)

    def modes_below_level(self, m: int) -> int:
        """Number of modes with level < m, i.e. binomial(m - 1 + d, d)."""
        return int(comb(m - 1 + self.d, self.d, exact=True)) if m >= 1 else 0

    def mode_levels(self, n_max: int) -> np.ndarray:
        """Level of each mode index 0..n_max (sorted-with-multiplicity order)."""
        out = np.empty(n_max + 1, dtype=np.int64)
        m, start = 0, 0
        while start <= n_max:
            size = self.level_size(m)
            out[start:start + size] = m
            start += size
            m += 1
        return out

    def level_of_mode(self, n: int) -> int:
        if n < 0:
            raise DomainError("mode index must be >= 0")
        lo, hi = 0, 1
        while self.modes_below_level(hi + 1) <= n:
            hi *= 2
        # Largest m with modes_below_level(m) <= n.
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.modes_below_level(mid) <= n:
                lo = mid
            else:
                hi = mid - 1
        return lo

    def radial_bucket(self, n):
        """Bucket of the radial mode ψ_n (eigenvalue 4n + d)."""
        return 2 * np.asarray(n) + self.d // 2


def bucket_of(n: int, d: int) -> int:
    """Bucket j with 2j <= λ_n < 2j + 2 for mode index ``n``."""
    layout = SpectralLayout(d)
    return int(layout.bucket_of_level(layout.level_of_mode(n)))


def level_members(m: int, d: int) -> list[tuple[int, ...]]:
    """All multi-indices α ∈ ℕ^d with |α| = m, in lexicographic order."""
    if m < 0:
        return []
    if d == 1:
        return [(m,)]
    out = []
    for first in range(m + 1):
        for rest in level_members(m - first, d - 1):
            out.append((first,) + rest)
    return out


def bucket_members(j: int, d: int) -> list[tuple[int, ...]]:
    """Multi-indices α with 2|α| + d in [2j, 2j + 2); empty if there are none."""
    m = SpectralLayout(d).level_of_bucket(j)
    return [] if m is None else level_members(m, d)


# ---------------------------------------------------------------------------
# Spectral function
# ---------------------------------------------------------------------------

def _level_sum_of_squares(sq: Sequence[np.ndarray], m: int) -> np.ndarray:
    """Σ_{|α|=m} Π_i sq[i][α_i] for per-coordinate tables ``sq[i][k, ...]``.

    The sum over compositions is the degree-m coefficient of the product of
    the generating sequences, built up one coordinate at a time.
    """
    acc = sq[0][: m + 1]
    for table in sq[1:]:
        nxt = np.zeros_like(acc)
        for a in range(m + 1):
            nxt[a:] += acc[a] * table[: m + 1 - a]
        acc = nxt
    return acc[m]


def spectral_function(j: int, d: int, x) -> float | np.ndarray:
    """Σ_{n∈I(j)} |φ_n(x)|² at a point ``x`` (length d) or points (..., d)."""
    layout = SpectralLayout(d)
    m = layout.level_of_bucket(j)
    x = np.asarray(x, dtype=float)
    if d == 1 and x.ndim == 0:
        x = x[None]
    if x.shape[-1] != d:
        raise DomainError("point dimension does not match d")
    if m is None:
        out = np.zeros(x.shape[:-1])
        return float(out) if out.ndim == 0 else out
    if layout.level_size(m) > MAX_BUCKET_SIZE:
        raise BudgetExceeded(f"bucket {j} in dimension {d} has {layout.level_size(m)} members")
    sq = [hermite_functions(m, x[..., i]) ** 2 for i in range(d)]
    out = _level_sum_of_squares(sq, m)
    return float(out) if np.ndim(out) == 0 else out


def sup_grid_spacing(lam: float, exponent: float | None = None, factor: float = 0.05,
                     d: int = 1) -> float:
    """Grid spacing ``factor / lam**exponent`` used for every sup search.

    ``exponent`` defaults to the calibrated Bernstein exponent; see
    :func:`hermrand.random_series.bernstein_exponent`.
    """
    if exponent is None:
        from .random_series import bernstein_exponent

        exponent = bernstein_exponent(d)
    return factor / max(lam, 1.0) ** exponent


def karadzhov_ball_radius(j: int) -> float:
    return math.sqrt(2 * j + 2) + 3.0


@dataclass(frozen=True)
class KaradzhovResult:
    d: int
    j: np.ndarray
    sup: np.ndarray
    ratio: np.ndarray
    spacing: np.ndarray

    @property
    def spread(self) -> float:
        """max/min of the ratio sequence."""
        return float(self.ratio.max() / self.ratio.min())


def karadzhov_ratios(js: Sequence[int], d: int, *, exponent: float | None = None,
                     chunk: int = 256) -> KaradzhovResult:
    """sup over the ball B(0, sqrt(2j+2)+3) of the spectral function, over j^γ(d).

    Grids use the Bernstein spacing for λ = 2j + 2 (in d = 1 the finest
    spacing serves all j in one recurrence pass).  They cover only the positive
    orthant, by the coordinate reflection symmetry of the spectral function.
    """
    layout = SpectralLayout(d)
    js = np.asarray(sorted(set(int(j) for j in js)))
    if js.size == 0:
        raise DomainError("no bucket indices given")
    if d > 3:
        raise BudgetExceeded("spectral sups are limited to d <= 3")
    sups = np.zeros(js.size)
    spacings = np.array([sup_grid_spacing(2 * j + 2, exponent, d=d) for j in js])
    if d == 1:
        # One recurrence pass on the finest grid serves every requested j.
        R = karadzhov_ball_radius(int(js[-1]))
        t = np.arange(0.0, R + spacings.min(), spacings.min())
        want = {int(j): i for i, j in enumerate(js)}
        for k, v in iter_hermite(t, int(js[-1])):
            if k in want:
                inside = t <= karadzhov_ball_radius(k)
                sups[want[k]] = float(np.max(v[inside] ** 2))
    else:
        for i, j in enumerate(js):
            m = layout.level_of_bucket(int(j))
            if m is None:
                continue
            if layout.level_size(m) > MAX_BUCKET_SIZE:
                raise BudgetExceeded(f"bucket {j} too large")
            R = karadzhov_ball_radius(j)
            t = np.arange(0.0, R + spacings[i], spacings[i])
            sq = hermite_functions(m, t) ** 2
            sups[i] = _orthant_sup(sq, m, t, R, d, chunk)
    ratio = sups / js.astype(float) ** layout.gamma
    return KaradzhovResult(d, js, sups, ratio, spacings)


def _orthant_sup(sq: np.ndarray, m: int, t: np.ndarray, R: float, d: int, chunk: int) -> float:
    best = 0.0
    if d == 2:
        flipped = sq[::-1]
        for s in range(0, t.size, chunk):
            block = np.einsum("ka,kb->ab", sq[:, s:s + chunk], flipped)
            inside = t[s:s + chunk, None] ** 2 + t[None, :] ** 2 <= R * R
            best = max(best, float(np.max(np.where(inside, block, 0.0))))
        return best
    # d == 3: first fold the (x, y) pair into per-level tables, then z.
    for s in range(0, t.size, max(1, chunk // 16)):
        xs = sq[:, s:s + max(1, chunk // 16)]
        pair = np.zeros((m + 1, xs.shape[1], t.size))
        for a in range(m + 1):
            pair[a:] += xs[a][None, :, None] * sq[: m + 1 - a][:, None, :]
        block = np.einsum("kab,kc->abc", pair, sq[::-1])
        r2 = (t[s:s + xs.shape[1], None, None] ** 2 + t[None, :, None] ** 2
              + t[None, None, :] ** 2)
        best = max(best, float(np.max(np.where(r2 <= R * R, block, 0.0))))
    return best


def karadzhov_ratio(j: int, d: int, **kwargs) -> float:
    return float(karadzhov_ratios([j], d, **kwargs).ratio[0])


# ---------------------------------------------------------------------------
# Coefficient rules
# ---------------------------------------------------------------------------

class CoefficientRule:
    """Deterministic coefficients c_n, evaluated on arrays of mode data.

    ``coefficients(n, j)`` receives the mode indices and their bucket indices
    (both integer arrays of the same shape) and returns c_n.
    """

    kind = "abstract"

    def coefficients(self, n, j) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        out.update(asdict(self))
        return out

    @staticmethod
    def from_dict(data: dict) -> "CoefficientRule":
        data = dict(data)
        kind = data.pop("kind", None)
        cls = _RULES.get(kind)
        if cls is None:
            raise ConfigError(f"unknown coefficient rule {kind!r}")
        if cls is Explicit:
            data["values"] = tuple(float(v) for v in data.get("values", ()))
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(f"bad parameters for rule {kind!r}: {exc}") from None


@dataclass(frozen=True)
class PowerLaw(CoefficientRule):
    """c_n = n^{-κ} for n >= 1 and c_0 = ``c0``."""

    kappa: float
    c0: float = 1.0
    kind = "power"

    def coefficients(self, n, j):
        n = np.asarray(n, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where(n >= 1, np.maximum(n, 1.0) ** -self.kappa, self.c0)
        return out


@dataclass(frozen=True)
class BucketConstant(CoefficientRule):
    """Constant inside each bucket: |c_n|² = scale · J^power · ln(J+1)^log_power,
    with J = max(j, 1)."""

    power: float = 0.0
    log_power: float = 0.0
    scale: float = 1.0
    kind = "bucket"

    def bucket_square(self, j) -> np.ndarray:
        J = np.maximum(np.asarray(j, dtype=float), 1.0)
        return self.scale * J ** self.power * np.log(J + 1.0) ** self.log_power

    def coefficients(self, n, j):
        return np.sqrt(self.bucket_square(j))


@dataclass(frozen=True)
class HolderBlocks(CoefficientRule):
    """Coefficients meeting the dyadic-block Hölder condition with equality.

    For bucket j in the dyadic block [2^J, 2^{J+1}) every member gets
    |c_n|² = 2^{(-γ-μ)J} max(J,1)^{2ν} / 2^J, so that summing the per-bucket
    maxima over the block reproduces the bound exactly.  Bucket 0 is empty.
    """

    mu: float
    nu: float = 0.0
    d: int = 1
    kind = "holder"

    def coefficients(self, n, j):
        g = SpectralLayout(self.d).gamma
        j = np.asarray(j)
        J = np.floor(np.log2(np.maximum(j, 1))).astype(float)
        sq = 2.0 ** ((-g - self.mu) * J) * np.maximum(J, 1.0) ** (2 * self.nu) / 2.0 ** J
        return np.where(j >= 1, np.sqrt(sq), 0.0)


@dataclass(frozen=True)
class Explicit(CoefficientRule):
    """Finitely supported list; c_n = values[n], zero beyond the list."""

    values: tuple = ()
    kind = "explicit"

    def coefficients(self, n, j):
        n = np.asarray(n)
        vals = np.asarray(self.values, dtype=float)
        out = np.zeros(n.shape)
        inside = n < vals.size
        out[inside] = vals[n[inside]]
        return out


@dataclass(frozen=True)
class CallableRule(CoefficientRule):
    """Library-only rule wrapping ``func(n, j)``; not serializable."""

    func: Callable = None
    kind = "callable"

    def coefficients(self, n, j):
        return np.asarray(self.func(np.asarray(n), np.asarray(j)), dtype=float)

    def to_dict(self):
        raise ConfigError("callable rules cannot be serialized")


_RULES = {cls.kind: cls for cls in (PowerLaw, BucketConstant, HolderBlocks, Explicit)}


def mode_coefficients(rule: CoefficientRule, d: int, n_max: int, radial: bool = False):
    """Coefficients, eigenvalues and buckets of modes 0..n_max.

    In radial mode the index runs over ψ_n with eigenvalue 4n + d.
    """
    layout = SpectralLayout(d)
    n = np.arange(n_max + 1)
    if radial:
        lam = 4 * n + d
        j = layout.radial_bucket(n)
    else:
        levels = layout.mode_levels(n_max)
        lam = layout.level_eigenvalue(levels)
        j = layout.bucket_of_level(levels)
    return rule.coefficients(n, j), lam, j


def bucket_max_sq(rule: CoefficientRule, d: int, j_max: int, radial: bool = False,
                  budget: int = 10_000_000) -> np.ndarray:
    """max_{n∈I(j)} |c_n|² for j = 0..j_max (0 for empty buckets).

    In radial mode bucket j holds only the radial mode, if any; the other
    members of I(j) carry zero coefficients.
    """
    layout = SpectralLayout(d)
    out = np.zeros(j_max + 1)
    if radial:
        n = np.arange(j_max // 2 + 1)
        jr = layout.radial_bucket(n)
        keep = jr <= j_max
        c = rule.coefficients(n[keep], jr[keep])
        out[jr[keep]] = c * c
        return out
    m_top = j_max - d // 2
    if m_top < 0:
        return out
    n_total = layout.modes_below_level(m_top + 1)
    if n_total > budget:
        raise BudgetExceeded(f"{n_total} modes exceed the budget of {budget}")
    c, _, j = mode_coefficients(rule, d, n_total - 1)
    np.maximum.at(out, j, c * c)
    return out


def _bucket_groups(rule: CoefficientRule, d: int, j_max: int, radial: bool, budget: int):
    """Yield ``(j, size, c²)`` for every non-empty bucket 1..j_max."""
    layout = SpectralLayout(d)
    if radial:
        mx = bucket_max_sq(rule, d, j_max, radial=True)
        for j in range(1, j_max + 1):
            size = layout.bucket_size(j)
            if size == 0:
                continue
            vec = np.zeros(size)
            if layout.radial_bucket((j - d // 2) // 2) == j and (j - d // 2) % 2 == 0:
                vec[0] = mx[j]
            yield j, size, vec
        return
    m_top = j_max - d // 2
    if m_top < 0:
        return
    n_total = layout.modes_below_level(m_top + 1)
    if n_total > budget:
        raise BudgetExceeded(f"{n_total} modes exceed the budget of {budget}")
    c, _, jj = mode_coefficients(rule, d, n_total - 1)
    c2 = c * c
    start = 0
    for m in range(m_top + 1):
        size = layout.level_size(m)
        j = m + d // 2
        if j >= 1:
            yield j, size, c2[start:start + size]
        start += size


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------

def hs_norm(rule: CoefficientRule, s: float, d: int, n_max: int, radial: bool = False) -> float:
    """(Σ_{n<=n_max} λ_n^s |c_n|²)^{1/2}."""
    c, lam, _ = mode_coefficients(rule, d, n_max, radial)
    return float(math.sqrt(math.fsum(lam.astype(float) ** s * c * c)))


def zs_norm(rule: CoefficientRule, s: float, d: int, j_max: int, radial: bool = False,
            budget: int = 10_000_000) -> float:
    """(Σ_{1<=j<=j_max} j^{s+d-1} max_{n∈I(j)} |c_n|²)^{1/2}."""
    mx = bucket_max_sq(rule, d, j_max, radial, budget)
    j = np.arange(1, j_max + 1, dtype=float)
    return float(math.sqrt(math.fsum(j ** (s + d - 1) * mx[1:])))


# ---------------------------------------------------------------------------
# Conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionReport:
    """Outcome of a finite-range condition check.

    ``constants`` holds the best constants on the range (bucket conditions)
    or the last partial sum and tail slope (summability conditions).
    ``series`` is the raw per-bucket sequence that the verdict was read from.
    """

    which: str
    holds: bool
    constants: dict
    witness: dict
    series: np.ndarray


def _last_decade_slope(x: np.ndarray, y: np.ndarray) -> float:
    keep = (y > 0) & (x >= x.max() / 10)
    if np.count_nonzero(keep) < 2:
        return -math.inf
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


def check_condition(rule: CoefficientRule, which: str, d: int, j_max: int, *,
                    p: float | None = None, alpha: float | None = None,
                    mu: float | None = None, nu: float | None = None,
                    radial: bool = False, budget: int = 10_000_000) -> ConditionReport:
    """Check one of the coefficient conditions on buckets 1..j_max.

    ``which`` is ``condi3`` (one-sided squeeze), ``condi4`` (two-sided
    squeeze), ``condi5`` (needs ``p``), ``cond`` (needs ``alpha``) or
    ``condh`` (needs ``mu`` and ``nu``).
    """
    layout = SpectralLayout(d)
    if which in ("condi3", "condi4"):
        js, upper, lower = [], [], []
        for j, size, c2 in _bucket_groups(rule, d, j_max, radial, budget):
            mean = c2.sum() / size
            if mean == 0:
                continue
            js.append(j)
            upper.append(c2.max() / mean)
            lower.append(c2.min() / mean)
        js = np.asarray(js, dtype=float)
        upper, lower = np.asarray(upper), np.asarray(lower)
        if js.size == 0:
            return ConditionReport(which, True, {"C": 1.0, "C1": 1.0, "C2": 1.0}, {}, upper)
        # A constant exists on the range; it "holds" when it is not drifting.
        up_slope = _last_decade_slope(js, upper)
        holds = up_slope <= SLOPE_MARGIN
        k = int(np.argmax(upper))
        witness = {"bucket": int(js[k]), "max_over_mean": float(upper[k]), "upper_slope": up_slope}
        constants = {"C": float(upper.max()), "C2": float(upper.max())}
        if which == "condi4":
            lo_slope = _last_decade_slope(js, lower) if lower.min() > 0 else -math.inf
            holds = holds and lower.min() > 0 and lo_slope >= -SLOPE_MARGIN
            constants["C1"] = float(lower.min())
            witness["lower_slope"] = lo_slope
            witness["min_over_mean"] = float(lower.min())
        return ConditionReport(which, bool(holds), constants, witness, upper)

    mx = bucket_max_sq(rule, d, j_max, radial, budget)
    j = np.arange(1, j_max + 1, dtype=float)
    g = layout.gamma
    if which == "condi5":
        if p is None:
            raise ConfigError("condi5 needs p")
        terms = j ** (g + 2 * layout.beta / p) * mx[1:]
    elif which == "cond":
        if alpha is None:
            raise ConfigError("cond needs alpha")
        terms = j ** g * np.log(j) ** alpha * mx[1:]
    elif which == "condh":
        if mu is None or nu is None:
            raise ConfigError("condh needs mu and nu")
        J_max = int(math.floor(math.log2(j_max))) - 1
        blocks = np.arange(0, J_max + 1)
        sums = np.array([mx[2 ** J: 2 ** (J + 1) + 1].sum() for J in blocks])
        bound = 2.0 ** ((-g - mu) * blocks) * np.maximum(blocks, 1.0) ** (2 * nu)
        ratio = sums / bound
        C = float(ratio.max()) if ratio.size else 0.0
        tail = ratio[blocks >= blocks.max() / 2] if ratio.size else ratio
        drift = float(np.polyfit(np.arange(tail.size), np.log(np.maximum(tail, 1e-300)), 1)[0]) \
            if tail.size >= 2 else 0.0
        holds = drift <= SLOPE_MARGIN
        return ConditionReport(which, bool(holds), {"C": C, "log_ratio_drift": drift},
                               {"block": int(blocks[int(np.argmax(ratio))]) if ratio.size else 0},
                               ratio)
    else:
        raise ConfigError(f"unknown condition {which!r}")
    partial = np.cumsum(terms)
    slope = _last_decade_slope(j, terms)
    holds = slope < -1 - SLOPE_MARGIN
    return ConditionReport(
        which, bool(holds),
        {"partial_sum": float(partial[-1]), "tail_slope": slope},
        {"j_max": j_max},
        partial,
    )


# ---------------------------------------------------------------------------
# Sup decay of single 1-D Hermite functions
# ---------------------------------------------------------------------------

def hermite_sups(ns: Sequence[int], *, exponent: float | None = None) -> np.ndarray:
    """‖h_n‖_∞ for each n, from one recurrence pass on the finest grid.

    The grid covers [0, sqrt(2 n_max + 1) + 3] (h_n is even or odd) at the
    Bernstein spacing for λ = 2 n_max + 1; the grid maximum is then polished
    by a parabola through the three points around it.
    """
    ns = sorted(set(int(n) for n in ns))
    n_max = ns[-1]
    lam = 2 * n_max + 1
    h = sup_grid_spacing(lam, exponent)
    t = np.arange(0.0, math.sqrt(lam) + 3.0 + h, h)
    want = set(ns)
    out = {}
    for k, v in iter_hermite(t, n_max):
        if k in want:
            a = np.abs(v)
            i = int(np.argmax(a))
            best = a[i]
            if 0 < i < a.size - 1:
                y0, y1, y2 = a[i - 1], a[i], a[i + 1]
                den = y0 - 2 * y1 + y2
                if den < 0:
                    best = y1 - (y2 - y0) ** 2 / (8 * den)
            out[k] = float(best)
    return np.array([out[n] for n in ns])


def hermite_sup_decay(ns: Sequence[int]):
    """RateFit of ‖h_n‖_∞ against n together with the sup values."""
    from .fitting import fit_rate

    ns = sorted(set(int(n) for n in ns))
    sups = hermite_sups(ns)
    return fit_rate(list(zip(ns, sups))), sups.tolist()
