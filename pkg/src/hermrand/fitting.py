"""Log-log least-squares rate fits."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import Degenerate


@dataclass(frozen=True)
class RateFit:
    """OLS fit of ln(value) against ln(n).

    ``pairs`` holds the (ln n, ln value) points that entered the fit and
    ``window`` the (n_min, n_max) range actually used.
    """

    pairs: tuple
    slope: float
    intercept: float
    r_squared: float
    window: tuple

    def predict(self, n):
        return np.exp(self.intercept) * np.asarray(n, dtype=float) ** self.slope

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "window": list(self.window),
            "points": len(self.pairs),
        }


def fit_rate(values: Sequence[tuple[float, float]], window: tuple | None = None,
             min_points: int = 5) -> RateFit:
    """Fit ``v ≈ e^b n^s`` by least squares on (ln n, ln v).

    ``values`` is a sequence of (n, v) pairs; only those with n inside the
    closed ``window`` are used.  Raises :class:`Degenerate` when fewer than
    ``min_points`` remain, when a value is not positive, or when all n agree.
    """
    arr = np.asarray(values, dtype=float).reshape(-1, 2)
    if window is not None:
        lo, hi = window
        arr = arr[(arr[:, 0] >= lo) & (arr[:, 0] <= hi)]
    if arr.shape[0] < min_points:
        raise Degenerate(f"need at least {min_points} points, got {arr.shape[0]}")
    if np.any(arr[:, 1] <= 0) or np.any(arr[:, 0] <= 0) or not np.all(np.isfinite(arr)):
        raise Degenerate("rate fits need finite positive n and values")
    x, y = np.log(arr[:, 0]), np.log(arr[:, 1])
    if np.ptp(x) == 0:
        raise Degenerate("all n are equal")
    xm, ym = x.mean(), y.mean()
    sxx = np.sum((x - xm) ** 2)
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    ss_res = float(np.sum((y - intercept - slope * x) ** 2))
    ss_tot = float(np.sum((y - ym) ** 2))
    r2 = 1.0 if ss_tot == 0 else max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    pairs = tuple(zip(x.tolist(), y.tolist()))
    return RateFit(pairs, slope, intercept, r2, (float(arr[:, 0].min()), float(arr[:, 0].max())))
