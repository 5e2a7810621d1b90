"""Adaptive Gauss-Kronrod (7/15) panel quadrature for vector-valued integrands.

The integrand maps a 1-D array of nodes to an array of shape ``(m, len(nodes))``
so that many related integrals (all orders of a recurrence, all pairs of an
orthogonality table, ...) share one set of evaluations.  Panels are refined
by bisection until every panel meets its share of the absolute tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

# QUADPACK qk15 abscissae/weights, positive half (last entry is the centre).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# Full 15-point rule on [-1, 1].
KRONROD_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes x_1, x_3, x_5, x_7(=0).
for _i, _w in zip((1, 3, 5), _WG[:3]):
    GAUSS_WEIGHTS[_i] = _w
    GAUSS_WEIGHTS[14 - _i] = _w
GAUSS_WEIGHTS[7] = _WG[3]


@dataclass(frozen=True)
class QuadResult:
    value: np.ndarray
    error: np.ndarray
    n_panels: int
    n_evals: int
    converged: bool


def _panel_rules(a: np.ndarray, b: np.ndarray, f, m_out: int):
    """Kronrod, Gauss and Kronrod-of-|f| sums on each panel ``[a_i, b_i]``."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    nodes = (mid[:, None] + half[:, None] * KRONROD_NODES[None, :]).ravel()
    vals = np.asarray(f(nodes), dtype=float).reshape(m_out, a.size, 15)
    return ((vals @ KRONROD_WEIGHTS) * half, (vals @ GAUSS_WEIGHTS) * half,
            (np.abs(vals) @ KRONROD_WEIGHTS) * half)


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    breakpoints: Sequence[float],
    *,
    m_out: int = 1,
    tol: float = 1e-10,
    rtol: float = 0.0,
    noise: float = 0.0,
    max_panels: int = 400_000,
    chunk: int | None = None,
) -> QuadResult:
    """Integrate ``f`` over ``[breakpoints[0], breakpoints[-1]]``.

    Every interval between consecutive breakpoints starts as its own panel, so
    callers force resolution (seams, oscillation scale) through the
    breakpoints.  A panel is accepted once ``|K - G|`` is below
    ``max(tol, rtol * |I0|) * width / total_width`` for every output, where
    ``I0`` is a first Kronrod estimate on the initial panels (only computed
    when ``rtol > 0``).  ``noise`` is the relative accuracy of the integrand
    values themselves: a panel whose ``|K - G|`` is below ``noise`` times the
    panel integral of ``|f|`` is accepted too, since bisection cannot get
    below the evaluation noise.  Panels are processed ``chunk`` at a time, by default
    keeping one integrand call under ~4M values, and accepted panels are
    summed immediately so memory does not grow with the panel count.
    """
    bp = np.unique(np.asarray(breakpoints, dtype=float))
    if bp.size < 2:
        return QuadResult(np.zeros(m_out), np.zeros(m_out), 0, 0, True)
    total = bp[-1] - bp[0]
    if chunk is None:
        chunk = max(1, min(2048, 4_000_000 // (15 * m_out)))
    pending = [(bp[:-1], bp[1:])]
    budget = np.full(m_out, float(tol))
    n_evals = 0
    if rtol > 0:
        first = np.zeros(m_out)
        a0, b0 = bp[:-1], bp[1:]
        for s in range(0, a0.size, chunk):
            K, _, _ = _panel_rules(a0[s:s + chunk], b0[s:s + chunk], f, m_out)
            first += K.sum(axis=1)
            n_evals += 15 * K.shape[1]
        budget = np.maximum(budget, rtol * np.abs(first))
    value = np.zeros(m_out)
    error = np.zeros(m_out)
    n_panels = 0
    converged = True
    tiny_limit = 64 * np.finfo(float).eps
    while pending:
        a_all = np.concatenate([p[0] for p in pending])
        b_all = np.concatenate([p[1] for p in pending])
        pending = []
        for s in range(0, a_all.size, chunk):
            a, b = a_all[s:s + chunk], b_all[s:s + chunk]
            K, G, A = _panel_rules(a, b, f, m_out)
            n_evals += 15 * a.size
            err = np.abs(K - G)
            allowed = np.maximum(budget[:, None] * ((b - a) / total)[None, :], noise * A)
            ok = np.all(err <= allowed, axis=0)
            # Panels that can no longer be split in floating point are accepted.
            ok |= (b - a) <= tiny_limit * np.maximum(1.0, np.abs(a))
            queued = sum(p[0].size for p in pending)
            if not converged or n_panels + queued + 2 * np.count_nonzero(~ok) > max_panels:
                converged = False
                ok[:] = True
            value += K[:, ok].sum(axis=1)
            error += err[:, ok].sum(axis=1)
            n_panels += int(np.count_nonzero(ok))
            a, b = a[~ok], b[~ok]
            if a.size:
                mid = 0.5 * (a + b)
                pending.append((np.concatenate([a, mid]), np.concatenate([mid, b])))
    return QuadResult(value, error, n_panels, n_evals, converged)


def subdivide(breakpoints: Sequence[float], max_width: float) -> np.ndarray:
    """Insert uniform points so that no interval is wider than ``max_width``."""
    bp = np.unique(np.asarray(breakpoints, dtype=float))
    out = [bp[:1]]
    for lo, hi in zip(bp[:-1], bp[1:]):
        k = max(1, int(np.ceil((hi - lo) / max_width)))
        out.append(np.linspace(lo, hi, k + 1)[1:])
    return np.concatenate(out)
