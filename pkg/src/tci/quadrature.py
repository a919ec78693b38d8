"""Globally adaptive Gauss-Kronrod quadrature on finite and semi-infinite ranges.

Semi-infinite ranges ``[lower, inf)`` are mapped onto ``[0, 1)`` with
``y = lower + scale * t / (1 - t)``. The integrands met in this package decay
like Gaussian tails, so the mapped integrand vanishes smoothly at ``t = 1``.

Integrands are called with 1-D numpy arrays of abscissae and must return an
array of the same shape.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

# 15-point Kronrod nodes on [-1, 1] (non-negative half) with the embedded
# 7-point Gauss weights (QUADPACK qk15).
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

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes (1, 3, 5 counting from the end).
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5]] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[[9, 11, 13]] = _WG[2::-1]


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int


class QuadratureBudgetExceeded(RuntimeError):
    """Raised when the evaluation budget runs out; ``best`` holds the estimate so far."""

    def __init__(self, best: QuadratureResult, target: float):
        super().__init__(
            f"quadrature budget exhausted after {best.evaluations} evaluations: "
            f"value={best.value!r}, error estimate {best.abs_error_estimate:.3g} > {target:.3g}"
        )
        self.best = best
        self.target = target


def _panel_rule(g, a: float, b: float):
    half = 0.5 * (b - a)
    center = 0.5 * (a + b)
    vals = np.asarray(g(center + half * NODES), dtype=float)
    if vals.shape != NODES.shape:
        raise ValueError("integrand must return an array shaped like its input")
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError(f"non-finite integrand value on [{a}, {b}]")
    kronrod = half * float(vals @ KRONROD_WEIGHTS)
    gauss = half * float(vals @ GAUSS_WEIGHTS)
    return kronrod, abs(kronrod - gauss)


def _adaptive(g, a: float, b: float, rel_tol: float, abs_tol: float,
              max_evals: int, initial_panels: int) -> QuadratureResult:
    if rel_tol <= 0 or abs_tol <= 0:
        raise ValueError("tolerances must be positive")
    if a == b:
        return QuadratureResult(0.0, 0.0, 1)
    edges = [float(e) for e in np.linspace(a, b, initial_panels + 1)]
    heap = []
    evals = 0
    total = 0.0
    total_err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err = _panel_rule(g, lo, hi)
        evals += 15
        total += val
        total_err += err
        heap.append((-err, lo, hi, val))
    heapq.heapify(heap)
    while True:
        target = max(abs_tol, rel_tol * abs(total))
        if total_err <= target:
            return QuadratureResult(float(total), float(total_err), evals)
        if evals + 30 > max_evals:
            raise QuadratureBudgetExceeded(QuadratureResult(total, total_err, evals), target)
        neg_err, lo, hi, val = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            # panel can no longer be split in floating point
            raise QuadratureBudgetExceeded(QuadratureResult(total, total_err, evals), target)
        v1, e1 = _panel_rule(g, lo, mid)
        v2, e2 = _panel_rule(g, mid, hi)
        evals += 30
        total += v1 + v2 - val
        total_err += e1 + e2 + neg_err
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))


def integrate_finite(f: Callable, a: float, b: float, rel_tol: float = 1e-9,
                     abs_tol: float = 1e-12, max_evals: int = 100_000,
                     initial_panels: int = 4) -> QuadratureResult:
    """Integrate ``f`` over the finite interval ``[a, b]``."""
    return _adaptive(f, float(a), float(b), rel_tol, abs_tol, max_evals, initial_panels)


def integrate_semi_infinite(f: Callable, lower: float, rel_tol: float = 1e-9,
                            abs_tol: float = 1e-12, max_evals: int = 100_000,
                            scale: float = 1.0, initial_panels: int = 8,
                            center: float | None = None) -> QuadratureResult:
    """Integrate ``f`` over ``[lower, inf)``.

    ``scale`` sets the length unit of the ``t / (1 - t)`` map. Choosing it near
    the width of the integrand's bulk (e.g. a standard deviation) keeps the
    mapped integrand well spread over ``[0, 1)``. ``center`` (e.g. a mean) marks
    where the bulk sits; when it lies above ``lower`` the range is split there
    so a narrow bulk far from ``lower`` cannot fall between the first nodes.
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    lower = float(lower)
    if center is not None and math.isfinite(center) and center > lower:
        center = float(center)
        head = _adaptive(f, lower, center, rel_tol, abs_tol / 2, max_evals, initial_panels)
        try:
            tail = integrate_semi_infinite(f, center, rel_tol, abs_tol / 2,
                                           max(max_evals - head.evaluations, 30), scale,
                                           initial_panels)
        except QuadratureBudgetExceeded as exc:
            b = exc.best
            best = QuadratureResult(head.value + b.value, head.abs_error_estimate
                                    + b.abs_error_estimate, head.evaluations + b.evaluations)
            raise QuadratureBudgetExceeded(best, exc.target) from None
        return QuadratureResult(head.value + tail.value,
                                head.abs_error_estimate + tail.abs_error_estimate,
                                head.evaluations + tail.evaluations)

    def mapped(t):
        one_minus = 1.0 - t
        y = lower + scale * t / one_minus
        return f(y) * (scale / (one_minus * one_minus))

    return _adaptive(mapped, 0.0, 1.0, rel_tol, abs_tol, max_evals, initial_panels)


def integrate_nested(f: Callable, outer_lower: float, inner_lower_fn: Callable[[float], float],
                     rel_tol: float = 1e-7, abs_tol: float = 1e-10,
                     max_evals: int = 10_000_000, outer_scale: float = 1.0,
                     inner_scale: float = 1.0, outer_center: float | None = None,
                     inner_center_fn: Callable[[float], float] | None = None) -> QuadratureResult:
    """Integrate ``f(u, v)`` over ``u >= outer_lower``, ``v >= inner_lower_fn(u)``.

    ``f`` is called with a scalar ``u`` and an array of ``v``. Inner integrals
    run one order of magnitude tighter than the outer tolerance; the reported
    error adds the outer estimate to the integrated inner estimates.
    """
    evals = 0
    inner_errors: list[tuple[float, float]] = []

    def outer(us):
        nonlocal evals
        out = np.empty_like(us)
        for i, u in enumerate(us):
            u = float(u)
            budget = max_evals - evals
            if budget < 30:
                raise QuadratureBudgetExceeded(
                    QuadratureResult(math.nan, math.inf, evals), abs_tol)
            res = integrate_semi_infinite(
                lambda v: f(u, v), inner_lower_fn(u), rel_tol=rel_tol / 10,
                abs_tol=abs_tol / 10, max_evals=budget, scale=inner_scale,
                center=None if inner_center_fn is None else inner_center_fn(u))
            evals += res.evaluations
            out[i] = res.value
            inner_errors.append((u, res.abs_error_estimate))
        return out

    try:
        res = integrate_semi_infinite(outer, outer_lower, rel_tol=rel_tol, abs_tol=abs_tol,
                                      max_evals=max_evals, scale=outer_scale,
                                      center=outer_center)
    except QuadratureBudgetExceeded as exc:
        best = QuadratureResult(exc.best.value, exc.best.abs_error_estimate, max(evals, 1))
        raise QuadratureBudgetExceeded(best, max(abs_tol, rel_tol * abs(best.value))) from None
    # propagate inner errors by integrating them over u (trapezoid on the
    # visited outer nodes)
    pts = np.array(sorted(inner_errors))
    inner_err = float(np.trapezoid(pts[:, 1], pts[:, 0])) if len(pts) > 1 else 0.0
    return QuadratureResult(res.value, res.abs_error_estimate + inner_err, evals)
