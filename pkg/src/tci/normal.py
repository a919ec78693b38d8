"""Standard normal primitives and Gaussian risk measures.

The cumulative distribution and quantile are thin wrappers over
``scipy.special.ndtr`` / ``ndtri`` (Cephes), which are accurate to a few ulps
across the real line, far inside the 1e-12 budget the rest of the package
assumes.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

logger = logging.getLogger(__name__)

SQRT_2PI = math.sqrt(2.0 * math.pi)

#: clamping beyond this amount is logged rather than silently absorbed
CLAMP_REPORT_THRESHOLD = 1e-9


@dataclass(frozen=True)
class TargetDist:
    """Gaussian terminal target N(x + M*T, delta**2 * T)."""

    M: float
    delta: float
    T: float

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f"delta must be positive, got {self.delta}")
        if not self.T > 0:
            raise ValueError(f"T must be positive, got {self.T}")

    @property
    def mean(self) -> float:
        return self.M * self.T

    @property
    def std(self) -> float:
        return self.delta * math.sqrt(self.T)


@dataclass(frozen=True)
class RiskMeasures:
    var: float
    es: float
    alpha: float


def std_normal_pdf(z):
    z = np.asarray(z, dtype=float)
    out = np.exp(-0.5 * z * z) / SQRT_2PI
    return out if out.ndim else float(out)


def std_normal_cdf(z):
    """Phi(z). Accepts scalars or arrays."""
    out = special.ndtr(z)
    return out if np.ndim(out) else float(out)


def std_normal_sf(z):
    """1 - Phi(z), computed without cancellation in the upper tail."""
    out = special.ndtr(-np.asarray(z, dtype=float))
    return out if np.ndim(out) else float(out)


def std_normal_quantile(p):
    """Inverse of :func:`std_normal_cdf` on the open interval (0, 1)."""
    arr = np.asarray(p, dtype=float)
    if np.any(~((arr > 0.0) & (arr < 1.0))):
        raise ValueError(f"quantile requires 0 < p < 1, got {p!r}")
    out = special.ndtri(arr)
    return out if out.ndim else float(out)


def normal_pdf(x, mean, std):
    x = np.asarray(x, dtype=float)
    return std_normal_pdf((x - mean) / std) / std


def clamp_probability(p: float, label: str = "probability") -> float:
    """Clamp ``p`` to [0, 1]; excursions above 1e-9 are logged as a diagnostic."""
    p = float(p)
    if p < 0.0 or p > 1.0:
        excess = -p if p < 0.0 else p - 1.0
        if excess > CLAMP_REPORT_THRESHOLD:
            logger.warning("%s=%r outside [0, 1] by %.3g; clamped", label, p, excess)
        return min(1.0, max(0.0, p))
    return p


def var_es(target: TargetDist, alpha: float) -> RiskMeasures:
    """VaR and ES of the terminal loss L = -X for X ~ N(M*T, delta**2*T)."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    q = std_normal_quantile(alpha)
    scale = target.std
    var = -target.mean + scale * q
    es = -target.mean + scale * std_normal_pdf(q) / (1.0 - alpha)
    return RiskMeasures(var=var, es=es, alpha=alpha)
