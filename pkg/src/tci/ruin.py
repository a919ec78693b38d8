"""First passage of piecewise-constant Brownian surplus: analytic and Monte Carlo.

Paths are simulated exactly at segment boundaries (Gaussian increments). Ruin
inside a segment whose endpoints ``a, b`` are both positive happens with the
Brownian-bridge crossing probability ``exp(-2 a b / (sigma**2 * dt))``; a
non-positive endpoint means ruin outright.

Random numbers come from Philox streams keyed by ``(seed, block index)`` over
fixed blocks of paths, so an estimate never depends on how blocks are
scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .normal import clamp_probability, normal_pdf, std_normal_cdf
from .quadrature import QuadratureBudgetExceeded, integrate_nested, integrate_semi_infinite

BLOCK_SIZE = 1 << 16
_SEED_MASK = (1 << 64) - 1
_TIME_TOL = 1e-12


class UnsupportedConfiguration(ValueError):
    pass


@dataclass(frozen=True)
class PiecewiseBM:
    """``x0`` plus consecutive ``(duration, drift, volatility)`` segments."""

    x0: float
    segments: tuple[tuple[float, float, float], ...]
    seed: int = 0

    def __post_init__(self):
        if not self.segments:
            raise ValueError("at least one segment required")
        for dt, _, vol in self.segments:
            if not dt > 0:
                raise ValueError(f"segment durations must be positive, got {dt}")
            if vol < 0:
                raise ValueError(f"volatilities must be non-negative, got {vol}")

    @property
    def T(self) -> float:
        return float(sum(s[0] for s in self.segments))

    @property
    def boundaries(self) -> np.ndarray:
        return np.cumsum([s[0] for s in self.segments])

    def with_seed(self, seed: int) -> "PiecewiseBM":
        return PiecewiseBM(self.x0, self.segments, seed)


@dataclass(frozen=True)
class MCEstimate:
    p_hat: float
    std_err: float
    paths: int
    seed: int

    @classmethod
    def from_count(cls, hits: int, paths: int, seed: int) -> "MCEstimate":
        p = hits / paths
        return cls(p, math.sqrt(p * (1.0 - p) / paths), paths, seed)


@dataclass
class SurvivalReport:
    value: float
    method: str
    error_estimate: float
    diagnostics: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)


def segment_survival(x: float, mu: float, sigma: float, t: float) -> float:
    """P[min_{0<=s<=t} (x + mu*s + sigma*W_s) >= 0] for Brownian motion with drift."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    if x <= 0:
        return 0.0
    sd = sigma * math.sqrt(t)
    first = std_normal_cdf((x + mu * t) / sd)
    expo = -2.0 * mu * x / (sigma * sigma)
    tail = std_normal_cdf((-x + mu * t) / sd)
    # exp(expo) may overflow while the product still vanishes
    if tail == 0.0:
        second = 0.0
    else:
        log_second = expo + math.log(tail)
        second = math.exp(log_second) if log_second < 700 else math.inf
    return clamp_probability(first - second, "segment survival")


def _key(seed: int) -> int:
    return int(seed) & _SEED_MASK


def _blocks(paths: int):
    for b, start in enumerate(range(0, paths, BLOCK_SIZE)):
        yield b, start, min(paths, start + BLOCK_SIZE)


def _generator(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([_key(seed), block], dtype=np.uint64)))


def _draws(process: PiecewiseBM, seed: int, block: int, size: int, antithetic: bool):
    gen = _generator(seed, block)
    k = len(process.segments)
    if antithetic:
        half = (size + 1) // 2
        z = gen.standard_normal((half, k))
        u = gen.random((half, k))
        z = np.concatenate([z, -z])[:size]
        u = np.concatenate([u, 1.0 - u])[:size]
    else:
        z = gen.standard_normal((size, k))
        u = gen.random((size, k))
    return z, u


def _levels(process: PiecewiseBM, z: np.ndarray) -> np.ndarray:
    """Surplus at every boundary, shape (paths, segments + 1)."""
    dts = np.array([s[0] for s in process.segments])
    mus = np.array([s[1] for s in process.segments])
    vols = np.array([s[2] for s in process.segments])
    inc = mus * dts + vols * np.sqrt(dts) * z
    out = np.empty((z.shape[0], z.shape[1] + 1))
    out[:, 0] = process.x0
    np.cumsum(inc, axis=1, out=out[:, 1:])
    out[:, 1:] += process.x0
    return out


def _segment_ruin(process: PiecewiseBM, levels: np.ndarray, u: np.ndarray) -> np.ndarray:
    a = levels[:, :-1]
    b = levels[:, 1:]
    ruined = (a <= 0) | (b <= 0)
    for j, (dt, _, vol) in enumerate(process.segments):
        if vol == 0:
            continue  # straight line between positive endpoints stays positive
        both = ~ruined[:, j]
        cross = np.exp(-2.0 * a[both, j] * b[both, j] / (vol * vol * dt))
        ruined[both, j] = u[both, j] < cross
    return ruined.any(axis=1)


def ruin_prob_continuous(process: PiecewiseBM, paths: int = 100_000, seed: int | None = None,
                         antithetic: bool = False) -> MCEstimate:
    """Bridge-corrected MC estimate of P[inf_{[0,T]} X < 0]."""
    if paths < 1000:
        raise ValueError("at least 1000 paths required")
    seed = process.seed if seed is None else seed
    if process.x0 < 0:
        return MCEstimate(1.0, 0.0, paths, seed)
    hits = 0
    for block, start, stop in _blocks(paths):
        z, u = _draws(process, seed, block, stop - start, antithetic)
        hits += int(_segment_ruin(process, _levels(process, z), u).sum())
    return MCEstimate.from_count(hits, paths, seed)


def path_minima(process: PiecewiseBM, paths: int, seed: int | None = None) -> np.ndarray:
    """Exact per-path minimum over ``[0, T]``.

    Within a segment the minimum of the bridge from ``a`` to ``b`` is sampled
    as ``(a + b - sqrt((b - a)**2 - 2 sigma**2 dt log U)) / 2``, using the same
    uniforms as :func:`ruin_prob_continuous`: ``min < 0`` is exactly the event
    counted there. The map is nondecreasing in both endpoints, so two
    processes driven by the same noise keep the pathwise order of their
    minima.
    """
    seed = process.seed if seed is None else seed
    out = np.empty(paths)
    for block, start, stop in _blocks(paths):
        z, u = _draws(process, seed, block, stop - start, False)
        lv = _levels(process, z)
        mins = np.empty((stop - start, len(process.segments)))
        for j, (dt, _, vol) in enumerate(process.segments):
            a, b = lv[:, j], lv[:, j + 1]
            if vol == 0:
                mins[:, j] = np.minimum(a, b)
            else:
                disc = (b - a) ** 2 - 2.0 * vol * vol * dt * np.log(u[:, j])
                mins[:, j] = 0.5 * (a + b - np.sqrt(disc))
        out[start:stop] = mins.min(axis=1)
    return out


def _interval_moments(process: PiecewiseBM, check_times: Sequence[float]):
    """Mean and sd of the increment between consecutive check times."""
    bounds = np.concatenate([[0.0], process.boundaries])
    idx = []
    for t in check_times:
        hit = np.flatnonzero(np.abs(bounds - t) <= _TIME_TOL * max(1.0, process.T))
        if hit.size == 0 or hit[0] == 0:
            raise UnsupportedConfiguration(f"check time {t} is not a segment boundary")
        idx.append(int(hit[0]))
    if idx != sorted(set(idx)):
        raise UnsupportedConfiguration("check times must be strictly increasing")
    means, sds = [], []
    prev = 0
    for i in idx:
        segs = process.segments[prev:i]
        means.append(sum(dt * mu for dt, mu, _ in segs))
        sds.append(math.sqrt(sum(dt * vol * vol for dt, _, vol in segs)))
        prev = i
    return np.array(means), np.array(sds), idx


def discrete_survival_quadrature(x0: float, means: Sequence[float], sds: Sequence[float],
                                 thresholds: Sequence[float] | None = None,
                                 rel_tol: float = 1e-9, abs_tol: float = 1e-12,
                                 nested_rel_tol: float = 1e-7,
                                 nested_abs_tol: float = 1e-10) -> SurvivalReport:
    """P[L_k > h_k for all k] for ``L_k = x0 + X_1 + ... + X_k``, independent Gaussian X_i.

    Deterministic steps (``sd == 0``) are folded into neighbouring thresholds,
    leaving at most three random steps, which are integrated with 0, 1 or 2
    nested quadratures.
    """
    k = len(means)
    h = [0.0] * k if thresholds is None else [float(v) for v in thresholds]
    if not (len(sds) == k == len(h)):
        raise ValueError("means, sds and thresholds must have equal length")
    x = float(x0)
    steps: list[list[float]] = []  # [mean, sd, threshold]
    shift = 0.0
    folded = 0
    for m, s, hk in zip(means, sds, h):
        m, s = float(m), float(s)
        if s > 0:
            steps.append([m + shift, s, hk])
            shift = 0.0
        elif not steps:
            x += m
            if not x > hk:
                return SurvivalReport(0.0, "quadrature", 0.0, {"deterministic_ruin": True})
            folded += 1
        else:
            shift += m
            steps[-1][2] = max(steps[-1][2], hk - shift)
            folded += 1
    diag = {"random_steps": len(steps), "folded_steps": folded}

    if not steps:
        return SurvivalReport(1.0, "quadrature", 0.0, diag)
    if len(steps) == 1:
        m, s, hk = steps[0]
        return SurvivalReport(std_normal_cdf((x + m - hk) / s), "quadrature", 0.0, diag)
    if len(steps) == 2:
        (m1, s1, h1), (m2, s2, h2) = steps

        def g(u):
            return std_normal_cdf((u + m2 - h2) / s2) * normal_pdf(u, x + m1, s1)

        res = integrate_semi_infinite(g, h1, rel_tol=rel_tol, abs_tol=abs_tol, scale=s1,
                                      center=x + m1)
        diag["evaluations"] = res.evaluations
        return SurvivalReport(clamp_probability(res.value), "quadrature", res.abs_error_estimate, diag)
    if len(steps) == 3:
        (m1, s1, h1), (m2, s2, h2), (m3, s3, h3) = steps

        def f(u, v):
            # u = level after step 1, v = level after step 2
            return (normal_pdf(u, x + m1, s1) * normal_pdf(v - u, m2, s2)
                    * std_normal_cdf((v + m3 - h3) / s3))

        res = integrate_nested(f, h1, lambda u: h2, rel_tol=nested_rel_tol,
                               abs_tol=nested_abs_tol, outer_scale=s1, inner_scale=s2,
                               outer_center=x + m1, inner_center_fn=lambda u: u + m2)
        diag["evaluations"] = res.evaluations
        return SurvivalReport(clamp_probability(res.value), "quadrature", res.abs_error_estimate, diag)
    raise UnsupportedConfiguration("quadrature supports at most three random check intervals")


def discrete_survival_mc(x0: float, means: Sequence[float], sds: Sequence[float],
                         thresholds: Sequence[float] | None = None, paths: int = 1_000_000,
                         seed: int = 0) -> SurvivalReport:
    """MC counterpart of :func:`discrete_survival_quadrature` (exact endpoint sampling)."""
    means = np.asarray(means, dtype=float)
    sds = np.asarray(sds, dtype=float)
    h = np.zeros(len(means)) if thresholds is None else np.asarray(thresholds, dtype=float)
    hits = 0
    for block, start, stop in _blocks(paths):
        gen = _generator(seed, block)
        z = gen.standard_normal((stop - start, len(means)))
        levels = x0 + np.cumsum(means + sds * z, axis=1)
        hits += int(np.all(levels > h, axis=1).sum())
    est = MCEstimate.from_count(hits, paths, seed)
    return SurvivalReport(est.p_hat, "mc", est.std_err, {"paths": paths, "seed": seed})


def survive_discrete(process: PiecewiseBM, check_times: Sequence[float], method: str = "exact-quadrature",
                     paths: int = 1_000_000, thresholds: Sequence[float] | None = None) -> SurvivalReport:
    """Probability the surplus is positive (above ``thresholds``) at every check time."""
    means, sds, _ = _interval_moments(process, check_times)
    if method in ("exact-quadrature", "quadrature"):
        rep = discrete_survival_quadrature(process.x0, means, sds, thresholds)
        rep.method = "exact-quadrature"
        return rep
    if method == "mc":
        return discrete_survival_mc(process.x0, means, sds, thresholds, paths, process.seed)
    raise ValueError(f"unknown method {method!r}")


__all__ = [
    "BLOCK_SIZE", "MCEstimate", "PiecewiseBM", "QuadratureBudgetExceeded", "SurvivalReport",
    "UnsupportedConfiguration", "discrete_survival_mc", "discrete_survival_quadrature",
    "path_minima", "ruin_prob_continuous", "segment_survival", "survive_discrete",
]
