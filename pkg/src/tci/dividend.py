"""Optimal dividend-rate strategies under a Gaussian terminal constraint.

The surplus is ``X_t = x + mubar*t - int_0^t c_s ds + sigmabar*W_t`` and the
insurer must end with ``X_T ~ N(x + M*T, delta**2 * T)``. Rates may change at
``n`` equidistant dates and are bounded by ``xi``.

Only deterministic rate vectors are modelled. The admissible set also allows
random rates with a deterministic sum, but optima are deterministic, so the
value functional below drops the expectation.

Lump-sum payouts (pay ``(mubar - M) * T`` at time zero) dominate every rate
strategy when ``r > 0``; they are not represented as a strategy here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .normal import TargetDist
from .ruin import PiecewiseBM

#: tolerance for delta == sigmabar and the M-range bounds
EQUALITY_TOL = 1e-12
BRUTE_FORCE_BUDGET = 10**8


class InadmissibleTarget(ValueError):
    def __init__(self, violations):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


@dataclass(frozen=True)
class DividendProblem:
    mubar: float
    sigmabar: float
    xi: float
    x: float
    T: float
    n: int
    r: float
    target: TargetDist

    def __post_init__(self):
        for name in ("mubar", "sigmabar", "xi", "T", "r"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")

    @property
    def total_payout(self) -> float:
        """Sum of rates forced by the target mean, ``n * (mubar - M)``."""
        return self.n * (self.mubar - self.target.M)


@dataclass(frozen=True)
class DividendStrategy:
    rates: tuple[float, ...]

    def __len__(self):
        return len(self.rates)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.rates, dtype=float)


@dataclass(frozen=True)
class Verdict:
    ok: bool
    violations: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.ok


def check_target(problem: DividendProblem) -> Verdict:
    """Reachability of the target: ``mubar - xi <= M <= mubar`` and ``delta == sigmabar``."""
    M = problem.target.M
    violations = []
    if M < problem.mubar - problem.xi - EQUALITY_TOL:
        violations.append(
            f"M below mubar-xi: M={M:g} < {problem.mubar - problem.xi:g}")
    if M > problem.mubar + EQUALITY_TOL:
        violations.append(f"M above mubar: M={M:g} > {problem.mubar:g}")
    if abs(problem.target.delta - problem.sigmabar) > EQUALITY_TOL:
        violations.append(
            f"variance unreachable: delta={problem.target.delta:g} != sigmabar={problem.sigmabar:g}")
    return Verdict(not violations, violations)


def _require_admissible(problem):
    verdict = check_target(problem)
    if not verdict:
        raise InadmissibleTarget(verdict.violations)


def kappa(problem: DividendProblem) -> int:
    """Number of leading periods paid at the maximal rate.

    Smallest ``m >= 0`` with ``n*(mubar - M) < (m + 1)*xi``. At ``M = mubar - xi``
    the inequality first holds at ``m = n``; that case is the all-``xi``
    strategy and is reported as ``n - 1``.
    """
    _require_admissible(problem)
    total = problem.total_payout
    m = 0
    while not total < (m + 1) * problem.xi and m < problem.n - 1:
        m += 1
    return m


def _construct(problem: DividendProblem) -> np.ndarray:
    k = kappa(problem)
    total = max(problem.total_payout, 0.0)
    rates = np.zeros(problem.n)
    rates[:k] = problem.xi
    rates[k] = min(max(total - k * problem.xi, 0.0), problem.xi)
    return rates


def max_dividend_strategy(problem: DividendProblem) -> DividendStrategy:
    """Pay ``xi`` as early as possible: ``(xi, ..., xi, rest, 0, ..., 0)``."""
    return DividendStrategy(tuple(float(c) for c in _construct(problem)))


def min_ruin_strategy(problem: DividendProblem) -> DividendStrategy:
    """Pay as late as possible; the reversal of :func:`max_dividend_strategy`."""
    return DividendStrategy(tuple(float(c) for c in _construct(problem)[::-1]))


def discount_weights(n: int, T: float, r: float) -> np.ndarray:
    """Per-period weights ``exp(-r k T/n) (1 - exp(-r T/n)) / r``."""
    k = np.arange(n)
    return np.exp(-r * k * T / n) * (-math.expm1(-r * T / n)) / r


def value(strategy: DividendStrategy, problem: DividendProblem) -> float:
    """Discounted dividend value of a deterministic rate vector."""
    if len(strategy) != problem.n:
        raise ValueError(f"strategy has {len(strategy)} rates, problem has n={problem.n}")
    return float(strategy.as_array() @ discount_weights(problem.n, problem.T, problem.r))


def is_feasible(strategy: DividendStrategy, problem: DividendProblem, tol: float = 1e-12) -> bool:
    c = strategy.as_array()
    return (len(c) == problem.n
            and bool(np.all(c >= -tol)) and bool(np.all(c <= problem.xi + tol))
            and abs(c.mean() - (problem.mubar - problem.target.M)) <= tol)


def continuous_switch_time(problem: DividendProblem) -> float:
    """Switch time ``t* = (mubar - M) T / xi`` of the continuous-time optima.

    The maximal-dividend strategy pays ``xi`` on ``[0, t*]`` and nothing after;
    the ruin-minimising one pays nothing on ``[0, T - t*]`` and ``xi`` after.
    """
    _require_admissible(problem)
    t_star = (problem.mubar - problem.target.M) * problem.T / problem.xi
    return min(max(t_star, 0.0), problem.T)


def brute_force_best(problem: DividendProblem, grid_steps: int = 200):
    """Exhaustive search over deterministic rate vectors on a uniform grid.

    The first ``n - 1`` rates range over ``grid_steps + 1`` points of
    ``[0, xi]``; the last rate closes the budget ``sum(c) = n*(mubar - M)``
    and must itself lie in ``[0, xi]``. Ties go to the lexicographically
    smallest vector. Returns ``(strategy, value)``.
    """
    _require_admissible(problem)
    n = problem.n
    if n > 4:
        raise ValueError("exhaustive search supports n <= 4")
    if n * (grid_steps + 1) ** (n - 1) > BRUTE_FORCE_BUDGET:
        raise ValueError("grid exceeds the enumeration budget")
    total = problem.total_payout
    xi = problem.xi
    if n == 1:
        strat = DividendStrategy((float(total),))
        return strat, value(strat, problem)

    weights = discount_weights(n, problem.T, problem.r)
    grid = np.linspace(0.0, xi, grid_steps + 1)
    best_val = -math.inf
    best = None
    tol = 1e-12 * max(1.0, xi)
    # chunk over the first coordinate to bound memory
    if n > 2:
        rest = np.stack([a.ravel() for a in np.meshgrid(*([grid] * (n - 2)), indexing="ij")], axis=1)
    else:
        rest = np.empty((1, 0))
    for c0 in grid:
        free = np.column_stack([np.full(len(rest), c0), rest])
        last = total - free.sum(axis=1)
        ok = (last >= -tol) & (last <= xi + tol)
        if not ok.any():
            continue
        cand = np.column_stack([free[ok], np.clip(last[ok], 0.0, xi)])
        vals = cand @ weights
        i = int(np.argmax(vals))
        if vals[i] > best_val:
            best_val = float(vals[i])
            best = cand[i]
    if best is None:
        raise ValueError("no grid point satisfies the payout budget")
    return DividendStrategy(tuple(float(c) for c in best)), best_val


def deterministic_strategies(problem: DividendProblem, samples: int, rng: np.random.Generator):
    """Random feasible deterministic rate vectors (used by property checks).

    Draws ``u`` uniformly in the box and shifts it, ``clip(u + s, 0, xi)``,
    with ``s`` found by bisection so the budget is met exactly.
    """
    n = problem.n
    total = min(max(problem.total_payout, 0.0), n * problem.xi)
    out = []
    for _ in range(samples):
        u = rng.uniform(0.0, problem.xi, size=n)
        lo, hi = -problem.xi, problem.xi
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if np.clip(u + mid, 0.0, problem.xi).sum() < total:
                lo = mid
            else:
                hi = mid
        c = np.clip(u + 0.5 * (lo + hi), 0.0, problem.xi)
        # absorb the residual rounding in an interior coordinate
        resid = total - c.sum()
        j = int(np.argmax((c > 0) & (c < problem.xi))) if np.any((c > 0) & (c < problem.xi)) else 0
        c[j] = min(max(c[j] + resid, 0.0), problem.xi)
        out.append(DividendStrategy(tuple(float(v) for v in c)))
    return out


def as_process(strategy: DividendStrategy, problem: DividendProblem, seed: int = 0) -> PiecewiseBM:
    """The post-dividend surplus as a piecewise Brownian motion."""
    dt = problem.T / problem.n
    segments = tuple((dt, problem.mubar - c, problem.sigmabar) for c in strategy.rates)
    return PiecewiseBM(x0=problem.x, segments=segments, seed=seed)
