"""Proportional reinsurance with a Gaussian terminal target.

Net surplus under retention ``b`` (fraction of each claim kept) has drift
``lam*mu*(theta*b - (theta - eta))`` and volatility ``sqrt(lam*mu2)*b``. With
retentions piecewise constant on ``n`` equal periods, hitting
``N(M*T, delta**2*T)`` at ``T`` pins down ``sum(b)`` and ``sum(b**2)``; for
``n = 2`` that leaves one unordered pair, for ``n = 3`` a circle arc.

Ruin here is a non-positive net surplus at one of the check dates ``kT/n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize

from .normal import TargetDist, clamp_probability, normal_pdf, std_normal_cdf, std_normal_sf
from .quadrature import QuadratureBudgetExceeded, integrate_semi_infinite
from .ruin import SurvivalReport, discrete_survival_mc, discrete_survival_quadrature

CONSTRAINT_TOL = 1e-10
#: slack when accepting roots marginally outside [0, 1] through rounding
ROOT_SLACK = 1e-12

BOUND_MODES = ("lemma-full", "paper-example")


class InfeasibleTarget(ValueError):
    pass


class InfeasibleVariance(InfeasibleTarget):
    pass


class InfeasibleRetention(InfeasibleTarget):
    pass


class ConfigurationError(ValueError):
    pass


class NoConvergence(RuntimeError):
    pass


@dataclass(frozen=True)
class ReinsuranceModel:
    lam: float
    mu: float
    mu2: float
    eta: float
    theta: float
    T: float

    def __post_init__(self):
        for name in ("lam", "mu", "mu2", "eta", "theta", "T"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.eta > self.theta:
            raise ValueError(f"arbitrage: eta={self.eta} exceeds theta={self.theta}")

    @property
    def retention_sum_unit(self) -> float:
        """``(M + lam*mu*(theta - eta)) / (lam*mu*theta)`` is the mean retention; this is its denominator."""
        return self.lam * self.mu * self.theta

    def mean_retention(self, M: float) -> float:
        return (M + self.lam * self.mu * (self.theta - self.eta)) / (self.lam * self.mu * self.theta)

    def mean_square_retention(self, delta: float) -> float:
        return delta * delta / (self.lam * self.mu2)


@dataclass(frozen=True)
class ReinsurancePair:
    b0: float
    b1: float

    def as_tuple(self):
        return (self.b0, self.b1)

    def reversed(self):
        return (self.b1, self.b0)


@dataclass(frozen=True)
class ReinsuranceTriple:
    b0: float
    b1: float
    b2: float

    def as_tuple(self):
        return (self.b0, self.b1, self.b2)


@dataclass(frozen=True)
class SurvivalDecomposition:
    rho: float
    gamma: float
    ez0: float
    varz0: float
    ystar: float | None


@dataclass(frozen=True)
class Feasibility:
    ok: bool
    delta_min: float
    delta_max: float
    mode: str
    reasons: list[str] = field(default_factory=list)

    def __bool__(self):
        return self.ok


def _check_T(model: ReinsuranceModel, target: TargetDist):
    if abs(model.T - target.T) > 1e-12 * max(1.0, model.T):
        raise ConfigurationError(f"horizon mismatch: model T={model.T}, target T={target.T}")


def drift_of(model: ReinsuranceModel, b: float) -> float:
    return model.lam * model.mu * (model.theta * b - (model.theta - model.eta))


def volatility_of(model: ReinsuranceModel, b: float) -> float:
    return math.sqrt(model.lam * model.mu2) * b


def feasibility_bounds(model: ReinsuranceModel, M: float, mode: str = "lemma-full") -> Feasibility:
    """Necessary range for ``delta`` given ``M`` (and the M-range ``0 <= M <= lam*mu*eta``).

    ``lemma-full`` takes the lower bound on ``delta**2/(lam*mu2)`` as the max of
    the squared mean retention and ``M/(lam*mu*theta)``; ``paper-example`` uses
    the squared mean retention alone.
    """
    if mode not in BOUND_MODES:
        raise ValueError(f"unknown bound mode {mode!r}")
    reasons = []
    top = model.lam * model.mu * model.eta
    if M < 0:
        reasons.append(f"M={M:g} below 0")
    if M > top:
        reasons.append(f"M={M:g} above lam*mu*eta={top:g}")
    k = model.mean_retention(M)
    lower = k * k
    if mode == "lemma-full":
        lower = max(lower, M / (model.lam * model.mu * model.theta))
    upper = min(2.0 * k * k, 1.0)
    scale = model.lam * model.mu2
    if upper < lower:
        reasons.append("empty delta range")
    d_min = math.sqrt(scale * lower)
    d_max = math.sqrt(scale * max(upper, 0.0))
    return Feasibility(not reasons, d_min, d_max, mode, reasons)


def solve_pair(model: ReinsuranceModel, target: TargetDist) -> ReinsurancePair:
    """The unique unordered retention pair, returned sorted ``b0 <= b1``."""
    _check_T(model, target)
    S = 2.0 * model.mean_retention(target.M)
    Q = 2.0 * model.mean_square_retention(target.delta)
    disc = Q / 2.0 - S * S / 4.0
    if disc < 0:
        if disc > -CONSTRAINT_TOL:
            disc = 0.0
        else:
            raise InfeasibleVariance(
                f"delta={target.delta:g} too small for M={target.M:g}: discriminant {disc:.3g} < 0")
    root = math.sqrt(disc)
    b0, b1 = S / 2.0 - root, S / 2.0 + root
    if b0 < -ROOT_SLACK or b1 > 1.0 + ROOT_SLACK:
        raise InfeasibleRetention(f"retentions ({b0:.6g}, {b1:.6g}) leave [0, 1]")
    return ReinsurancePair(min(max(b0, 0.0), 1.0), min(max(b1, 0.0), 1.0))


def pair_residuals(model: ReinsuranceModel, target: TargetDist, b: Sequence[float]):
    """Residuals of the sum and sum-of-squares constraints for ``n = len(b)`` periods."""
    b = np.asarray(b, dtype=float)
    n = len(b)
    return (float(b.sum() - n * model.mean_retention(target.M)),
            float((b * b).sum() - n * model.mean_square_retention(target.delta)))


def survival_decomposition(model: ReinsuranceModel, target: TargetDist,
                           pair: ReinsurancePair) -> SurvivalDecomposition:
    """Split the first-half surplus into a multiple of the terminal surplus plus independent noise.

    ``X_{T/2}^{b0} = rho*Y + Z0`` with ``Y ~ N(M T, delta**2 T)`` the terminal
    surplus; the reversed order gives ``gamma*Y + Z1`` with ``E[Z1] = -E[Z0]``.
    The two survival integrands cross at ``y* = 2 E[Z0] / (1 - 2 rho)``.
    """
    _check_T(model, target)
    d2 = target.delta ** 2
    T = model.T
    rho = model.lam * model.mu2 * pair.b0 ** 2 / (2.0 * d2)
    gamma = 1.0 - rho
    ez0 = drift_of(model, pair.b0) * T / 2.0 - rho * target.M * T
    varz0 = rho * gamma * d2 * T
    ystar = None
    if ez0 > 0 and rho < 0.5:
        ystar = 2.0 * ez0 / (1.0 - 2.0 * rho)
    return SurvivalDecomposition(rho, gamma, ez0, max(varz0, 0.0), ystar)


def _half_moments(model: ReinsuranceModel, b: float, periods: int = 2):
    dt = model.T / periods
    return drift_of(model, b) * dt, volatility_of(model, b) * math.sqrt(dt)


def _validate_order(model, target, order):
    a, b = order
    res_sum, res_sq = pair_residuals(model, target, (a, b))
    if abs(res_sum) > 1e-8 or abs(res_sq) > 1e-8 or not (0 <= a <= 1 and 0 <= b <= 1):
        raise ConfigurationError(f"({a}, {b}) is not an admissible retention pair")


def g_integrands(model: ReinsuranceModel, target: TargetDist, pair: ReinsurancePair, y):
    """Survival densities ``(G0(y), G1(y))`` of orders ``(b0, b1)`` and ``(b1, b0)``.

    ``p(b0, b1) = int_0^inf G0`` and ``p(b1, b0) = int_0^inf G1``. Needs
    ``0 < rho < 1``.
    """
    dec = survival_decomposition(model, target, pair)
    if not 0.0 < dec.rho < 1.0:
        raise ConfigurationError("decomposition requires both retentions positive")
    T = model.T
    d = target.delta
    y = np.asarray(y, dtype=float)
    f_y = normal_pdf(y, target.M * T, d * math.sqrt(T))
    g0 = std_normal_sf((-y - dec.ez0 / dec.rho) / (d * math.sqrt(dec.gamma / dec.rho * T))) * f_y
    g1 = std_normal_sf((-y + dec.ez0 / dec.gamma) / (d * math.sqrt(dec.rho / dec.gamma * T))) * f_y
    return g0, g1


def crossing_quantities(model, target, pair, y):
    """The standardized arguments ``(z0, z1)`` whose order decides ``G0`` vs ``G1`` pointwise."""
    dec = survival_decomposition(model, target, pair)
    d2 = target.delta ** 2
    y = np.asarray(y, dtype=float)
    z0 = (-y - dec.ez0 / dec.rho) / math.sqrt(d2 * dec.gamma / dec.rho * model.T / 2)
    z1 = (-y + dec.ez0 / dec.gamma) / math.sqrt(d2 * dec.rho / dec.gamma * model.T / 2)
    return z0, z1


def survival_prob(model: ReinsuranceModel, target: TargetDist, order: Sequence[float],
                  method: str = "direct", paths: int = 1_000_000, seed: int = 0,
                  rel_tol: float = 1e-10, abs_tol: float = 1e-13) -> SurvivalReport:
    """P[net surplus > 0 at T/2 and at T] when retaining ``order[0]`` then ``order[1]``.

    ``direct`` integrates the first-half surplus against the Gaussian tail of
    the second half; ``paper-decomposition`` integrates ``G0``/``G1`` over the
    terminal surplus; ``mc`` samples both half-period increments.
    """
    _check_T(model, target)
    _validate_order(model, target, order)
    first, second = float(order[0]), float(order[1])
    m1, s1 = _half_moments(model, first)
    m2, s2 = _half_moments(model, second)
    diag = {"order": [first, second]}

    if method == "mc":
        rep = discrete_survival_mc(0.0, [m1, m2], [s1, s2], paths=paths, seed=seed)
        rep.diagnostics.update(diag)
        return rep

    degenerate = s1 == 0.0 or s2 == 0.0
    if method == "direct" or (method == "paper-decomposition" and degenerate):
        rep = discrete_survival_quadrature(0.0, [m1, m2], [s1, s2], rel_tol=rel_tol, abs_tol=abs_tol)
        rep.method = "direct"
        rep.diagnostics.update(diag)
        if degenerate:
            rep.warnings.append("zero retention in one half: exact shortcut used")
            rep.diagnostics["shortcut"] = True
        return rep
    if method != "paper-decomposition":
        raise ValueError(f"unknown method {method!r}")

    lo, hi = sorted((first, second))
    pair = ReinsurancePair(lo, hi)
    dec = survival_decomposition(model, target, pair)
    use_g1 = first > second
    scale = target.delta * math.sqrt(model.T)

    def g(y):
        g0, g1 = g_integrands(model, target, pair, y)
        return g1 if use_g1 else g0

    res = integrate_semi_infinite(g, 0.0, rel_tol=rel_tol, abs_tol=abs_tol, scale=scale,
                                  center=target.M * model.T)
    diag.update(rho=dec.rho, gamma=dec.gamma, ez0=dec.ez0, varz0=dec.varz0, ystar=dec.ystar,
                evaluations=res.evaluations)
    return SurvivalReport(clamp_probability(res.value), "paper-decomposition",
                          res.abs_error_estimate, diag)


def cheapness_condition(model: ReinsuranceModel, target: TargetDist, form: str = "basic") -> bool:
    """Sufficient condition for ``E[Z0] <= 0`` ("cheap reinsurance").

    ``basic``: ``mu*eta/mu2 <= M/delta**2`` and ``mu*theta/mu2 <= 2M/delta**2``.
    The second inequality does not in general keep the concave function
    ``F(b) = mu*(theta*b - theta + eta) - mu2*b**2*M/delta**2`` non-positive on
    [0, 1]: that needs its vertex ``b* = mu*theta*delta**2/(2*mu2*M)`` at or
    beyond 1, i.e. the reversed inequality, which is what ``corrected`` tests.
    """
    lhs1 = model.mu * model.eta / model.mu2
    ratio = target.M / target.delta ** 2
    first = lhs1 <= ratio
    if form == "basic":
        return first and model.mu * model.theta / model.mu2 <= 2.0 * ratio
    if form == "corrected":
        return first and model.mu * model.theta / model.mu2 >= 2.0 * ratio
    raise ValueError(f"unknown form {form!r}")


def ez0_profile(model: ReinsuranceModel, target: TargetDist, b):
    """``F(b)``; ``E[Z0] = lam*T/2 * F(b0)``."""
    b = np.asarray(b, dtype=float)
    return (model.mu * (model.theta * b - model.theta + model.eta)
            - model.mu2 * b * b * target.M / target.delta ** 2)


def max_ez0_profile(model: ReinsuranceModel, target: TargetDist) -> float:
    """Exact ``max_{b in [0, 1]} F(b)`` (concave quadratic)."""
    cands = [0.0, 1.0]
    if target.M > 0:
        vertex = model.mu * model.theta * target.delta ** 2 / (2.0 * model.mu2 * target.M)
        if 0.0 < vertex < 1.0:
            cands.append(vertex)
    return float(max(ez0_profile(model, target, cands)))


# --------------------------------------------------------------------------- #
# penalisation
# --------------------------------------------------------------------------- #

@dataclass
class PenalisationResult:
    P: float
    b_hat: float
    M_prime: float
    pair: ReinsurancePair | None
    constant: SurvivalReport
    switching: SurvivalReport | None
    switching_reversed: SurvivalReport | None


def constant_strategy(model: ReinsuranceModel, delta: float):
    """Retention ``b_hat`` hitting variance ``delta**2`` with no mid-horizon change, and its mean rate."""
    b_hat = delta / math.sqrt(model.lam * model.mu2)
    if not 0.0 <= b_hat <= 1.0:
        raise ConfigurationError(f"constant retention {b_hat:.6g} outside [0, 1]")
    return b_hat, drift_of(model, b_hat)


def constant_survival(model: ReinsuranceModel, M_prime: float, delta: float,
                      rel_tol: float = 1e-10, abs_tol: float = 1e-13) -> SurvivalReport:
    """Survival of the constant retention via the terminal-surplus decomposition.

    With ``Y = X_T ~ N(M' T, delta**2 T)``, ``X_{T/2} = Y/2 + Zhat`` where
    ``Zhat`` is independent of ``Y``.
    """
    b_hat, _ = constant_strategy(model, delta)
    T = model.T
    ez = drift_of(model, b_hat) * T / 2.0 - M_prime * T / 2.0
    sd = delta * math.sqrt(T)

    def g(y):
        return std_normal_sf((-y - 2.0 * ez) / sd) * normal_pdf(y, M_prime * T, sd)

    res = integrate_semi_infinite(g, 0.0, rel_tol=rel_tol, abs_tol=abs_tol, scale=sd,
                                  center=M_prime * T)
    return SurvivalReport(clamp_probability(res.value), "constant-decomposition",
                          res.abs_error_estimate, {"b_hat": b_hat, "ez_hat": ez})


def penalised_survival(model: ReinsuranceModel, order: Sequence[float], P: float,
                       rel_tol: float = 1e-10, abs_tol: float = 1e-13) -> SurvivalReport:
    """Two-period survival when ``P*T`` is deducted at ``T/2`` (before that check)."""
    m1, s1 = _half_moments(model, order[0])
    m2, s2 = _half_moments(model, order[1])
    pen = P * model.T
    rep = discrete_survival_quadrature(0.0, [m1, m2], [s1, s2], thresholds=[pen, pen],
                                       rel_tol=rel_tol, abs_tol=abs_tol)
    rep.method = "penalised"
    rep.diagnostics.update(order=list(order), penalty=pen)
    return rep


def penalisation_compare(model: ReinsuranceModel, M_prime: float | None, P: float,
                         delta: float) -> PenalisationResult:
    """Constant retention vs. the two switching orders for a mid-horizon penalty rate ``P``.

    The switching pair targets mean ``M = M' - P`` and the same ``delta``.
    """
    if P < 0:
        raise ConfigurationError("penalty rate must be non-negative")
    b_hat, implied = constant_strategy(model, delta)
    if M_prime is None:
        M_prime = implied
    elif abs(M_prime - implied) > 1e-8:
        raise ConfigurationError(
            f"M'={M_prime:g} inconsistent with delta={delta:g}: constant retention gives {implied:g}")
    const = constant_survival(model, M_prime, delta)
    target = TargetDist(M_prime - P, delta, model.T)
    try:
        pair = solve_pair(model, target)
    except InfeasibleTarget:
        return PenalisationResult(P, b_hat, M_prime, None, const, None, None)
    return PenalisationResult(
        P, b_hat, M_prime, pair, const,
        penalised_survival(model, pair.as_tuple(), P),
        penalised_survival(model, pair.reversed(), P),
    )


def penalisation_curve(model: ReinsuranceModel, delta: float, P_grid: Sequence[float]):
    """Rows ``(P, b0, b1, p_const, p(b0,b1), p(b1,b0))``; infeasible P give NaN."""
    rows = []
    for P in P_grid:
        r = penalisation_compare(model, None, float(P), delta)
        if r.pair is None:
            rows.append((float(P), math.nan, math.nan, r.constant.value, math.nan, math.nan))
        else:
            rows.append((float(P), r.pair.b0, r.pair.b1, r.constant.value,
                         r.switching.value, r.switching_reversed.value))
    return rows


# --------------------------------------------------------------------------- #
# three periods
# --------------------------------------------------------------------------- #

def _circle_geometry(model, target):
    s = 3.0 * model.mean_retention(target.M)
    q = 3.0 * model.mean_square_retention(target.delta)
    r2 = q - s * s / 3.0
    return s, q, r2


def three_period_circle(model: ReinsuranceModel, target: TargetDist,
                        samples: int = 360) -> list[ReinsuranceTriple]:
    """Admissible triples on the plane/sphere intersection, sampled uniformly in angle.

    Points leaving ``[0, 1]**3`` are dropped.
    """
    _check_T(model, target)
    s, q, r2 = _circle_geometry(model, target)
    if r2 < -CONSTRAINT_TOL:
        raise InfeasibleTarget("sphere does not meet the retention plane")
    radius = math.sqrt(max(r2, 0.0))
    center = np.full(3, s / 3.0)
    e1 = np.array([1.0, -1.0, 0.0]) / math.sqrt(2.0)
    e2 = np.array([1.0, 1.0, -2.0]) / math.sqrt(6.0)
    phi = 2.0 * math.pi * np.arange(samples) / samples
    pts = center + radius * (np.cos(phi)[:, None] * e1 + np.sin(phi)[:, None] * e2)
    keep = np.all((pts >= -ROOT_SLACK) & (pts <= 1.0 + ROOT_SLACK), axis=1)
    pts = np.clip(pts[keep], 0.0, 1.0)
    if len(pts) == 0:
        raise InfeasibleTarget("no admissible triple inside [0, 1]^3")
    return [ReinsuranceTriple(*map(float, p)) for p in pts]


def triples_with_first(model: ReinsuranceModel, target: TargetDist, b0: float):
    """The (at most two) admissible triples with first retention ``b0``."""
    s, q, _ = _circle_geometry(model, target)
    rest_sum = s - b0
    rest_sq = q - b0 * b0
    disc = rest_sq / 2.0 - rest_sum * rest_sum / 4.0
    if disc < -CONSTRAINT_TOL:
        return []
    root = math.sqrt(max(disc, 0.0))
    lo, hi = rest_sum / 2.0 - root, rest_sum / 2.0 + root
    if lo < -ROOT_SLACK or hi > 1.0 + ROOT_SLACK or not 0.0 <= b0 <= 1.0:
        return []
    lo, hi = max(lo, 0.0), min(hi, 1.0)
    out = [ReinsuranceTriple(b0, hi, lo)]
    if hi != lo:
        out.append(ReinsuranceTriple(b0, lo, hi))
    return out


def three_period_survival(model: ReinsuranceModel, target: TargetDist, triple,
                          method: str = "quadrature", paths: int = 1_000_000,
                          seed: int = 0) -> SurvivalReport:
    """P[net surplus > 0 at T/3, 2T/3 and T] under retentions ``triple``."""
    _check_T(model, target)
    b = triple.as_tuple() if isinstance(triple, ReinsuranceTriple) else tuple(triple)
    res_sum, res_sq = pair_residuals(model, target, b)
    if abs(res_sum) > 1e-8 or abs(res_sq) > 1e-8:
        raise ConfigurationError(f"{b} violates the three-period constraints")
    moments = [_half_moments(model, bi, periods=3) for bi in b]
    means = [m for m, _ in moments]
    sds = [s for _, s in moments]
    if method == "mc":
        return discrete_survival_mc(0.0, means, sds, paths=paths, seed=seed)
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    try:
        return discrete_survival_quadrature(0.0, means, sds)
    except QuadratureBudgetExceeded as exc:
        rep = discrete_survival_mc(0.0, means, sds, paths=paths, seed=seed)
        rep.warnings.append(f"quadrature fell back to MC: {exc}")
        rep.diagnostics["fallback"] = True
        return rep


# --------------------------------------------------------------------------- #
# deterministic hyperbolic control b(t) = A / (A + C t)
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class ControlSolution:
    A: float
    C: float
    residuals: tuple[float, float]
    iterations: int
    method: str


def hyperbolic_control_targets(model: ReinsuranceModel, target: TargetDist):
    """Right-hand sides ``(g1, g2)`` of the two-equation system for ``(A, C)``."""
    lmt = model.lam * model.mu * model.theta
    g1 = (target.M + model.lam * model.mu * (model.theta - model.eta) * model.T) / lmt
    g2 = target.delta ** 2 / (model.lam * model.mu2)
    return g1, g2


def _control_equations(A, C, T):
    x = C * T / A
    e1 = A * A / C * math.log1p(x)
    e2 = A / C * (1.0 - 1.0 / (1.0 + x))
    return e1, e2


def deterministic_control_solve(g1: float, g2: float, T: float, tol: float = 1e-10,
                                max_iter: int = 200) -> ControlSolution:
    """Solve ``(A**2/C) ln((A + C T)/A) = g1`` and ``(A/C)(1 - A/(A + C T)) = g2``.

    Damped Newton in ``(log A, log C)``; if it stalls, bisection on the ratio
    ``k = C/A`` (the second equation depends on ``k`` alone) followed by the
    first equation for ``A``.
    """
    if not (g1 > 0 and g2 > 0 and T > 0):
        raise ValueError("g1, g2 and T must be positive")

    def resid(v):
        A, C = math.exp(v[0]), math.exp(v[1])
        e1, e2 = _control_equations(A, C, T)
        return np.array([e1 - g1, e2 - g2])

    def jac(v):
        A, C = math.exp(v[0]), math.exp(v[1])
        x = C * T / A
        L = math.log1p(x)
        # d/dlogA and d/dlogC of each equation
        de1_dA = 2 * A / C * L - A * A / C * (C * T / A ** 2) / (1 + x)
        de1_dC = -A * A / C ** 2 * L + A * A / C * (T / A) / (1 + x)
        # e2 = T/(1 + C T/A)
        de2_dx = -T / (1 + x) ** 2
        de2_dA = de2_dx * (-C * T / A ** 2)
        de2_dC = de2_dx * (T / A)
        return np.array([[de1_dA * A, de1_dC * C], [de2_dA * A, de2_dC * C]])

    v = np.array([math.log(max(g1, 1e-3)), math.log(max(g1, 1e-3))])
    it = 0
    r = resid(v)
    for it in range(1, max_iter + 1):
        if np.max(np.abs(r)) <= tol:
            break
        try:
            step = np.linalg.solve(jac(v), -r)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        norm = np.linalg.norm(r)
        while lam > 1e-8:
            cand = v + lam * step
            try:
                rc = resid(cand)
            except (OverflowError, ValueError, ZeroDivisionError):
                rc = None
            if rc is not None and np.all(np.isfinite(rc)) and np.linalg.norm(rc) < norm:
                v, r = cand, rc
                break
            lam *= 0.5
        else:
            break
    if np.max(np.abs(r)) <= tol:
        A, C = math.exp(v[0]), math.exp(v[1])
        return ControlSolution(A, C, tuple(float(x) for x in r), it, "newton")

    # fallback: e2 = T/(1 + k T) fixes k, then e1 = A ln(1 + k T)/k fixes A
    if not g2 < T:
        raise NoConvergence(f"no root: second equation needs g2 < T (g2={g2}, T={T}); "
                            f"Newton residuals {r.tolist()}")
    # bracketing on log k; T/(1 + k T) falls from T to 0 as log k runs over the reals
    log_k = optimize.bisect(lambda lk: T / (1 + math.exp(lk) * T) - g2, -700.0, 700.0,
                            xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=2000)
    k = math.exp(log_k)
    A = g1 * k / math.log1p(k * T)
    C = k * A
    r = resid(np.log([A, C]))
    if np.max(np.abs(r)) > tol:
        raise NoConvergence(f"residuals {r.tolist()} exceed {tol}")
    return ControlSolution(A, C, tuple(float(x) for x in r), it, "bisection")


def hyperbolic_strategy(A: float, C: float, t):
    return A / (A + C * np.asarray(t, dtype=float))


def scaled_hyperbolic_control(model: ReinsuranceModel, target: TargetDist):
    """Fit ``b(t) = a / (1 + k t)`` to the time-integrated drift and variance targets.

    Solves ``lam*mu*int_0^T (theta b - (theta - eta)) = M T`` and
    ``lam*mu2*int_0^T b**2 = delta**2 T``; returns ``(a, k)``. A solution needs
    the mean retention below the root-mean-square retention (Cauchy-Schwarz)
    and ``a <= 1``.
    """
    T = model.T
    kbar = model.mean_retention(target.M)          # (1/T) int b
    qbar = model.mean_square_retention(target.delta)  # (1/T) int b^2
    if not 0 < kbar < math.sqrt(qbar):
        raise InfeasibleTarget("mean retention must lie strictly between 0 and the rms retention")

    # with s = k T: a**2 = qbar (1 + s), kbar = a ln(1 + s) / s
    def h(s):
        return math.sqrt(qbar * (1 + s)) * math.log1p(s) / s - kbar

    hi = 1.0
    while h(hi) > 0:
        hi *= 2.0
        if hi > 1e12:
            raise NoConvergence("could not bracket the decay rate")
    s = optimize.brentq(h, 1e-12, hi, xtol=1e-14, rtol=1e-14)
    a = math.sqrt(qbar * (1 + s))
    if a > 1 + ROOT_SLACK:
        raise InfeasibleRetention(f"initial retention {a:.6g} exceeds 1")
    return a, s / T
