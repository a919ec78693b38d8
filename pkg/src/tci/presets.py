"""Named parameter sets used by the CLI, demos and tests."""

from __future__ import annotations

from .normal import TargetDist
from .reinsurance import ReinsuranceModel

# eta sweep: lam=2, mu=0.22, mu2=0.05, theta=0.35, M=0.05, delta=0.2, T=1
TABLE_ETAS = (0.25, 0.26, 0.27, 0.28, 0.29, 0.30)
TABLE_BASE = dict(lam=2.0, mu=0.22, mu2=0.05, theta=0.35, T=1.0)
TABLE_TARGET = dict(M=0.05, delta=0.2)

# reference rows: eta -> (b0, b1, p(b0, b1), p(b1, b0))
TABLE_ROWS = {
    0.25: (0.4448, 0.7760, 0.4088, 0.5117),
    0.26: (0.3339, 0.8298, 0.3772, 0.5372),
    0.27: (0.2468, 0.8597, 0.3485, 0.5561),
    0.28: (0.1715, 0.8778, 0.3154, 0.5720),
    0.29: (0.1038, 0.8884, 0.2637, 0.5857),
    0.30: (0.0416, 0.8935, 0.1254, 0.5967),
}

# three-period circle
CIRCLE_BASE = dict(lam=1.0, mu=0.15, mu2=0.06, eta=0.2, theta=0.35, T=1.0)
CIRCLE_TARGET = dict(M=0.02, delta=0.2)

# deterministic hyperbolic control
CONTROL_BASE = dict(lam=1.0, mu=0.05, mu2=0.05, eta=0.3, theta=0.5, T=2.5)
CONTROL_TARGET = dict(M=0.06, delta=0.15)

# penalisation: constant retention b_hat = delta / sqrt(lam*mu2)
PENALISATION_BASE = dict(lam=2.0, mu=0.22, mu2=0.05, eta=0.3, theta=0.35, T=1.0)
PENALISATION_DELTA = 0.2
PENALISATION_GRID = tuple(round(0.002 * k, 3) for k in range(16))

# a case with E[Z0] > 0, where the two survival densities cross at y*
CROSSING_BASE = dict(lam=1.0, mu=0.5, mu2=0.375, eta=0.9, theta=1.0, T=1.0)
CROSSING_TARGET = dict(M=0.309, delta=0.469)


def table_model(eta: float, **overrides) -> ReinsuranceModel:
    return ReinsuranceModel(**{**TABLE_BASE, "eta": eta, **overrides})


def table_target() -> TargetDist:
    return TargetDist(T=TABLE_BASE["T"], **TABLE_TARGET)


def circle_case():
    return ReinsuranceModel(**CIRCLE_BASE), TargetDist(T=CIRCLE_BASE["T"], **CIRCLE_TARGET)


def control_case():
    return ReinsuranceModel(**CONTROL_BASE), TargetDist(T=CONTROL_BASE["T"], **CONTROL_TARGET)


def crossing_case():
    return ReinsuranceModel(**CROSSING_BASE), TargetDist(T=CROSSING_BASE["T"], **CROSSING_TARGET)


def penalisation_model() -> ReinsuranceModel:
    return ReinsuranceModel(**PENALISATION_BASE)
