"""Surplus strategies under a Gaussian terminal-distribution constraint.

Dividend-rate plans, proportional-reinsurance retentions, and the ruin and
survival probabilities that compare them.
"""

from .normal import RiskMeasures, TargetDist, std_normal_cdf, std_normal_quantile, var_es
from .quadrature import (QuadratureBudgetExceeded, QuadratureResult, integrate_finite,
                         integrate_nested, integrate_semi_infinite)
from .dividend import (DividendProblem, DividendStrategy, InadmissibleTarget, brute_force_best,
                       check_target, continuous_switch_time, kappa, max_dividend_strategy,
                       min_ruin_strategy, value)
from .ruin import (MCEstimate, PiecewiseBM, SurvivalReport, UnsupportedConfiguration,
                   ruin_prob_continuous, segment_survival, survive_discrete)
from .reinsurance import (ReinsuranceModel, ReinsurancePair, ReinsuranceTriple,
                          SurvivalDecomposition, cheapness_condition, deterministic_control_solve,
                          drift_of, feasibility_bounds, penalisation_compare, solve_pair,
                          survival_decomposition, survival_prob, three_period_circle,
                          three_period_survival, volatility_of)

__version__ = "0.1.0"
