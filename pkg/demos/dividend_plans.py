"""Early vs late dividends when the terminal surplus law is fixed."""

import numpy as np

from tci import dividend as dv
from tci.normal import TargetDist
from tci.ruin import ruin_prob_continuous

T = 2.0
problem = dv.DividendProblem(mubar=0.6, sigmabar=0.5, xi=1.0, x=0.8, T=T, n=4, r=0.1,
                             target=TargetDist(M=0.2, delta=0.5, T=T))

print("admissible:", bool(dv.check_target(problem)))
print("kappa:", dv.kappa(problem), " continuous switch time:", dv.continuous_switch_time(problem))

early = dv.max_dividend_strategy(problem)
late = dv.min_ruin_strategy(problem)
for name, s in [("pay early", early), ("pay late", late)]:
    ruin = ruin_prob_continuous(dv.as_process(s, problem), paths=200_000, seed=1)
    print(f"{name:10s} rates={np.round(s.as_array(), 3)} value={dv.value(s, problem):.4f} "
          f"ruin={ruin.p_hat:.4f} +/- {ruin.std_err:.4f}")

# same budget, swept from back-loaded to front-loaded
total = problem.total_payout
for c0 in np.linspace(0.0, 1.0, 5):
    rest = total - c0
    rates = (c0, min(rest, 1.0), max(rest - 1.0, 0.0), 0.0)
    s = dv.DividendStrategy(rates)
    if not dv.is_feasible(s, problem):
        continue
    r = ruin_prob_continuous(dv.as_process(s, problem), paths=100_000, seed=2)
    print(f"c0={c0:.2f}  value={dv.value(s, problem):.4f}  ruin={r.p_hat:.4f}")
