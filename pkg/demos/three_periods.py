"""Three periods: a circle of admissible retentions, and the best point on it."""

import numpy as np

from tci import presets
from tci import reinsurance as re

model, target = presets.circle_case()
triples = re.three_period_circle(model, target, 72)
surv = np.array([re.three_period_survival(model, target, t).value for t in triples])

best = triples[int(np.argmax(surv))]
print("triples:", len(triples))
print("best:", np.round(best.as_tuple(), 4), "survival", round(surv.max(), 4))
print("largest b0 on the circle:", round(max(t.b0 for t in triples), 4))

b0 = 0.9
for t in re.triples_with_first(model, target, b0):
    p = re.three_period_survival(model, target, t).value
    print("with b0 = 0.9:", np.round(t.as_tuple(), 4), round(p, 4))
