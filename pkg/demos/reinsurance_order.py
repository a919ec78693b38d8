"""Which retention goes first? Two periods, one target."""

from tci import presets
from tci import reinsurance as re

target = presets.table_target()
print(" eta     b0      b1    p(b0,b1) p(b1,b0)  E[Z0]")
for eta in presets.TABLE_ETAS:
    model = presets.table_model(eta)
    pair = re.solve_pair(model, target)
    dec = re.survival_decomposition(model, target, pair)
    p01 = re.survival_prob(model, target, pair.as_tuple()).value
    p10 = re.survival_prob(model, target, pair.reversed()).value
    print(f"{eta:.2f}  {pair.b0:.4f}  {pair.b1:.4f}  {p01:.4f}   {p10:.4f}  {dec.ez0:+.5f}")

# a case where the first-half mean is positive, so the densities cross
model, target = presets.crossing_case()
pair = re.solve_pair(model, target)
dec = re.survival_decomposition(model, target, pair)
print("\ncrossing case: pair", pair.as_tuple(), "y* =", round(dec.ystar, 4))
for y in (0.0, dec.ystar / 2, dec.ystar, 2 * dec.ystar, 1.0):
    g0, g1 = re.g_integrands(model, target, pair, y)
    print(f"  y={y:.3f}  G0={float(g0):.4f}  G1={float(g1):.4f}")

# paying for the switch
model = presets.penalisation_model()
print("\n   P      const  (b0,b1)  (b1,b0)")
for P, b0, b1, pc, p01, p10 in re.penalisation_curve(model, presets.PENALISATION_DELTA, [0, 0.005, 0.01, 0.02]):
    print(f"{P:.3f}  {pc:.4f}  {p01:.4f}  {p10:.4f}")
