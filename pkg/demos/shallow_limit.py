"""How far the full rotating water-waves solution drifts from the
shallow-water model after one time unit, as the layer gets shallower.

The gap in (zeta, Vbar, sqrt(mu) Q) shrinks roughly in proportion to mu,
while the residual of the Q equation only shrinks like sqrt(mu).

    python3 demos/shallow_limit.py
"""

from pathlib import Path

from rotwaves.config import load_config
from rotwaves.scenario import run_scenario
from rotwaves.swe import fit_slope, q_residual_scaling

text = (Path(__file__).parent / "configs" / "sheared_both.ini").read_text()
mus = (0.04, 0.01, 0.0025)
errors, residuals = [], []
for mu in mus:
    res = run_scenario(load_config(text=text.replace("mu = 0.01", f"mu = {mu}")))
    errors.append(res.comparison.max_error)
    residuals.append(q_residual_scaling(res.waterwaves))
    print(f"mu={mu:<7} model error {errors[-1]:.3e}   Q residual {residuals[-1]:.3e}")

print(f"model error slope {fit_slope(mus, errors).slope:.3f}")
print(f"Q residual slope  {fit_slope(mus, residuals).slope:.3f}")
