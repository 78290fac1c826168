"""A pressure disturbance moving at the long-wave speed keeps feeding the wave
it drags along, so the surface response grows linearly in time.  Slowing the
disturbance down detunes it and the growth stalls.

    python3 demos/proudman_resonance.py
"""

import numpy as np

from rotwaves import Params, PressureForcing, ShallowWater, SweState
from rotwaves.spectral import Grid

grid = Grid(128, 4)
params = Params(eps=0.01, beta=0.0, mu=0.01)

print(f"{'t':>5} {'c=1.0 (resonant)':>18} {'c=0.6':>10}")
runs = {}
for speed in (1.0, 0.6):
    low = PressureForcing("traveling_bump", p0=0.1, c=speed, ell=0.5)
    runs[speed] = ShallowWater(grid, params, forcing=low).run(SweState.rest(grid), 8.0,
                                                             dt=0.01, every=100)
for a, b in zip(runs[1.0].snapshots, runs[0.6].snapshots):
    print(f"{a.t:5.1f} {np.abs(a.zeta).max():18.4f} {np.abs(b.zeta).max():10.4f}")
