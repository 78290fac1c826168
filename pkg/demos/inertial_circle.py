"""A uniform current on a rotating plane turns in a circle with period
2 pi Ro / eps; RK4 keeps the radius to round-off and closes the loop to
fourth order in the step.

    python3 demos/inertial_circle.py
"""

import math

import numpy as np

from rotwaves import Params, ShallowWater, SweState
from rotwaves.spectral import Grid

grid = Grid(16, 4)
params = Params(eps=0.1, beta=0.0, mu=0.01, ro=1.0)
period = 2 * math.pi * params.ro / params.eps
v0 = np.stack([np.full(grid.nx, 0.3), np.full(grid.nx, -0.2)])
start = SweState(np.zeros(grid.nx), v0, np.zeros((2, grid.nx)))

run = ShallowWater(grid, params).run(start, period, dt=period / 512, every=64)
for s in run.snapshots:
    u, v = s.v_bar[:, 0]
    print(f"t={s.t:7.3f}  V=({u:+.6f}, {v:+.6f})  |V|={math.hypot(u, v):.12f}")

previous = None
for steps in (32, 64, 128):
    miss = np.abs(ShallowWater(grid, params).run(start, period, dt=period / steps,
                                                 keep_fields=False).final.v_bar - v0).max()
    note = "" if previous is None else f"  ratio {previous / miss:.2f}"
    print(f"{steps:4d} steps per period: miss {miss:.3e}{note}")
    previous = miss
