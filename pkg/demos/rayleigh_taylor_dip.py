"""The Rayleigh-Taylor coefficient stays pinned near 1 for small waves.  A
narrow, strong pressure bump moving at the wave speed pulls it visibly down
while the run stays well posed; a much stronger one empties the layer and
trips the depth monitor.

    python3 demos/rayleigh_taylor_dip.py
"""

from rotwaves import Params, PressureForcing, WaterWaves, WaterWavesState
from rotwaves.spectral import Grid

grid = Grid(32, 12)
cases = {
    "steep bump": (Params(eps=0.5, beta=0.0, mu=0.1),
                   PressureForcing("traveling_bump", p0=0.3, c=1.0, ell=0.5)),
    "over-forced": (Params(eps=0.5, beta=0.0, mu=0.04),
                    PressureForcing("traveling_bump", p0=3.0, c=1.0, ell=0.4)),
}
for name, (params, forcing) in cases.items():
    run = WaterWaves(grid, params, forcing=forcing).run(WaterWavesState.rest(grid), 3.0,
                                                       dt=0.01, keep_fields=False)
    low_a = min(r["min_rt"] for r in run.records[1:])
    low_h = min(r["min_depth"] for r in run.records)
    status = f"tripped {run.trip.kind} at t={run.trip.snapshot.t:.2f}" if run.trip else "ok"
    print(f"{name:12s} min a={low_a:.3f}  min depth={low_h:.3f}  {status}")
