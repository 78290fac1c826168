"""Classical fourth-order Runge-Kutta on tuples of arrays."""

from __future__ import annotations


def _axpy(y, a, k):
    return tuple(yi + a * ki for yi, ki in zip(y, k))


def rk4_step(f, t, y, dt, k1=None):
    """One RK4 step of ``dy/dt = f(t, y)`` where ``y`` is a tuple of arrays.

    ``k1`` may be supplied when ``f(t, y)`` is already known.
    """
    if k1 is None:
        k1 = f(t, y)
    k2 = f(t + dt / 2, _axpy(y, dt / 2, k1))
    k3 = f(t + dt / 2, _axpy(y, dt / 2, k2))
    k4 = f(t + dt, _axpy(y, dt, k3))
    return tuple(yi + dt / 6 * (a + 2 * b + 2 * c + d)
                 for yi, a, b, c, d in zip(y, k1, k2, k3, k4))


def fd_time_derivative(samples, dt):
    """Fourth-order centred first derivative along axis 0 (interior points only).

    Returns derivatives at indices 2 .. n-3.
    """
    s = samples
    return (s[:-4] - 8 * s[1:-3] + 8 * s[3:-1] - s[4:]) / (12 * dt)
