"""Classical fixed-step Runge-Kutta 4.

States may carry trailing batch dimensions; ``dt`` broadcasts against them so
independent problems with different step sizes can share one loop.
"""

from __future__ import annotations

import numpy as np


def rk4_step(rhs, t, y, dt):
    half = 0.5 * dt
    k1 = rhs(t, y)
    k2 = rhs(t + half, y + half * k1)
    k3 = rhs(t + half, y + half * k2)
    k4 = rhs(t + dt, y + dt * k3)
    return y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rk4(rhs, y0, dt, n_steps: int, t0=0.0, store: bool = True):
    """Integrate ``y' = rhs(t, y)`` for ``n_steps`` steps of size ``dt``.

    Returns the array of states, shape ``(n_steps + 1,) + y0.shape``, or only
    the final state when ``store`` is false.
    """
    y = np.asarray(y0, dtype=float)
    out = np.empty((n_steps + 1,) + y.shape) if store else None
    if store:
        out[0] = y
    for k in range(n_steps):
        y = rk4_step(rhs, t0 + k * dt, y, dt)
        if store:
            out[k + 1] = y
    return out if store else y
