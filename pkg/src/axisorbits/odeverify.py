"""Forward integration of the vertical equation of motion.

    z'' = -sum_i m_i z / (r_i^2 + z^2)^{3/2}

Used to confirm that action minimisers are genuine T-periodic solutions, and
(through ``shooting_orbit``) as an independent route to the same orbits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .action import potential, potential_dz
from .configuration import CircularConfig, MassSystem
from .loopspace import LoopZ
from .rk4 import rk4

DEFAULT_STEPS = 4096
PERIODICITY_TOL = 1e-5


@dataclass
class Trajectory:
    times: np.ndarray
    z: np.ndarray
    v: np.ndarray
    energy: np.ndarray

    @property
    def energy_drift(self) -> float:
        e0 = self.energy[0]
        return float(np.max(np.abs(self.energy - e0)) / max(abs(e0), 1e-300))

    def rows(self):
        return zip(self.times, self.z, self.v, self.energy)

    CSV_HEADER = ("t", "z", "v", "energy")


def _rhs(masses, radii):
    def rhs(t, y):
        return np.array([y[1], potential_dz(y[0], masses, radii)])
    return rhs


def energy(z, v, masses, radii):
    return 0.5 * np.square(v) - potential(z, masses, radii)


def integrate(system: MassSystem, config: CircularConfig, z0: float, v0: float,
              t_span: float, dt: Optional[float] = None) -> Trajectory:
    """Fixed-step RK4 from (z0, v0) over [0, t_span]; the last step lands on t_span."""
    if not t_span > 0.0:
        raise ValueError("t_span must be positive")
    dt = dt if dt is not None else system.period / DEFAULT_STEPS
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    n = max(1, int(round(t_span / dt)))
    if not math.isclose(n * dt, t_span, rel_tol=1e-9):
        n = math.ceil(t_span / dt)
    h = t_span / n
    states = rk4(_rhs(system.masses, config.radii), np.array([z0, v0], dtype=float), h, n)
    z, v = states[:, 0], states[:, 1]
    times = np.arange(n + 1) * h
    return Trajectory(times, z, v, energy(z, v, system.masses, config.radii))


@dataclass
class PeriodicityCheck:
    endpoint_gap: float
    passed: bool
    tol: float = PERIODICITY_TOL
    trajectory: Optional[Trajectory] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {"endpoint_gap": self.endpoint_gap, "pass": self.passed, "tol": self.tol}


def verify_periodicity(loop: LoopZ, system: MassSystem, config: CircularConfig,
                       dt: Optional[float] = None, tol: float = PERIODICITY_TOL) -> PeriodicityCheck:
    z0, v0 = loop.evaluate(0.0)
    traj = integrate(system, config, z0, v0, system.period, dt)
    gap = max(abs(traj.z[-1] - z0), abs(traj.v[-1] - v0))
    return PeriodicityCheck(float(gap), bool(gap < tol), tol, traj)


def crossing_times(traj: Trajectory) -> np.ndarray:
    """Times where z changes sign, by linear interpolation between steps.

    A start or end exactly on z = 0 is not a crossing; interior grid points
    with z = 0 exactly are.
    """
    z = traj.z
    idx = np.nonzero(z[:-1] * z[1:] < 0.0)[0]
    t0, t1 = traj.times[idx], traj.times[idx + 1]
    z0, z1 = z[idx], z[idx + 1]
    hits = t0 - z0 * (t1 - t0) / (z1 - z0)
    exact = np.nonzero(z[1:-1] == 0.0)[0] + 1
    exact = exact[z[exact - 1] * z[exact + 1] < 0.0]
    return np.sort(np.concatenate([hits, traj.times[exact]]))


# -- independent shooting route (adaptive scipy integrator) --------------------

def _return_time(v0: float, masses, radii, t_max: float) -> float:
    """Time of the first return to z = 0 after leaving upward with speed v0."""
    def rhs(t, y):
        z = y[0]
        return [y[1], float(potential_dz(z, masses, radii))]

    def back_to_plane(t, y):
        return y[0]
    back_to_plane.terminal = True
    back_to_plane.direction = -1

    sol = solve_ivp(rhs, (0.0, t_max), [0.0, v0], method="DOP853", rtol=1e-13, atol=1e-14,
                    events=back_to_plane)
    if sol.t_events[0].size == 0:
        return math.inf
    return float(sol.t_events[0][0])


def shooting_orbit(system: MassSystem, config: CircularConfig, half_oscillations: int = 1):
    """Launch speed v0 of the symmetric orbit through z = 0 with the given
    number of plane crossings per half period.

    Returns ``(v0, half_period)`` where z(0)=0, z'(0)=v0 and the orbit
    returns to the plane after ``T / (2 * half_oscillations)``.  The orbit
    with ``half_oscillations = 1`` lies in both symmetry classes.
    """
    masses, radii = system.masses, config.radii
    target = system.period / (2.0 * half_oscillations)
    omega = math.sqrt(sum(m / r**3 for m, r in zip(masses, radii)))
    if not math.pi / omega < target:
        raise ValueError("no oscillation with this return time bifurcates from z = 0")
    escape = math.sqrt(2.0 * float(potential(0.0, masses, radii)))
    lo = 1e-6 * escape
    hi = escape * (1.0 - 1e-12)
    f = lambda v: _return_time(v, masses, radii, 4.0 * target) - target
    if f(hi) < 0.0:
        raise RuntimeError("return time stays below the target up to the escape speed")
    v0 = brentq(f, lo, hi, xtol=1e-15, rtol=1e-14, maxiter=200)
    return v0, target
