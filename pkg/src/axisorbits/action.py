"""Action functional of the vertical motion and its first variation.

    f(z) = int_0^T [ z'^2 / 2 + sum_i m_i / sqrt(r_i^2 + z^2) ] dt

discretised by the uniform-grid trapezoid rule.  The gradient is the exact
gradient of this discretisation with respect to the loop coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .configuration import CircularConfig, DomainError, MassSystem
from .loopspace import LoopZ, basis_matrices, default_grid


@dataclass
class ActionReport:
    value: float
    kinetic: float
    potential: float
    el_residual_sup: float
    grid_n: int

    def to_dict(self) -> dict:
        return {"value": self.value, "kinetic": self.kinetic, "potential": self.potential,
                "el_residual_sup": self.el_residual_sup, "grid_n": self.grid_n}


def _check_period(loop: LoopZ, system: MassSystem) -> None:
    if not math.isclose(loop.period, system.period, rel_tol=1e-14, abs_tol=0.0):
        raise DomainError(f"loop period {loop.period} != system period {system.period}")


def potential(z, masses, radii):
    """U(z) = sum m_i / sqrt(r_i^2 + z^2)."""
    z2 = np.square(z)
    return sum(m / np.sqrt(r * r + z2) for m, r in zip(masses, radii))


def potential_dz(z, masses, radii):
    z2 = np.square(z)
    return -z * sum(m / (r * r + z2) ** 1.5 for m, r in zip(masses, radii))


def potential_dzz(z, masses, radii):
    z2 = np.square(z)
    return sum(m * (2.0 * z2 - r * r) / (r * r + z2) ** 2.5 for m, r in zip(masses, radii))


def potential_drop(z, masses, radii):
    """U(0) - U(z) >= 0, evaluated without cancellation."""
    z2 = np.square(z)
    out = 0.0
    for m, r in zip(masses, radii):
        rho = np.sqrt(r * r + z2)
        out = out + m * z2 / (r * rho * (rho + r))
    return out


class ActionFunctional:
    """Discretised action for a fixed instance, class, truncation and grid."""

    def __init__(self, system: MassSystem, config: CircularConfig, cls, K: int,
                 n: Optional[int] = None):
        if not all(r > 0.0 for r in config.radii):
            raise DomainError("orbital radii must be positive")
        self.system = system
        self.config = config
        self.K = int(K)
        self.n = int(n or default_grid(K))
        if self.n < 2 * self.K + 2:
            raise DomainError(f"grid n={self.n} too coarse for K={self.K}")
        self.t, self.B, self.dB, self.ddB = basis_matrices(cls, self.K, system.period, self.n)
        self.cls = cls
        self.w = system.period / self.n
        self.masses = system.masses
        self.radii = config.radii

    @property
    def planar_value(self) -> float:
        """f(0) = T * sum m_i / r_i."""
        return self.system.period * math.fsum(m / r for m, r in zip(self.masses, self.radii))

    def parts(self, coeffs: np.ndarray) -> tuple[float, float]:
        z = self.B @ coeffs
        dz = self.dB @ coeffs
        kinetic = 0.5 * self.w * float(np.dot(dz, dz))
        pot = self.w * float(np.sum(potential(z, self.masses, self.radii)))
        return kinetic, pot

    def value(self, coeffs: np.ndarray) -> float:
        kinetic, pot = self.parts(coeffs)
        return kinetic + pot

    def gradient(self, coeffs: np.ndarray) -> np.ndarray:
        z = self.B @ coeffs
        dz = self.dB @ coeffs
        return self.w * (self.dB.T @ dz + self.B.T @ potential_dz(z, self.masses, self.radii))

    def value_and_gradient(self, coeffs: np.ndarray) -> tuple[float, np.ndarray]:
        z = self.B @ coeffs
        dz = self.dB @ coeffs
        f = self.w * (0.5 * float(np.dot(dz, dz))
                      + float(np.sum(potential(z, self.masses, self.radii))))
        g = self.w * (self.dB.T @ dz + self.B.T @ potential_dz(z, self.masses, self.radii))
        return f, g

    def change(self, coeffs: np.ndarray, step: np.ndarray) -> float:
        """f(c + step) - f(c) computed term by term, accurate to rounding of the change."""
        z0 = self.B @ coeffs
        dzs = self.B @ step
        z1 = z0 + dzs
        d0 = self.dB @ coeffs
        dds = self.dB @ step
        kinetic = 0.5 * float(np.dot(dds, 2.0 * d0 + dds))
        pot = 0.0
        for m, r in zip(self.masses, self.radii):
            rho0 = np.sqrt(r * r + z0 * z0)
            rho1 = np.sqrt(r * r + z1 * z1)
            # 1/rho1 - 1/rho0 = (z0^2 - z1^2) / (rho0 rho1 (rho0 + rho1))
            pot += m * float(np.sum(-dzs * (z0 + z1) / (rho0 * rho1 * (rho0 + rho1))))
        return self.w * (kinetic + pot)

    def el_residual(self, coeffs: np.ndarray) -> float:
        z = self.B @ coeffs
        ddz = self.ddB @ coeffs
        res = ddz - potential_dz(z, self.masses, self.radii)
        return float(np.max(np.abs(res)))

    def report(self, coeffs: np.ndarray) -> ActionReport:
        kinetic, pot = self.parts(coeffs)
        return ActionReport(kinetic + pot, kinetic, pot, self.el_residual(coeffs), self.n)


def _functional(loop: LoopZ, config: CircularConfig, system: MassSystem,
                n: Optional[int]) -> ActionFunctional:
    _check_period(loop, system)
    return ActionFunctional(system, config, loop.cls, loop.K, n)


def action_value(loop: LoopZ, config: CircularConfig, system: MassSystem,
                 n: Optional[int] = None) -> ActionReport:
    return _functional(loop, config, system, n).report(loop.coeffs)


def action_gradient(loop: LoopZ, config: CircularConfig, system: MassSystem,
                    n: Optional[int] = None) -> np.ndarray:
    return _functional(loop, config, system, n).gradient(loop.coeffs)


def el_residual(loop: LoopZ, config: CircularConfig, system: MassSystem,
                n: Optional[int] = None) -> float:
    """sup_t |z'' + sum m_i z / (r_i^2 + z^2)^{3/2}| on the quadrature grid."""
    return _functional(loop, config, system, n).el_residual(loop.coeffs)
