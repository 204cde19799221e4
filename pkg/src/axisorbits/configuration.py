"""Circular primary configurations for the restricted 3- and 4-body problems.

Units have G = 1.  N = 2 primaries sit on a rotating line through the centre
of mass; N = 3 primaries form a rotating equilateral triangle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


class DomainError(ValueError):
    """Raised for non-physical inputs (non-positive masses or period)."""


@dataclass(frozen=True)
class MassSystem:
    """Problem instance: primary masses and the common period T."""

    masses: tuple[float, ...]
    period: float = 2.0 * math.pi

    def __post_init__(self) -> None:
        masses = tuple(float(m) for m in self.masses)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "period", float(self.period))
        if len(masses) not in (2, 3):
            raise DomainError(f"need 2 or 3 primaries, got {len(masses)}")
        if not all(math.isfinite(m) and m > 0.0 for m in masses):
            raise DomainError(f"masses must be positive and finite, got {masses}")
        if not (math.isfinite(self.period) and self.period > 0.0):
            raise DomainError(f"period must be positive, got {self.period}")

    @property
    def n_primaries(self) -> int:
        return len(self.masses)

    @property
    def total_mass(self) -> float:
        return math.fsum(self.masses)

    @property
    def mean_motion(self) -> float:
        return 2.0 * math.pi / self.period

    @classmethod
    def from_dict(cls, doc: dict) -> "MassSystem":
        if "masses" not in doc:
            raise DomainError("instance document needs a 'masses' list")
        masses = doc["masses"]
        if "n_primaries" in doc and int(doc["n_primaries"]) != len(masses):
            raise DomainError("n_primaries does not match the number of masses")
        return cls(tuple(masses), doc.get("period", 2.0 * math.pi))

    def to_dict(self) -> dict:
        return {"n_primaries": self.n_primaries, "masses": list(self.masses),
                "period": self.period}


@dataclass(frozen=True)
class CircularConfig:
    radii: tuple[float, ...]
    phases: tuple[float, ...]
    total_mass: float
    side: Optional[float] = None

    def __post_init__(self) -> None:
        if not all(r > 0.0 for r in self.radii):
            raise DomainError("all orbital radii must be positive")

    @property
    def min_radius(self) -> float:
        return min(self.radii)

    def positions(self, t: float | np.ndarray, period: float) -> np.ndarray:
        """Planar positions q_i(t), shape (N, 2) or (N, 2, len(t))."""
        theta = 2.0 * math.pi / period * np.asarray(t, dtype=float)
        out = []
        for r, ph in zip(self.radii, self.phases):
            out.append(np.stack([r * np.cos(theta + ph), r * np.sin(theta + ph)]))
        return np.array(out)

    def to_dict(self) -> dict:
        doc = {"radii": list(self.radii), "phases": list(self.phases),
               "total_mass": self.total_mass}
        if self.side is not None:
            doc["side"] = self.side
        return doc


@dataclass
class ValidationReport:
    center_of_mass: float
    newtonian: float
    pairwise_distance: Optional[float] = None
    details: dict = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        vals = [self.center_of_mass, self.newtonian]
        if self.pairwise_distance is not None:
            vals.append(self.pairwise_distance)
        return max(vals)

    def to_dict(self) -> dict:
        doc = {"center_of_mass": self.center_of_mass, "newtonian": self.newtonian}
        if self.pairwise_distance is not None:
            doc["pairwise_distance"] = self.pairwise_distance
        return doc


def _check(masses: Sequence[float], n: int, period: float) -> tuple[float, ...]:
    ms = tuple(float(m) for m in masses)
    if len(ms) != n:
        raise DomainError(f"expected {n} masses, got {len(ms)}")
    if not all(math.isfinite(m) and m > 0.0 for m in ms):
        raise DomainError(f"masses must be positive, got {ms}")
    if not (math.isfinite(period) and period > 0.0):
        raise DomainError(f"period must be positive, got {period}")
    return ms


def two_body_radii(masses: Sequence[float], period: float) -> tuple[float, float]:
    m1, m2 = _check(masses, 2, period)
    scale = (period / (2.0 * math.pi * (m1 + m2))) ** (2.0 / 3.0)
    return scale * m2, scale * m1


def three_body_side(masses: Sequence[float], period: float) -> float:
    total = math.fsum(_check(masses, 3, period))
    return float(np.cbrt(total * period**2 / (4.0 * math.pi**2)))


def three_body_radii(masses: Sequence[float], period: float) -> tuple[float, float, float]:
    m1, m2, m3 = _check(masses, 3, period)
    side = three_body_side(masses, period)
    total = m1 + m2 + m3
    return (
        side * math.sqrt(m2 * m2 + m2 * m3 + m3 * m3) / total,
        side * math.sqrt(m1 * m1 + m1 * m3 + m3 * m3) / total,
        side * math.sqrt(m1 * m1 + m1 * m2 + m2 * m2) / total,
    )


def _triangle_vertices(masses: Sequence[float], side: float) -> np.ndarray:
    # Vertices of the triangle centred on the centre of mass, q_1 on the
    # positive-x side of the geometric centre.
    m1, m2, m3 = masses
    total = m1 + m2 + m3
    s3 = math.sqrt(3.0)
    return side / total * np.array([
        [s3 / 2.0 * (m2 + m3), (m3 - m2) / 2.0],
        [-s3 / 2.0 * m1, m1 / 2.0 + m3],
        [-s3 / 2.0 * m1, -(m1 / 2.0 + m2)],
    ])


def three_body_phases(masses: Sequence[float]) -> tuple[float, float, float]:
    """Phase angles in [0, 2pi), quadrant taken from the signed vertex coordinates.

    tan(theta_1) = sqrt(3)(m3 - m2) / (3(m2 + m3)) and cyclic analogues.
    """
    ms = _check(masses, 3, 1.0)
    verts = _triangle_vertices(ms, 1.0)
    angles = np.mod(np.arctan2(verts[:, 1], verts[:, 0]), 2.0 * math.pi)
    return tuple(float(a) for a in angles)


def circular_config(system: MassSystem) -> CircularConfig:
    if system.n_primaries == 2:
        radii = two_body_radii(system.masses, system.period)
        return CircularConfig(radii, (0.0, math.pi), system.total_mass)
    radii = three_body_radii(system.masses, system.period)
    return CircularConfig(
        radii,
        three_body_phases(system.masses),
        system.total_mass,
        side=three_body_side(system.masses, system.period),
    )


def newtonian_residual(config: CircularConfig, system: MassSystem, n_times: int = 16) -> float:
    """max |q_i'' - sum_j m_j (q_j - q_i)/|q_j - q_i|^3|, relative to |q_i''|."""
    times = np.linspace(0.0, system.period, n_times, endpoint=False)
    q = config.positions(times, system.period)  # (N, 2, n_times)
    accel = -system.mean_motion**2 * q
    worst = 0.0
    for i in range(system.n_primaries):
        force = np.zeros_like(q[i])
        for j, mj in enumerate(system.masses):
            if j == i:
                continue
            d = q[j] - q[i]
            force += mj * d / np.linalg.norm(d, axis=0) ** 3
        scale = np.max(np.linalg.norm(accel[i], axis=0))
        worst = max(worst, float(np.max(np.abs(accel[i] - force)) / scale))
    return worst


def validate_config(config: CircularConfig, system: MassSystem) -> ValidationReport:
    q0 = config.positions(0.0, system.period)
    masses = np.asarray(system.masses)
    weighted = masses[:, None] * q0
    com = float(np.linalg.norm(weighted.sum(axis=0)) / np.max(np.linalg.norm(weighted, axis=1)))
    pairwise = None
    if system.n_primaries == 3:
        side = config.side
        gaps = [abs(float(np.linalg.norm(q0[i] - q0[j])) - side) / side
                for i, j in ((0, 1), (0, 2), (1, 2))]
        pairwise = max(gaps)
    return ValidationReport(
        center_of_mass=com,
        newtonian=newtonian_residual(config, system),
        pairwise_distance=pairwise,
    )
