"""Second variation at the planar rest solution z = 0 and its conjugate points.

At z = 0 the second variation is ``int (P h'^2 + Q h^2) dt`` with P = 1/2 and
Q = -sum m_i / (2 r_i^3); the Jacobi equation is ``h'' = -omega^2 h`` with
``omega^2 = -Q/P``.  Its first zero after t = 0 is the conjugate point c.
Whenever c < T/2 a broken Jacobi field fits inside either symmetry class and
the rest solution cannot be a local minimiser.

The kernels below are vectorised over a batch of instances so that large mass
sweeps run in a single RK4 loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .action import ActionFunctional, potential_dzz
from .configuration import CircularConfig, MassSystem, circular_config
from .loopspace import LoopZ, SymmetryClass, default_grid, n_coeffs
from .rk4 import rk4, rk4_step

P_COEFF = 0.5
STEPS_PER_HALFWAVE = 2048


class NoConjugatePoint(RuntimeError):
    """No zero of the Jacobi field inside (0, T]; impossible for positive masses."""


class CertificateUnavailable(RuntimeError):
    pass


def second_variation_coeffs(system: MassSystem, config: CircularConfig) -> tuple[float, float]:
    q = -math.fsum(m / (2.0 * r**3) for m, r in zip(system.masses, config.radii))
    return P_COEFF, q


def jacobi_frequency(system: MassSystem, config: CircularConfig) -> float:
    p, q = second_variation_coeffs(system, config)
    return math.sqrt(-q / p)


def closed_form_conjugate_point(system: MassSystem) -> float:
    """c written directly in the masses and T (no radii), for cross-checking."""
    T = system.period
    if system.n_primaries == 2:
        m1, m2 = system.masses
        return math.sqrt(m1**3 * m2**3) * T / (2.0 * math.sqrt(m1**4 + m2**4) * (m1 + m2))
    m1, m2, m3 = system.masses
    M = m1 + m2 + m3
    a = math.sqrt(m2 * m2 + m2 * m3 + m3 * m3) / M
    b = math.sqrt(m1 * m1 + m1 * m3 + m3 * m3) / M
    c = math.sqrt(m1 * m1 + m1 * m2 + m2 * m2) / M
    return math.sqrt(M) * T / (2.0 * math.sqrt(m1 / a**3 + m2 / b**3 + m3 / c**3))


# -- batched kernels ---------------------------------------------------------

def _constant_rhs(kappa):
    def rhs(t, y):
        return np.stack([y[1], -kappa * y[0]])
    return rhs


def _first_zeros(kappa: np.ndarray, period: np.ndarray,
                 steps_per_halfwave: int = STEPS_PER_HALFWAVE) -> np.ndarray:
    """First positive zero of h'' = -kappa h, h(0)=0, h'(0)=1; NaN if none in (0, T]."""
    kappa = np.asarray(kappa, dtype=float)
    period = np.broadcast_to(np.asarray(period, dtype=float), kappa.shape)
    rhs = _constant_rhs(kappa)
    dt = math.pi / (np.sqrt(kappa) * steps_per_halfwave)
    y = np.stack([np.zeros_like(kappa), np.ones_like(kappa)])
    t = np.zeros_like(kappa)
    open_ = np.ones(kappa.shape, dtype=bool)
    bracket_t = np.full(kappa.shape, np.nan)
    bracket_y = np.zeros_like(y)
    while open_.any():
        y_new = rk4_step(rhs, t, y, dt)
        hit = open_ & (y_new[0] <= 0.0)
        bracket_t[hit] = t[hit]
        bracket_y[:, hit] = y[:, hit]
        t = t + dt
        open_ &= ~hit & (t < period)
        y = y_new
    found = ~np.isnan(bracket_t)
    lo = np.zeros_like(kappa)
    hi = np.where(found, dt, 0.0)
    y0 = np.where(found, bracket_y, 0.0)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        positive = rk4_step(rhs, bracket_t, y0, mid)[0] > 0.0
        lo = np.where(positive, mid, lo)
        hi = np.where(positive, hi, mid)
    c = bracket_t + 0.5 * (lo + hi)
    return np.where(found & (c <= period), c, np.nan)


def _jacobi_arcs(kappa: np.ndarray, c: np.ndarray, n: int) -> np.ndarray:
    """RK4 Jacobi fields on [0, c] with n equal steps; shape (n + 1, 2, B)."""
    kappa = np.asarray(kappa, dtype=float)
    y0 = np.stack([np.zeros_like(kappa), np.ones_like(kappa)])
    return rk4(_constant_rhs(kappa), y0, np.asarray(c, dtype=float) / n, n)


# -- single-instance API -----------------------------------------------------

def jacobi_field(system: MassSystem, config: CircularConfig, t_end: float,
                 n_steps: Optional[int] = None):
    """Sampled Jacobi field (t, h, h') on [0, t_end] from h(0)=0, h'(0)=1."""
    if not 0.0 < t_end <= system.period * (1.0 + 1e-15):
        raise ValueError("t_end must lie in (0, T]")
    omega = jacobi_frequency(system, config)
    if n_steps is None:
        n_steps = max(64, math.ceil(omega * t_end * 1024 / math.pi))
    states = rk4(_constant_rhs(omega**2), np.array([0.0, 1.0]), t_end / n_steps, n_steps)
    t = np.linspace(0.0, t_end, n_steps + 1)
    return t, states[:, 0], states[:, 1]


def first_conjugate_point(system: MassSystem, config: CircularConfig) -> float:
    kappa = jacobi_frequency(system, config) ** 2
    c = float(_first_zeros(np.array([kappa]), np.array([system.period]))[0])
    if math.isnan(c):
        raise NoConjugatePoint("Jacobi field has no zero in (0, T]")
    return c


def conjugate_points(systems: Sequence[MassSystem],
                     configs: Optional[Sequence[CircularConfig]] = None) -> np.ndarray:
    """Vectorised first_conjugate_point over many instances (NaN where absent)."""
    configs = configs or [circular_config(s) for s in systems]
    kappa = np.array([jacobi_frequency(s, c) ** 2 for s, c in zip(systems, configs)])
    return _first_zeros(kappa, np.array([s.period for s in systems]))


@dataclass
class BrokenVariation:
    """Jacobi arc on [0, c], zero elsewhere, completed by the class symmetry.

    anti-half: h on [0, c], -h(t - T/2) on (T/2, T/2 + c].
    odd:       h on [0, c], -h(T - t) on (T - c, T].
    """

    cls: SymmetryClass
    period: float
    c: float
    arc_h: np.ndarray
    arc_dh: np.ndarray

    def __post_init__(self) -> None:
        self.arc_t = np.linspace(0.0, self.c, len(self.arc_h))
        self._spline = CubicHermiteSpline(self.arc_t, self.arc_h, self.arc_dh)
        T, c = self.period, self.c
        if self.cls is SymmetryClass.ANTI_HALF:
            self.pieces = [(0.0, c, 1.0, False), (0.5 * T, 0.5 * T + c, -1.0, False)]
        else:
            self.pieces = [(0.0, c, 1.0, False), (T - c, T, -1.0, True)]

    @property
    def kinks(self) -> list[float]:
        return sorted({p for a, b, _, _ in self.pieces for p in (a, b)} - {0.0, self.period})

    def evaluate(self, t):
        """(h(t), h'(t)) for any real t, using the T-periodic extension."""
        t = np.mod(np.asarray(t, dtype=float), self.period)
        h = np.zeros_like(t)
        dh = np.zeros_like(t)
        for a, b, sign, reverse in self.pieces:
            inside = (t >= a) & (t <= b) if a == 0.0 else (t > a) & (t <= b)
            if not inside.any():
                continue
            s = np.clip(b - t[inside] if reverse else t[inside] - a, 0.0, self.c)
            h[inside] = sign * self._spline(s)
            dh[inside] = (-sign if reverse else sign) * self._spline(s, 1)
        return h, dh

    def membership_residual(self, n: int = 1024) -> float:
        t = np.arange(n) * (self.period / n)
        h, _ = self.evaluate(t)
        partner, _ = self.evaluate(t + 0.5 * self.period if self.cls is SymmetryClass.ANTI_HALF
                                   else -t)
        return float(np.max(np.abs(h + partner)))

    def second_variation(self, p: float, q: float) -> float:
        """int (P h'^2 + Q h^2) dt, trapezoid on each smooth piece separately."""
        total = 0.0
        ds = self.c / (len(self.arc_h) - 1)
        for _a, _b, sign, reverse in self.pieces:
            h = sign * self.arc_h
            dh = (-sign if reverse else sign) * self.arc_dh
            integrand = p * dh * dh + q * h * h
            total += ds * (float(np.sum(integrand)) - 0.5 * (integrand[0] + integrand[-1]))
        # the zero pieces contribute nothing
        return total

    def to_dict(self) -> dict:
        return {
            "class": self.cls.value,
            "conjugate_point": self.c,
            "pieces": [{"start": a, "end": b, "sign": s, "reflected": r}
                       for a, b, s, r in self.pieces],
            "kinks": self.kinks,
            "arc_nodes": len(self.arc_h),
        }


@dataclass
class NonMinimalityCertificate:
    cls: SymmetryClass
    conjugate_point: float
    test_variation: BrokenVariation
    second_variation_value: float
    second_variation_refined: float
    membership_residual: float
    descent_epsilon: float
    f_drop: float

    @property
    def valid(self) -> bool:
        return self.conjugate_point < 0.5 * self.test_variation.period and self.f_drop < 0.0

    def to_dict(self) -> dict:
        return {
            "class": self.cls.value,
            "test_variation": self.test_variation.to_dict(),
            "second_variation_value": self.second_variation_value,
            "second_variation_refined": self.second_variation_refined,
            "membership_residual": self.membership_residual,
            "descent_direction": "sin(2 pi t / T)",
            "descent_epsilon": self.descent_epsilon,
            "f_drop": self.f_drop,
            "valid": self.valid,
        }


def descent_drop(system: MassSystem, config: CircularConfig, cls: SymmetryClass,
                 epsilon: float, n: Optional[int] = None) -> float:
    """f(epsilon sin(2 pi t/T)) - f(0), evaluated as a cancellation-free change."""
    cls = SymmetryClass.parse(cls)
    K = 1
    fn = ActionFunctional(system, config, cls, K, n or default_grid(K))
    step = np.zeros(n_coeffs(cls, K))
    step[0] = epsilon
    return fn.change(np.zeros_like(step), step)


def _certificate(system, config, cls, c, arc, arc_fine, epsilon, n) -> NonMinimalityCertificate:
    if not c < 0.5 * system.period:
        raise CertificateUnavailable(f"conjugate point c={c} is not below T/2")
    p, q = second_variation_coeffs(system, config)
    broken = BrokenVariation(cls, system.period, c, arc[:, 0], arc[:, 1])
    fine = BrokenVariation(cls, system.period, c, arc_fine[:, 0], arc_fine[:, 1])
    eps = epsilon if epsilon is not None else 0.1 * config.min_radius
    return NonMinimalityCertificate(
        cls=cls,
        conjugate_point=c,
        test_variation=broken,
        second_variation_value=broken.second_variation(p, q),
        second_variation_refined=fine.second_variation(p, q),
        membership_residual=broken.membership_residual(),
        descent_epsilon=eps,
        f_drop=descent_drop(system, config, cls, eps),
    )


def nonminimality_certificate(system: MassSystem, config: CircularConfig, cls,
                              n: Optional[int] = None,
                              epsilon: Optional[float] = None) -> NonMinimalityCertificate:
    """Broken Jacobi field with vanishing second variation plus a strict descent witness.

    ``n`` is the number of RK4/quadrature steps on the Jacobi arc; the refined
    value uses 2n.  ``epsilon`` defaults to 0.1 * min r_i.
    """
    cls = SymmetryClass.parse(cls)
    n = n or default_grid(32)
    c = first_conjugate_point(system, config)
    kappa = np.array([jacobi_frequency(system, config) ** 2])
    arc = _jacobi_arcs(kappa, np.array([c]), n)[:, :, 0]
    arc_fine = _jacobi_arcs(kappa, np.array([c]), 2 * n)[:, :, 0]
    return _certificate(system, config, cls, c, arc, arc_fine, epsilon, n)


def certificate_sweep(systems: Sequence[MassSystem], cls, n: Optional[int] = None,
                      epsilon_factor: float = 0.1) -> list[NonMinimalityCertificate]:
    """nonminimality_certificate over many instances with batched Jacobi arcs."""
    cls = SymmetryClass.parse(cls)
    n = n or default_grid(32)
    configs = [circular_config(s) for s in systems]
    kappa = np.array([jacobi_frequency(s, c) ** 2 for s, c in zip(systems, configs)])
    cs = _first_zeros(kappa, np.array([s.period for s in systems]))
    if np.isnan(cs).any():
        raise NoConjugatePoint("an instance has no conjugate point in (0, T]")
    arcs = _jacobi_arcs(kappa, cs, n)
    fines = _jacobi_arcs(kappa, cs, 2 * n)
    return [
        _certificate(s, cfg, cls, float(cs[i]), arcs[:, :, i], fines[:, :, i],
                     epsilon_factor * cfg.min_radius, n)
        for i, (s, cfg) in enumerate(zip(systems, configs))
    ]


@dataclass
class JacobiReport:
    P: float
    Q: float
    omega: float
    conjugate_point_c: float
    c_analytic: float
    inequality_margin: float
    certificate: Optional[NonMinimalityCertificate] = None
    certificates: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        doc = {
            "P": self.P,
            "Q": self.Q,
            "omega": self.omega,
            "conjugate_point_c": self.conjugate_point_c,
            "c_analytic": self.c_analytic,
            "inequality_margin": self.inequality_margin,
        }
        certs = dict(self.certificates)
        if self.certificate is not None:
            certs.setdefault(self.certificate.cls.value, self.certificate)
        doc["certificates"] = {k: v.to_dict() for k, v in sorted(certs.items())}
        return doc


def jacobi_report(system: MassSystem, config: Optional[CircularConfig] = None,
                  classes: Sequence = (SymmetryClass.ANTI_HALF, SymmetryClass.ODD)) -> JacobiReport:
    config = config or circular_config(system)
    p, q = second_variation_coeffs(system, config)
    omega = math.sqrt(-q / p)
    c = first_conjugate_point(system, config)
    certs = {}
    for cls in classes:
        cert = nonminimality_certificate(system, config, cls)
        certs[cert.cls.value] = cert
    return JacobiReport(p, q, omega, c, math.pi / omega,
                        system.period / (2.0 * c) - 1.0, certificates=certs)


def conjugate_scan_along(loop: LoopZ, system: MassSystem, config: CircularConfig,
                         n_steps: Optional[int] = None,
                         max_el_residual: float = 1e-5) -> list[float]:
    """Zeros in (0, T) of the Jacobi field h'' = U''(z(t)) h along a critical loop."""
    from .action import el_residual

    if el_residual(loop, config, system) >= max_el_residual:
        raise ValueError("loop is not a critical point to the required accuracy")
    T = system.period
    masses, radii = system.masses, config.radii
    t_grid = np.linspace(0.0, T, 2049)
    z_grid, _ = loop.evaluate(t_grid)
    stiffness = float(np.max(np.abs(potential_dzz(z_grid, masses, radii))))
    if n_steps is None:
        n_steps = max(4096, math.ceil(math.sqrt(stiffness) * T * STEPS_PER_HALFWAVE / math.pi))
    dt = T / n_steps

    def rhs(t, y):
        z, _ = loop.evaluate(t)
        return np.array([y[1], potential_dzz(z, masses, radii) * y[0]])

    states = rk4(rhs, np.array([0.0, 1.0]), dt, n_steps)
    h = states[:, 0]
    roots = []
    for k in range(1, n_steps):
        if h[k] == 0.0 or (h[k] > 0.0) == (h[k + 1] > 0.0):
            if h[k] == 0.0:
                roots.append(k * dt)
            continue
        lo, hi = 0.0, dt
        sign = h[k] > 0.0
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if (rk4_step(rhs, k * dt, states[k], mid)[0] > 0.0) == sign:
                lo = mid
            else:
                hi = mid
        roots.append(k * dt + 0.5 * (lo + hi))
    return [r for r in roots if 0.0 < r < T]
