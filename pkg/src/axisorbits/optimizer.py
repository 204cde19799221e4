"""Minimise the action over a symmetry class with a limited-memory quasi-Newton method."""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .action import ActionFunctional, ActionReport
from .configuration import CircularConfig, MassSystem, circular_config
from .jacobi import jacobi_frequency
from .loopspace import LoopZ, SymmetryClass, default_grid, harmonics, n_coeffs

log = logging.getLogger(__name__)

TRIVIAL_SUP = 1e-8


@dataclass
class MinimizeOptions:
    K: int = 32
    gtol: float = 1e-9
    max_iter: int = 2000
    seed: int = 0
    init_amplitude: Optional[float] = None  # default 0.5 * min r_i
    memory: int = 12
    max_restarts: int = 4
    noise: float = 1e-2  # relative amplitude of seeded noise on the higher modes

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if not self.gtol > 0.0:
            raise ValueError("gtol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.init_amplitude is not None and not self.init_amplitude > 0.0:
            raise ValueError("init_amplitude must be positive")


@dataclass
class MinimizerReport:
    loop: LoopZ
    action: ActionReport
    iterations: int
    grad_norm: float
    sup_norm_z: float
    converged: bool
    trace: list = field(default_factory=list)
    initial_action: float = math.nan
    planar_action: float = math.nan
    restarts: int = 0
    message: str = ""

    @property
    def nontrivial(self) -> bool:
        return self.sup_norm_z >= TRIVIAL_SUP

    @property
    def success(self) -> bool:
        return self.converged and self.nontrivial

    def to_dict(self) -> dict:
        return {
            "loop": self.loop.to_dict(),
            "action": self.action.to_dict(),
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "sup_norm_z": self.sup_norm_z,
            "converged": self.converged,
            "nontrivial": self.nontrivial,
            "initial_action": self.initial_action,
            "planar_action": self.planar_action,
            "restarts": self.restarts,
            "message": self.message,
            "spectrum": self.loop.spectrum(),
        }


def initial_coeffs(cls: SymmetryClass, K: int, amplitude: float, seed: int,
                   noise: float = 1e-2) -> np.ndarray:
    """amplitude on sin(2 pi t/T) plus seeded noise on every other slot."""
    rng = np.random.default_rng(seed)
    coeffs = rng.uniform(-1.0, 1.0, n_coeffs(cls, K)) * noise * amplitude
    ks, _ = harmonics(cls, K)
    coeffs /= ks  # smoother start
    coeffs[0] = amplitude
    return coeffs


def canonical_sign(loop: LoopZ) -> LoopZ:
    """z'(0) >= 0 for odd loops; first non-negligible coefficient > 0 otherwise."""
    if loop.cls is SymmetryClass.ODD:
        _, dz0 = loop.evaluate(0.0)
        return -loop if dz0 < 0.0 else loop
    c = loop.coeffs
    scale = float(np.max(np.abs(c))) if c.size else 0.0
    for a in c:
        if abs(a) > 1e-12 * scale:
            return -loop if a < 0.0 else loop
    return loop


def _lbfgs(fn: ActionFunctional, x0: np.ndarray, opts: MinimizeOptions, precond: np.ndarray):
    """Returns (x, iterations, grad sup-norm, converged, trace, message).

    Backtracking line search on the Armijo condition, with the action change
    evaluated directly so the test remains meaningful near convergence.  The
    trace value is advanced by the accepted change, hence non-increasing.
    """
    c1 = 1e-4
    x = x0.copy()
    f, g = fn.value_and_gradient(x)
    gnorm = float(np.max(np.abs(g)))
    trace = [(0, f, gnorm)]
    S: deque = deque(maxlen=opts.memory)
    Y: deque = deque(maxlen=opts.memory)
    fresh = True
    for it in range(1, opts.max_iter + 1):
        if gnorm < opts.gtol:
            return x, it - 1, gnorm, True, trace, "gradient below tolerance"
        # two-loop recursion with diagonal initial inverse Hessian
        q = g.copy()
        alphas = []
        for s, y in zip(reversed(S), reversed(Y)):
            rho = 1.0 / float(np.dot(y, s))
            a = rho * float(np.dot(s, q))
            alphas.append((a, rho, s, y))
            q -= a * y
        if S:
            s, y = S[-1], Y[-1]
            gamma = float(np.dot(s, y)) / float(np.dot(y, precond * y))
        else:
            gamma = 1.0
        r = gamma * precond * q
        for a, rho, s, y in reversed(alphas):
            b = rho * float(np.dot(y, r))
            r += (a - b) * s
        p = -r
        slope = float(np.dot(g, p))
        if not slope < 0.0:
            S.clear()
            Y.clear()
            p = -precond * g
            slope = float(np.dot(g, p))
        alpha = 1.0
        while True:
            delta = fn.change(x, alpha * p)
            if delta <= c1 * alpha * slope:
                break
            alpha *= 0.5
            if alpha < 1e-16:
                break
        if alpha < 1e-16:
            if not fresh:
                S.clear()
                Y.clear()
                fresh = True
                continue
            return x, it, gnorm, gnorm < opts.gtol, trace, "line search failed"
        fresh = False
        step = alpha * p
        x = x + step
        g_new = fn.gradient(x)
        f = f + delta
        y = g_new - g
        if float(np.dot(step, y)) > 1e-14 * float(np.linalg.norm(step) * np.linalg.norm(y)):
            S.append(step)
            Y.append(y)
        g = g_new
        gnorm = float(np.max(np.abs(g)))
        trace.append((it, f, gnorm))
    converged = gnorm < opts.gtol
    return x, opts.max_iter, gnorm, converged, trace, (
        "gradient below tolerance" if converged else "max_iter exhausted")


def minimize(system: MassSystem, cls, opts: Optional[MinimizeOptions] = None,
             config: Optional[CircularConfig] = None,
             initial: Optional[LoopZ] = None) -> MinimizerReport:
    """Minimise the action over the loops of class ``cls``.

    Runs that collapse onto z = 0 are restarted from a new seeded loop (seed
    + attempt number).  An exhausted iteration budget gives an unconverged
    report, not an exception.
    """
    opts = opts or MinimizeOptions()
    cls = SymmetryClass.parse(cls)
    config = config or circular_config(system)
    fn = ActionFunctional(system, config, cls, opts.K, default_grid(opts.K))
    T = system.period
    ks, _ = harmonics(cls, opts.K)
    omega2 = jacobi_frequency(system, config) ** 2
    precond = 1.0 / (0.5 * T * ((2.0 * math.pi * ks / T) ** 2 + omega2))
    amplitude = opts.init_amplitude or 0.5 * config.min_radius

    restarts = 0
    report = None
    for attempt in range(opts.max_restarts + 1):
        if initial is not None and attempt == 0:
            if initial.K != opts.K or initial.cls is not cls:
                raise ValueError("initial loop does not match the requested class and K")
            x0 = np.array(initial.coeffs)
        else:
            x0 = initial_coeffs(cls, opts.K, amplitude, opts.seed + attempt, opts.noise)
        f0 = fn.value(x0)
        x, iters, gnorm, converged, trace, message = _lbfgs(fn, x0, opts, precond)
        loop = canonical_sign(LoopZ(T, cls, opts.K, x))
        sup = loop.sup_norm(fn.n)
        report = MinimizerReport(
            loop=loop,
            action=fn.report(loop.coeffs),
            iterations=iters,
            grad_norm=gnorm,
            sup_norm_z=sup,
            converged=converged,
            trace=trace,
            initial_action=f0,
            planar_action=fn.planar_value,
            restarts=restarts,
            message=message,
        )
        if sup >= TRIVIAL_SUP or not converged:
            break
        log.info("run collapsed onto z = 0 (attempt %d); restarting", attempt)
        restarts += 1
    else:
        report.message = ("all restarts collapsed onto z = 0, which the Jacobi "
                          "certificate shows is not a minimiser")
    return report


def minimize_refined(system: MassSystem, cls, opts: Optional[MinimizeOptions] = None,
                     el_tol: float = 1e-6, K_max: int = 512,
                     config: Optional[CircularConfig] = None) -> MinimizerReport:
    """minimize, then double K with warm starts until the EL residual is below el_tol."""
    opts = opts or MinimizeOptions()
    config = config or circular_config(system)
    report = minimize(system, cls, opts, config)
    K = opts.K
    while (report.success and report.action.el_residual_sup >= el_tol and 2 * K <= K_max):
        K *= 2
        finer = MinimizeOptions(**{**opts.__dict__, "K": K})
        report = minimize(system, cls, finer, config, initial=report.loop.resized(K))
    return report
