"""Truncated trigonometric loops z(t) in the anti-half-period and odd classes.

Coefficient layout
------------------
``ANTI_HALF``: odd harmonics k = 1, 3, ..., <= K, interleaved as
``[s_1, c_1, s_3, c_3, ...]`` for ``s_k sin(2 pi k t / T) + c_k cos(2 pi k t / T)``.

``ODD``: sine modes k = 1..K, ``[s_1, s_2, ..., s_K]``.

Neither basis has a constant mode, so every loop has zero mean.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class SymmetryClass(str, enum.Enum):
    ANTI_HALF = "anti-half"  # z(t + T/2) = -z(t)
    ODD = "odd"  # z(-t) = -z(t)

    @classmethod
    def parse(cls, value: "str | SymmetryClass") -> "SymmetryClass":
        if isinstance(value, cls):
            return value
        aliases = {"anti-half": cls.ANTI_HALF, "antihalfperiod": cls.ANTI_HALF,
                   "lambda1": cls.ANTI_HALF, "odd": cls.ODD, "lambda2": cls.ODD}
        key = str(value).strip().lower().replace("_", "-")
        if key not in aliases and key.replace("-", "") in aliases:
            key = key.replace("-", "")
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown symmetry class {value!r}") from None


class ResolutionError(ValueError):
    """Sampling grid too coarse to resolve every mode of a loop."""


def harmonics(cls: SymmetryClass, K: int) -> tuple[np.ndarray, np.ndarray]:
    """(wavenumbers, is_cosine) for each coefficient slot."""
    if K < 1:
        raise ValueError("truncation order K must be >= 1")
    if cls is SymmetryClass.ODD:
        return np.arange(1, K + 1), np.zeros(K, dtype=bool)
    ks = np.arange(1, K + 1, 2)
    return np.repeat(ks, 2), np.tile([False, True], len(ks))


def n_coeffs(cls: SymmetryClass, K: int) -> int:
    return len(harmonics(cls, K)[0])


@lru_cache(maxsize=16)
def _basis_cached(cls: SymmetryClass, K: int, period: float, n: int):
    ks, is_cos = harmonics(cls, K)
    t = np.arange(n) * (period / n)
    freq = 2.0 * math.pi * ks / period
    phase = np.outer(t, freq)
    s, c = np.sin(phase), np.cos(phase)
    val = np.where(is_cos, c, s)
    der = np.where(is_cos, -s, c) * freq
    dd = -val * freq**2
    for arr in (val, der, dd):
        arr.flags.writeable = False
    return t, val, der, dd


def basis_matrices(cls: SymmetryClass, K: int, period: float, n: int):
    """Grid t_j = jT/n and matrices of basis values, first and second derivatives."""
    return _basis_cached(SymmetryClass(cls), int(K), float(period), int(n))


def default_grid(K: int) -> int:
    return max(256, 8 * K)


@dataclass(frozen=True, eq=False)
class LoopZ:
    period: float
    cls: SymmetryClass
    K: int
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "cls", SymmetryClass.parse(self.cls))
        coeffs = np.array(self.coeffs, dtype=float)
        expected = n_coeffs(self.cls, self.K)
        if coeffs.shape != (expected,):
            raise ValueError(f"{self.cls.value} loop with K={self.K} needs {expected} "
                             f"coefficients, got shape {coeffs.shape}")
        if not self.period > 0.0:
            raise ValueError("period must be positive")
        coeffs.flags.writeable = False
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zero(cls, period: float, sym: SymmetryClass, K: int) -> "LoopZ":
        return cls(period, sym, K, np.zeros(n_coeffs(SymmetryClass.parse(sym), K)))

    def with_coeffs(self, coeffs: np.ndarray) -> "LoopZ":
        return LoopZ(self.period, self.cls, self.K, coeffs)

    def resized(self, K: int) -> "LoopZ":
        """Same function truncated or zero-padded to order K."""
        s, c = full_series(self)
        s2, c2 = np.zeros(K), np.zeros(K)
        m = min(K, self.K)
        s2[:m], c2[:m] = s[:m], c[:m]
        return project_symmetry(s2, c2, self.cls, self.period)

    def __neg__(self) -> "LoopZ":
        return self.with_coeffs(-self.coeffs)

    def _modes(self, t):
        ks, is_cos = harmonics(self.cls, self.K)
        freq = 2.0 * math.pi * ks / self.period
        phase = np.multiply.outer(np.asarray(t, dtype=float), freq)
        return freq, is_cos, np.sin(phase), np.cos(phase)

    def evaluate(self, t):
        """(z(t), z'(t)) by direct series summation; t scalar or array."""
        freq, is_cos, s, c = self._modes(t)
        z = np.where(is_cos, c, s) @ self.coeffs
        dz = (np.where(is_cos, -s, c) * freq) @ self.coeffs
        if np.ndim(t) == 0:
            return float(z), float(dz)
        return z, dz

    def second_derivative(self, t):
        freq, is_cos, s, c = self._modes(t)
        return (-np.where(is_cos, c, s) * freq**2) @ self.coeffs

    def sample_grid(self, n: int):
        """Values on t_j = jT/n; returns (t, z, z')."""
        if n < 2 * self.K + 2:
            raise ResolutionError(f"grid n={n} cannot resolve K={self.K}; need n >= {2 * self.K + 2}")
        t, val, der, _ = basis_matrices(self.cls, self.K, self.period, n)
        return t, val @ self.coeffs, der @ self.coeffs

    def sup_norm(self, n: int | None = None) -> float:
        _, z, _ = self.sample_grid(n or default_grid(self.K))
        return float(np.max(np.abs(z))) if z.size else 0.0

    def membership_residual(self, n: int = 257) -> float:
        """max |z(t) + z(g t)| over a grid, g the class symmetry."""
        t = np.linspace(0.0, self.period, n)
        z, _ = self.evaluate(t)
        if self.cls is SymmetryClass.ANTI_HALF:
            partner, _ = self.evaluate(t + 0.5 * self.period)
        else:
            partner, _ = self.evaluate(-t)
        return float(np.max(np.abs(z + partner)))

    def spectrum(self) -> list[dict]:
        ks, is_cos = harmonics(self.cls, self.K)
        amps: dict[int, float] = {}
        for k, a in zip(ks, self.coeffs):
            amps[int(k)] = math.hypot(amps.get(int(k), 0.0), float(a))
        return [{"k": k, "amplitude": a} for k, a in sorted(amps.items())]

    def to_dict(self) -> dict:
        return {"period": self.period, "class": self.cls.value, "K": self.K,
                "coeffs": [float(c) for c in self.coeffs]}

    @classmethod
    def from_dict(cls, doc: dict) -> "LoopZ":
        return cls(float(doc["period"]), SymmetryClass.parse(doc["class"]), int(doc["K"]),
                   np.asarray(doc["coeffs"], dtype=float))


def project_symmetry(sin_coeffs, cos_coeffs, cls: SymmetryClass, period: float) -> LoopZ:
    """Restrict a full real Fourier series to the modes admitted by ``cls``.

    ``sin_coeffs[k-1]`` and ``cos_coeffs[k-1]`` multiply sin/cos(2 pi k t/T),
    k = 1..K.  Any constant term is discarded by the caller's convention.
    """
    cls = SymmetryClass.parse(cls)
    s = np.asarray(sin_coeffs, dtype=float)
    c = np.asarray(cos_coeffs, dtype=float)
    if s.shape != c.shape or s.ndim != 1 or s.size < 1:
        raise ValueError("sin and cos coefficient arrays must be 1-D of equal length >= 1")
    K = s.size
    if cls is SymmetryClass.ODD:
        return LoopZ(period, cls, K, s.copy())
    odd = np.arange(0, K, 2)  # k = 1, 3, ...
    coeffs = np.empty(2 * odd.size)
    coeffs[0::2] = s[odd]
    coeffs[1::2] = c[odd]
    return LoopZ(period, cls, K, coeffs)


def full_series(loop: LoopZ) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of project_symmetry: dense (sin, cos) arrays of length K."""
    s = np.zeros(loop.K)
    c = np.zeros(loop.K)
    ks, is_cos = harmonics(loop.cls, loop.K)
    for k, cos_mode, a in zip(ks, is_cos, loop.coeffs):
        (c if cos_mode else s)[k - 1] = a
    return s, c


def random_loop(cls: SymmetryClass, K: int, amplitude: float, seed: int,
                period: float = 2.0 * math.pi) -> LoopZ:
    """Seeded loop with coefficients uniform in [-amplitude, amplitude]."""
    if not amplitude > 0.0:
        raise ValueError("amplitude must be positive")
    cls = SymmetryClass.parse(cls)
    rng = np.random.default_rng(seed)
    coeffs = rng.uniform(-amplitude, amplitude, n_coeffs(cls, K))
    if cls is SymmetryClass.ANTI_HALF:
        # sin/cos pair amplitude <= amplitude keeps sup-norm <= amplitude * K
        coeffs /= math.sqrt(2.0)
    return LoopZ(period, cls, K, coeffs)
