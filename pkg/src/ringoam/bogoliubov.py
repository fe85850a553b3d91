"""Linear stability of the single-mode stationary states.

Perturbing the ``n = 0`` state with modes ``+m`` (amplitude ``u``) and
``-m`` (amplitude ``conj(v)``) in both rings gives a 4x4 linear problem in
the basis ``(u^u, u^d, v^u, v^d)``.  For the antisymmetric state the
unstable branch has ``omega^2 = (m^2 + eps - 2 kappa)^2 - eps^2``.
"""
from dataclasses import dataclass
import math
from typing import NamedTuple

import numpy as np

from .errors import ParameterError

PARITIES = ("symmetric", "antisymmetric")


def _check_mode(m):
    if int(m) != m:
        raise ParameterError(f"mode must be an integer, got {m!r}")
    if m == 0:
        raise ParameterError("perturbation mode m must be nonzero")


def _check_nonneg(**kw):
    for name, v in kw.items():
        if not (math.isfinite(v) and v >= 0):
            raise ParameterError(f"{name} must be finite and >= 0, got {v!r}")


@dataclass(frozen=True)
class BogoliubovResult:
    m: int
    kappa: float
    epsilon: float
    omega_squared: float
    stable: bool
    growth_rate: float

    @property
    def omega(self):
        """Principal square root of omega^2 (imaginary when unstable)."""
        w2 = self.omega_squared
        return complex(math.sqrt(w2)) if w2 >= 0 else complex(0.0, math.sqrt(-w2))


def excitation_branch(m, kappa, epsilon):
    """Closed-form branch of the antisymmetric state.  ``omega^2 = 0`` counts as stable."""
    _check_mode(m)
    _check_nonneg(kappa=kappa, epsilon=epsilon)
    w2 = (m * m + epsilon - 2.0 * kappa) ** 2 - epsilon ** 2
    stable = w2 >= 0.0
    return BogoliubovResult(int(m), float(kappa), float(epsilon), float(w2), stable,
                            0.0 if stable else math.sqrt(-w2))


class Interval(NamedTuple):
    low: float
    high: float

    @property
    def empty(self):
        """True when the endpoints coincide (no interaction)."""
        return self.low == self.high

    def __contains__(self, kappa):
        return self.low <= kappa <= self.high


def instability_interval(m, epsilon):
    """Range of ``kappa`` over which mode ``m`` destabilises the antisymmetric state."""
    _check_mode(m)
    _check_nonneg(epsilon=epsilon)
    m2 = float(m * m)
    return Interval(m2 / 2.0, (m2 + 2.0 * epsilon) / 2.0)


def bdg_matrix(m, kappa, epsilon, parity="antisymmetric"):
    """The 4x4 matrix whose eigenvalues are the excitation frequencies."""
    _check_mode(m)
    _check_nonneg(kappa=kappa, epsilon=epsilon)
    if parity not in PARITIES:
        raise ParameterError(f"parity must be one of {PARITIES}, got {parity!r}")
    mu = epsilon - kappa if parity == "symmetric" else epsilon + kappa
    h = m * m - mu + 2.0 * epsilon
    A = np.array([[h, -kappa], [-kappa, h]])
    E = epsilon * np.eye(2)
    return np.block([[A, E], [-E, -A]])


def bdg_spectrum(m, kappa, epsilon, parity="antisymmetric"):
    """Eigenfrequencies of the linearised problem, sorted by (real, imag)."""
    w = np.linalg.eigvals(bdg_matrix(m, kappa, epsilon, parity))
    return w[np.lexsort((w.imag, w.real))]


@dataclass(frozen=True)
class StabilityMap:
    kappa_axis: np.ndarray
    epsilon_axis: np.ndarray
    modes: tuple
    omega_squared: np.ndarray     # (n_kappa, n_epsilon, n_modes)
    unstable: np.ndarray          # same shape, bool

    def cell(self, i, j):
        """Set of unstable |m| at ``(kappa_axis[i], epsilon_axis[j])``."""
        return frozenset(abs(m) for m, u in zip(self.modes, self.unstable[i, j]) if u)

    def cells(self):
        return [[self.cell(i, j) for j in range(len(self.epsilon_axis))]
                for i in range(len(self.kappa_axis))]

    def rows(self):
        """Flat rows ``(kappa, epsilon, [(omega2, unstable) per mode])``, kappa-major."""
        for i, k in enumerate(self.kappa_axis):
            for j, e in enumerate(self.epsilon_axis):
                yield k, e, list(zip(self.omega_squared[i, j], self.unstable[i, j]))


def stability_map(kappa_axis, epsilon_axis, modes):
    kappa_axis = np.atleast_1d(np.asarray(kappa_axis, dtype=float))
    epsilon_axis = np.atleast_1d(np.asarray(epsilon_axis, dtype=float))
    modes = tuple(int(m) for m in modes)
    if kappa_axis.size == 0 or epsilon_axis.size == 0 or not modes:
        raise ParameterError("axes and mode list must be non-empty")
    for m in modes:
        _check_mode(m)
    if np.any(kappa_axis < 0) or np.any(epsilon_axis < 0):
        raise ParameterError("kappa and epsilon axes must be >= 0")
    k = kappa_axis[:, None, None]
    e = epsilon_axis[None, :, None]
    m2 = np.array([m * m for m in modes], dtype=float)[None, None, :]
    w2 = (m2 + e - 2.0 * k) ** 2 - e ** 2
    return StabilityMap(kappa_axis, epsilon_axis, modes, w2, w2 < 0.0)
