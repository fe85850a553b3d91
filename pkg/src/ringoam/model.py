"""Parameters, mode-space state and stationary solutions of the two-ring system.

Amplitudes live in a ``(2, 2M+1)`` complex array: row 0 is the upper ring,
row 1 the lower ring, column ``j`` is the angular mode ``m = j - M``.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import ConstructionError, ParameterError

UP, DOWN = 0, 1


def _finite(name, value):
    if not math.isfinite(value):
        raise ParameterError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class SystemParams:
    """Tunneling ``kappa``, interaction ``gamma``, particle number and truncation ``M``."""

    kappa: float
    gamma: float
    n_total: float
    truncation: int = 15

    def __post_init__(self):
        for name in ("kappa", "gamma", "n_total"):
            _finite(name, float(getattr(self, name)))
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.kappa < 0:
            raise ParameterError(f"kappa must be >= 0, got {self.kappa}")
        if self.gamma < 0:
            raise ParameterError(f"gamma must be >= 0 (repulsive only), got {self.gamma}")
        if self.n_total <= 0:
            raise ParameterError(f"n_total must be > 0, got {self.n_total}")
        if isinstance(self.truncation, bool) or int(self.truncation) != self.truncation:
            raise ParameterError(f"truncation must be an integer, got {self.truncation!r}")
        object.__setattr__(self, "truncation", int(self.truncation))
        if self.truncation < 1:
            raise ParameterError(f"truncation must be >= 1, got {self.truncation}")

    @classmethod
    def from_epsilon(cls, kappa, epsilon, n_total=4000.0, truncation=15):
        """Build parameters from ``epsilon = gamma * N / 2`` instead of ``gamma``."""
        _finite("epsilon", float(epsilon))
        if epsilon < 0:
            raise ParameterError(f"epsilon must be >= 0, got {epsilon}")
        if not n_total > 0:
            raise ParameterError(f"n_total must be > 0, got {n_total}")
        return cls(kappa, 2.0 * epsilon / n_total, n_total, truncation)

    @property
    def epsilon(self):
        return self.gamma * self.n_total / 2.0

    @property
    def lambda_(self):
        """Interaction-to-tunneling ratio ``epsilon / kappa``."""
        if self.kappa == 0:
            raise ParameterError("lambda = epsilon/kappa is undefined for kappa = 0")
        return self.epsilon / self.kappa

    @property
    def n_modes(self):
        return 2 * self.truncation + 1

    def as_dict(self):
        return {"kappa": self.kappa, "gamma": self.gamma, "n_total": self.n_total,
                "truncation": self.truncation, "epsilon": self.epsilon}


def make_params(kappa, gamma, n_total, truncation):
    return SystemParams(kappa, gamma, n_total, truncation)


@dataclass(frozen=True)
class RingModeState:
    amplitudes: np.ndarray
    tau: float = 0.0

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=np.complex128, copy=True)
        if a.ndim != 2 or a.shape[0] != 2 or a.shape[1] % 2 != 1 or a.shape[1] < 3:
            raise ConstructionError(
                f"amplitudes must have shape (2, 2M+1) with M >= 1, got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ConstructionError("amplitudes must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)
        object.__setattr__(self, "tau", float(self.tau))

    @classmethod
    def zeros(cls, truncation, tau=0.0):
        return cls(np.zeros((2, 2 * truncation + 1), dtype=np.complex128), tau)

    @property
    def truncation(self):
        return (self.amplitudes.shape[1] - 1) // 2

    @property
    def modes(self):
        M = self.truncation
        return np.arange(-M, M + 1)

    def index(self, m):
        if abs(m) > self.truncation:
            raise IndexError(f"mode {m} outside window [-{self.truncation}, {self.truncation}]")
        return m + self.truncation

    def amplitude(self, ring, m):
        return self.amplitudes[ring, self.index(m)]

    @property
    def populations(self):
        return np.abs(self.amplitudes) ** 2

    def with_amplitudes(self, amplitudes, tau=None):
        return RingModeState(amplitudes, self.tau if tau is None else tau)


@dataclass(frozen=True)
class Observables:
    populations: np.ndarray       # (2, 2M+1), N_m^u and N_m^d
    norm: float
    angular_momentum: float
    imbalance: np.ndarray         # (2M+1,), z_m = (N_m^u - N_m^d) / N
    modes: np.ndarray = field(repr=False)

    def population(self, m, ring=None):
        j = int(m) + (len(self.modes) - 1) // 2
        if ring is None:
            return self.populations[:, j].sum()
        return self.populations[ring, j]


def observables(state, n_total=None):
    """Per-mode populations, total norm, angular momentum and per-mode imbalance.

    The imbalance is normalised by ``n_total`` when given, otherwise by the
    state's own norm.
    """
    pops = state.populations
    norm = float(pops.sum())
    modes = state.modes
    mom = float(np.dot(modes, pops[UP] + pops[DOWN]))
    ref = norm if n_total is None else float(n_total)
    imb = (pops[UP] - pops[DOWN]) / ref if ref > 0 else np.zeros(len(modes))
    return Observables(pops, norm, mom, imb, modes)


def build_initial_state(params, n, z0, dphi0, perturbation_amplitude=0.0, perturbation_span=0):
    """Populate mode ``n`` with imbalance ``z0`` and inter-ring phase ``dphi0``.

    Modes with ``0 < |m - n| <= perturbation_span`` get the real amplitude
    ``perturbation_amplitude`` in both rings, then the whole state is rescaled
    to exactly ``params.n_total`` particles.
    """
    for name, value in (("z0", z0), ("dphi0", dphi0),
                        ("perturbation_amplitude", perturbation_amplitude)):
        _finite(name, float(value))
    if not -1.0 <= z0 <= 1.0:
        raise ParameterError(f"z0 must lie in [-1, 1], got {z0}")
    if not 0.0 <= dphi0 < 2 * math.pi:
        raise ParameterError(f"dphi0 must lie in [0, 2pi), got {dphi0}")
    if perturbation_amplitude < 0:
        raise ParameterError("perturbation_amplitude must be >= 0")
    if int(perturbation_span) != perturbation_span or perturbation_span < 0:
        raise ParameterError("perturbation_span must be a non-negative integer")
    M = params.truncation
    if abs(n) + perturbation_span > M:
        raise ConstructionError(
            f"|n| + perturbation_span = {abs(n) + perturbation_span} exceeds truncation M = {M}")

    N = params.n_total
    a = np.zeros((2, 2 * M + 1), dtype=np.complex128)
    j = n + M
    a[UP, j] = math.sqrt(N * (1.0 + z0) / 2.0)
    a[DOWN, j] = math.sqrt(N * (1.0 - z0) / 2.0) * complex(math.cos(dphi0), math.sin(dphi0))
    if perturbation_amplitude > 0:
        for m in range(n - int(perturbation_span), n + int(perturbation_span) + 1):
            if m != n:
                a[:, m + M] = perturbation_amplitude
    a *= math.sqrt(N / float(np.sum(np.abs(a) ** 2)))
    return RingModeState(a, 0.0)


@dataclass(frozen=True)
class StationaryState:
    n: int
    parity: str                   # "symmetric" | "antisymmetric"
    chemical_potential: float
    amplitudes: tuple             # (alpha_n^u, alpha_n^d) at tau = 0

    def to_state(self, params):
        """Embed the stationary pair into a full mode window."""
        s = RingModeState.zeros(params.truncation)
        a = np.array(s.amplitudes)
        a[UP, self.n + params.truncation] = self.amplitudes[0]
        a[DOWN, self.n + params.truncation] = self.amplitudes[1]
        return RingModeState(a)


def stationary_states(params, n):
    """Symmetric and antisymmetric solutions with ``N/2`` particles per ring.

    Chemical potentials are ``n^2 + eps - kappa`` and ``n^2 + eps + kappa``.
    """
    if abs(n) > params.truncation:
        raise ConstructionError(f"mode {n} outside truncation window")
    half = math.sqrt(params.n_total / 2.0)
    base = n * n + params.epsilon
    sym = StationaryState(n, "symmetric", base - params.kappa, (complex(half), complex(half)))
    anti = StationaryState(n, "antisymmetric", base + params.kappa, (complex(half), complex(-half)))
    return sym, anti
