"""Truncated coupled-mode equations and their time integration.

For ring ``r`` and mode ``m``::

    i d a_m^r / dtau = m^2 a_m^r - kappa a_m^rbar
                       + gamma * sum_{n,n'} a_n^r conj(a_n'^r) a_{m-n+n'}^r

Terms whose third index leaves ``[-M, M]`` are dropped.  The integrators
treat the linear part exactly (integrating factor) and step only the cubic
term, which keeps the stiff ``M^2`` rotation out of the error control.
"""
from dataclasses import dataclass, field
import math

import numpy as np

from . import kernels
from .errors import ConservationError, DegenerateWindowError, IntegrationError, ParameterError
from .model import DOWN, UP, RingModeState

METHODS = {"rk4": 0, "adaptive": 1}
KERNELS = ("fast", "direct")


@dataclass(frozen=True)
class IntegratorConfig:
    """Integrator settings.

    ``method`` is ``"adaptive"`` (Dormand-Prince 5(4)) or ``"rk4"`` (fixed
    step ``dt``).  ``kernel`` picks the O(K^2) regrouped nonlinear sum or the
    literal O(K^3) triple loop; both give the same numbers to rounding.
    """

    t_end: float
    method: str = "adaptive"
    sampling_stride: float = 0.01
    dt: float = 1e-3
    rtol: float = 1e-12
    atol: float = 1e-12
    guard: float = 1e-6
    store_amplitudes: bool = False
    max_steps: int = 50_000_000
    kernel: str = "fast"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ParameterError(f"method must be one of {sorted(METHODS)}, got {self.method!r}")
        if self.kernel not in KERNELS:
            raise ParameterError(f"kernel must be one of {KERNELS}, got {self.kernel!r}")
        for name in ("t_end", "sampling_stride", "dt", "rtol", "guard"):
            v = float(getattr(self, name))
            if not (math.isfinite(v) and v > 0):
                raise ParameterError(f"{name} must be finite and > 0, got {v!r}")
        if not (math.isfinite(self.atol) and self.atol >= 0):
            raise ParameterError(f"atol must be finite and >= 0, got {self.atol!r}")
        if int(self.max_steps) != self.max_steps or self.max_steps < 1:
            raise ParameterError("max_steps must be a positive integer")


@dataclass(frozen=True)
class Trajectory:
    """Sampled populations (and optionally amplitudes) of one integration run."""

    params: object
    taus: np.ndarray
    populations: np.ndarray          # (samples, 2, 2M+1)
    drift_norm: np.ndarray           # running max of |norm - norm0| / norm0
    drift_momentum: np.ndarray       # running max of |L - L0| / norm0
    final: RingModeState
    amplitudes: np.ndarray = None    # (samples, 2, 2M+1) complex, if stored
    sampling_stride: float = 0.01
    n_steps: int = 0
    n_rejected: int = 0
    backend: str = ""
    modes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        M = (self.populations.shape[2] - 1) // 2
        object.__setattr__(self, "modes", np.arange(-M, M + 1))

    def __len__(self):
        return len(self.taus)

    @property
    def truncation(self):
        return (self.populations.shape[2] - 1) // 2

    def _col(self, m):
        if abs(m) > self.truncation:
            raise IndexError(f"mode {m} outside window")
        return int(m) + self.truncation

    def mode_population(self, m, ring=None):
        """N_m over time, for one ring (0 up, 1 down) or summed over both."""
        j = self._col(m)
        if ring is None:
            return self.populations[:, UP, j] + self.populations[:, DOWN, j]
        return self.populations[:, ring, j]

    def total_population(self, ring=None):
        if ring is None:
            return self.populations.sum(axis=(1, 2))
        return self.populations[:, ring, :].sum(axis=1)

    def imbalance(self, m=0):
        """z_m(tau) = (N_m^u - N_m^d) / N."""
        j = self._col(m)
        return (self.populations[:, UP, j] - self.populations[:, DOWN, j]) / self.params.n_total

    def perturbed_fraction(self, n=0):
        """Fraction of N outside the main mode ``n``, both rings."""
        j = self._col(n)
        tot = self.populations.sum(axis=(1, 2))
        main = self.populations[:, :, j].sum(axis=1)
        return (tot - main) / self.params.n_total

    def conservation_log(self):
        return self.drift_norm, self.drift_momentum

    @property
    def max_drift(self):
        return float(self.drift_norm[-1]), float(self.drift_momentum[-1])

    def final_state(self):
        return self.final

    def state_at(self, i):
        if self.amplitudes is None:
            raise ValueError("amplitudes were not stored; set store_amplitudes=True")
        return RingModeState(self.amplitudes[i], self.taus[i])


def _check_window(state, params):
    if state.truncation != params.truncation:
        raise ParameterError(
            f"state window M={state.truncation} does not match params M={params.truncation}")


def rhs(state, params, kernel="direct", backend=None):
    """Time derivative of every amplitude, shape ``(2, 2M+1)``."""
    _check_window(state, params)
    if kernel not in KERNELS:
        raise ParameterError(f"kernel must be one of {KERNELS}, got {kernel!r}")
    a = state.amplitudes
    m2 = (state.modes ** 2).astype(float)
    nl = np.asarray(kernels.get_backend(backend).nonlinear(
        np.ascontiguousarray(a), params.gamma, kernel == "direct"))
    lin = m2 * a - params.kappa * a[::-1]
    return -1j * (lin + nl)


def integrate(state, params, config, backend=None):
    """Integrate from ``state`` to ``config.t_end`` and return a Trajectory.

    Raises ConservationError if the norm or angular momentum drifts past
    ``config.guard`` and IntegrationError if the step budget runs out.
    """
    _check_window(state, params)
    name = backend or kernels.BACKEND
    core = kernels.get_backend(name)
    out = core.integrate(
        np.ascontiguousarray(state.amplitudes), params.kappa, params.gamma,
        float(config.t_end), float(config.sampling_stride), METHODS[config.method],
        float(config.dt), float(config.rtol), float(config.atol), float(config.guard),
        bool(config.store_amplitudes), int(config.max_steps), config.kernel == "direct")
    taus, pops, amps, dn, dl, final, n_steps, n_rej, status = out
    taus = np.asarray(taus) + state.tau
    traj = Trajectory(
        params=params, taus=taus, populations=np.asarray(pops),
        drift_norm=np.asarray(dn), drift_momentum=np.asarray(dl),
        final=RingModeState(np.asarray(final), taus[-1]),
        amplitudes=None if amps is None else np.asarray(amps),
        sampling_stride=config.sampling_stride, n_steps=int(n_steps),
        n_rejected=int(n_rej), backend=name)
    if status == 1:
        err = ConservationError(
            f"conservation drift exceeded {config.guard:g} at tau={taus[-1]:.6g} "
            f"(norm {dn[-1]:.3g}, L {dl[-1]:.3g}); tighten dt or tolerances")
        err.trajectory = traj
        raise err
    if status == 2:
        err = IntegrationError(
            f"step budget {config.max_steps} exhausted at tau={taus[-1]:.6g}")
        err.trajectory = traj
        raise err
    return traj


def growth_rate_fit(trajectory, m, window, ring=None):
    """Least-squares slope of ln N_m(tau) over ``window = (tau_a, tau_b)``."""
    ta, tb = float(window[0]), float(window[1])
    if not ta < tb:
        raise DegenerateWindowError(f"window must satisfy tau_a < tau_b, got {window}")
    taus = trajectory.taus
    if ta < taus[0] - 1e-12 or tb > taus[-1] + 1e-12:
        raise DegenerateWindowError(
            f"window {window} not inside trajectory span [{taus[0]}, {taus[-1]}]")
    sel = (taus >= ta - 1e-12) & (taus <= tb + 1e-12)
    if sel.sum() < 4:
        raise DegenerateWindowError(f"window {window} holds {sel.sum()} samples, need >= 4")
    pop = trajectory.mode_population(m, ring)[sel]
    if np.any(pop <= 0):
        raise DegenerateWindowError(f"N_{m} is not strictly positive on the window")
    slope, _ = np.polyfit(taus[sel], np.log(pop), 1)
    return float(slope)
