"""Inter-ring Josephson dynamics and the perturbed-regime classifier.

In rescaled time ``s = 2 kappa tau`` a single populated mode obeys::

    dz/ds    = -sqrt(1 - z^2) sin(dphi)
    dphi/ds  = Lambda z + z cos(dphi) / sqrt(1 - z^2)

with ``H = Lambda z^2 / 2 - cos(dphi) sqrt(1 - z^2)`` and ``Lambda = eps / kappa``.
``dphi`` is the phase of the lower ring minus that of the upper ring.
"""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
import math

import numpy as np
from scipy.integrate import ode

from ._dop853 import sample
from .dynamics import IntegratorConfig, integrate
from .errors import (ConservationError, ConstructionError, IntegrationError, ParameterError,
                     SingularityError)
from .model import DOWN, UP, SystemParams, build_initial_state

Z_LIMIT = 1.0 - 1e-12
ZERO_ATOL = 1e-6
LABELS = ("stable-josephson", "unstable-josephson", "semistable-josephson",
          "stable-selftrapping", "unstable-selftrapping", "semistable-selftrapping")


@dataclass(frozen=True)
class JosephsonState:
    z: float
    dphi: float

    def __post_init__(self):
        if not (math.isfinite(self.z) and math.isfinite(self.dphi)):
            raise ParameterError("z and dphi must be finite")
        if abs(self.z) > 1.0:
            raise ParameterError(f"|z| must be <= 1, got {self.z}")


def josephson_rhs(state, lam):
    """Return ``(dz/ds, dphi/ds)``; raises SingularityError at ``|z| >= 1 - 1e-12``."""
    z, p = state.z, state.dphi
    if abs(z) >= Z_LIMIT:
        raise SingularityError(f"phase equation diverges at |z| = {abs(z)}")
    r = math.sqrt(1.0 - z * z)
    return -r * math.sin(p), lam * z + z * math.cos(p) / r


def josephson_hamiltonian(state, lam):
    return 0.5 * lam * state.z ** 2 - math.cos(state.dphi) * math.sqrt(1.0 - state.z ** 2)


def lambda_critical(z0, dphi0):
    """Interaction ratio above which an initial ``(z0, dphi0)`` stays self-trapped."""
    if not (math.isfinite(z0) and math.isfinite(dphi0)):
        raise ParameterError("z0 and dphi0 must be finite")
    if z0 == 0 or abs(z0) > 1:
        raise ParameterError(f"lambda_critical needs 0 < |z0| <= 1, got {z0}")
    return 2.0 * (math.cos(dphi0) * math.sqrt(1.0 - z0 * z0) + 1.0) / (z0 * z0)


def first_zero_crossing(t, z, atol=ZERO_ATOL):
    """First sample time at which ``z`` changes sign or comes within ``atol`` of zero."""
    z = np.asarray(z)
    near = np.abs(z) < atol
    flip = np.zeros_like(near)
    flip[1:] = np.signbit(z[1:]) != np.signbit(z[:-1])
    hit = np.nonzero(near | flip)[0]
    return None if len(hit) == 0 else float(t[hit[0]])


@dataclass(frozen=True)
class JosephsonTrajectory:
    s: np.ndarray
    z: np.ndarray
    dphi: np.ndarray
    H: np.ndarray
    h_drift: float
    lam: float

    def zero_crossing(self):
        return first_zero_crossing(self.s, self.z)

    def crosses_zero(self):
        return self.zero_crossing() is not None


def _h_scale(z, lam):
    return 0.5 * abs(lam) * z * z + np.sqrt(np.clip(1.0 - z * z, 0.0, None))


def integrate_josephson(initial, lam, s_end, stride=0.01, s_eval=None, rtol=1e-12,
                        atol=1e-12, guard=1e-6):
    """Integrate the (z, dphi) equations up to ``s_end``.

    ``s_eval`` overrides the uniform sampling.  ``rtol`` applies to z only;
    the phase is held to ``atol`` absolutely since it grows on running orbits.
    """
    if abs(initial.z) >= Z_LIMIT:
        raise SingularityError(f"initial |z| = {abs(initial.z)} at the phase singularity")
    if not (s_end > 0 and stride > 0 and math.isfinite(lam)):
        raise ParameterError("s_end and stride must be > 0 and lambda finite")

    def f(_, y):
        z, p = y
        r = math.sqrt(max(1.0 - z * z, 1e-300))
        return [-r * math.sin(p), lam * z + z * math.cos(p) / r]

    if s_eval is None:
        n = int(math.ceil(s_end / stride - 1e-9))
        s_eval = np.minimum(np.arange(n + 1) * stride, s_end)
    s, y, wall = sample(f, [initial.z, initial.dphi], s_eval, [rtol, 0.0], [atol, atol],
                        stop=lambda y: abs(y[0]) >= Z_LIMIT)
    if wall is not None:
        raise SingularityError(f"|z| reached the singular limit at s = {wall:.6g}")
    z, p = y[:, 0], y[:, 1]
    H = 0.5 * lam * z * z - np.cos(p) * np.sqrt(1.0 - z * z)
    scale = float(np.max(_h_scale(z, lam)))
    drift = float(np.max(np.abs(H - H[0]))) / scale
    traj = JosephsonTrajectory(s, z, p, H, drift, float(lam))
    if drift > guard:
        err = ConservationError(f"Josephson H drift {drift:.3g} exceeds {guard:g}")
        err.trajectory = traj
        raise err
    return traj


def reaches_zero(z0, dphi0, lam, s_end, rtol=1e-10, atol=1e-12):
    """True if z changes sign (or touches zero) before ``s_end``.

    Uses the Fortran DOP853 driver with a step callback that stops at the
    first sign change, which is much cheaper than a sampled run.
    """
    if abs(z0) >= Z_LIMIT:
        raise SingularityError(f"initial |z| = {abs(z0)} at the phase singularity")
    if z0 == 0:
        return True
    sign = math.copysign(1.0, z0)

    def f(_, y):
        z, p = y
        r = math.sqrt(max(1.0 - z * z, 1e-300))
        return [-r * math.sin(p), lam * z + z * math.cos(p) / r]

    state = {"hit": False, "wall": False}

    def solout(_, y):
        if sign * y[0] <= ZERO_ATOL:
            state["hit"] = True
            return -1
        if abs(y[0]) >= Z_LIMIT:
            state["wall"] = True
            return -1
        return 0

    solver = ode(f).set_integrator("dop853", rtol=[rtol, 0.0], atol=[atol, atol],
                                    nsteps=10 ** 8)
    solver.set_solout(solout)
    solver.set_initial_value([z0, dphi0], 0.0)
    solver.integrate(s_end)
    if state["wall"]:
        raise SingularityError("|z| reached the singular limit")
    if not state["hit"] and not solver.successful():
        raise IntegrationError(f"Josephson integration failed (code {solver.get_return_code()})")
    return state["hit"]


def bisect_boundary(z0, dphi0, lam_lo, lam_hi, s_end=500.0, tol=1e-3, rtol=1e-10, atol=1e-12):
    """Bisect Lambda on "z reaches zero within s_end".

    ``lam_lo`` must oscillate and ``lam_hi`` must stay trapped; stops once the
    bracket is narrower than ``tol`` relative.
    """
    def crosses(lam):
        return reaches_zero(z0, dphi0, lam, s_end, rtol, atol)

    if not crosses(lam_lo):
        raise ParameterError(f"lambda={lam_lo} does not oscillate; bracket invalid")
    if crosses(lam_hi):
        raise ParameterError(f"lambda={lam_hi} is not self-trapped; bracket invalid")
    lo, hi = float(lam_lo), float(lam_hi)
    while hi - lo > tol * max(1.0, abs(hi)):
        mid = 0.5 * (lo + hi)
        if crosses(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def full_model_phase_variables(trajectory, n):
    """Map a stored full-model trajectory onto ``(s, z_n, dphi_n)``.

    Needs amplitudes; ``dphi`` is unwrapped so it is continuous in time.
    """
    if trajectory.amplitudes is None:
        raise ValueError("trajectory has no stored amplitudes")
    p = trajectory.params
    j = n + trajectory.truncation
    au = trajectory.amplitudes[:, UP, j]
    ad = trajectory.amplitudes[:, DOWN, j]
    z = (np.abs(au) ** 2 - np.abs(ad) ** 2) / p.n_total
    dphi = np.unwrap(np.angle(ad) - np.angle(au))
    return 2.0 * p.kappa * trajectory.taus, z, dphi


@dataclass(frozen=True)
class RegimeCell:
    kappa: float
    epsilon: float
    z0: float
    label: str
    decay_time: float = None
    dominant_mode: int = None
    onset_time: float = None
    z_crossing_time: float = None
    max_perturbed_fraction: float = 0.0
    error: str = None


@dataclass(frozen=True)
class RegimeSweep:
    """Fixed settings shared by every cell of a regime map."""

    n_total: float = 4000.0
    truncation: int = 15
    n: int = 0
    dphi0: float = math.pi
    perturbation_amplitude: float = None     # default sqrt(N) * 1e-4
    perturbation_span: int = 3
    tau_max: float = 100.0
    threshold: float = 0.01
    integrator: IntegratorConfig = field(default=None)

    def amplitude(self):
        if self.perturbation_amplitude is None:
            return math.sqrt(self.n_total) * 1e-4
        return self.perturbation_amplitude

    def config(self):
        if self.integrator is None:
            return IntegratorConfig(t_end=self.tau_max)
        return replace(self.integrator, t_end=self.tau_max)


def classify_trajectory(trajectory, z0, n=0, threshold=0.01):
    """Label a full-model run started from mode ``n`` with imbalance ``z0``."""
    p = trajectory.params
    taus = trajectory.taus
    pert = trajectory.perturbed_fraction(n)
    main = trajectory.mode_population(n) / p.n_total
    z = trajectory.imbalance(n)

    over = np.nonzero(pert > threshold)[0]
    onset_idx = int(over[0]) if len(over) else None
    cross = np.nonzero(pert >= main)[0]
    decay = float(taus[cross[0]]) if len(cross) else None

    if onset_idx is None:
        stability = "stable"
        window = slice(None)
        dominant = None
    else:
        stability = "unstable" if decay is not None else "semistable"
        window = slice(0, onset_idx + 1)
        pops = trajectory.populations[onset_idx].sum(axis=0)
        M = trajectory.truncation
        frac = {}
        for m in range(-M, M + 1):
            if m != n:
                frac[abs(m - n)] = frac.get(abs(m - n), 0.0) + pops[m + M]
        dominant = max(sorted(frac), key=lambda k: frac[k])

    crossed_before = first_zero_crossing(taus[window], z[window]) is not None
    kind = "josephson" if crossed_before else "selftrapping"
    return RegimeCell(
        kappa=p.kappa, epsilon=p.epsilon, z0=float(z0), label=f"{stability}-{kind}",
        decay_time=decay, dominant_mode=dominant,
        onset_time=None if onset_idx is None else float(taus[onset_idx]),
        z_crossing_time=first_zero_crossing(taus, z),
        max_perturbed_fraction=float(pert.max()))


def simulate_regime(params, z0, sweep=None):
    """Run the perturbed full model for one cell; returns ``(cell, trajectory)``."""
    sweep = sweep or RegimeSweep(n_total=params.n_total, truncation=params.truncation)
    state = build_initial_state(params, sweep.n, z0, sweep.dphi0, sweep.amplitude(),
                                sweep.perturbation_span)
    traj = integrate(state, params, sweep.config())
    return classify_trajectory(traj, z0, sweep.n, sweep.threshold), traj


def classify_regime(params, z0, sweep=None):
    return simulate_regime(params, z0, sweep)[0]


def _cell(args):
    kappa, epsilon, z0, sweep = args
    try:
        params = SystemParams.from_epsilon(kappa, epsilon, sweep.n_total, sweep.truncation)
        return classify_regime(params, z0, sweep)
    except (ParameterError, ConstructionError, ConservationError, IntegrationError,
            SingularityError) as exc:
        return RegimeCell(float(kappa), float(epsilon), float(z0), "error",
                          error=f"{type(exc).__name__}: {exc}")


@dataclass(frozen=True)
class RegimeMap:
    kappa_axis: np.ndarray
    epsilon_axis: np.ndarray
    z0: float
    cells: list                   # cells[i][j] at (kappa_axis[i], epsilon_axis[j])

    def labels(self):
        return np.array([[c.label for c in row] for row in self.cells])

    def flat(self):
        return [c for row in self.cells for c in row]


def regime_map(kappa_axis, epsilon_axis, z0, sweep=None, jobs=1):
    """Classify every ``(kappa, eps)`` cell; output order never depends on ``jobs``."""
    kappa_axis = np.atleast_1d(np.asarray(kappa_axis, dtype=float))
    epsilon_axis = np.atleast_1d(np.asarray(epsilon_axis, dtype=float))
    if kappa_axis.size == 0 or epsilon_axis.size == 0:
        raise ParameterError("axes must be non-empty")
    if not 0 < z0 < 1:
        raise ParameterError(f"z0 must lie in (0, 1), got {z0}")
    sweep = sweep or RegimeSweep()
    tasks = [(float(k), float(e), float(z0), sweep) for k in kappa_axis for e in epsilon_axis]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            flat = list(pool.map(_cell, tasks))
    else:
        flat = [_cell(t) for t in tasks]
    ne = len(epsilon_axis)
    cells = [flat[i * ne:(i + 1) * ne] for i in range(len(kappa_axis))]
    return RegimeMap(kappa_axis, epsilon_axis, float(z0), cells)
