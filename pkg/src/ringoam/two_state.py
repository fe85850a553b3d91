"""Reduced model: main mode 0 plus one symmetric pair of perturbations +-m.

Variables are ``x = |alpha_m|^2`` (per ring and per sign, so ``0 <= x <= N/4``)
and the relative phase ``zeta``.  Equations::

    dx/dtau    = 2 gamma x (2x - N/2) sin 2zeta
    dzeta/dtau = 2kappa - m^2 + gamma (3x - N/2) + gamma (4x - N/2) cos 2zeta

with Hamiltonian ``H = x [2kappa - m^2 - eps + 1.5 gamma x + gamma (2x - N/2) cos 2zeta]``
(``dx/dtau = -dH/dzeta``, ``dzeta/dtau = dH/dx``).
"""
from dataclasses import dataclass
import math

import numpy as np
from ._dop853 import sample
from .errors import ConservationError, ParameterError

FAMILIES = ("saddle-at-zero", "saddle-at-quarter",
            "center-at-pi-multiples", "center-at-half-pi-odd")
_FAMILY_KIND = {"saddle-at-zero": "saddle", "saddle-at-quarter": "saddle",
                "center-at-pi-multiples": "center", "center-at-half-pi-odd": "center"}


@dataclass(frozen=True)
class TwoStatePoint:
    x: float
    zeta: float


def _check_point(point, params, slack=1e-9):
    hi = params.n_total / 4.0
    if not (math.isfinite(point.x) and math.isfinite(point.zeta)):
        raise ParameterError("point coordinates must be finite")
    if point.x < -slack * hi or point.x > hi * (1 + slack):
        raise ParameterError(f"x must lie in [0, N/4] = [0, {hi}], got {point.x}")


def _check_mode(m):
    if int(m) != m or m == 0:
        raise ParameterError(f"perturbation mode must be a nonzero integer, got {m!r}")


def _rhs(x, zeta, kappa, gamma, N, m):
    s2, c2 = math.sin(2 * zeta), math.cos(2 * zeta)
    dx = 2 * gamma * x * (2 * x - N / 2) * s2
    dz = 2 * kappa - m * m + gamma * (3 * x - N / 2) + gamma * (4 * x - N / 2) * c2
    return dx, dz


def two_state_rhs(point, params, m):
    """Return ``(dx/dtau, dzeta/dtau)`` at ``point``."""
    _check_point(point, params)
    return _rhs(point.x, point.zeta, params.kappa, params.gamma, params.n_total, m)


def hamiltonian_values(x, zeta, params, m):
    """Vectorised H over broadcastable arrays ``x`` and ``zeta``."""
    g, N = params.gamma, params.n_total
    x = np.asarray(x, dtype=float)
    return x * (2 * params.kappa - m * m - g * N / 2 + 1.5 * g * x
                + g * (2 * x - N / 2) * np.cos(2 * np.asarray(zeta, dtype=float)))


def hamiltonian(point, params, m):
    _check_point(point, params)
    return float(hamiltonian_values(point.x, point.zeta, params, m))


def _h_scale(x, params, m):
    # magnitude of the individual terms in H; H itself is ~0 on seed orbits
    g, N = params.gamma, params.n_total
    x = np.asarray(x, dtype=float)
    return x * (abs(2 * params.kappa - m * m - params.epsilon) + 1.5 * g * x
                + g * np.abs(2 * x - N / 2))


def jacobian(point, params):
    """2x2 Jacobian of ``(dx, dzeta)`` with respect to ``(x, zeta)``.  Independent of m."""
    g, N = params.gamma, params.n_total
    x = point.x
    s2, c2 = math.sin(2 * point.zeta), math.cos(2 * point.zeta)
    return np.array([
        [g * (8 * x - N) * s2, 4 * g * x * (2 * x - N / 2) * c2],
        [3 * g + 4 * g * c2, -2 * g * (4 * x - N / 2) * s2],
    ])


def jacobian_eigenvalues(point, params):
    """The pair ``(+lam, -lam)``; the Jacobian is traceless so ``lam^2 = -det J``."""
    _check_point(point, params)
    J = jacobian(point, params)
    lam2 = -(J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0])
    lam = complex(math.sqrt(lam2)) if lam2 >= 0 else complex(0.0, math.sqrt(-lam2))
    return lam, -lam


def classify_eigenvalues(eigs, scale, rtol=1e-12):
    """``"saddle"``, ``"center"`` or ``"degenerate"`` (both eigenvalues ~0)."""
    lam2 = (eigs[0] ** 2).real
    if abs(lam2) <= rtol * scale ** 2:
        return "degenerate"
    return "saddle" if lam2 > 0 else "center"


@dataclass(frozen=True)
class CriticalPoint:
    location: TwoStatePoint
    family: str
    classification: str
    jacobian_eigenvalues: tuple
    marginal: bool = False

    def as_dict(self, n_total):
        return {
            "family": self.family,
            "zeta": self.location.zeta,
            "x_over_N": self.location.x / n_total,
            "classification": self.classification,
            "eigenvalues": [[e.real, e.imag] for e in self.jacobian_eigenvalues],
            "marginal": self.marginal,
        }


def _cos2_roots(c):
    """All zeta in [0, 2pi) with cos 2zeta = c, for |c| <= 1."""
    th = math.acos(max(-1.0, min(1.0, c)))
    cand = [th / 2, math.pi - th / 2, math.pi + th / 2, 2 * math.pi - th / 2]
    out = []
    for z in cand:
        z = z % (2 * math.pi)
        if not any(abs(z - o) < 1e-12 or abs(abs(z - o) - 2 * math.pi) < 1e-12 for o in out):
            out.append(z)
    return sorted(out)


def _in_window(val, lo, hi, tol):
    inside = lo - tol <= val <= hi + tol
    return inside, inside and (abs(val - lo) <= tol or abs(val - hi) <= tol)


def family_windows(params, m):
    """Existence windows in kappa for each family: ``{family: (lo, hi)}``."""
    m2, e = float(m * m), params.epsilon
    return {
        "saddle-at-zero": (m2 / 2, (m2 + 2 * e) / 2),
        "saddle-at-quarter": ((m2 - 1.5 * e) / 2, (m2 + e / 2) / 2),
        "center-at-pi-multiples": ((m2 - 1.5 * e) / 2, (m2 + 2 * e) / 2),
        "center-at-half-pi-odd": (m2 / 2, (m2 + e / 2) / 2),
    }


def critical_points(params, m, window_tol=1e-12, check_tol=1e-12):
    """Enumerate the fixed points with zeta in one period ``[0, 2pi)``."""
    _check_mode(m)
    e, N, k, g = params.epsilon, params.n_total, params.kappa, params.gamma
    if e == 0:
        raise ParameterError("critical points are undefined for epsilon = 0")
    m2 = float(m * m)
    windows = family_windows(params, m)
    tol = window_tol * max(1.0, abs(k), m2, e)
    candidates = []
    for fam in FAMILIES:
        present, marginal = _in_window(k, *windows[fam], tol)
        if not present:
            continue
        if fam == "saddle-at-zero":
            A = (2 * k - m2 - e) / e
            pts = [(0.0, z) for z in _cos2_roots(A)]
        elif fam == "saddle-at-quarter":
            B = (m2 - 2 * k - e / 2) / e
            pts = [(N / 4, z) for z in _cos2_roots(B)]
        elif fam == "center-at-pi-multiples":
            C = min(max((m2 - 2 * k + 2 * e) * N / (14 * e), 0.0), N / 4)
            pts = [(C, 0.0), (C, math.pi)]
        else:
            D = min(max((2 * k - m2) * N / (2 * e), 0.0), N / 4)
            pts = [(D, math.pi / 2), (D, 3 * math.pi / 2)]
        for x, z in pts:
            candidates.append((fam, marginal, TwoStatePoint(x, z)))

    scale = g * N
    out = []
    for fam, marginal, p in candidates:
        dx, dz = _rhs(p.x, p.zeta, k, g, N, m)
        resid_scale = max(1.0, scale, abs(2 * k - m2))
        if abs(dx) > check_tol * resid_scale or abs(dz) > check_tol * resid_scale:
            raise ArithmeticError(f"{fam} point {p} fails the fixed-point check ({dx}, {dz})")
        eigs = jacobian_eigenvalues(p, params)
        kind = classify_eigenvalues(eigs, scale)
        if kind != "degenerate" and kind != _FAMILY_KIND[fam]:
            raise ArithmeticError(f"{fam} point {p} classified as {kind}")
        out.append(CriticalPoint(p, fam, kind, eigs, marginal or kind == "degenerate"))
    return out


def families_present(params, m):
    return sorted({cp.family for cp in critical_points(params, m)}, key=FAMILIES.index)


def max_transfer(params, m):
    """Upper bound on ``x_max / N`` reached from the unperturbed state (the H = 0 orbit)."""
    _check_mode(m)
    e, k, m2 = params.epsilon, params.kappa, float(m * m)
    if e <= 0:
        raise ParameterError("transfer bound requires epsilon > 0")
    lo, mid, hi = m2 / 2, (m2 + e / 4) / 2, (m2 + 2 * e) / 2
    if not lo <= k <= hi:
        raise ParameterError(
            f"kappa={k} outside the instability interval [{lo}, {hi}]; bound undefined")
    if k <= mid:
        return (2 * k - m2) / e
    return (2.0 / 7.0) * (m2 - 2 * k + 2 * e) / (2 * e)


def zero_level_curve(params, m, zeta):
    """x on the nontrivial branch of H = 0 at each zeta (NaN where outside [0, N/4])."""
    e, N, k = params.epsilon, params.n_total, params.kappa
    c = np.cos(2 * np.asarray(zeta, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        x = N * (m * m - 2 * k + e * (1 + c)) / (2 * e * (1.5 + 2 * c))
    x = np.where((x >= 0) & (x <= N / 4) & np.isfinite(x), x, np.nan)
    return x


@dataclass(frozen=True)
class PhasePortrait:
    x_axis: np.ndarray
    zeta_axis: np.ndarray
    H: np.ndarray                 # (len(zeta_axis), len(x_axis))
    critical_points: list

    def zero_level_max(self):
        """Largest x/N at which H changes sign along some zeta row, with that zeta.

        Grid estimate of the H = 0 orbit's reach; the x = 0 line is excluded.
        """
        best, best_z = 0.0, None
        for i, z in enumerate(self.zeta_axis):
            row = self.H[i]
            for j in range(1, len(row)):
                if self.x_axis[j - 1] <= 0:
                    continue
                a, b = row[j - 1], row[j]
                if a == 0 or a * b < 0:
                    x0 = self.x_axis[j - 1] if a == 0 else self.x_axis[j - 1] + (
                        self.x_axis[j] - self.x_axis[j - 1]) * a / (a - b)
                    if x0 > best:
                        best, best_z = x0, z
        return best, best_z


def phase_portrait(params, m, x_axis, zeta_axis):
    """H sampled on the ``zeta x x`` grid, plus the critical points for overlay."""
    _check_mode(m)
    x_axis = np.asarray(x_axis, dtype=float)
    zeta_axis = np.asarray(zeta_axis, dtype=float)
    if x_axis.ndim != 1 or zeta_axis.ndim != 1 or x_axis.size == 0 or zeta_axis.size == 0:
        raise ParameterError("axes must be non-empty 1-D arrays")
    hi = params.n_total / 4.0
    if x_axis.min() < 0 or x_axis.max() > hi * (1 + 1e-12):
        raise ParameterError(f"x axis must lie in [0, N/4] = [0, {hi}]")
    H = hamiltonian_values(x_axis[None, :], zeta_axis[:, None], params, m)
    cps = critical_points(params, m) if params.epsilon > 0 else []
    return PhasePortrait(x_axis, zeta_axis, H, cps)


@dataclass(frozen=True)
class TwoStateTrajectory:
    taus: np.ndarray
    x: np.ndarray
    zeta: np.ndarray
    H: np.ndarray
    h_drift: float                # max |H - H0| / term scale

    def peak(self):
        i = int(np.argmax(self.x))
        return float(self.taus[i]), float(self.x[i])

    def first_peak(self):
        """First local maximum of x (tau, x); falls back to the global one."""
        d = np.diff(self.x)
        idx = np.nonzero((d[:-1] > 0) & (d[1:] <= 0))[0]
        if len(idx) == 0:
            return self.peak()
        i = int(idx[0]) + 1
        return float(self.taus[i]), float(self.x[i])


def integrate_two_state(initial, params, m, t_end, stride=0.01, rtol=1e-12, atol=None,
                        guard=1e-6):
    """Integrate the reduced model with the 8th-order Dormand-Prince scheme.

    Raises ConservationError if H drifts more than ``guard`` relative to the
    size of its terms.
    """
    _check_mode(m)
    _check_point(initial, params)
    if not (t_end > 0 and stride > 0):
        raise ParameterError("t_end and stride must be > 0")
    k, g, N = params.kappa, params.gamma, params.n_total
    if atol is None:
        atol = 1e-14 * N

    def f(_, y):
        return list(_rhs(y[0], y[1], k, g, N, m))

    n = int(math.ceil(t_end / stride - 1e-9))
    t_eval = np.minimum(np.arange(n + 1) * stride, t_end)
    # zeta keeps a purely absolute tolerance (it grows on running orbits)
    t, y, _ = sample(f, [initial.x, initial.zeta], t_eval, [rtol, 0.0],
                     [atol, 1e-12])
    x, z = y[:, 0], y[:, 1]
    H = hamiltonian_values(x, z, params, m)
    scale = max(float(np.max(_h_scale(x, params, m))), 1e-300)
    drift = float(np.max(np.abs(H - H[0]))) / scale
    traj = TwoStateTrajectory(t, x, z, H, drift)
    if drift > guard:
        err = ConservationError(f"two-state H drift {drift:.3g} exceeds {guard:g}")
        err.trajectory = traj
        raise err
    return traj
