import math

import numpy as np
import pytest

from ringoam.bogoliubov import excitation_branch, instability_interval
from ringoam.errors import ParameterError
from ringoam.model import SystemParams
from ringoam.two_state import (FAMILIES, TwoStatePoint, critical_points, families_present,
                               family_windows, hamiltonian, hamiltonian_values,
                               integrate_two_state, jacobian, jacobian_eigenvalues,
                               max_transfer, phase_portrait, two_state_rhs, zero_level_curve)

N = 4000.0


def params(kappa, eps=1.0):
    return SystemParams.from_epsilon(kappa, eps, N, 15)


def test_rhs_boundaries_are_invariant():
    p = params(1.0)
    for z in np.linspace(0, 2 * math.pi, 17):
        assert two_state_rhs(TwoStatePoint(0.0, z), p, 1)[0] == 0
        assert two_state_rhs(TwoStatePoint(N / 4, z), p, 1)[0] == 0


def test_rhs_center_example():
    dx, dz = two_state_rhs(TwoStatePoint(N / 14, math.pi), params(1.0), 1)
    assert abs(dx) < 1e-12 and abs(dz) < 1e-12


def test_rhs_rejects_out_of_range_point():
    with pytest.raises(ParameterError):
        two_state_rhs(TwoStatePoint(N / 4 + 1, 0.0), params(1.0), 1)
    with pytest.raises(ParameterError):
        two_state_rhs(TwoStatePoint(-1.0, 0.0), params(1.0), 1)


def test_hamiltonian_examples():
    p = params(1.0)
    assert hamiltonian(TwoStatePoint(N / 4, math.pi / 2), p, 1) == pytest.approx(750.0, rel=1e-14)
    for z in (0.0, 1.0, 2.5):
        assert hamiltonian(TwoStatePoint(0.0, z), p, 1) == 0.0


@pytest.mark.parametrize("kappa,m", [(1.0, 1), (0.3, 1), (0.6, 1), (2.4, 2)])
def test_hamiltonian_generates_the_flow(kappa, m):
    p = params(kappa)
    rng = np.random.default_rng(11)
    for _ in range(25):
        x = rng.uniform(0.05, 0.95) * N / 4
        z = rng.uniform(0, 2 * math.pi)
        hx, hz = 1e-6 * x, 1e-6
        dHdx = (hamiltonian(TwoStatePoint(x + hx, z), p, m)
                - hamiltonian(TwoStatePoint(x - hx, z), p, m)) / (2 * hx)
        dHdz = (hamiltonian(TwoStatePoint(x, z + hz), p, m)
                - hamiltonian(TwoStatePoint(x, z - hz), p, m)) / (2 * hz)
        dx, dz = two_state_rhs(TwoStatePoint(x, z), p, m)
        # errors are measured against the size of the individual terms
        assert abs(dHdx - dz) <= 1e-6 * max(abs(dz), 1.0)
        assert abs(-dHdz - dx) <= 1e-6 * max(abs(dx), p.gamma * N * x)


@pytest.mark.parametrize("kappa,expected", [
    (0.3, {"saddle-at-quarter", "center-at-pi-multiples"}),
    (0.6, set(FAMILIES)),
    (1.0, {"saddle-at-zero", "center-at-pi-multiples"}),
    (1.7, set()),
])
def test_family_sets(kappa, expected):
    assert set(families_present(params(kappa), 1)) == expected


def test_critical_point_locations_at_kappa_06():
    cps = critical_points(params(0.6), 1)
    by = {f: [c for c in cps if c.family == f] for f in FAMILIES}
    for c in by["saddle-at-zero"]:
        assert c.location.x == 0
        assert math.cos(2 * c.location.zeta) == pytest.approx(-0.8, abs=1e-12)
    assert len(by["saddle-at-zero"]) == 4
    for c in by["saddle-at-quarter"]:
        assert c.location.x == N / 4
        assert math.cos(2 * c.location.zeta) == pytest.approx(-0.7, abs=1e-12)
    assert len(by["saddle-at-quarter"]) == 4
    assert sorted(c.location.zeta for c in by["center-at-pi-multiples"]) == [0.0, math.pi]
    for c in by["center-at-pi-multiples"]:
        assert c.location.x == pytest.approx(1.8 * N / 14, rel=1e-14)
    assert sorted(c.location.zeta for c in by["center-at-half-pi-odd"]) == [
        math.pi / 2, 3 * math.pi / 2]
    for c in by["center-at-half-pi-odd"]:
        assert c.location.x == pytest.approx(0.1 * N, rel=1e-14)


def test_no_critical_points_in_stable_region():
    assert critical_points(params(1.7), 1) == []


def test_critical_points_need_interaction():
    with pytest.raises(ParameterError):
        critical_points(SystemParams(1.0, 0.0, N, 15), 1)
    with pytest.raises(ParameterError):
        critical_points(params(1.0), 0)


@pytest.mark.parametrize("kappa", [0.3, 0.6, 1.0, 0.55, 1.2])
def test_critical_points_zero_the_flow_and_classify(kappa):
    p = params(kappa)
    for c in critical_points(p, 1):
        dx, dz = two_state_rhs(c.location, p, 1)
        assert abs(dx) <= 1e-12 * p.gamma * N * N and abs(dz) <= 1e-12 * max(1, p.gamma * N)
        lam = c.jacobian_eigenvalues[0]
        assert c.jacobian_eigenvalues[1] == -lam
        if c.classification == "saddle":
            assert lam.imag == 0 and lam.real != 0
        elif c.classification == "center":
            assert lam.real == 0 and lam.imag != 0
        if c.classification != "degenerate":
            assert c.classification == c.family.split("-")[0]


def _radicand(point, p):
    g, x = p.gamma, point.x
    z = point.zeta % math.pi
    if x == 0 or x == N / 4:
        return (g * N * math.sin(2 * point.zeta)) ** 2
    if z == 0:
        return 28 * g * g * x * (2 * x - N / 2)
    assert z == pytest.approx(math.pi / 2)
    return 4 * g * g * x * (2 * x - N / 2)


@pytest.mark.parametrize("kappa", [0.3, 0.6, 1.0])
def test_eigenvalues_match_closed_forms(kappa):
    p = params(kappa)
    for c in critical_points(p, 1):
        lam2 = (c.jacobian_eigenvalues[0] ** 2).real
        assert lam2 == pytest.approx(_radicand(c.location, p), rel=1e-10, abs=1e-14)


def test_saddle_at_zero_eigenvalues():
    p = params(1.0)
    for c in critical_points(p, 1):
        if c.family == "saddle-at-zero":
            lam = c.jacobian_eigenvalues[0]
            assert abs(lam.real) == pytest.approx(p.gamma * N * abs(math.sin(2 * c.location.zeta)))


def test_double_zero_eigenvalue_at_origin():
    lam, mlam = jacobian_eigenvalues(TwoStatePoint(0.0, 0.0), params(1.0))
    assert lam == 0 and mlam == 0


def test_jacobian_is_traceless():
    p = params(0.8)
    rng = np.random.default_rng(3)
    for _ in range(20):
        J = jacobian(TwoStatePoint(rng.uniform(0, N / 4), rng.uniform(0, 7)), p)
        assert abs(np.trace(J)) <= 1e-12 * np.abs(J).max()


@pytest.mark.parametrize("m", [1, 2])
def test_family_windows_toggle(m):
    p_eps = 0.5
    windows = family_windows(params(0.0, p_eps), m)
    edges = sorted({b for w in windows.values() for b in w if b > 0})
    d = 1e-7
    for b in edges:
        below = set(families_present(params(b - d, p_eps), m))
        above = set(families_present(params(b + d, p_eps), m))
        owners = {f for f, w in windows.items() if b in w}
        assert below ^ above == owners, b


def test_saddle_at_zero_window_is_the_instability_interval():
    for m in (1, 2, 3):
        for eps in (0.3, 1.0, 2.0):
            assert family_windows(params(0.0, eps), m)["saddle-at-zero"] == tuple(
                instability_interval(m, eps))
    # grid chosen to avoid landing on the edges
    for k in np.linspace(0.013, 2.013, 41):
        has = "saddle-at-zero" in families_present(params(k), 1)
        assert has == (k in instability_interval(1, 1.0))
        assert has == (not excitation_branch(1, k, 1.0).stable)


def test_max_transfer_examples():
    assert max_transfer(params(1.0), 1) == pytest.approx(1 / 7, rel=1e-15)
    assert max_transfer(params(0.5), 1) == 0.0
    assert max_transfer(params(0.5625), 1) == pytest.approx(0.125, rel=1e-15)


def test_max_transfer_peaks_where_branches_meet():
    ks = np.linspace(0.5, 1.5, 4001)
    vals = np.array([max_transfer(params(k), 1) for k in ks])
    i = int(np.argmax(vals))
    assert ks[i] == pytest.approx(0.625, abs=1e-3)
    assert vals[i] == pytest.approx(0.25, rel=1e-3)
    assert np.all(np.abs(np.diff(vals)) < 1e-3)     # continuous


@pytest.mark.parametrize("kappa", [0.3, 1.7])
def test_max_transfer_outside_interval(kappa):
    with pytest.raises(ParameterError):
        max_transfer(params(kappa), 1)


def test_zero_level_curve_reaches_one_seventh_at_zeta_zero():
    p = params(1.0)
    zeta = np.linspace(0, 2 * math.pi, 721)
    x = zero_level_curve(p, 1, zeta)
    i = int(np.nanargmax(x))
    assert x[i] / N == pytest.approx(1 / 7, rel=1e-12)
    assert math.sin(zeta[i]) == pytest.approx(0.0, abs=1e-12)
    assert np.isnan(zero_level_curve(p, 1, math.pi / 2))


def test_portrait_zero_level_reach():
    p = params(1.0)
    pp = phase_portrait(p, 1, np.linspace(0, N / 4, 401), np.linspace(0, 2 * math.pi, 361))
    x, z = pp.zero_level_max()
    assert x / N == pytest.approx(1 / 7, rel=1e-3)
    assert math.sin(z) == pytest.approx(0.0, abs=1e-9)
    assert pp.H.shape == (361, 401)
    assert {c.family for c in pp.critical_points} == {"saddle-at-zero", "center-at-pi-multiples"}


def test_portrait_stable_side_has_no_open_orbit():
    p = params(0.3)
    pp = phase_portrait(p, 1, np.linspace(0, N / 4, 401), np.linspace(0, 2 * math.pi, 361))
    assert pp.zero_level_max() == (0.0, None)
    assert np.all(np.isnan(zero_level_curve(p, 1, pp.zeta_axis)))


def test_portrait_is_pi_periodic_in_zeta():
    p = params(0.6)
    x = np.linspace(0, N / 4, 51)
    zeta = np.linspace(0, math.pi, 37)
    pa = phase_portrait(p, 1, x, zeta)
    pb = phase_portrait(p, 1, x, zeta + math.pi)
    scale = np.abs(pa.H).max()
    assert np.max(np.abs(pa.H - pb.H)) <= 1e-13 * scale


def test_portrait_rejects_bad_axes():
    with pytest.raises(ParameterError):
        phase_portrait(params(1.0), 1, np.linspace(0, N, 5), np.linspace(0, 1, 5))
    with pytest.raises(ParameterError):
        phase_portrait(params(1.0), 1, [], [0.0])


def test_seeded_trajectory_grows_peaks_and_repeats():
    p = params(1.0)
    traj = integrate_two_state(TwoStatePoint(N * 1e-8, 0.0), p, 1, 40.0)
    sel = (traj.taus >= 2) & (traj.taus <= 4)
    rate = np.polyfit(traj.taus[sel], np.log(traj.x[sel]), 1)[0]
    assert rate == pytest.approx(2.0, rel=0.02)
    d = np.diff(traj.x)
    peaks = np.nonzero((d[:-1] > 0) & (d[1:] <= 0))[0] + 1
    assert len(peaks) >= 2
    for i in peaks:
        assert 0.98 / 7 <= traj.x[i] / N < 1 / 7
    # it comes back down to the seed level between peaks
    assert traj.x[peaks[0]:peaks[1]].min() < 1e-6 * N
    assert traj.h_drift < 1e-8


def test_center_is_a_fixed_point_of_the_integrator():
    p = params(1.0)
    C = N / 14
    traj = integrate_two_state(TwoStatePoint(C, 0.0), p, 1, 100.0)
    assert np.max(np.abs(traj.x - C)) / N <= 1e-10
    assert np.max(np.abs(traj.zeta)) <= 1e-10


@pytest.mark.parametrize("kappa", [0.3, 0.6, 1.0])
def test_orbits_around_centers_stay_close(kappa):
    p = params(kappa)
    delta = 1e-4 * N
    for c in critical_points(p, 1):
        if c.classification != "center":
            continue
        x0 = c.location.x + (delta if c.location.x + delta <= N / 4 else -delta)
        traj = integrate_two_state(TwoStatePoint(x0, c.location.zeta), p, 1, 100.0)
        assert np.max(np.abs(traj.x - c.location.x)) <= 10 * delta


def test_departure_from_saddle_along_unstable_direction():
    p = params(1.0)
    for c in critical_points(p, 1):
        if c.family != "saddle-at-zero":
            continue
        J = jacobian(c.location, p)
        w, v = np.linalg.eig(J)
        k = int(np.argmax(w.real))
        vec = np.real(v[:, k])
        if vec[0] < 0:
            vec = -vec
        seed = 1e-6
        start = TwoStatePoint(c.location.x + seed * vec[0] * N, c.location.zeta + seed * vec[1])
        traj = integrate_two_state(start, p, 1, 6.0, stride=0.01)
        dist = np.hypot((traj.x - c.location.x) / N, traj.zeta - c.location.zeta)
        stop = np.argmax(dist > 1e3 * seed)
        assert stop > 0
        assert np.all(np.diff(dist[:stop + 1]) > 0)


def test_stable_side_seed_stays_near_zero():
    p = params(0.3)
    x0 = N * 1e-8
    traj = integrate_two_state(TwoStatePoint(x0, 0.0), p, 1, 100.0)
    # the level set through the seed reaches 2.4 x0 / (1.4 + cos 2zeta) at most, i.e. 6 x0
    assert traj.x.max() / x0 == pytest.approx(6.0, rel=1e-5)
    assert traj.x.max() < 1e-6 * N


def test_two_state_rejects_bad_run():
    with pytest.raises(ParameterError):
        integrate_two_state(TwoStatePoint(1.0, 0.0), params(1.0), 1, 0.0)


def test_vectorised_hamiltonian_matches_scalar():
    p = params(0.6)
    xs = np.linspace(0, N / 4, 7)
    zs = np.linspace(0, 3, 5)
    H = hamiltonian_values(xs[None, :], zs[:, None], p, 1)
    for i, z in enumerate(zs):
        for j, x in enumerate(xs):
            assert H[i, j] == pytest.approx(hamiltonian(TwoStatePoint(x, z), p, 1), abs=1e-12)
