import math

import numpy as np
import pytest

from ringoam.bogoliubov import (bdg_matrix, bdg_spectrum, excitation_branch,
                                instability_interval, stability_map)
from ringoam.errors import ParameterError


def test_branch_unstable_example():
    r = excitation_branch(1, 1.0, 1.0)
    assert r.omega_squared == -1.0
    assert not r.stable
    assert r.growth_rate == 1.0
    assert r.omega == 1j


@pytest.mark.parametrize("kappa", [0.0, 0.3, 0.5, 1.0, 2.7])
def test_branch_noninteracting_is_stable(kappa):
    r = excitation_branch(1, kappa, 0.0)
    assert r.stable
    assert r.omega.real == pytest.approx(abs(1 - 2 * kappa), abs=1e-15)
    assert r.growth_rate == 0.0


def test_branch_marginal_counts_as_stable():
    r = excitation_branch(1, 0.5, 1.0)
    assert r.omega_squared == 0.0
    assert r.stable and r.growth_rate == 0.0


@pytest.mark.parametrize("args", [(0, 1.0, 1.0), (1, -0.1, 1.0), (1, 1.0, -1.0), (1.5, 1.0, 1.0)])
def test_branch_rejects_bad_input(args):
    with pytest.raises(ParameterError):
        excitation_branch(*args)


def test_interval_examples():
    assert tuple(instability_interval(1, 1.0)) == (0.5, 1.5)
    assert tuple(instability_interval(2, 1.0)) == (2.0, 3.0)
    iv = instability_interval(1, 0.0)
    assert tuple(iv) == (0.5, 0.5) and iv.empty
    assert 1.0 in instability_interval(1, 1.0)
    assert 1.7 not in instability_interval(1, 1.0)


@pytest.mark.parametrize("m", [1, -1, 2, 3])
@pytest.mark.parametrize("eps", [0.25, 1.0, 2.5])
def test_interval_endpoints_bracket_sign_change(m, eps):
    lo, hi = instability_interval(m, eps)
    d = 1e-9
    assert excitation_branch(m, lo - d, eps).omega_squared > 0
    assert excitation_branch(m, lo + d, eps).omega_squared < 0
    assert excitation_branch(m, hi - d, eps).omega_squared < 0
    assert excitation_branch(m, hi + d, eps).omega_squared > 0
    assert excitation_branch(m, lo, eps).omega_squared == 0
    assert excitation_branch(m, hi, eps).omega_squared == 0


def test_spectrum_unstable_example():
    w = bdg_spectrum(1, 1.0, 1.0)
    assert np.max(np.abs(w.imag)) == pytest.approx(1.0, abs=1e-12)
    # complex-conjugate pair present
    im = sorted(w.imag)
    assert im[0] == pytest.approx(-im[-1], abs=1e-12)


def test_spectrum_outside_interval_is_real():
    assert np.max(np.abs(bdg_spectrum(1, 2.0, 1.0).imag)) < 1e-12


def _closed_form_in_spectrum(m, kappa, eps):
    w2 = excitation_branch(m, kappa, eps).omega_squared
    target = math.sqrt(w2) if w2 >= 0 else 1j * math.sqrt(-w2)
    w = bdg_spectrum(m, kappa, eps)
    return min(np.min(np.abs(w - target)), np.min(np.abs(w + target)))


def test_numerical_spectrum_contains_closed_form_on_grid():
    ks = np.linspace(0, 3, 20)
    es = np.linspace(0, 3, 20)
    worst = max(_closed_form_in_spectrum(m, k, e) for m in (1, 2) for k in ks for e in es)
    assert worst <= 1e-10


def test_symmetric_state_spectrum_is_real_on_grid():
    ks = np.linspace(0, 3, 20)
    es = np.linspace(0, 3, 20)
    worst = max(np.max(np.abs(bdg_spectrum(m, k, e, "symmetric").imag))
                for m in (1, 2, 3) for k in ks for e in es)
    assert worst < 1e-10


def test_bdg_matrix_shape_and_parity():
    A = bdg_matrix(1, 1.0, 1.0)
    assert A.shape == (4, 4)
    with pytest.raises(ParameterError):
        bdg_matrix(1, 1.0, 1.0, "odd")


def test_instability_widens_with_interaction():
    # once unstable at eps0, stays unstable for larger eps while kappa is in the interval
    rng = np.random.default_rng(7)
    for _ in range(200):
        m = int(rng.integers(1, 4))
        eps0 = rng.uniform(0.05, 3)
        lo, hi = instability_interval(m, eps0)
        k = rng.uniform(lo, hi)
        for eps in np.linspace(eps0, eps0 + 3, 13)[1:]:
            assert not excitation_branch(m, k, eps).stable


def test_map_marked_points():
    smap = stability_map([0.3, 0.6, 1.0, 1.7], [1.0], [1, 2, 3])
    assert [smap.cell(i, 0) for i in range(4)] == [frozenset(), {1}, {1}, frozenset()]


def test_map_matches_branch_verdicts_at_marked_points():
    verdicts = [not excitation_branch(m, k, 1.0).stable
                for k in (0.3, 0.6, 1.0, 1.7) for m in (1, -1)]
    assert verdicts == [False, False, True, True, True, True, False, False]


def test_map_single_cell_picks_second_mode():
    smap = stability_map([2.5], [1.0], [1, 2])
    assert smap.cell(0, 0) == {2}


def test_map_zero_interaction_row_is_empty():
    smap = stability_map(np.linspace(0, 3, 31), [0.0], [1, 2, 3])
    assert all(not smap.cell(i, 0) for i in range(31))


def test_map_is_symmetric_in_mode_sign():
    ks, es = np.linspace(0, 3, 25), np.linspace(0, 3, 25)
    a = stability_map(ks, es, [1, 2, 3])
    b = stability_map(ks, es, [-1, -2, -3])
    assert np.array_equal(a.omega_squared, b.omega_squared)
    assert a.cells() == b.cells()


def test_map_cells_only_contain_requested_modes():
    smap = stability_map(np.linspace(0, 6, 13), np.linspace(0, 3, 7), [2, 3])
    for row in smap.cells():
        for c in row:
            assert c <= {2, 3}


def test_map_rows_are_kappa_major():
    smap = stability_map([0.1, 0.2], [1.0, 2.0, 3.0], [1])
    keys = [(k, e) for k, e, _ in smap.rows()]
    assert keys == [(0.1, 1.0), (0.1, 2.0), (0.1, 3.0), (0.2, 1.0), (0.2, 2.0), (0.2, 3.0)]


@pytest.mark.parametrize("args", [([], [1.0], [1]), ([1.0], [1.0], [0]), ([-1.0], [1.0], [1]),
                                  ([1.0], [1.0], [])])
def test_map_rejects_bad_input(args):
    with pytest.raises(ParameterError):
        stability_map(*args)
