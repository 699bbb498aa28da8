from functools import lru_cache

import numpy as np
import pytest

from tunnelguide.asymptotics import junction_constants, solve_resonance
from tunnelguide.errors import MultipleRoots, NoConvergence
from tunnelguide.resonance import (
    BarrierGeometry,
    find_resonance,
    muller,
    resonance_det,
    resonance_field,
    root_count,
    winding_number,
)

N = 24


@lru_cache(maxsize=None)
def _consts(a, j, n_modes=N):
    return junction_constants(a, j, n_modes)


@lru_cache(maxsize=None)
def _res(a, j, l_plus, l_minus, n_modes=N):
    return solve_resonance(_consts(a, j, n_modes), l_plus, l_minus, n_modes)


def test_geometry_validation():
    with pytest.raises(ValueError):
        BarrierGeometry(2.0, 1.5, 8.0)
    with pytest.raises(ValueError):
        BarrierGeometry(0.0, 5.0, 5.0)
    assert BarrierGeometry(1.0, 8.0, 12.0).swapped() == BarrierGeometry(1.0, 12.0, 8.0)


def test_det_window_validation():
    geom = BarrierGeometry(1.0, 8.0, 8.0)
    with pytest.raises(ValueError):
        resonance_det(geom, 1.2, N)
    with pytest.raises(ValueError):
        resonance_det(geom, 0.8 - 0.3j, N)


def test_conjugation_with_incoming_variant():
    geom = BarrierGeometry(1.0, 8.0, 9.0)
    lam = 0.8 - 0.01j
    out = resonance_det(geom, lam, N)
    inc = resonance_det(geom, np.conj(lam), N, incoming=True)
    assert out.log_abs == pytest.approx(inc.log_abs, rel=1e-12)
    assert out.phase == pytest.approx(np.conj(inc.phase), abs=1e-9)


def test_swap_leaves_log_abs_unchanged():
    geom = BarrierGeometry(1.0, 8.0, 12.0)
    for lam in (0.5, 0.8 - 0.01j, 0.95 - 0.1j):
        assert resonance_det(geom, lam, N).log_abs == pytest.approx(
            resonance_det(geom.swapped(), lam, N).log_abs, rel=1e-12)


def test_near_root_dip():
    lam_j = _consts(1.0, 1).state.lambda_j
    geom = BarrierGeometry(1.0, 8.0, 8.0)
    grid = lam_j + np.linspace(-0.03, 0.03, 13)
    values = [resonance_det(geom, x, N).log_abs for x in grid]
    k = int(np.argmin(values))
    assert abs(grid[k] - lam_j) < 0.006
    assert values[k] < min(values[0], values[-1]) - 1.0


def test_example_l10():
    res = _res(1.0, 1, 10.0, 10.0)
    assert res.Lambda.imag < 0
    assert 0.25 < res.Lambda.real < 1
    assert res.residual < 1e-9
    assert res.winding == 1


def test_swap_symmetry():
    a = _res(1.0, 1, 8.0, 12.0).Lambda
    b = _res(1.0, 1, 12.0, 8.0).Lambda
    assert abs(a - b) <= 1e-10


def test_monotone_approach():
    lam_j = _consts(1.0, 1).state.lambda_j
    shifts = [abs(_res(1.0, 1, L, L).Lambda - lam_j) for L in (6.0, 8.0, 10.0, 12.0)]
    assert np.all(np.diff(shifts) < 0)


def test_even_state_amplitudes_equal():
    res = _res(1.0, 1, 10.0, 10.0)
    assert abs(res.C_plus - res.C_minus) <= 1e-8 * abs(res.C_plus)
    assert abs(res.C_plus) > 0


def test_odd_state_amplitudes_opposite():
    res = _res(4.0, 2, 10.0, 10.0)
    assert abs(res.C_plus + res.C_minus) <= 1e-8 * abs(res.C_plus)
    assert abs(res.C_plus) > 0


def test_field_is_outgoing():
    res = _res(1.0, 1, 10.0, 10.0)
    field = resonance_field(res.geometry, res.Lambda, N)
    kappa = np.sqrt(res.Lambda - 0.25)
    x1 = np.array([40.0, -40.0])
    values = field.evaluate(x1, np.zeros(2))
    expected = [field.C_plus * np.exp(1j * kappa * 40.0), field.C_minus * np.exp(1j * kappa * 40.0)]
    np.testing.assert_allclose(values, expected, rtol=1e-8)


@pytest.mark.parametrize("L", [6.0, 8.0])
def test_one_root_per_disk(L):
    lam_j = _consts(1.0, 1).state.lambda_j
    radius = 0.5 * min(lam_j - 0.25, 1 - lam_j)
    assert root_count(BarrierGeometry(1.0, L, L), lam_j, radius, N) == 1


def test_two_state_window_disks():
    lams = [_consts(4.0, 1).state.lambda_j, _consts(4.0, 2).state.lambda_j]
    radius = 0.5 * min(lams[1] - lams[0], lams[0] - 0.25, 1 - lams[1])
    geom = BarrierGeometry(4.0, 10.0, 10.0)
    assert [root_count(geom, lam, radius, N) for lam in lams] == [1, 1]


def test_multiple_roots_reported():
    lams = [_consts(4.0, 1).state.lambda_j, _consts(4.0, 2).state.lambda_j]
    seed = 0.5 * (lams[0] + lams[1]) - 1e-4j
    geom = BarrierGeometry(4.0, 10.0, 10.0)
    # a seed far from both roots gives a winding circle that encloses both of them
    with pytest.raises((MultipleRoots, NoConvergence)):
        find_resonance(geom, seed, N, min_radius=0.3)


def test_muller_on_polynomial():
    root, it = muller(lambda z: (z - (0.7 - 0.2j)) * (z + 3), 0.5)
    assert root == pytest.approx(0.7 - 0.2j, abs=1e-12)
    assert it < 20


def test_muller_reports_failure():
    with pytest.raises(NoConvergence):
        muller(lambda z: np.exp(z), 0.5, maxiter=5)


@pytest.mark.parametrize("center, radius, expected", [(0.0, 1.0, 3), (0.0, 0.3, 1), (2.0, 0.5, 0)])
def test_winding_on_known_function(center, radius, expected):
    def phase(z):
        v = z * (z - 0.5) * (z + 0.5j)
        return v / abs(v)

    assert winding_number(phase, center, radius) == expected


def test_winding_refines_fast_phase():
    def phase(z):
        v = z**12
        return v / abs(v)

    assert winding_number(phase, 0.0, 1.0) == 12


@pytest.mark.slow
def test_truncation_cauchy():
    coarse = _res(1.0, 1, 8.0, 8.0, 32).Lambda
    fine = _res(1.0, 1, 8.0, 8.0, 64).Lambda
    assert abs(coarse - fine) <= 1e-7, f"|Lambda(32) - Lambda(64)| = {abs(coarse - fine):.2e}"
