from functools import lru_cache

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tunnelguide.asymptotics import (
    convergence_study,
    junction_constants,
    predict,
    resonance_seed,
)
from tunnelguide.errors import StudyFailed

N = 24
GRID = (6.0, 8.0, 10.0, 12.0)


@lru_cache(maxsize=None)
def _study(asymmetry=0.0, jobs=1):
    return convergence_study(1.0, GRID, j=1, n_modes=N, asymmetry=asymmetry, jobs=jobs)


def test_predict_symmetric_doubling():
    lam, psi, k = 0.86, 0.49, -0.41 + 0.52j
    mu = np.sqrt(1 - lam)
    p = predict(lam, psi, k, 10.0, 10.0)
    expected = -2 * k * np.pi * mu * psi**2 * np.exp(-2 * mu * 10.0)
    assert p.leading == pytest.approx(expected, rel=1e-14)
    assert p.Lambda_hat == pytest.approx(lam + expected, rel=1e-14)


def test_predict_one_side_infinite_halves():
    lam, psi, k = 0.86, 0.49, -0.41 + 0.52j
    sym = predict(lam, psi, k, 10.0, 10.0).leading
    one = predict(lam, psi, k, np.inf, 10.0).leading
    assert one == pytest.approx(sym / 2, rel=1e-14)


def test_predict_remainder_scales():
    lam = 0.75
    mu = np.sqrt(1 - lam)
    p = predict(lam, 1.0, 1j, 8.0, 12.0)
    ls = np.array([8.0, 12.0])
    assert p.remainder_scale == pytest.approx(np.sum(ls**2 * np.exp(-3 * mu * ls)))
    assert p.remainder_scale_display == pytest.approx(np.sum(ls**2 * np.exp(-2 * mu * ls)))


def test_predict_validation():
    with pytest.raises(ValueError):
        predict(0.8, 0.0, 0.1j, 8.0, 8.0)
    with pytest.raises(ValueError):
        predict(0.8, 0.5, 0.1 - 0.1j, 8.0, 8.0)


lams = st.floats(0.26, 0.99)
psis = st.floats(1e-3, 10.0)
kms = st.builds(complex, st.floats(-5, 5), st.floats(1e-6, 5))
lengths = st.floats(1.0, 40.0)


@settings(max_examples=100)
@given(lams, psis, kms, lengths, lengths)
def test_predict_invariants(lam, psi, k, lp, lm):
    p = predict(lam, psi, k, lp, lm)
    assert p.Lambda_hat.imag < 0
    q = predict(lam, -psi, k, lp, lm)
    assert q.Lambda_hat == p.Lambda_hat
    assert predict(lam, psi, k, lm, lp).leading == pytest.approx(p.leading, rel=1e-14)


def test_seed_falls_back_without_junction():
    consts = junction_constants(1.0, 1, 16)
    object.__setattr__(consts, "junction", None)
    assert resonance_seed(consts, 8.0, 8.0) == complex(consts.state.lambda_j, -1e-6)


def test_missing_state_rejected():
    with pytest.raises(ValueError):
        junction_constants(1.0, 2, 16)


def test_study_passes():
    study = _study()
    errors = [r["ratio_error"] for r in study.rows]
    assert study.passed
    assert np.all(np.diff(errors) < 0)
    assert errors[-1] < 0.1
    assert study.slope <= 0.8 * study.reference_slope
    assert all(r["Lambda"].imag < 0 for r in study.rows)
    assert [r["L"] for r in study.rows] == list(GRID)


def test_study_parallel_rows_identical():
    assert _study(jobs=2).rows == _study().rows


def test_study_failure_carries_table():
    with pytest.raises(StudyFailed) as info:
        convergence_study(1.0, GRID, j=1, n_modes=N, tol_ratio=1e-9)
    assert len(info.value.table) == len(GRID)


def test_study_grid_validation():
    with pytest.raises(ValueError):
        convergence_study(1.0, (6.0, 8.0, 10.0), n_modes=N)
    with pytest.raises(ValueError):
        convergence_study(1.0, (6.0, 10.0, 8.0, 12.0), n_modes=N)


def test_asymmetric_error_is_reported():
    sym = {r["L"]: r for r in _study().rows}
    asym = {r["L"]: r for r in _study(asymmetry=2.0).rows}
    # (10, 12) against (10, 10): reported, with the smaller leading term
    assert np.isfinite(asym[10.0]["ratio_error"]) and np.isfinite(sym[10.0]["ratio_error"])
    lam_j = _study().lambda_j
    assert abs(asym[10.0]["Lambda_hat"] - lam_j) < abs(sym[10.0]["Lambda_hat"] - lam_j)


def test_real_shift_direction():
    study = _study()
    assert abs(study.k_minus.real) > 1e-6
    for row in study.rows[-2:]:
        shift = row["Lambda"].real - study.lambda_j
        leading = row["Lambda_hat"] - study.lambda_j
        assert np.sign(shift) == np.sign(leading.real)
