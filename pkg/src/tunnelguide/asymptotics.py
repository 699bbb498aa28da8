"""Leading-order resonance prediction and its convergence as barriers grow.

For long barriers the resonance born from the bound state ``lam_j`` sits at

    lam_j - k_minus * pi * mu * Psi^2 * (exp(-2 mu l_plus) + exp(-2 mu l_minus)),

with ``mu = sqrt(1 - lam_j)``, ``Psi`` the decay coefficient of the
normalized bound state and ``k_minus`` the junction reflection constant.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bound_states import BoundState, WindowGeometry, bound_states
from .errors import SolverError, StudyFailed
from .junction import JunctionSolution, solve_junction
from .resonance import BarrierGeometry, Resonance, find_resonance


@dataclass(frozen=True)
class AsymptoticPrediction:
    lambda_j: float
    leading: complex
    Lambda_hat: complex
    remainder_scale: float
    remainder_scale_display: float


def predict(lambda_j: float, psi: float, k_minus: complex, l_plus: float,
            l_minus: float) -> AsymptoticPrediction:
    """Leading-order resonance position.

    ``remainder_scale`` is ``sum l^2 exp(-3 mu l)`` over both barriers and
    ``remainder_scale_display`` the weaker ``sum l^2 exp(-2 mu l)``.
    """
    if psi == 0:
        raise ValueError("decay coefficient must be nonzero")
    if not complex(k_minus).imag > 0:
        raise ValueError("reflection constant must have positive imaginary part")
    mu = np.sqrt(1.0 - lambda_j)
    ls = np.array([l_plus, l_minus], dtype=float)
    leading = -complex(k_minus) * np.pi * mu * abs(psi) ** 2 * np.sum(np.exp(-2 * mu * ls))
    finite = ls[np.isfinite(ls)]  # an infinite barrier contributes nothing
    return AsymptoticPrediction(
        lambda_j=float(lambda_j),
        leading=complex(leading),
        Lambda_hat=complex(lambda_j + leading),
        remainder_scale=float(np.sum(finite**2 * np.exp(-3 * mu * finite))),
        remainder_scale_display=float(np.sum(finite**2 * np.exp(-2 * mu * finite))),
    )


@dataclass(frozen=True, eq=False)
class JunctionConstants:
    state: BoundState
    junction: JunctionSolution | None


def junction_constants(a: float, j: int = 1, n_modes: int = 32, tol: float = 1e-10,
                       projection: str = "mixed") -> JunctionConstants:
    """Bound state ``j`` of the window ``a`` and its junction solution (same truncation)."""
    states = bound_states(WindowGeometry(a), n_modes, tol, projection)
    if not 1 <= j <= len(states):
        raise ValueError(f"state j={j} does not exist; found {len(states)} bound state(s)")
    state = states[j - 1]
    try:
        sol = solve_junction(state.lambda_j, max(n_modes, 16), projection=projection)
    except SolverError:
        sol = None
    return JunctionConstants(state, sol)


def resonance_seed(consts: JunctionConstants, l_plus: float, l_minus: float) -> complex:
    """Asymptotic prediction, or ``lam_j - 1e-6 i`` without junction data."""
    if consts.junction is None or not consts.junction.k_minus.imag > 0:
        return complex(consts.state.lambda_j, -1e-6)
    return predict(consts.state.lambda_j, consts.state.psi_decay, consts.junction.k_minus,
                   l_plus, l_minus).Lambda_hat


def solve_resonance(consts: JunctionConstants, l_plus: float, l_minus: float,
                    n_modes: int = 32, tol: float = 1e-12) -> Resonance:
    geom = BarrierGeometry(consts.state.a, l_plus, l_minus)
    return find_resonance(geom, resonance_seed(consts, l_plus, l_minus), n_modes, tol,
                          j=consts.state.j, projection=consts.state.projection)


@dataclass
class StudyResult:
    a: float
    j: int
    lambda_j: float
    psi: float
    k_minus: complex
    rows: list = field(default_factory=list)
    slope: float = float("nan")
    reference_slope: float = float("nan")
    passed: bool = False
    message: str = ""


def _study_row(args):
    consts, l_plus, l_minus, n_modes, tol = args
    res = solve_resonance(consts, l_plus, l_minus, n_modes, tol)
    pred = predict(consts.state.lambda_j, consts.state.psi_decay, consts.junction.k_minus,
                   l_plus, l_minus)
    ratio = (res.Lambda - consts.state.lambda_j) / pred.leading
    return {
        "L": float(l_plus),
        "l_plus": float(l_plus),
        "l_minus": float(l_minus),
        "Lambda": res.Lambda,
        "Lambda_hat": pred.Lambda_hat,
        "ratio": complex(ratio),
        "ratio_error": float(abs(ratio - 1)),
        "shift": float(abs(res.Lambda - consts.state.lambda_j)),
        "remainder_scale": pred.remainder_scale,
        "remainder_scale_display": pred.remainder_scale_display,
        "residual": res.residual,
        "winding": res.winding,
        "iterations": res.iterations,
    }


def convergence_study(a: float, l_grid, j: int = 1, n_modes: int = 32,
                      tol_ratio: float = 0.1, asymmetry: float = 0.0, jobs: int = 1,
                      tol: float = 1e-12, raise_on_failure: bool = True) -> StudyResult:
    """Compare computed resonances with the prediction along a barrier-length grid.

    Barriers are ``l_plus = L`` and ``l_minus = L + asymmetry``.  The study
    passes when ``|ratio - 1|`` decreases strictly along the grid and is
    below ``tol_ratio`` at the largest ``L``, where
    ``ratio = (Lambda - lam_j) / leading``.  The least-squares slope of
    ``log |ratio - 1|`` against ``L`` is reported together with the
    reference slope ``-sqrt(1 - lam_j)``.

    Raises
    ------
    StudyFailed
        With the table attached, when the pass criterion fails.
    """
    l_grid = [float(x) for x in l_grid]
    if len(l_grid) < 4 or any(b <= a_ for a_, b in zip(l_grid, l_grid[1:])):
        raise ValueError("barrier grid must be increasing with at least 4 points")
    consts = junction_constants(a, j, n_modes)
    if consts.junction is None:
        raise StudyFailed("junction constants unavailable", table=[])
    tasks = [(consts, L, L + asymmetry, n_modes, tol) for L in l_grid]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_study_row, tasks))
    else:
        rows = [_study_row(t) for t in tasks]
    errors = np.array([r["ratio_error"] for r in rows])
    slope = float(np.polyfit(l_grid, np.log(errors), 1)[0]) if np.all(errors > 0) else float("-inf")
    result = StudyResult(
        a=a, j=j, lambda_j=consts.state.lambda_j, psi=consts.state.psi_decay,
        k_minus=consts.junction.k_minus, rows=rows, slope=slope,
        reference_slope=-float(np.sqrt(1.0 - consts.state.lambda_j)),
    )
    decreasing = bool(np.all(np.diff(errors) < 0))
    result.passed = decreasing and errors[-1] < tol_ratio
    if not result.passed:
        result.message = (f"|ratio-1| = {errors.tolist()}; decreasing={decreasing}, "
                          f"final below {tol_ratio}: {errors[-1] < tol_ratio}")
        if raise_on_failure:
            raise StudyFailed(result.message, table=rows)
    return result
