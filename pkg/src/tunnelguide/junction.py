"""Half-line Dirichlet/Neumann junction driven by the growing first mode.

For ``x1 < 0`` the lower wall is Dirichlet and the field is

    exp(-mu1 x1) sin x2 + k_minus exp(mu1 x1) sin x2 + (decaying modes),

for ``x1 > 0`` the lower wall is Neumann and the field is

    k_plus exp(i kappa x1) cos(x2 / 2) + (decaying modes),

with ``mu1 = sqrt(1 - lam)`` and ``kappa = sqrt(lam - 1/4)``.  Near the
switch point the field behaves like ``beta r^(1/2) cos(theta / 2)`` with
``theta`` measured from the Neumann side.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
import scipy.linalg as sla

from .errors import FitUnstable, SingularSystem
from .slabs import Slab, SlabStack, assemble, evaluate_field, forcing_vector, stack_basis

DEFAULT_RADII = (0.05, 0.1, 0.2, 0.3)
DEFAULT_ANGLES = (np.pi / 4, np.pi / 2, 3 * np.pi / 4)


@dataclass(frozen=True, eq=False)
class JunctionSolution:
    lambda0: float
    k_minus: complex
    k_plus: complex
    left_coeffs: np.ndarray
    right_coeffs: np.ndarray
    n_modes: int
    drive: complex = 1.0
    incoming: bool = False
    projection: str = "mixed"
    beta: complex | None = None

    @property
    def stack(self) -> SlabStack:
        return junction_stack(self.n_modes, self.incoming, self.projection)


def junction_stack(n_modes: int, incoming: bool = False, projection: str = "mixed") -> SlabStack:
    end = "incoming" if incoming else "outgoing"
    return SlabStack(
        (Slab(-np.inf, 0.0, "dirichlet"), Slab(0.0, np.inf, "neumann", end_condition=end)),
        n_modes,
        projection,
    )


def _growing_terms(lam, drive):
    return ((complex(drive), -np.sqrt(1.0 - lam), 0.0),)


def solve_junction(lambda0: float, n_modes: int = 64, drive: complex = 1.0,
                   incoming: bool = False, projection: str = "mixed") -> JunctionSolution:
    """Solve the driven junction problem at real ``lambda0`` in ``(1/4, 1)``.

    ``incoming`` replaces the radiation condition by its complex conjugate.

    Raises
    ------
    SingularSystem
        If the truncated system is singular to working precision.
    """
    lambda0 = float(lambda0)
    if not 0.25 < lambda0 < 1.0:
        raise ValueError(f"lambda0 must lie in (1/4, 1), got {lambda0}")
    if n_modes < 16:
        raise ValueError(f"junction truncation must be at least 16, got {n_modes}")
    stack = junction_stack(n_modes, incoming, projection)
    matrix = assemble(stack, lambda0)
    rhs = -forcing_vector(stack, lambda0, 0, 1, _growing_terms(lambda0, drive))
    try:
        lu = sla.lu_factor(matrix)
    except (sla.LinAlgError, ValueError) as exc:
        raise SingularSystem(str(exc)) from exc
    if np.min(np.abs(np.diag(lu[0]))) < 1e-14 * np.max(np.abs(lu[0])):
        raise SingularSystem("junction system is singular to working precision")
    amps = sla.lu_solve(lu, rhs)
    left, right = stack_basis(stack, lambda0)
    left_amps = amps[left.offset:left.offset + left.size]
    right_amps = amps[right.offset:right.offset + right.size]
    return JunctionSolution(
        lambda0=lambda0,
        k_minus=complex(left_amps[0]),
        k_plus=complex(right_amps[0]),
        left_coeffs=left_amps,
        right_coeffs=right_amps,
        n_modes=n_modes,
        drive=drive,
        incoming=incoming,
        projection=projection,
    )


def junction_field(sol: JunctionSolution, x1, x2) -> np.ndarray:
    """Full field, including the driving term, at ``(x1, x2)``."""
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    x2 = np.broadcast_to(np.asarray(x2, dtype=float), x1.shape)
    amps = np.concatenate([sol.left_coeffs, sol.right_coeffs])
    response = evaluate_field(sol.stack, sol.lambda0, amps, x1, x2)
    weight = np.where(x1 < 0, 1.0, np.where(x1 == 0, 0.5, 0.0))
    growing = sol.drive * np.exp(-np.sqrt(1.0 - sol.lambda0) * np.minimum(x1, 0.0)) * np.sin(x2)
    return response + weight * growing


def beta_intercepts(sol: JunctionSolution, radii=DEFAULT_RADII, angles=DEFAULT_ANGLES) -> np.ndarray:
    """Per-angle intercepts of ``V / (r^(1/2) cos(theta/2))`` fitted as ``beta + b r``."""
    radii = np.asarray(radii, dtype=float)
    if len(radii) < 4 or np.any(radii <= 0) or np.any(radii >= 0.5):
        raise ValueError("need at least 4 radii inside (0, 0.5)")
    out = []
    for theta in angles:
        x1 = radii * np.cos(theta)
        x1[np.abs(x1) < 1e-14] = 0.0
        x2 = radii * np.sin(theta)
        ratio = junction_field(sol, x1, x2) / (np.sqrt(radii) * np.cos(theta / 2))
        design = np.column_stack([np.ones_like(radii), radii])
        coef, *_ = np.linalg.lstsq(design, ratio, rcond=None)
        out.append(coef[0])
    return np.asarray(out)


def extract_beta(sol: JunctionSolution, radii=DEFAULT_RADII, angles=DEFAULT_ANGLES,
                 spread_tol: float = 0.05) -> complex:
    """Corner coefficient, averaged over the fitting angles.

    Raises
    ------
    FitUnstable
        If two intercepts differ by more than ``spread_tol`` relative to the mean.
    """
    values = beta_intercepts(sol, radii, angles)
    mean = values.mean()
    spread = np.max(np.abs(values[:, None] - values[None, :])) / abs(mean)
    if spread > spread_tol:
        raise FitUnstable(f"corner intercepts spread {spread:.3%} exceeds {spread_tol:.0%}: {values}")
    return complex(mean)


def _rel(value, reference):
    return float(abs(value - reference) / abs(reference))


@dataclass(frozen=True)
class IdentityReport:
    """Relative errors of the junction identities.

    The first five are the relations checked for acceptance:

    * ``balance``: ``Re k- = |k+|^2 (lam - 1/4) / (2 (1 - lam)) - |beta|^2 / (8 (lam - 1))``
    * ``reflection_real``: ``Re k- = (Re beta)^2 / (8 (1 - lam))``
    * ``reflection_imag``: ``Im k- = (Im beta)^2 / (8 sqrt((lam - 1/4)(1 - lam)))``
    * ``flux``: ``Im k- = |k+|^2 sqrt((lam - 1/4) / (1 - lam)) / 2``
    * ``transmission``: ``|k+|^2 = (Im beta)^2 / (4 (lam - 1/4))``

    The ``momentum_*`` entries are the relations that follow from the
    longitudinal momentum balance of the junction field:

    * ``momentum_real``: ``Re k- = ((Re beta)^2 - (Im beta)^2) / (8 (1 - lam))``
    * ``momentum_imag``: ``Im k- = (Im beta)^2 / (4 sqrt((lam - 1/4)(1 - lam)))``
    * ``momentum_transmission``: ``|k+|^2 = (Im beta)^2 / (2 (lam - 1/4))``
    * ``momentum_balance``: ``Re k- = |beta|^2 / (8 (1 - lam)) - |k+|^2 (lam - 1/4) / (2 (1 - lam))``
    """

    balance: float
    reflection_real: float
    reflection_imag: float
    flux: float
    transmission: float
    momentum_real: float
    momentum_imag: float
    momentum_transmission: float
    momentum_balance: float

    CHECKED = ("balance", "reflection_real", "reflection_imag", "flux", "transmission")

    def as_dict(self) -> dict:
        return asdict(self)


def verify_identities(sol: JunctionSolution, beta: complex) -> IdentityReport:
    lam = sol.lambda0
    km, kp2 = sol.k_minus, abs(sol.k_plus) ** 2
    b = complex(beta)
    above, below = lam - 0.25, 1.0 - lam
    return IdentityReport(
        balance=_rel(0.5 * kp2 * above / below - abs(b) ** 2 / (8 * (lam - 1.0)), km.real),
        reflection_real=_rel(b.real**2 / (8 * below), km.real),
        reflection_imag=_rel(b.imag**2 / (8 * np.sqrt(above * below)), km.imag),
        flux=_rel(0.5 * kp2 * np.sqrt(above / below), km.imag),
        transmission=_rel(b.imag**2 / (4 * above), kp2),
        momentum_real=_rel((b.real**2 - b.imag**2) / (8 * below), km.real),
        momentum_imag=_rel(b.imag**2 / (4 * np.sqrt(above * below)), km.imag),
        momentum_transmission=_rel(b.imag**2 / (2 * above), kp2),
        momentum_balance=_rel(abs(b) ** 2 / (8 * below) - 0.5 * kp2 * above / below, km.real),
    )
