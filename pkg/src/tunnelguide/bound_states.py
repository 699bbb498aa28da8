"""Bound states of the strip with a Neumann window ``|x1| < a`` on the lower wall.

Every eigenvalue lies in ``(1/4, 1)`` and the eigenfunctions are even or
odd in ``x1``, so each parity is computed on the half strip ``x1 > 0``: a
window slab ``(0, a)`` folded about ``x1 = 0`` followed by a semi-infinite
Dirichlet slab.  On real ``lam`` below the Dirichlet threshold the matching
matrix is real, so eigenvalues are sign changes of its determinant.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import NoEigenvalue
from .slabs import (
    Slab,
    SlabStack,
    assemble,
    evaluate_field,
    null_vector,
    scaled_det,
    singular_values,
    slab_mode_energy,
    stack_basis,
)

LOWER_EDGE = 0.25
UPPER_EDGE = 1.0


class Parity(str, enum.Enum):
    EVEN = "even"
    ODD = "odd"

    @property
    def sign(self) -> float:
        return 1.0 if self is Parity.EVEN else -1.0


@dataclass(frozen=True)
class WindowGeometry:
    """Window of half-width ``a`` centred at ``x1 = 0``."""

    a: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and self.a > 0):
            raise ValueError(f"window half-width a must be positive, got {self.a}")


@dataclass(frozen=True)
class Eigenvalue:
    j: int
    lam: float
    parity: Parity


@dataclass(frozen=True, eq=False)
class BoundState:
    """Normalized bound state (unit L2 norm on the whole strip).

    ``window_coeffs`` are the amplitudes of the folded Neumann-family
    profiles on ``(0, a)``; ``outer_coeffs[n-1]`` multiplies
    ``exp(-sqrt(n^2 - lam) (x1 - a)) sin(n x2)`` for ``x1 > a``.
    ``psi_decay`` is the same first coefficient referred to ``x1 = 0``.
    """

    j: int
    lambda_j: float
    parity: Parity
    a: float
    n_modes: int
    amplitudes: np.ndarray
    window_coeffs: np.ndarray
    outer_coeffs: np.ndarray
    psi_decay: float
    residual: float
    singular_gap: float
    projection: str = "mixed"
    norm: float = 1.0

    @property
    def stack(self) -> SlabStack:
        return half_stack(WindowGeometry(self.a), self.parity, self.n_modes, self.projection)

    def evaluate(self, x1, x2) -> np.ndarray:
        """Real eigenfunction at ``(x1, x2)`` on the whole strip."""
        x1 = np.atleast_1d(np.asarray(x1, dtype=float))
        x2 = np.broadcast_to(np.asarray(x2, dtype=float), x1.shape)
        values = evaluate_field(self.stack, self.lambda_j, self.amplitudes, np.abs(x1), x2)
        sign = np.where(x1 < 0, self.parity.sign, 1.0)
        return (sign * values).real


def half_stack(geom: WindowGeometry, parity, n_modes: int, projection: str = "mixed") -> SlabStack:
    parity = Parity(parity)
    return SlabStack(
        (
            Slab(0.0, geom.a, "neumann", mirror=parity.value),
            Slab(geom.a, np.inf, "dirichlet", end_condition="decay"),
        ),
        n_modes,
        projection,
    )


def _real_det(stack, lam, offset=0.0):
    d = scaled_det(stack, lam)
    return d.phase.real * np.exp(d.log_abs - offset), d.log_abs


def find_eigenvalues(geom: WindowGeometry, n_modes: int = 40, tol: float = 1e-10,
                     step: float = 1e-3, delta: float = 1e-6,
                     projection: str = "mixed") -> list:
    """Eigenvalues in ``(1/4, 1)`` of both parities, ascending.

    Real ``lam`` is scanned on a grid of spacing ``step`` over
    ``(1/4 + delta, 1 - delta)``; each sign change of the real determinant
    is refined with a bracketing solver to absolute width ``tol``.

    Raises
    ------
    NoEigenvalue
        If neither parity shows a sign change.
    """
    if n_modes < 8:
        raise ValueError(f"truncation must be at least 8, got {n_modes}")
    if not 0 < tol < 1e-4:
        raise ValueError(f"tolerance must lie in (0, 1e-4), got {tol}")
    grid = np.arange(LOWER_EDGE + delta, UPPER_EDGE - delta, step)
    grid = np.append(grid, UPPER_EDGE - delta)
    found = []
    for parity in Parity:
        stack = half_stack(geom, parity, n_modes, projection)
        signs = np.array([np.sign(scaled_det(stack, lam).phase.real) for lam in grid])
        for k in np.nonzero(signs[:-1] * signs[1:] < 0)[0]:
            lo, hi = grid[k], grid[k + 1]
            offset = _real_det(stack, lo)[1]
            root = brentq(lambda lam: _real_det(stack, lam, offset)[0], lo, hi,
                          xtol=tol, rtol=4 * np.finfo(float).eps)
            found.append((root, parity))
    if not found:
        raise NoEigenvalue(f"no eigenvalue found in (1/4, 1) for a={geom.a}")
    found.sort(key=lambda item: item[0])
    return [Eigenvalue(j + 1, float(lam), parity) for j, (lam, parity) in enumerate(found)]


def _half_norm_sq(stack, lam, amplitudes) -> float:
    total = 0.0
    for basis in stack_basis(stack, lam):
        amp = amplitudes[basis.offset:basis.offset + basis.size]
        total += slab_mode_energy(basis, amp).sum()
    return total * np.pi / 2


def eigenfunction(geom: WindowGeometry, lam: float, parity, n_modes: int = 40,
                  j: int = 1, projection: str = "mixed") -> BoundState:
    """Normalized eigenfunction at an eigenvalue from :func:`find_eigenvalues`.

    Raises
    ------
    NotARoot
        If ``lam`` is not a root of the matching determinant.
    """
    parity = Parity(parity)
    stack = half_stack(geom, parity, n_modes, projection)
    matrix = assemble(stack, lam)
    amps = null_vector(matrix)
    s = singular_values(matrix)
    amps = amps / np.sqrt(2.0 * _half_norm_sq(stack, lam, amps))
    window, outer = stack_basis(stack, lam)
    outer_amps = amps[outer.offset:outer.offset + outer.size]
    psi = outer_amps[0] * np.exp(np.sqrt(1.0 - lam) * geom.a)
    rotation = np.conj(psi) / abs(psi)
    amps = amps * rotation
    return BoundState(
        j=j,
        lambda_j=float(lam),
        parity=parity,
        a=geom.a,
        n_modes=n_modes,
        amplitudes=amps,
        window_coeffs=amps[window.offset:window.offset + window.size],
        outer_coeffs=amps[outer.offset:outer.offset + outer.size],
        psi_decay=float(abs(psi)),
        residual=float(s[-1] / s[0]),
        singular_gap=float(s[-2] / s[0]),
        projection=projection,
    )


def bound_states(geom: WindowGeometry, n_modes: int = 40, tol: float = 1e-10,
                 projection: str = "mixed") -> list:
    """All bound states, normalized, ascending in eigenvalue."""
    return [eigenfunction(geom, e.lam, e.parity, n_modes, e.j, projection)
            for e in find_eigenvalues(geom, n_modes, tol, projection=projection)]


def coefficient_bound_sides(state: BoundState, n_terms: int | None = None):
    """Both sides of the trace bound for the outer coefficients.

    Returns ``(sum_n n |A_n|^2, ||psi||^2_{H^1}(window part))`` where
    ``A_n`` are the outer coefficients at the window edge and the norm is
    taken over ``|x1| < a``.  ``n_terms`` keeps only ``n <= n_terms``.
    """
    coeffs = state.outer_coeffs if n_terms is None else state.outer_coeffs[:n_terms]
    n = np.arange(1, len(coeffs) + 1)
    lhs = float(np.sum(n * np.abs(coeffs) ** 2))
    stack = state.stack
    window = stack_basis(stack, state.lambda_j)[0]
    amp = state.amplitudes[window.offset:window.offset + window.size]
    t = window.family.eigenvalues(state.n_modes)
    values = slab_mode_energy(window, amp)
    slopes = slab_mode_energy(window, amp, derivative=True)
    half = np.sum((1.0 + t[:len(values)]) * values + slopes) * np.pi / 2
    return lhs, float(2.0 * half)


def coefficient_bound_check(state: BoundState, constant: float = 10.0,
                            n_terms: int | None = None) -> bool:
    """Whether ``sum_n n |A_n|^2 <= constant * ||psi||^2`` (H1 norm on the window)."""
    lhs, rhs = coefficient_bound_sides(state, n_terms)
    return lhs <= constant * rhs
