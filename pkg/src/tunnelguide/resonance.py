"""Complex resonances of the strip with finite Dirichlet barriers.

The lower wall is Neumann on ``|x1| < a``, Dirichlet on ``a < |x1| < l``
(the barriers) and Neumann again beyond.  A resonance is a complex ``lam``
with ``Im lam < 0`` at which a nontrivial purely outgoing solution exists,
i.e. a zero of the matching determinant of the five-slab stack.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MultipleRoots, NoConvergence, SingularToWorkingPrecision
from .slabs import (
    Slab,
    SlabStack,
    assemble,
    evaluate_field,
    null_vector,
    scaled_det,
    singular_values,
    stack_basis,
)
from .spectral import sqrt_branch

MAX_IM = 0.2


@dataclass(frozen=True)
class BarrierGeometry:
    """Window half-width ``a`` with barriers ending at ``x1 = l_plus`` and ``x1 = -l_minus``."""

    a: float
    l_plus: float
    l_minus: float

    def __post_init__(self):
        if not (np.isfinite(self.a) and self.a > 0):
            raise ValueError(f"window half-width a must be positive, got {self.a}")
        for name in ("l_plus", "l_minus"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > self.a):
                raise ValueError(f"{name} must exceed a={self.a}, got {value}")

    def swapped(self) -> "BarrierGeometry":
        return BarrierGeometry(self.a, self.l_minus, self.l_plus)


def resonance_stack(geom: BarrierGeometry, n_modes: int, incoming: bool = False,
                    projection: str = "mixed") -> SlabStack:
    end = "incoming" if incoming else "outgoing"
    return SlabStack(
        (
            Slab(-np.inf, -geom.l_minus, "neumann", end_condition=end),
            Slab(-geom.l_minus, -geom.a, "dirichlet"),
            Slab(-geom.a, geom.a, "neumann"),
            Slab(geom.a, geom.l_plus, "dirichlet"),
            Slab(geom.l_plus, np.inf, "neumann", end_condition=end),
        ),
        n_modes,
        projection,
    )


def _check_point(lam):
    lam = complex(lam)
    if not 0.25 < lam.real < 1.0:
        raise ValueError(f"Re lambda must lie in (1/4, 1), got {lam.real}")
    if not abs(lam.imag) < MAX_IM:
        raise ValueError(f"|Im lambda| must be below {MAX_IM}, got {lam.imag}")
    return lam


def resonance_det(geom: BarrierGeometry, lam, n_modes: int = 32, incoming: bool = False,
                  projection: str = "mixed"):
    """Scaled determinant of the five-slab stack at ``lam``."""
    return scaled_det(resonance_stack(geom, n_modes, incoming, projection), _check_point(lam))


def muller(func, x0, tol: float = 1e-12, maxiter: int = 100, step: float | None = None,
           inside=None):
    """Muller's method started from ``x0 - step, x0 + step, x0``.

    Returns ``(root, iterations)``; stops when the last step is below ``tol``.

    Raises
    ------
    NoConvergence
        After ``maxiter`` steps, or when an iterate fails ``inside``.
    """
    x0 = complex(x0)
    step = max(abs(x0) * 1e-4, 1e-6) if step is None else step
    xs = [x0 - step, x0 + step, x0]
    fs = [func(x) for x in xs]
    for it in range(1, maxiter + 1):
        if fs[2] == 0:
            return xs[2], it - 1
        h1, h2 = xs[1] - xs[0], xs[2] - xs[1]
        d1, d2 = (fs[1] - fs[0]) / h1, (fs[2] - fs[1]) / h2
        curv = (d2 - d1) / (h2 + h1)
        slope = curv * h2 + d2
        disc = np.sqrt(slope * slope - 4 * fs[2] * curv + 0j)
        denom = slope + disc if abs(slope + disc) >= abs(slope - disc) else slope - disc
        if denom == 0:
            raise NoConvergence("Muller step is undefined (flat interpolant)")
        dx = -2 * fs[2] / denom
        new = xs[2] + dx
        if inside is not None and not inside(new):
            raise NoConvergence(f"iterate {new} left the search window")
        xs = [xs[1], xs[2], new]
        fs = [fs[1], fs[2], func(new)]
        if abs(dx) < tol:
            return new, it
    raise NoConvergence(f"no convergence after {maxiter} iterations (last {xs[2]})")


def winding_number(phase_func, center, radius: float, n_points: int = 16,
                   max_points: int = 4096) -> int:
    """Winding number of ``phase_func`` around the circle ``|z - center| = radius``.

    Starts from ``n_points`` equally spaced nodes and bisects any arc whose
    phase increment exceeds ``pi/3`` so that the count is not aliased.
    """
    center = complex(center)
    angles = list(np.linspace(0.0, 2 * np.pi, n_points, endpoint=False))
    phases = [phase_func(center + radius * np.exp(1j * t)) for t in angles]
    while True:
        ring_angles = angles + [angles[0] + 2 * np.pi]
        ring = phases + [phases[0]]
        steps = np.angle(np.asarray(ring[1:]) / np.asarray(ring[:-1]))
        coarse = np.nonzero(np.abs(steps) > np.pi / 3)[0]
        if len(coarse) == 0 or len(angles) >= max_points:
            return int(round(steps.sum() / (2 * np.pi)))
        for k in coarse[::-1]:
            mid = 0.5 * (ring_angles[k] + ring_angles[k + 1])
            angles.insert(k + 1, mid)
            phases.insert(k + 1, phase_func(center + radius * np.exp(1j * mid)))


def root_count(geom: BarrierGeometry, center, radius: float, n_modes: int = 32,
               projection: str = "mixed") -> int:
    """Number of determinant zeros inside a disk (argument principle)."""
    stack = resonance_stack(geom, n_modes, projection=projection)
    return winding_number(lambda z: scaled_det(stack, z).phase, center, radius)


@dataclass(frozen=True)
class Resonance:
    j: int
    Lambda: complex
    residual: float
    C_plus: complex
    C_minus: complex
    iterations: int
    seed: complex
    winding: int
    geometry: BarrierGeometry
    n_modes: int
    projection: str = "mixed"


@dataclass(frozen=True, eq=False)
class ResonanceField:
    """Null vector of the matching matrix at a resonance.

    ``C_plus`` and ``C_minus`` are the outgoing amplitudes referred to
    ``x1 = 0``: the field is ``C_plus exp(i kappa x1) cos(x2/2)`` for large
    positive ``x1`` and ``C_minus exp(-i kappa x1) cos(x2/2)`` for large
    negative ``x1``.
    """

    stack: SlabStack
    Lambda: complex
    amplitudes: np.ndarray
    C_plus: complex
    C_minus: complex

    def evaluate(self, x1, x2) -> np.ndarray:
        return evaluate_field(self.stack, self.Lambda, self.amplitudes, x1, x2)


def resonance_field(geom: BarrierGeometry, Lambda, n_modes: int = 32,
                    projection: str = "mixed", threshold: float = 1e-8) -> ResonanceField:
    """Field and outgoing amplitudes at a converged resonance.

    Raises
    ------
    NotARoot
        If ``Lambda`` is not a zero of the determinant.
    """
    Lambda = complex(Lambda)
    stack = resonance_stack(geom, n_modes, projection=projection)
    amps = null_vector(assemble(stack, Lambda), threshold)
    bases = stack_basis(stack, Lambda)
    kappa = sqrt_branch(Lambda - 0.25)
    left, right = bases[0], bases[-1]
    c_minus = amps[left.offset + int(np.argmax(left.outgoing))] * np.exp(-1j * kappa * geom.l_minus)
    c_plus = amps[right.offset + int(np.argmax(right.outgoing))] * np.exp(-1j * kappa * geom.l_plus)
    return ResonanceField(stack, Lambda, amps, complex(c_plus), complex(c_minus))


def _in_window(lam) -> bool:
    return 0.25 < lam.real < 1.0 and -MAX_IM < lam.imag < MAX_IM


def find_resonance(geom: BarrierGeometry, seed, n_modes: int = 32, tol: float = 1e-12,
                   j: int = 1, maxiter: int = 100, projection: str = "mixed",
                   min_radius: float = 1e-9) -> Resonance:
    """Resonance nearest to ``seed`` by Muller's method on the scaled determinant.

    The determinant is scaled by its modulus at the seed to stay in
    floating range.  After convergence the root must make the matching
    matrix numerically singular, lie in the lower half-plane, and be the
    only zero inside the circle of radius ``max(5 |seed - root|, min_radius)``.

    Raises
    ------
    NoConvergence
        If the iteration fails, leaves the window or lands on a non-root.
    MultipleRoots
        If the winding count around the root differs from one.
    """
    seed = _check_point(seed)
    if tol < 1e-12:
        raise ValueError(f"tolerance must be at least 1e-12, got {tol}")
    stack = resonance_stack(geom, n_modes, projection=projection)
    offset = scaled_det(stack, seed).log_abs

    def det(lam):
        try:
            return scaled_det(stack, lam).value(offset)
        except SingularToWorkingPrecision:
            return 0.0

    root, iterations = muller(det, seed, tol, maxiter, inside=_in_window)
    if not root.imag < 0:
        raise NoConvergence(f"root {root} is not in the lower half-plane")
    s = singular_values(assemble(stack, root))
    residual = float(s[-1] / s[0])
    if not residual < 1e-9:
        raise NoConvergence(f"root {root} leaves relative singular value {residual:.2e}")
    radius = max(5 * abs(seed - root), min_radius)
    winding = winding_number(lambda z: scaled_det(stack, z).phase, root, radius)
    if winding != 1:
        raise MultipleRoots(f"{winding} roots counted within {radius:.3e} of {root}",
                            count=winding, center=root, radius=radius)
    field = resonance_field(geom, root, n_modes, projection)
    return Resonance(j=j, Lambda=complex(root), residual=residual, C_plus=field.C_plus,
                     C_minus=field.C_minus, iterations=iterations, seed=seed,
                     winding=winding, geometry=geom, n_modes=n_modes, projection=projection)
