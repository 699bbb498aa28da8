"""Branch-fixed square roots, transverse mode bases and their overlaps.

The strip is ``0 < x2 < pi`` with a Dirichlet upper wall.  Two transverse
families occur, depending on the lower boundary condition:

* ``DD`` (Dirichlet below): ``sin(n x2)``, eigenvalue ``n**2``;
* ``ND`` (Neumann below): ``cos((m - 1/2) x2)``, eigenvalue ``(m - 1/2)**2``.

Both families are orthonormal under the inner product ``(2/pi) * int_0^pi``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import BranchCutHit

CUT_TOLERANCE = 1e-12


def sqrt_branch(z):
    """Principal square root, refusing arguments on the negative real axis.

    Parameters
    ----------
    z : complex or array_like
        Argument(s).  ``0`` is accepted and maps to ``0`` (threshold value).

    Returns
    -------
    complex or ndarray of complex
        Root with non-negative real part; ``sqrt_branch(1) == 1``.

    Raises
    ------
    BranchCutHit
        If ``Re z < 0`` and ``|Im z| <= 1e-12``.
    """
    arr = np.asarray(z, dtype=complex)
    hit = (arr.real < 0) & (np.abs(arr.imag) <= CUT_TOLERANCE)
    if np.any(hit):
        bad = arr[hit].ravel()[0] if arr.ndim else arr
        raise BranchCutHit(f"square-root argument {complex(bad)} lies on the branch cut")
    root = np.sqrt(arr)
    return complex(root) if root.ndim == 0 else root


class Family(str, enum.Enum):
    DD = "DD"
    ND = "ND"

    def eigenvalues(self, n_modes):
        k = np.arange(1, n_modes + 1, dtype=float)
        return k**2 if self is Family.DD else (k - 0.5) ** 2

    def basis(self, x2, n_modes):
        """Basis functions evaluated at ``x2``; shape ``x2.shape + (n_modes,)``."""
        x2 = np.asarray(x2, dtype=float)[..., None]
        k = np.arange(1, n_modes + 1, dtype=float)
        if self is Family.DD:
            return np.sin(k * x2)
        return np.cos((k - 0.5) * x2)


@dataclass(frozen=True)
class ModeIndex:
    family: Family
    index: int

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if int(self.index) != self.index or self.index < 1:
            raise ValueError(f"mode index must be a positive integer, got {self.index}")

    @property
    def transverse_eigenvalue(self) -> float:
        if self.family is Family.DD:
            return float(self.index) ** 2
        return (self.index - 0.5) ** 2


def longitudinal_exponent(mode: ModeIndex, lam) -> complex:
    """``sqrt_branch(t - lam)`` for the transverse eigenvalue ``t`` of ``mode``."""
    return sqrt_branch(mode.transverse_eigenvalue - complex(lam))


def overlap(n: int, m: int) -> float:
    """Weighted overlap ``(2/pi) int_0^pi sin(n x) cos((m - 1/2) x) dx``."""
    if n < 1 or m < 1:
        raise ValueError("mode indices start at 1")
    return (2.0 / np.pi) * n / (n * n - (m - 0.5) ** 2)


@lru_cache(maxsize=32)
def _overlap_matrix(n_modes: int) -> np.ndarray:
    n = np.arange(1, n_modes + 1, dtype=float)[:, None]
    m = np.arange(1, n_modes + 1, dtype=float)[None, :] - 0.5
    out = (2.0 / np.pi) * n / (n**2 - m**2)
    out.setflags(write=False)
    return out


def overlap_matrix(n_modes: int, n_cols: int | None = None) -> np.ndarray:
    """Matrix ``C[n-1, m-1] = overlap(n, m)`` (rows DD, columns ND)."""
    if n_cols is None or n_cols == n_modes:
        return _overlap_matrix(n_modes)
    n = np.arange(1, n_modes + 1, dtype=float)[:, None]
    m = np.arange(1, n_cols + 1, dtype=float)[None, :] - 0.5
    return (2.0 / np.pi) * n / (n**2 - m**2)


@dataclass(frozen=True)
class ModeSystem:
    """Truncated pair of transverse bases with ``n_modes`` functions each."""

    n_modes: int

    def __post_init__(self):
        if self.n_modes < 1:
            raise ValueError("truncation must be positive")

    def eigenvalues(self, family) -> np.ndarray:
        return Family(family).eigenvalues(self.n_modes)

    def basis(self, family, x2) -> np.ndarray:
        return Family(family).basis(x2, self.n_modes)

    @property
    def overlap(self) -> np.ndarray:
        return overlap_matrix(self.n_modes)

    def project(self, test, family) -> np.ndarray:
        """Matrix taking ``family`` coefficients to weighted projections on ``test``."""
        test, family = Family(test), Family(family)
        if test is family:
            return np.eye(self.n_modes)
        if test is Family.DD:
            return self.overlap
        return self.overlap.T
