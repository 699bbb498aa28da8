"""Finite-difference eigenvalues of the window problem, used as an independent check.

The strip is cut at ``|x1| = L`` with a Dirichlet wall, discretized with the
5-point Laplacian and split by parity, so only ``0 <= x1 < L`` is stored.
Neumann rows (the window and the symmetry line of even states) use a
reflected ghost node.  Multiplying those rows by 1/2 makes the matrix
symmetric, giving a generalized symmetric problem ``K u = lam W u``.

Eigenvalues near ``sigma`` are found by shift-invert Lanczos.  The shifted
operator is solved exactly and cheaply: outside the window the lower wall
is Dirichlet everywhere, so that block is diagonal in a 2-D sine basis.
Eliminating it leaves a dense block on the last window column, and the
window block with that correction is factored with a sparse LU.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .bound_states import Parity
from .errors import GridTooCoarse

MAX_H = 0.05
MIN_WALL_GAP = 8.0
CUTOFF = 1.0 - 1e-3


@dataclass(frozen=True)
class FdGrid:
    """Mesh ``h`` along the strip and Dirichlet wall at ``|x1| = L``.

    The cross-section uses ``n_cross`` intervals of width ``pi / n_cross``,
    the smallest FFT-friendly count with spacing at most ``h``.
    """

    h: float
    L: float

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError(f"mesh size must be positive, got {self.h}")
        if self.h > MAX_H:
            raise GridTooCoarse(f"mesh size {self.h} exceeds {MAX_H}")
        if not self.L > 0:
            raise ValueError(f"wall position must be positive, got {self.L}")

    @property
    def n_cross(self) -> int:
        return sfft.next_fast_len(int(np.ceil(np.pi / self.h - 1e-9)), real=True)

    @property
    def h_cross(self) -> float:
        return np.pi / self.n_cross


def _tridiag(n, reflect_first):
    main = np.full(n, 2.0)
    off = np.full(max(n - 1, 0), -1.0)
    upper = off.copy()
    if reflect_first and n > 1:
        upper[0] = -2.0
    return sp.diags([off, main, upper], [-1, 0, 1], shape=(n, n), format="csr")


def _dst(x, axes=None):
    return sfft.dstn(x, type=1, norm="ortho", axes=axes)


class _ShiftedSolver:
    """Exact solver for ``(A - sigma) x = b`` with ``A = W^-1 K``.

    Unknowns are ordered window columns first (all cross-section nodes,
    column by column), then the outer columns (nodes above the wall).  The
    outer block is the Dirichlet box Laplacian, diagonal in the 2-D sine
    basis; its wall is pushed out by a few cells so both transform lengths
    are FFT-friendly.
    """

    def __init__(self, a, grid: FdGrid, parity: Parity, sigma: float):
        h1, h2, m2 = grid.h, grid.h_cross, grid.n_cross
        reflect = parity is Parity.EVEN
        start = 0 if reflect else 1
        ni = max(0, int(np.ceil(a / h1 - 1e-9)) - start)
        wall = int(round(grid.L / h1))
        no = sfft.next_fast_len(wall - start - ni + 1, real=True) - 1
        if reflect and ni == 0:
            raise ValueError("an even-parity grid needs at least one window column")
        self.n_in, self.n_out, self.m2, self.h1 = ni, no, m2, h1
        self.wall = (start + ni + no) * h1

        w1 = np.ones(ni)
        if reflect:
            w1[0] = 0.5
        w2 = np.ones(m2)
        w2[0] = 0.5
        self.weights = np.concatenate([np.kron(w1, w2), np.ones(no * (m2 - 1))])

        s = (4.0 / h2**2) * np.sin(np.arange(1, m2) * h2 / 2) ** 2
        p = np.arange(1, no + 1)
        along = (4.0 / h1**2) * np.sin(p * np.pi / (2 * (no + 1))) ** 2
        self.denom = along[:, None] + s[None, :] - sigma
        self.first_row = np.sqrt(2.0 / (no + 1)) * np.sin(p * np.pi / (no + 1))

        if ni:
            t1 = _tridiag(ni, reflect) / h1**2
            t2 = _tridiag(m2, True) / h2**2
            inner = sp.kron(t1, sp.identity(m2)) + sp.kron(sp.identity(ni), t2)
            inner = (inner - sigma * sp.identity(ni * m2)).tocsr()
            g = (self.first_row[:, None] ** 2 / self.denom).sum(axis=0)
            q = _dst(np.eye(m2 - 1), axes=[0])
            dense = sp.coo_matrix((q * g[None, :]) @ q / h1**4)
            base = (ni - 1) * m2 + 1
            corr = sp.csr_matrix((-dense.data, (dense.row + base, dense.col + base)),
                                 shape=inner.shape)
            self.lu = spla.splu((inner + corr).tocsc())

    @property
    def size(self) -> int:
        return len(self.weights)

    def solve(self, b):
        ni, m2, h1 = self.n_in, self.m2, self.h1
        z = _dst(b[ni * m2:].reshape(self.n_out, m2 - 1)) / self.denom
        if not ni:
            return _dst(z).ravel()
        rhs = b[:ni * m2].copy()
        rhs.reshape(ni, m2)[-1, 1:] += _dst(self.first_row @ z) / h1**2
        x_in = self.lu.solve(rhs)
        coupling = _dst(x_in.reshape(ni, m2)[-1, 1:] / h1**2)
        z += self.first_row[:, None] * coupling[None, :] / self.denom
        return np.concatenate([x_in, _dst(z).ravel()])


def fd_eigenvalues(a: float, grid: FdGrid, count: int = 4, parity=None,
                   sigma: float = 0.5) -> list:
    """Lowest eigenvalues below ``1 - 1e-3``, ascending.

    With ``parity=None`` both parities are computed and merged.
    """
    return [lam for lam, _ in fd_spectrum(a, grid, count, parity, sigma)]


def fd_spectrum(a: float, grid: FdGrid, count: int = 4, parity=None,
                sigma: float = 0.5) -> list:
    """``(eigenvalue, parity)`` pairs below ``1 - 1e-3``, ascending."""
    if a < 0:
        raise ValueError(f"window half-width must be non-negative, got {a}")
    if grid.L < a + MIN_WALL_GAP:
        raise ValueError(f"wall L={grid.L} must be at least a + {MIN_WALL_GAP}")
    parities = list(Parity) if parity is None else [Parity(parity)]
    found = []
    for par in parities:
        if par is Parity.EVEN and a < grid.h:
            # no window column: the even sector is the bare strip, spectrum >= 1
            continue
        solver = _ShiftedSolver(a, grid, par, sigma)
        n = solver.size
        k = min(count + 1, n - 2)
        weights = solver.weights
        op_inv = spla.LinearOperator((n, n), matvec=lambda v: solver.solve(v / weights), dtype=float)
        ident = spla.LinearOperator((n, n), matvec=lambda v: v, dtype=float)
        vals = spla.eigsh(ident, k=k, M=sp.diags(weights), sigma=sigma, OPinv=op_inv,
                          return_eigenvectors=False)
        found += [(float(v), par) for v in vals if v < CUTOFF]
    found.sort(key=lambda item: item[0])
    return found[:count]


@dataclass(frozen=True)
class ExtrapolatedEigenvalue:
    lam: float
    parity: Parity
    coarse: float
    fine: float


def richardson_spectrum(a: float, h: float, L: float, count: int = 4, order: float = 1.0,
                        max_change: float = 1e-2) -> list:
    """Eigenvalues on meshes ``h`` and ``h/2``, extrapolated assuming error ``O(h^order)``.

    Raises
    ------
    GridTooCoarse
        If the two meshes disagree on the state count or any eigenvalue moves
        by more than ``max_change``.
    """
    coarse = fd_spectrum(a, FdGrid(h, L), count)
    fine = fd_spectrum(a, FdGrid(h / 2, L), count)
    if len(coarse) != len(fine) or [p for _, p in coarse] != [p for _, p in fine]:
        raise GridTooCoarse(f"state count changes under refinement: {coarse} vs {fine}")
    factor = 2.0**order
    out = []
    for (lc, par), (lf, _) in zip(coarse, fine):
        if abs(lc - lf) > max_change:
            raise GridTooCoarse(f"eigenvalue moves by {abs(lc - lf):.3e} under refinement")
        out.append(ExtrapolatedEigenvalue((factor * lf - lc) / (factor - 1), par, lc, lf))
    return out
