"""Mode-matching systems for stacks of slabs with a piecewise lower boundary.

Each slab is a piece of the strip on which the lower boundary condition is
constant, so the field there is a sum of transverse modes times longitudinal
profiles.  Every longitudinal profile is stored as a short sum of
exponentials ``coef * exp(rate * (x1 - origin))`` chosen so that the profile
never exceeds one in modulus on its own slab.  That keeps every matrix entry
bounded by ``max(1, |mu_max|)`` however long the slabs are.

Column kinds per transverse mode (``mu = sqrt(t - lam)``, ``kappa = sqrt(lam - t)``):

* finite slab, evanescent: ``exp(-mu (x - x_left))`` and ``exp(-mu (x_right - x))``;
* finite slab, propagating: ``cos(kappa (x - x_left))`` and ``sin(kappa (x - x_left))``;
* finite slab folded about ``x_left`` (symmetry wall): one even or odd column;
* semi-infinite slab: one column, decaying or outgoing/incoming.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import DegenerateStack, NotARoot, SingularToWorkingPrecision
from .spectral import Family, ModeSystem, sqrt_branch

MIN_SLAB_LENGTH = 1e-8
PROJECTIONS = ("mixed", "dirichlet")


class LowerBoundary(str, enum.Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"

    @property
    def family(self) -> Family:
        return Family.DD if self is LowerBoundary.DIRICHLET else Family.ND


class EndCondition(str, enum.Enum):
    """Radiation condition for propagating modes of a semi-infinite slab.

    Evanescent modes always decay away from the interface.
    """

    DECAY_ONLY = "decay"
    OUTGOING = "outgoing"
    INCOMING = "incoming"


class Symmetry(str, enum.Enum):
    EVEN = "even"
    ODD = "odd"


@dataclass(frozen=True)
class Slab:
    """One piece of the strip, ``x_left < x1 < x_right``.

    ``mirror`` marks a slab folded about ``x_left`` (a symmetry line); its
    profiles are even or odd about that point and it carries no unknowns
    attached to the left end.
    """

    x_left: float
    x_right: float
    lower_bc: LowerBoundary
    end_condition: EndCondition = EndCondition.DECAY_ONLY
    mirror: Symmetry | None = None

    def __post_init__(self):
        object.__setattr__(self, "lower_bc", LowerBoundary(self.lower_bc))
        object.__setattr__(self, "end_condition", EndCondition(self.end_condition))
        if self.mirror is not None:
            object.__setattr__(self, "mirror", Symmetry(self.mirror))
        if not self.x_left < self.x_right:
            raise DegenerateStack(f"slab needs x_left < x_right, got ({self.x_left}, {self.x_right})")
        if self.is_finite and self.x_right - self.x_left < MIN_SLAB_LENGTH:
            raise DegenerateStack(f"slab ({self.x_left}, {self.x_right}) is shorter than {MIN_SLAB_LENGTH}")
        if self.mirror is not None and not self.is_finite:
            raise DegenerateStack("a mirror-folded slab must be finite")

    @property
    def family(self) -> Family:
        return self.lower_bc.family

    @property
    def is_finite(self) -> bool:
        return np.isfinite(self.x_left) and np.isfinite(self.x_right)

    @property
    def length(self) -> float:
        return self.x_right - self.x_left


@dataclass(frozen=True)
class SlabStack:
    """Ordered slabs sharing interfaces, each expanded in ``n_modes`` modes.

    ``projection`` selects how continuity is tested at an interface between
    different families: ``"mixed"`` tests the value with the Neumann family
    and the derivative with the Dirichlet family (exactly flux-conserving in
    the truncated space); ``"dirichlet"`` tests both with the Dirichlet
    family.
    """

    slabs: tuple
    n_modes: int
    projection: str = "mixed"
    modes: ModeSystem = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        slabs = tuple(self.slabs)
        object.__setattr__(self, "slabs", slabs)
        object.__setattr__(self, "modes", ModeSystem(self.n_modes))
        if self.projection not in PROJECTIONS:
            raise ValueError(f"projection must be one of {PROJECTIONS}")
        if len(slabs) < 2:
            raise DegenerateStack("a stack needs at least two slabs")
        for q, (left, right) in enumerate(zip(slabs[:-1], slabs[1:])):
            if left.x_right != right.x_left:
                raise DegenerateStack(f"slabs {q} and {q + 1} do not share an interface")
        for q, s in enumerate(slabs):
            if q not in (0, len(slabs) - 1) and not s.is_finite:
                raise DegenerateStack("only the outer slabs may be semi-infinite")
            if s.mirror is not None and q != 0:
                raise DegenerateStack("only the first slab may be mirror-folded")
        if not np.isfinite(slabs[0].x_left) and slabs[0].x_left > 0:
            raise DegenerateStack("the first slab cannot start at +inf")

    @property
    def interfaces(self) -> tuple:
        return tuple(s.x_right for s in self.slabs[:-1])

    @property
    def matrix_dim(self) -> int:
        return 2 * self.n_modes * len(self.interfaces)

    def test_families(self, q: int):
        """Families used to test (value, derivative) continuity at interface ``q``."""
        fl, fr = self.slabs[q].family, self.slabs[q + 1].family
        if fl is fr:
            return fl, fl
        if self.projection == "dirichlet":
            return Family.DD, Family.DD
        return Family.ND, Family.DD


@dataclass(frozen=True)
class SlabBasis:
    """Longitudinal columns of one slab at a fixed spectral point.

    Column ``c`` has profile ``sum_k coef[c,k] exp(rate[c,k] (x1 - origin[c,k]))``
    times the transverse mode ``mode[c]`` (0-based) of ``family``.
    """

    slab: Slab
    family: Family
    offset: int
    mode: np.ndarray
    coef: np.ndarray
    rate: np.ndarray
    origin: np.ndarray
    outgoing: np.ndarray

    @property
    def size(self) -> int:
        return len(self.mode)

    def profile(self, x1, derivative: bool = False) -> np.ndarray:
        """Profiles (or their derivatives) at ``x1``; shape ``x1.shape + (size,)``."""
        x = np.asarray(x1, dtype=float)[..., None, None]
        terms = self.coef * np.exp(self.rate * (x - self.origin))
        if derivative:
            terms = terms * self.rate
        return terms.sum(axis=-1)


def slab_basis(slab: Slab, lam, n_modes: int, offset: int = 0) -> SlabBasis:
    """Build the column set of ``slab`` at spectral point ``lam``."""
    lam = complex(lam)
    t = slab.family.eigenvalues(n_modes)
    xl, xr = slab.x_left, slab.x_right
    modes, coefs, rates, origins, outgoing = [], [], [], [], []

    def add(i, terms, is_out=False):
        c = [term[0] for term in terms] + [0.0] * (2 - len(terms))
        r = [term[1] for term in terms] + [0.0] * (2 - len(terms))
        o = [term[2] for term in terms] + [0.0] * (2 - len(terms))
        modes.append(i)
        coefs.append(c)
        rates.append(r)
        origins.append(o)
        outgoing.append(is_out)

    for i, ti in enumerate(t):
        propagating = ti < lam.real
        if propagating:
            kappa = sqrt_branch(lam - ti)
            ik = 1j * kappa
            cos_terms = ((0.5, ik, xl), (0.5, -ik, xl))
            sin_terms = ((-0.5j, ik, xl), (0.5j, -ik, xl))
        else:
            mu = sqrt_branch(ti - lam)
        if slab.is_finite and slab.mirror is None:
            if propagating:
                add(i, cos_terms)
                add(i, sin_terms)
            else:
                add(i, ((1.0, -mu, xl),))
                add(i, ((1.0, mu, xr),))
        elif slab.mirror is not None:
            sign = 1.0 if slab.mirror is Symmetry.EVEN else -1.0
            if propagating:
                add(i, cos_terms if sign > 0 else sin_terms)
            else:
                add(i, ((1.0, mu, xr), (sign, -mu, 2 * xl - xr)))
        elif np.isfinite(xl):
            if not propagating:
                add(i, ((1.0, -mu, xl),))
            elif slab.end_condition is EndCondition.INCOMING:
                add(i, ((1.0, -ik, xl),))
            elif slab.end_condition is EndCondition.OUTGOING:
                add(i, ((1.0, ik, xl),), True)
            else:
                raise DegenerateStack(
                    f"mode {i + 1} propagates at lam={lam}; a decay-only end cannot hold it")
        else:
            if not propagating:
                add(i, ((1.0, mu, xr),))
            elif slab.end_condition is EndCondition.INCOMING:
                add(i, ((1.0, ik, xr),))
            elif slab.end_condition is EndCondition.OUTGOING:
                add(i, ((1.0, -ik, xr),), True)
            else:
                raise DegenerateStack(
                    f"mode {i + 1} propagates at lam={lam}; a decay-only end cannot hold it")

    return SlabBasis(
        slab=slab,
        family=slab.family,
        offset=offset,
        mode=np.asarray(modes, dtype=int),
        coef=np.asarray(coefs, dtype=complex),
        rate=np.asarray(rates, dtype=complex),
        origin=np.asarray(origins, dtype=float),
        outgoing=np.asarray(outgoing, dtype=bool),
    )


def stack_basis(stack: SlabStack, lam) -> list:
    """Column sets of every slab, with their offsets in the unknown vector."""
    out, offset = [], 0
    for s in stack.slabs:
        b = slab_basis(s, lam, stack.n_modes, offset)
        out.append(b)
        offset += b.size
    return out


def _interface_block(stack, q, basis, side, projections):
    """Rows of interface ``q`` produced by the columns of ``basis``."""
    x = stack.interfaces[q]
    value = basis.profile(x)
    deriv = basis.profile(x, derivative=True)
    pv = projections[(stack.test_families(q)[0], basis.family)]
    pd = projections[(stack.test_families(q)[1], basis.family)]
    n = stack.n_modes
    block = np.empty((2 * n, basis.size), dtype=complex)
    block[:n] = pv[:, basis.mode] * value
    block[n:] = pd[:, basis.mode] * deriv
    return block if side == "left" else -block


def _projections(stack):
    ms = stack.modes
    return {(t, f): ms.project(t, f) for t in Family for f in Family}


def assemble(stack: SlabStack, lam) -> np.ndarray:
    """Square matching matrix ``M(lam)`` of the stack.

    Rows come in blocks of ``2 * n_modes`` per interface (value rows, then
    derivative rows); columns follow :func:`stack_basis`.
    """
    bases = stack_basis(stack, lam)
    n_cols = sum(b.size for b in bases)
    if n_cols != stack.matrix_dim:
        raise DegenerateStack(f"stack has {n_cols} unknowns for {stack.matrix_dim} equations")
    proj = _projections(stack)
    n = stack.n_modes
    matrix = np.zeros((stack.matrix_dim, n_cols), dtype=complex)
    for q in range(len(stack.interfaces)):
        rows = slice(2 * n * q, 2 * n * (q + 1))
        for basis, side in ((bases[q], "left"), (bases[q + 1], "right")):
            cols = slice(basis.offset, basis.offset + basis.size)
            matrix[rows, cols] = _interface_block(stack, q, basis, side, proj)
    return matrix


def forcing_vector(stack: SlabStack, lam, slab_index: int, mode: int, terms) -> np.ndarray:
    """Matching residual of a prescribed extra profile in one slab.

    The profile ``sum coef exp(rate (x1 - origin))`` times transverse mode
    ``mode`` (1-based) is added to slab ``slab_index``; the returned vector
    is what it contributes to ``M @ amplitudes``, so the driven system reads
    ``M @ amplitudes = -forcing_vector(...)``.
    """
    slab = stack.slabs[slab_index]
    terms = list(terms) + [(0.0, 0.0, 0.0)] * (2 - len(terms))
    basis = SlabBasis(
        slab=slab, family=slab.family, offset=0,
        mode=np.array([mode - 1]),
        coef=np.array([[t[0] for t in terms]], dtype=complex),
        rate=np.array([[t[1] for t in terms]], dtype=complex),
        origin=np.array([[t[2] for t in terms]], dtype=float),
        outgoing=np.array([False]),
    )
    proj = _projections(stack)
    n = stack.n_modes
    vec = np.zeros(stack.matrix_dim, dtype=complex)
    if slab_index < len(stack.interfaces):
        q = slab_index
        vec[2 * n * q:2 * n * (q + 1)] += _interface_block(stack, q, basis, "left", proj)[:, 0]
    if slab_index > 0:
        q = slab_index - 1
        vec[2 * n * q:2 * n * (q + 1)] += _interface_block(stack, q, basis, "right", proj)[:, 0]
    return vec


@dataclass(frozen=True)
class ScaledDeterminant:
    """Determinant ``phase * exp(log_abs)`` kept in factored form."""

    log_abs: float
    phase: complex
    matrix_dim: int

    def value(self, offset: float = 0.0) -> complex:
        """``phase * exp(log_abs - offset)``."""
        return self.phase * np.exp(self.log_abs - offset)


def determinant_of(matrix: np.ndarray) -> ScaledDeterminant:
    """Scaled determinant of a square matrix via partially pivoted LU."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(matrix, check_finite=True)
    diag = np.diag(lu)
    mags = np.abs(diag)
    if np.any(mags < 1e-300):
        raise SingularToWorkingPrecision("an LU pivot is below 1e-300")
    swaps = int(np.count_nonzero(piv != np.arange(len(piv))))
    phase = np.prod(diag / mags) * (-1.0) ** swaps
    phase = phase / abs(phase)
    return ScaledDeterminant(float(np.sum(np.log(mags))), complex(phase), matrix.shape[0])


def scaled_det(stack: SlabStack, lam) -> ScaledDeterminant:
    return determinant_of(assemble(stack, lam))


def singular_values(matrix: np.ndarray) -> np.ndarray:
    """Singular values in descending order."""
    return sla.svdvals(matrix)


def null_vector(matrix: np.ndarray, threshold: float = 1e-8) -> np.ndarray:
    """Normalized right singular vector of the smallest singular value.

    The largest-modulus entry is scaled to exactly ``1``.

    Raises
    ------
    NotARoot
        If ``s_min >= threshold * s_max``.
    """
    _, s, vh = sla.svd(matrix)
    if not s[-1] < threshold * s[0]:
        raise NotARoot(f"smallest singular value ratio {s[-1] / s[0]:.3e} is not below {threshold:.0e}")
    v = vh[-1].conj()
    return v / v[np.argmax(np.abs(v))]


def nullspace_amplitudes(stack: SlabStack, lam, threshold: float = 1e-8) -> np.ndarray:
    return null_vector(assemble(stack, lam), threshold)


def _slab_at(bases, x1):
    """Indices of the slabs containing ``x1``; two at an interface."""
    hits = [k for k, b in enumerate(bases) if b.slab.x_left <= x1 <= b.slab.x_right]
    if not hits:
        raise ValueError(f"x1={x1} lies outside the stack")
    return hits


def evaluate_field(stack: SlabStack, lam, amplitudes, x1, x2) -> np.ndarray:
    """Field of the amplitude vector at points ``(x1, x2)``.

    At an interface the two one-sided representations are averaged.
    """
    bases = stack_basis(stack, lam)
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    x2 = np.broadcast_to(np.asarray(x2, dtype=float), x1.shape)
    amplitudes = np.asarray(amplitudes)
    out = np.zeros(x1.shape, dtype=complex)
    for idx in np.ndindex(x1.shape):
        hits = _slab_at(bases, x1[idx])
        total = 0.0
        for k in hits:
            b = bases[k]
            amp = amplitudes[b.offset:b.offset + b.size]
            prof = b.profile(x1[idx])
            trans = b.family.basis(x2[idx], stack.n_modes)[b.mode]
            total = total + np.sum(amp * prof * trans)
        out[idx] = total / len(hits)
    return out


def _exp_pair_integral(sp, op, sq, oq, lo, hi):
    """``int_lo^hi exp(sp (x - op)) * conj(exp(sq (x - oq))) dx``."""
    sigma = sp + np.conj(sq)

    def expo(x):
        return sp * (x - op) + np.conj(sq) * (x - oq)

    if not np.isfinite(lo) or not np.isfinite(hi):
        end = hi if np.isfinite(hi) else lo
        toward = 1.0 if np.isfinite(lo) else -1.0
        if not toward * sigma.real < 0:
            raise ValueError("profile is not square-integrable on a semi-infinite slab")
        val = np.exp(expo(end)) / sigma
        return -val if np.isfinite(lo) else val
    d = hi - lo
    if sigma == 0:
        return d * np.exp(expo(lo))
    if sigma.real <= 0:
        return np.exp(expo(lo)) * np.expm1(sigma * d) / sigma
    return -np.exp(expo(hi)) * np.expm1(-sigma * d) / sigma


def slab_mode_energy(basis: SlabBasis, amplitudes, lo=None, hi=None, derivative=False) -> np.ndarray:
    """Per-mode ``int |profile|^2 dx1`` of the slab field over ``[lo, hi]``.

    With ``derivative`` the longitudinal derivative is integrated instead.
    Returns an array indexed by transverse mode (0-based, ``n_modes`` long
    up to the highest mode present).
    """
    lo = basis.slab.x_left if lo is None else lo
    hi = basis.slab.x_right if hi is None else hi
    amp = np.asarray(amplitudes)
    coef = basis.coef * (basis.rate if derivative else 1.0)
    out = np.zeros(int(basis.mode.max()) + 1)
    by_mode = {}
    for c, i in enumerate(basis.mode):
        by_mode.setdefault(int(i), []).append(c)
    pairs = [(c1, c2) for cols in by_mode.values() for c1 in cols for c2 in cols]
    for c1, c2 in pairs:
        for k1 in range(2):
            for k2 in range(2):
                w = amp[c1] * coef[c1, k1] * np.conj(amp[c2] * coef[c2, k2])
                if w == 0:
                    continue
                out[basis.mode[c1]] += (w * _exp_pair_integral(
                    basis.rate[c1, k1], basis.origin[c1, k1],
                    basis.rate[c2, k2], basis.origin[c2, k2], lo, hi)).real
    return out
