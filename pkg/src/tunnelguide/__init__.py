"""Bound states, junction constants and tunneling resonances of a window-coupled waveguide."""

from .asymptotics import AsymptoticPrediction, convergence_study, predict
from .bound_states import (
    BoundState,
    Parity,
    WindowGeometry,
    bound_states,
    coefficient_bound_check,
    eigenfunction,
    find_eigenvalues,
)
from .errors import (
    BranchCutHit,
    DegenerateStack,
    FitUnstable,
    GridTooCoarse,
    MultipleRoots,
    NoConvergence,
    NoEigenvalue,
    NotARoot,
    SingularSystem,
    SingularToWorkingPrecision,
    SolverError,
    StudyFailed,
)
from .fd_oracle import FdGrid, fd_eigenvalues, richardson_spectrum
from .junction import JunctionSolution, extract_beta, solve_junction, verify_identities
from .resonance import BarrierGeometry, Resonance, find_resonance, resonance_det, resonance_field
from .slabs import ScaledDeterminant, Slab, SlabStack, assemble, nullspace_amplitudes, scaled_det
from .spectral import Family, ModeIndex, ModeSystem, longitudinal_exponent, overlap, sqrt_branch

__version__ = "0.1.0"
