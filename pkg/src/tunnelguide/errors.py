"""Exception types shared by the solver modules."""


class SolverError(Exception):
    """Base class for every failure raised by the package."""


class BranchCutHit(SolverError):
    """A square-root argument lies on (or within 1e-12 of) the principal cut."""


class DegenerateStack(SolverError):
    """A slab stack is malformed (empty slab, bad ordering, misplaced infinite end)."""


class SingularToWorkingPrecision(SolverError):
    """An LU pivot underflowed; the spectral point is numerically a root."""


class NotARoot(SolverError):
    """The matching matrix has no numerically trivial singular value."""


class NoEigenvalue(SolverError):
    """No sign change of the real determinant was found on the scan grid."""


class SingularSystem(SolverError):
    """The truncated junction system could not be solved."""


class FitUnstable(SolverError):
    """Corner-coefficient intercepts disagree across angles."""


class NoConvergence(SolverError):
    """An iterative root search did not converge or left its search window."""


class MultipleRoots(SolverError):
    """The argument principle counted more than one root near a resonance."""

    def __init__(self, message, count=None, center=None, radius=None):
        super().__init__(message)
        self.count = count
        self.center = center
        self.radius = radius


class StudyFailed(SolverError):
    """A convergence study did not meet its criterion; ``table`` holds the rows."""

    def __init__(self, message, table=None):
        super().__init__(message)
        self.table = table


class GridTooCoarse(SolverError):
    """The finite-difference grid is too coarse for a trustworthy eigenvalue."""
