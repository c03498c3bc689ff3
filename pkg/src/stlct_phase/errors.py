"""Exception hierarchy for the stlct_phase package.

Every error raised deliberately by this package derives from
:class:`StlctPhaseError`, so callers (in particular the command line
interface) can map failure classes onto process exit codes:

* invalid parameters / malformed configs or data files -> exit code 2
* anchor-selection failures during reconstruction       -> exit code 3
* infeasible accuracy targets during planning           -> exit code 4
* property-suite failures                               -> exit code 5
"""

from __future__ import annotations


class StlctPhaseError(Exception):
    """Base class for all package errors."""


class ParameterError(StlctPhaseError, ValueError):
    """An input parameter violates its mathematical domain.

    Examples: theta-function nome outside (0, 1), transform matrix with
    determinant != 1 or b <= 0, non-positive sigma/beta, bad tolerances.
    """


class QuadratureConfigError(StlctPhaseError):
    """A quadrature configuration cannot deliver the requested accuracy
    (e.g. the cutoff excludes non-negligible integrand mass)."""


class DataFormatError(StlctPhaseError):
    """A signal or measurement file is malformed or internally inconsistent."""


class FittingError(StlctPhaseError):
    """Decay-envelope fitting failed (samples do not exhibit eventual decay)."""


class LatticeConsistencyError(StlctPhaseError):
    """Lattice sizes (N, H) do not decompose into base terms plus the
    stated non-negative margins (m, q)."""


class AnchorError(StlctPhaseError):
    """Base class for anchor-selection failures (CLI exit code 3)."""


class AnchorGapError(AnchorError):
    """No admissible anchor point exists within reach of the previous one."""

    def __init__(self, position: float, reach: float, message: str | None = None):
        self.position = position
        self.reach = reach
        super().__init__(
            message
            or f"no admissible anchor in ({position:.6g}, {position + reach:.6g}]"
        )


class EndpointError(AnchorError):
    """A forced endpoint anchor fails the detector threshold."""


class NonpositiveAnchorError(AnchorError):
    """A detector value at an anchor is not strictly positive, so the
    1/sqrt(A_j) normalisation is undefined."""


class ZeroTransitionError(AnchorError):
    """A transition value R_j(p_{j+1} - p_j) vanished, so its phase is
    undefined."""

    def __init__(self, j: int, message: str | None = None):
        self.j = j
        super().__init__(message or f"transition value at anchor index {j} is zero")


class ZeroBasePointError(StlctPhaseError):
    """The base-point magnitude |f(p)| is zero (or numerically negative),
    so the semi-discrete reconstruction formula is undefined."""


class InfeasibleToleranceError(StlctPhaseError):
    """The requested accuracy target violates its admissibility bound or
    cannot be met by the searched parameter ranges (CLI exit code 4)."""


class PropertyFailure(StlctPhaseError):
    """A verification property suite failed (CLI exit code 5)."""
