"""Exception types shared across the package.

Every failure mode that callers are expected to branch on gets its own
class; anything else surfaces as a plain ValueError from validation.
"""


class CavityError(Exception):
    """Base class for all package-specific failures."""


class ConstraintOrderViolation(CavityError):
    """Constraint pair violates 0 <= lower <= upper somewhere.

    Carries the list of offending pieces as ``(x_left, x_right, lo, hi)``.
    """

    def __init__(self, pieces):
        self.pieces = list(pieces)
        super().__init__(f"lower bound exceeds upper bound on {len(self.pieces)} piece(s)")


class EmptyConstraintGap(CavityError):
    """The two constraint profiles coincide everywhere; no room to optimize."""


class MismatchedInterval(CavityError):
    """Two piecewise-constant profiles are defined on different intervals."""


class MasslessNeumann(CavityError):
    """Identically-zero coefficient with a Neumann left end has no closed form."""


class DegenerateDenominator(CavityError):
    """A derivative formula divides by a boundary slope that vanished."""


class NotAResonance(CavityError):
    """An operation requiring a spectral point got a z with large residual."""


class NewtonDivergence(CavityError):
    """Newton refinement of one candidate failed to converge."""


class ContourTooCloseToZero(CavityError):
    """Winding count aborted: the function nearly vanishes on the contour."""


class NotBangbangReady(CavityError):
    """Lower constraint vanishes somewhere the constraints differ; the
    nonlinear transmission problem is not uniquely solvable there."""


class AmbiguousBranch(CavityError):
    """Branch probing after a sign event failed to single out a coefficient.

    Carries the location and the probe diagnostics that were collected.
    """

    def __init__(self, x, details=""):
        self.x = x
        super().__init__(f"ambiguous coefficient choice at x={x!r} {details}")


class UpperHalfPlaneZ(CavityError):
    """The nonlinear solver only accepts z with Im(z^2) <= 0."""


class RoundTripFailure(CavityError):
    """A recovered structure does not reproduce its eigenvalue."""


class NoConvergence(CavityError):
    """An iterative refinement ran out of iterations."""


class JacobianSingular(CavityError):
    """Newton step impossible: the finite-difference Jacobian is singular."""


class NoRootFound(CavityError):
    """A sweep finished without locating any admissible root."""


class HypothesisViolated(CavityError):
    """Input lies outside the hypothesis of the requested closed form."""


class CaseNotCovered(CavityError):
    """Internal classifier fell through every case. Should be unreachable."""


class ZeroDenominator(CavityError):
    """A splitting coefficient could not be formed: derivative below scale."""


class ConfigError(CavityError):
    """A run configuration file is malformed or inconsistent."""
