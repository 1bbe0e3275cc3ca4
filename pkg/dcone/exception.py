class SignViolationError(ValueError):
    """Exception raised when an obstacle Laplacian has the wrong sign."""

    def __init__(self, name, value):
        relation = "< 0" if name == "lambda1" else "> 0"
        message = "{} must be {}, got {!r}.".format(name, relation, value)
        super().__init__(message)


class NotSinglePointContactError(ValueError):
    """Exception raised when the obstacles touch along more than the origin."""

    def __init__(self, inequality):
        message = "D²(p²-p¹) must be positive definite: {} does not hold.".format(inequality)
        super().__init__(message)


class NotCase1Error(ValueError):
    """Exception raised when a Case 1 reduction is requested for a pair outside Case 1."""

    def __init__(self, a1_plus_c2, a2_plus_c1):
        message = "Case 1 requires a1+c2 = a2+c1 = 0 (tolerance 1e-12), got {!r} and {!r}."
        message = message.format(a1_plus_c2, a2_plus_c1)
        super().__init__(message)


class AlphaOutOfWindowError(ValueError):
    """Exception raised when alpha falls outside max(a1,-c2) <= alpha <= min(a2,-c1)."""

    def __init__(self, alpha, lo, hi):
        message = "alpha = {!r} is outside the window [{!r}, {!r}].".format(alpha, lo, hi)
        super().__init__(message)


class NoDoubleConesError(ValueError):
    """Exception raised when a Case 3 pair is asked for double-cone solutions."""

    def __init__(self, case):
        message = "{} pairs admit no double-cone solutions.".format(case)
        super().__init__(message)


class InadmissibleHalfspaceError(ValueError):
    """Exception raised when a halfspace solution is requested for an inadmissible alpha."""

    def __init__(self, which, alpha, delta):
        message = "No {} halfspace solution for alpha = {!r}: delta = {!r} must be <= 0.".format(
            which, alpha, delta
        )
        super().__init__(message)


class AngleOutOfRangeError(ValueError):
    """Exception raised when a double-cone angle is outside (0, pi)."""

    def __init__(self, name, value):
        message = "{} must lie in (0, pi), got {!r}.".format(name, value)
        super().__init__(message)


class DomainError(ValueError):
    """Exception raised when g is evaluated outside (-1, 1)."""

    def __init__(self, t):
        message = "g(t) is defined for |t| < 1, got t = {!r}.".format(t)
        super().__init__(message)


class BoundaryViolationError(ValueError):
    """Exception raised when Dirichlet data leaves the obstacle interval on the boundary."""

    def __init__(self, violation):
        message = "Boundary data must satisfy psi1 <= g <= psi2; max violation {:.3e}.".format(
            violation
        )
        super().__init__(message)


class RadiusTooLargeError(ValueError):
    """Exception raised when a rescaling radius exceeds half the domain."""

    def __init__(self, r, limit):
        message = "Radius {!r} exceeds L/2 = {!r}.".format(r, limit)
        super().__init__(message)


class RadiusTooSmallError(ValueError):
    """Exception raised when a radius is too close to the grid spacing to resolve."""

    def __init__(self, r, limit):
        message = "Radius {!r} must exceed {!r} (20 grid spacings).".format(r, limit)
        super().__init__(message)


class AmbiguousEnergyError(ValueError):
    """Exception raised when an energy lies within 0.1 of two different levels."""

    def __init__(self, value, first, second):
        message = "W = {!r} is within 0.1 of both {} and {}.".format(value, first, second)
        super().__init__(message)


class NotCase1Or2Error(ValueError):
    """Exception raised when a double-cone fit is requested for a Case 3 pair."""

    def __init__(self, case):
        message = "Double-cone fitting needs a Case 1 or Case 2 pair, got {}.".format(case)
        super().__init__(message)


class NonCanonicalPairError(ValueError):
    """Exception raised when an operation needs the canonical pair (-1,-1,1,1)."""

    def __init__(self, operation):
        message = "'{}' needs the canonical pair (-1,-1,1,1); apply reduce_case1 first.".format(
            operation
        )
        super().__init__(message)


class NoHalfspaceFamilyError(ValueError):
    """Exception raised when a pair admits no halfspace solutions for an obstacle."""

    def __init__(self, which):
        message = "The pair admits no {} halfspace solutions.".format(which)
        super().__init__(message)


class DegenerateFitError(ValueError):
    """Exception raised when too few radii leave a usable distance for a rate fit."""

    def __init__(self, usable, needed, largest):
        message = (
            "Only {} of the radii lie in the fit window with a distance above 1e-12 "
            "(need {}, largest distance {:.3e}); the rate is undefined.".format(
                usable, needed, largest
            )
        )
        super().__init__(message)


class NoCurveError(ValueError):
    """Exception raised when neither obstacle has a free boundary through the origin."""

    def __init__(self):
        super().__init__("No free-boundary curve passes through the origin.")


class InsufficientCurvesError(ValueError):
    """Exception raised when fewer than two free-boundary branches were extracted."""

    def __init__(self, count):
        message = "Angle measurement needs at least two branches, got {}.".format(count)
        super().__init__(message)


class InvalidConfigError(ValueError):
    """Exception raised when a run configuration fails schema validation."""

    def __init__(self, path, reason):
        message = "Invalid configuration at '{}': {}".format(path or "<root>", reason)
        super().__init__(message)


class UnknownBoundaryError(ValueError):
    """Exception raised when a boundary id is neither a builtin nor a readable CSV file."""

    def __init__(self, boundary_id):
        message = "Unknown boundary data '{}'.".format(boundary_id)
        super().__init__(message)


class FieldFormatError(ValueError):
    """Exception raised when a field CSV is not a square node grid."""

    def __init__(self, path, reason):
        message = "'{}' is not a field file: {}".format(path, reason)
        super().__init__(message)


class SolverNotConvergedWarning(UserWarning):
    """Warning issued when PSOR stops at the iteration cap."""
