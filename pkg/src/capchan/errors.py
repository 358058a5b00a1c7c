"""Exception types shared across the package."""


class CapchanError(Exception):
    """Base class for all capchan errors."""


class InvalidParams(CapchanError):
    """Physical parameters outside their admissible ranges (e.g. kappa = 0)."""


class ToleranceNotMet(CapchanError):
    """The adaptive step controller could not satisfy the requested
    tolerances within the step-count budget."""


class UnreachableAngle(CapchanError):
    """No trajectory point with the requested inclination exists
    (negative squared height, possible only for kappa < 0)."""


class NoEvent(CapchanError):
    """No qualifying event found in the integrated range."""


class NotPeriodic(CapchanError):
    """The requested regime has no period (flat line or asymptotic profile)."""


class WrongRegime(CapchanError):
    """Operation invoked outside the morphology regime it is defined for."""


class NoRoot(CapchanError):
    """Residual function fails to change sign across the bracket."""


class NoSignChange(CapchanError):
    """Bisection bracket endpoints do not straddle zero."""


class BracketOverflow(CapchanError):
    """Bracket expansion exceeded its budget; target outside representable range."""


class OutOfDomain(CapchanError):
    """Evaluation point outside the domain of a closed-form expression."""


class MonotonicityViolation(CapchanError):
    """A function assumed strictly monotone was observed non-monotone on the
    evaluation grid; the bisection result would be unreliable."""
