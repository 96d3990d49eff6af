"""Exception hierarchy.

Every error raised by the library derives from :class:`CycleKitError`; the CLI
maps the subclasses onto its documented exit codes.
"""


class CycleKitError(Exception):
    """Base class for all library errors."""


class InputError(CycleKitError):
    """Malformed system file, unknown model, or invalid parameter."""


class ParameterOutOfRange(InputError):
    """A model parameter violates its documented constraint."""


class NotProportional(InputError):
    """The nonlinear parts f and g are not related by g = mu*f."""


class NoFixedPointFound(CycleKitError):
    pass


class ReductionError(CycleKitError):
    """Base for failures while bringing a system into LLS form."""


class DegenerateTransform(ReductionError):
    """alpha1*beta2 - alpha2*beta1 vanishes, so the linear map is not invertible."""


class NotReducible(ReductionError):
    """No admissible (beta1, beta2) keeps u affine with an invertible map."""


class FixedPointNotShifted(ReductionError):
    """A00 does not vanish: the supplied point is not a fixed point."""


class NotOscillatory(CycleKitError):
    """-A10 <= 0, so there is no linear frequency to average around."""


class IdenticallyZero(CycleKitError):
    """The radial polynomial vanishes identically (center at first order)."""


class StepUnderflow(CycleKitError):
    pass


class NonFiniteState(CycleKitError):
    pass
