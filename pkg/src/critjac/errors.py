"""Exception hierarchy shared by the library and the command line front end."""


class CritJacError(Exception):
    """Base class for all library errors."""


class ParameterError(CritJacError, ValueError):
    """Invalid parameters: family, window, bounds, seeds, configuration."""


class AdmissibilityError(CritJacError, ValueError):
    """An index or spectral parameter lies outside the admissible range."""


class NumericalError(CritJacError, ArithmeticError):
    """A singular step, a non-convergent construction or an exceeded cap."""


class SingularStepError(NumericalError):
    pass


class CapExceededError(NumericalError):
    pass
