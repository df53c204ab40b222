"""Exception hierarchy shared by every stage of the pipeline."""


class GZKError(Exception):
    """Base class; the CLI maps any subclass to exit code 2."""


class NoPeriodicOrbitError(GZKError):
    pass


class DegenerateOrbitError(NoPeriodicOrbitError):
    """Energy level sits on the centre, the orbit has collapsed to a point."""


class QuadratureError(GZKError):
    pass


class NoWaveForPeriodError(GZKError):
    pass


class NewtonDivergenceError(GZKError):
    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history or [])


class ResolutionError(GZKError):
    pass


class EigensolverError(GZKError):
    pass


class SolvabilityError(GZKError):
    pass


class NotApplicableError(GZKError):
    pass


class DegenerateKernelError(GZKError):
    pass


class NoSignChangeError(GZKError):
    pass


class IntegratorError(GZKError):
    pass


class MismatchError(GZKError):
    pass
