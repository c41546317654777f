"""Exception hierarchy shared across the package."""


class DislabError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(DislabError):
    """Invalid grid, solver, or experiment configuration.

    ``messages`` accumulates every validation failure, not just the first.
    """

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


class RangeError(DislabError):
    """A requested value lies outside the attainable range."""


class ConvergenceError(DislabError):
    """An iterative solve failed to converge."""


class NoSolitonError(DislabError):
    """The stabilizing factor has the wrong sign: no solitary wave exists."""


class WrapAroundError(DislabError):
    """Too much mass near the periodic boundary: the domain is too small."""


class GridMismatchError(DislabError):
    """Two fields that must share a grid do not."""


class BlowUpError(DislabError):
    """The solution left the representable range during time stepping.

    Carries the failure time and, when raised from a driver, the partial
    trace accumulated up to that point.
    """

    def __init__(self, time, trace=None):
        self.time = time
        self.trace = trace
        super().__init__(f"solution blew up at t = {time:.6g}")
