"""Exception hierarchy.

Every domain error derives from :class:`FracminError`; the command line maps
those to exit code 1 and prints the class name on standard error.
"""


class FracminError(Exception):
    """Base class for all domain errors raised by the package."""


class GridError(FracminError, ValueError):
    """Invalid grid parameters."""


class DimensionUnsupported(FracminError):
    pass


class ZeroField(FracminError):
    pass


class ProfileOverflow(FracminError):
    """Dilated profile does not fit inside the periodic box."""


class TabulationRange(FracminError):
    pass


class MissingComparison(FracminError):
    """A hypothesis needs a periodic comparison nonlinearity that is absent."""


class NonConvergence(FracminError):
    """Raised only on request; normally the flow flags the result instead."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class DivergentEnergy(FracminError):
    pass


class InsufficientScan(FracminError):
    pass


class PrerequisiteFailed(FracminError):
    pass


class RadiusTooLarge(FracminError):
    pass


class RadiusOrder(FracminError):
    pass


class Inconclusive(FracminError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ConfigError(FracminError):
    """Configuration failed schema or invariant validation.

    ``rule`` names the violated invariant (for example ``"ell < 4s/N"``) and
    ``path`` is the dotted location of the offending field, when known.
    """

    def __init__(self, message, rule=None, path=None):
        super().__init__(message)
        self.rule = rule
        self.path = path
