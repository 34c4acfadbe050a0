"""Exception hierarchy shared by all modules."""


class PoreCoupleError(Exception):
    """Base class."""


class ConfigurationError(PoreCoupleError):
    pass


class GeometryError(PoreCoupleError):
    pass


class DomainError(PoreCoupleError):
    pass


class SolverError(PoreCoupleError):
    """Linear solve failed; ``report`` carries whatever diagnostics exist."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DecayError(PoreCoupleError):
    """Boundary-layer solution did not stabilise inside the cut-off stripe."""
