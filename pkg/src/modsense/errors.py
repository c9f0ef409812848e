"""Exception hierarchy shared by all modsense modules."""


class ModsenseError(Exception):
    """Base class for all modsense errors."""


class ValidationError(ModsenseError):
    """Invalid model specification or operation arguments."""


class NumericalError(ModsenseError):
    """A numerical procedure failed (non-convergence, non-finite values,
    gauge-alignment breakdown)."""


class SizeError(ValidationError):
    """System size outside the supported range of an exact method."""
