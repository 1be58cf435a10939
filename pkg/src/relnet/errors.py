"""Exception hierarchy shared by every relnet module."""


class RelnetError(Exception):
    """Base class for all library errors."""


class InputDomainError(RelnetError, ValueError):
    """A sample is non-finite or has the wrong shape."""


class StructuralError(RelnetError, ValueError):
    """Array sizes do not match the objects they are applied to."""


class ParameterError(RelnetError, ValueError):
    """A scalar parameter is outside its admissible range."""


class IncompleteFrameError(RelnetError, KeyError):
    """A training frame does not cover every node of the graph."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class ConfigurationError(RelnetError, ValueError):
    """A configuration document or training schedule is invalid."""


class ConnectivityError(RelnetError):
    """A queried node cannot be reached from the observed nodes."""


class StateError(RelnetError):
    """The operation needs a trained (or initialized) model."""


class NoSignalError(RelnetError, ValueError):
    """An activity vector carries no positive entry to decode."""


class SpecificationError(RelnetError, ValueError):
    """A relation or topology specification is inconsistent."""


class SizeError(RelnetError, ValueError):
    """Frame geometry is incompatible with the requested operator."""


class DataError(RelnetError, ValueError):
    """An input file is malformed (bad header, non-numeric cell, ...)."""
