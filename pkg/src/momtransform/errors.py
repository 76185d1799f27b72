"""Exception hierarchy shared by all modules."""


class MomentTransformError(Exception):
    """Base class for every error raised by :mod:`momtransform`."""


class ConfigurationError(MomentTransformError, ValueError):
    """A parameter (depth, degree, tolerance) is outside its supported range."""


class InputError(MomentTransformError, ValueError):
    """Malformed or degenerate user input."""


class DomainError(InputError):
    """A point or parameter lies outside the set a map is defined on."""


class PreconditionError(MomentTransformError):
    """An operation was called on data that violates its precondition."""


class ReconstructionError(MomentTransformError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class InternalConsistencyError(MomentTransformError):
    """Two independent computations of the same quantity disagree."""


class CompositionError(MomentTransformError):
    """The image of the inner map leaves the domain of the outer map."""


class PipelineError(MomentTransformError):
    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate
