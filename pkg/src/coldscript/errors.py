"""Shared exception types."""


class ColdScriptError(ValueError):
    """Base class for all library errors."""


class ConfigError(ColdScriptError):
    """A tunable was given a value outside its documented domain."""


class InvalidInputError(ColdScriptError):
    """Input data violates an operation's precondition."""


class DegenerateDataError(ColdScriptError):
    """Data is too small or too uniform for the requested operation."""


class ModelFormatError(ColdScriptError):
    """A persisted model file is unreadable or has the wrong version."""
