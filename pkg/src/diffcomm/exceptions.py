"""Exception types raised across the package.

All of them derive from ``ValueError`` so callers that only care about
"bad input" can catch that.
"""


class FormatError(ValueError):
    """Input text does not follow the expected line format."""


class ParseError(FormatError):
    """A token could not be read as an integer or real."""


class RangeError(ValueError):
    """A node id or value falls outside its allowed range."""


class ConfigError(ValueError):
    """Inconsistent or invalid configuration."""


class ModelMismatchError(ValueError):
    """A diffusion step was applied to a state of the wrong representation."""


class StateError(RuntimeError):
    """An object was used before it reached the required state."""


class ModeError(ValueError):
    """An operation received a cover in a mode it does not accept."""
