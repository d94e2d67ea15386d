"""Exception taxonomy shared across the package.

ValidationError covers everything caused by bad user input (flags, files,
matrices, shapes); the CLI maps it to exit code 2.  Runtime failures such as
a corrupted model file map to exit code 1.
"""


class ValidationError(ValueError):
    """Invalid user-supplied input (data, flags, matrices, shapes)."""


class DimensionMismatch(ValidationError):
    """Feature vector does not match the dimension a model was trained on."""
