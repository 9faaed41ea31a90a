"""Exception hierarchy shared by the library and the CLI."""


class CasimirError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class ConfigError(CasimirError, ValueError):
    """Invalid user input: rule text, presets, stack geometry, grids."""

    exit_code = 2


class RuleParseError(ConfigError):
    """Malformed substitution-rule text.

    Carries the 1-based ``line`` and ``column`` of the offending token.
    """

    def __init__(self, message, line, column):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class NumericalError(CasimirError, ArithmeticError):
    """Non-convergent quadrature or a non-positive scattering determinant."""

    exit_code = 3


class UnsupportedError(CasimirError, NotImplementedError):
    """Request outside the implemented closed forms (e.g. N > 3 Green's function)."""

    exit_code = 2


class OracleNotApplicable(UnsupportedError):
    """Transfer-matrix oracle requested for a stack containing opaque plates."""
