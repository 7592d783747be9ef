"""Exception types shared by the package.

The CLI maps these onto process exit codes (see ``antsel.cli``).
"""


class AntselError(Exception):
    """Base class for all package errors."""


class ConfigurationError(AntselError, ValueError):
    """A configuration object or argument violates its invariants."""


class DimensionError(AntselError, ValueError):
    """Array shapes or antenna indices are mutually inconsistent."""


class NumericError(AntselError, ArithmeticError):
    """Non-finite input or a failed factorization."""


class BudgetError(AntselError):
    """An exhaustive enumeration would exceed its configured budget."""

    def __init__(self, n_subsets, budget):
        self.n_subsets = n_subsets
        self.budget = budget
        super().__init__(
            f"exhaustive search over C(n_tx, n_t) = {n_subsets} subsets "
            f"exceeds budget {budget}"
        )
