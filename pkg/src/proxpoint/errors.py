"""Error types shared across the toolkit.

Argument errors use the builtin ValueError; the classes below cover failures
that arise mid-run.
"""

from __future__ import annotations


class ContractError(RuntimeError):
    """A data-structure contract was violated (e.g. non-monotone trace)."""


class NumericalError(RuntimeError):
    """A numerical kernel failed (divergence, SVD breakdown, ...)."""


class BudgetError(RuntimeError):
    """An iteration budget was exhausted before certification.

    Carries the best iterate found so far in ``best`` when available.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
