"""Preference relations, utility representation, and consumer demand."""

from consumer_theory.core import (
    BudgetSet,
    DegenerateInputError,
    DimensionError,
    DomainError,
    PriceSystem,
    as_bundle,
    dominates,
    inner_product,
    ones,
    project_to_budget_line,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetSet",
    "DegenerateInputError",
    "DimensionError",
    "DomainError",
    "PriceSystem",
    "as_bundle",
    "dominates",
    "inner_product",
    "ones",
    "project_to_budget_line",
]
