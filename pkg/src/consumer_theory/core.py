"""Bundles, price systems and budget sets.

A bundle is a read-only 1-D float64 array with nonnegative entries. Price
systems and budget sets are frozen dataclasses; nothing here is mutable after
construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

Bundle = NDArray[np.float64]
BundleLike = Union[Bundle, Sequence[float]]


class DimensionError(ValueError):
    """Operands live in spaces of different dimension."""


class DegenerateInputError(ValueError):
    """Input is valid data but the operation is undefined for it (zero bundle, zero income)."""


class DomainError(ValueError):
    """Point lies outside the domain where a quantity is defined (boundary, s = 0, ...)."""


def _frozen(a: NDArray) -> NDArray:
    a.setflags(write=False)
    return a


def as_bundle(x: ArrayLike) -> Bundle:
    """Validate ``x`` as a point of the nonnegative orthant and return a read-only copy."""
    arr = np.array(x, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionError(f"bundle must be a non-empty 1-D vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"bundle has non-finite coordinates: {arr}")
    if np.any(arr < 0):
        raise ValueError(f"bundle has negative coordinates: {arr}")
    return _frozen(arr)


def ones(n: int) -> Bundle:
    """The all-ones bundle, generator of the reference ray t * 1."""
    if n < 1:
        raise DimensionError("dimension must be >= 1")
    return _frozen(np.ones(n))


def check_same_dim(*vectors: NDArray) -> int:
    n = len(vectors[0])
    for v in vectors[1:]:
        if len(v) != n:
            raise DimensionError(f"dimension mismatch: {n} vs {len(v)}")
    return n


@dataclass(frozen=True)
class PriceSystem:
    """Strictly positive prices with their total and normalized weights.

    ``weights[i] = prices[i] / total`` are the standardized prices; they sum to
    one up to rounding.
    """

    prices: NDArray[np.float64]
    total: float = field(init=False)
    weights: NDArray[np.float64] = field(init=False)

    def __post_init__(self):
        p = np.array(self.prices, dtype=np.float64)
        if p.ndim != 1 or p.size == 0:
            raise DimensionError(f"prices must be a non-empty 1-D vector, got shape {p.shape}")
        if not np.all(np.isfinite(p)) or np.any(p <= 0):
            raise ValueError(f"prices must be finite and strictly positive: {p}")
        total = float(np.sum(p))
        object.__setattr__(self, "prices", _frozen(p))
        object.__setattr__(self, "total", total)
        object.__setattr__(self, "weights", _frozen(p / total))

    @property
    def n(self) -> int:
        return len(self.prices)

    def scaled(self, factor: float) -> PriceSystem:
        return PriceSystem(self.prices * factor)

    def __eq__(self, other):
        if not isinstance(other, PriceSystem):
            return NotImplemented
        return np.array_equal(self.prices, other.prices)

    def __hash__(self):
        return hash(self.prices.tobytes())


@dataclass(frozen=True)
class BudgetSet:
    """The opportunity set {x >= 0 : <p, x> <= r}. Always contains 0."""

    prices: PriceSystem
    income: float

    def __post_init__(self):
        r = float(self.income)
        if not np.isfinite(r) or r < 0:
            raise ValueError(f"income must be finite and >= 0, got {self.income}")
        object.__setattr__(self, "income", r)

    @property
    def n(self) -> int:
        return self.prices.n

    def contains(self, x: BundleLike, rtol: float = 1e-9) -> bool:
        x = as_bundle(x)
        return inner_product(self.prices, x) <= self.income + rtol * (1.0 + self.income)


def _prices_of(p: PriceSystem | ArrayLike) -> NDArray:
    return p.prices if isinstance(p, PriceSystem) else np.asarray(p, dtype=np.float64)


def inner_product(p: PriceSystem | ArrayLike, x: BundleLike) -> float:
    """Expenditure <p, x>."""
    prices = _prices_of(p)
    x = np.asarray(x, dtype=np.float64)
    check_same_dim(prices, x)
    return float(prices @ x)


def dominates(x: BundleLike, y: BundleLike) -> bool:
    """True iff x >= y componentwise and x != y."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    check_same_dim(x, y)
    return bool(np.all(x >= y) and np.any(x != y))


def project_to_budget_line(b: BudgetSet, x: BundleLike) -> Bundle:
    """Radially rescale ``x`` onto the budget hyperplane <p, x> = r."""
    x = as_bundle(x)
    check_same_dim(b.prices.prices, x)
    if b.income == 0:
        raise DegenerateInputError("zero income: budget line is the single point 0")
    spent = inner_product(b.prices, x)
    if spent == 0:
        raise DegenerateInputError("cannot rescale the zero bundle onto the budget line")
    return _frozen(x * (b.income / spent))
