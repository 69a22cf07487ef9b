"""Utility functions of the form F(<p, x> / P) and their companions.

Every utility in this module is immutable and carries a hand-derived
gradient. ``WeightedAverageUtility`` is the general member ``F(s(x))`` with
``s(x) = sum_i (p_i / P) x_i``; the three named families (exponential,
linear, log) are specializations with a named standard-utility parameter. Cobb-Douglas is kept
alongside as the generic (non-solution) test family and the demand oracle.

Utilities are built from plain mappings (``UtilitySpec``), for example::

    {"family": "linear", "beta": 1, "p": [1, 2]}
    {"family": "exponential", "alpha": 2, "p": [1, 1]}
    {"family": "log", "gamma": 5, "p": [1, 1]}
    {"family": "cobb_douglas", "a": [1, 3]}
    {"family": "weighted_average", "F": {"name": "power", "k": 0.5}, "p": [1, 1]}
"""

from __future__ import annotations

import math
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Callable, Mapping

import numpy as np
from numpy.typing import NDArray

from consumer_theory.core import (
    DimensionError,
    DomainError,
    PriceSystem,
    check_same_dim,
    inner_product,
)

FAMILIES = ("weighted_average", "exponential", "linear", "log", "cobb_douglas")


class UtilitySpecError(ValueError):
    """A utility specification is malformed or has out-of-range parameters."""


class Utility(ABC):
    """Deterministic differentiable scalar field on the nonnegative orthant."""

    n: int

    @abstractmethod
    def evaluate(self, x) -> float: ...

    @abstractmethod
    def gradient(self, x) -> NDArray[np.float64]: ...

    def __call__(self, x) -> float:
        return self.evaluate(x)

    def to_spec(self) -> dict:
        raise NotImplementedError(f"{type(self).__name__} has no textual form")

    def _vec(self, x) -> NDArray[np.float64]:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.n,):
            raise DimensionError(f"expected a bundle of dimension {self.n}, got shape {x.shape}")
        return x


# --- outer functions F for the weighted-average family ------------------------


@dataclass(frozen=True)
class OuterFunction:
    """A named, serializable scalar function F with its derivative."""

    name: str
    params: tuple[tuple[str, float], ...]
    f: Callable[[float], float]
    df: Callable[[float], float]

    def param(self, key: str) -> float:
        return dict(self.params)[key]

    def to_spec(self) -> dict:
        return {"name": self.name, **dict(self.params)}


def _log_f(gamma: float):
    def f(s: float) -> float:
        if s <= 0:
            raise DomainError(f"log family undefined at s = {s} (needs s > 0)")
        return gamma * math.log(s)

    def df(s: float) -> float:
        if s <= 0:
            raise DomainError(f"log family undefined at s = {s} (needs s > 0)")
        return gamma / s

    return f, df


def outer_identity() -> OuterFunction:
    return OuterFunction("identity", (), lambda s: s, lambda s: 1.0)


def outer_affine(c0: float, c1: float) -> OuterFunction:
    return OuterFunction(
        "affine", (("c0", c0), ("c1", c1)), lambda s: c0 + c1 * s, lambda s: c1
    )


def outer_power(k: float) -> OuterFunction:
    if k <= 0:
        raise UtilitySpecError(f"power outer function needs k > 0, got {k}")

    def df(s: float) -> float:
        if s == 0 and k < 1:
            raise DomainError(f"power outer function with k={k} has no derivative at s = 0")
        return k * s ** (k - 1)

    return OuterFunction("power", (("k", k),), lambda s: s**k, df)


def outer_exp(alpha: float) -> OuterFunction:
    if alpha <= 0 or alpha == 1:
        raise UtilitySpecError(f"exponential base must be > 0 and != 1, got {alpha}")
    log_a = math.log(alpha)
    return OuterFunction(
        "exp", (("alpha", alpha),), lambda s: alpha**s, lambda s: alpha**s * log_a
    )


def outer_log(gamma: float) -> OuterFunction:
    f, df = _log_f(gamma)
    return OuterFunction("log", (("gamma", gamma),), f, df)


_OUTER_CATALOG: dict[str, tuple[Callable[..., OuterFunction], tuple[str, ...]]] = {
    "identity": (outer_identity, ()),
    "affine": (outer_affine, ("c0", "c1")),
    "power": (outer_power, ("k",)),
    "exp": (outer_exp, ("alpha",)),
    "log": (outer_log, ("gamma",)),
}


def make_outer(spec: str | Mapping[str, Any]) -> OuterFunction:
    if isinstance(spec, str):
        spec = {"name": spec}
    if not isinstance(spec, Mapping) or "name" not in spec:
        raise UtilitySpecError(f"F must be a catalog name or a mapping with 'name', got {spec!r}")
    name = spec["name"]
    if name not in _OUTER_CATALOG:
        raise UtilitySpecError(f"F: unknown outer function {name!r}; choose from {sorted(_OUTER_CATALOG)}")
    factory, keys = _OUTER_CATALOG[name]
    extra = set(spec) - {"name", *keys}
    if extra:
        raise UtilitySpecError(f"F: unexpected fields {sorted(extra)} for {name!r}")
    missing = [k for k in keys if k not in spec]
    if missing:
        raise UtilitySpecError(f"F: missing fields {missing} for {name!r}")
    return factory(*(_number(spec[k], f"F.{k}") for k in keys))


# --- the F(<p,x>/P) family ----------------------------------------------------


class WeightedAverageUtility(Utility):
    """u(x) = F(s(x)), s(x) = <p, x> / sum(p).

    Constant along every budget hyperplane with the same prices, which is
    exactly what makes it solve the first-order PDE checked by
    :func:`pde_residual`.
    """

    family = "weighted_average"

    def __init__(self, prices: PriceSystem, outer: OuterFunction):
        self.prices = prices
        self.outer = outer
        self.n = prices.n

    def s(self, x) -> float:
        return float(self.prices.weights @ self._vec(x))

    def evaluate(self, x) -> float:
        return float(self.outer.f(self.s(x)))

    def outer_derivative(self, x) -> float:
        return float(self.outer.df(self.s(x)))

    def gradient(self, x) -> NDArray[np.float64]:
        return self.outer_derivative(x) * self.prices.weights

    def to_spec(self) -> dict:
        return {"family": "weighted_average", "F": self.outer.to_spec(), "p": self.prices.prices.tolist()}

    def __repr__(self):
        return f"{type(self).__name__}({self.to_spec()})"


class ExponentialUtility(WeightedAverageUtility):
    """alpha ** s(x); alpha is the utility of the unit bundle.

    Decreasing in every good when alpha < 1; see ``is_increasing``.
    """

    family = "exponential"

    def __init__(self, alpha: float, prices: PriceSystem):
        super().__init__(prices, outer_exp(alpha))
        self.alpha = alpha

    @property
    def is_increasing(self) -> bool:
        return self.alpha > 1

    def to_spec(self) -> dict:
        return {"family": "exponential", "alpha": self.alpha, "p": self.prices.prices.tolist()}


class LinearUtility(WeightedAverageUtility):
    """beta * sum_i w_i x_i with w the standardized prices."""

    family = "linear"

    def __init__(self, beta: float, prices: PriceSystem):
        super().__init__(prices, outer_affine(0.0, beta))
        self.beta = beta

    def gradient(self, x) -> NDArray[np.float64]:
        self._vec(x)
        return self.beta * self.prices.weights

    def to_spec(self) -> dict:
        return {"family": "linear", "beta": self.beta, "p": self.prices.prices.tolist()}


class LogUtility(WeightedAverageUtility):
    """gamma * ln s(x): zero at the unit bundle, gamma at e * 1."""

    family = "log"

    def __init__(self, gamma: float, prices: PriceSystem):
        super().__init__(prices, outer_log(gamma))
        self.gamma = gamma

    def to_spec(self) -> dict:
        return {"family": "log", "gamma": self.gamma, "p": self.prices.prices.tolist()}


# --- other utilities ----------------------------------------------------------


class CobbDouglasUtility(Utility):
    """prod_i x_i ** a_i with a_i > 0."""

    family = "cobb_douglas"

    def __init__(self, exponents):
        a = np.array(exponents, dtype=np.float64)
        if a.ndim != 1 or a.size == 0:
            raise UtilitySpecError("cobb_douglas exponents must be a non-empty list")
        if not np.all(np.isfinite(a)) or np.any(a <= 0):
            raise UtilitySpecError(f"cobb_douglas exponents must be > 0, got {a.tolist()}")
        a.setflags(write=False)
        self.exponents = a
        self.n = a.size

    def evaluate(self, x) -> float:
        x = self._vec(x)
        return float((x**self.exponents).prod())

    def gradient(self, x) -> NDArray[np.float64]:
        x = self._vec(x)
        powers = x**self.exponents
        g = np.empty(self.n)
        with np.errstate(divide="ignore", invalid="ignore"):
            for i in range(self.n):
                others = np.prod(np.delete(powers, i))
                g[i] = self.exponents[i] * x[i] ** (self.exponents[i] - 1) * others
        return g

    def to_spec(self) -> dict:
        return {"family": "cobb_douglas", "a": self.exponents.tolist()}

    def __repr__(self):
        return f"CobbDouglasUtility(a={self.exponents.tolist()})"


class ConstantUtility(Utility):
    def __init__(self, n: int, value: float = 0.0):
        self.n = n
        self.value = float(value)

    def evaluate(self, x) -> float:
        self._vec(x)
        return self.value

    def gradient(self, x) -> NDArray[np.float64]:
        self._vec(x)
        return np.zeros(self.n)


class LinearCombination(Utility):
    """a1 * u1 + a2 * u2."""

    def __init__(self, u1: Utility, u2: Utility, a1: float, a2: float):
        if u1.n != u2.n:
            raise DimensionError(f"cannot combine utilities of dimension {u1.n} and {u2.n}")
        self.u1, self.u2, self.a1, self.a2 = u1, u2, float(a1), float(a2)
        self.n = u1.n

    def evaluate(self, x) -> float:
        return self.a1 * self.u1.evaluate(x) + self.a2 * self.u2.evaluate(x)

    def gradient(self, x) -> NDArray[np.float64]:
        return self.a1 * self.u1.gradient(x) + self.a2 * self.u2.gradient(x)


def linear_combine(u1: Utility, u2: Utility, a1: float, a2: float) -> Utility:
    return LinearCombination(u1, u2, a1, a2)


# --- specs --------------------------------------------------------------------


def _number(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise UtilitySpecError(f"field {name!r} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise UtilitySpecError(f"field {name!r} must be finite")
    return value


def _numbers(value, name: str) -> list[float]:
    if not isinstance(value, (list, tuple)) or not value:
        raise UtilitySpecError(f"field {name!r} must be a non-empty list of numbers, got {value!r}")
    return [_number(v, f"{name}[{i}]") for i, v in enumerate(value)]


def _price_field(spec: Mapping[str, Any]) -> PriceSystem:
    if "p" not in spec:
        raise UtilitySpecError(f"family {spec['family']!r} requires a price list 'p'")
    p = _numbers(spec["p"], "p")
    if any(v <= 0 for v in p):
        raise UtilitySpecError(f"field 'p' must be strictly positive, got {p}")
    return PriceSystem(np.array(p))


_FIELDS = {
    "weighted_average": {"F", "p"},
    "exponential": {"alpha", "p"},
    "linear": {"beta", "p"},
    "log": {"gamma", "p"},
    "cobb_douglas": {"a"},
}


def make_utility(spec: Mapping[str, Any]) -> Utility:
    """Build a utility from its textual specification (see module docstring)."""
    if not isinstance(spec, Mapping):
        raise UtilitySpecError(f"utility spec must be a mapping, got {type(spec).__name__}")
    family = spec.get("family")
    if family not in _FIELDS:
        raise UtilitySpecError(f"unknown family {family!r}; choose from {list(FAMILIES)}")
    allowed = _FIELDS[family] | {"family"}
    extra = set(spec) - allowed
    if extra:
        raise UtilitySpecError(f"unexpected fields {sorted(extra)} for family {family!r}")
    for key in sorted(_FIELDS[family]):
        if key not in spec:
            raise UtilitySpecError(f"family {family!r} requires field {key!r}")

    if family == "cobb_douglas":
        return CobbDouglasUtility(_numbers(spec["a"], "a"))
    prices = _price_field(spec)
    if family == "weighted_average":
        return WeightedAverageUtility(prices, make_outer(spec["F"]))
    if family == "exponential":
        alpha = _number(spec["alpha"], "alpha")
        if alpha <= 0 or alpha == 1:
            raise UtilitySpecError(f"field 'alpha' must be > 0 and != 1, got {alpha}")
        if alpha < 1:
            warnings.warn(f"exponential utility with alpha={alpha} < 1 is decreasing in every good", stacklevel=2)
        return ExponentialUtility(alpha, prices)
    if family == "linear":
        return LinearUtility(_number(spec["beta"], "beta"), prices)
    return LogUtility(_number(spec["gamma"], "gamma"), prices)


# --- PDE and gradient checks --------------------------------------------------


def _require_interior(x, what: str) -> NDArray[np.float64]:
    x = np.asarray(x, dtype=np.float64)
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise DomainError(f"{what} needs an interior bundle (all coordinates > 0), got {x}")
    return x


def pde_residual(u: Utility, p: PriceSystem, x) -> float:
    """(x_1 - r/p_1) du/dx_1 + sum_{i>=2} x_i du/dx_i with r = <p, x>.

    Zero for every utility of the form F(<p, x>/P) with the same prices.
    """
    x = _require_interior(x, "pde_residual")
    check_same_dim(p.prices, x)
    r = inner_product(p, x)
    g = u.gradient(x)
    return float((x[0] - r / p.prices[0]) * g[0] + x[1:] @ g[1:])


def pde_residual_scale(u: Utility, x) -> float:
    """Magnitude against which a residual of ``u`` at ``x`` is judged.

    ``1 + |F'(s)| * ||x||`` for the F(<p,x>/P) family, combined linearly for
    linear combinations, and ``1 + ||grad u|| * ||x||`` otherwise.
    """
    x = np.asarray(x, dtype=np.float64)
    norm = float(np.linalg.norm(x))
    if isinstance(u, WeightedAverageUtility):
        return 1.0 + abs(u.outer_derivative(x)) * norm
    if isinstance(u, LinearCombination):
        s1 = pde_residual_scale(u.u1, x) - 1.0
        s2 = pde_residual_scale(u.u2, x) - 1.0
        return 1.0 + abs(u.a1) * s1 + abs(u.a2) * s2
    return 1.0 + float(np.linalg.norm(u.gradient(x))) * norm


def reparam_equivalence(alpha: float, p: PriceSystem, x) -> tuple[float, float]:
    """Both sides of alpha**(sum w_i x_i) == prod_i (alpha**x_i)**w_i.

    The right-hand side is a Cobb-Douglas function of z_i = alpha**x_i with the
    standardized prices as exponents.
    """
    if alpha <= 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    x = np.asarray(x, dtype=np.float64)
    check_same_dim(p.prices, x)
    lhs = float(alpha ** float(p.weights @ x))
    z = alpha**x
    rhs = float(np.prod(z**p.weights))
    return lhs, rhs


def finite_difference_gradient(u: Utility, x, h: float = 1e-6) -> NDArray[np.float64]:
    """Central-difference gradient of ``u`` at an interior point ``x``."""
    if h <= 0:
        raise ValueError(f"step must be > 0, got {h}")
    x = _require_interior(x, "finite_difference_gradient")
    if np.any(x - h < 0):
        raise DomainError(f"step h={h} leaves the orthant at {x}")
    g = np.empty_like(x)
    for i in range(x.size):
        up = x.copy()
        down = x.copy()
        up[i] += h
        down[i] -= h
        g[i] = (u.evaluate(up) - u.evaluate(down)) / (2 * h)
    return g
