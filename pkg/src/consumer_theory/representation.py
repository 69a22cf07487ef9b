"""Utility extraction from a preference relation along the diagonal ray.

For a bundle x the extracted utility is the unique t >= 0 with t * 1 ~ x.
The search uses only the comparator: the set A = {t : t*1 >= x} is entered
by doubling T from 1, the lower end 0 lies in B = {t : x >= t*1}, and
bisection keeps ``lo`` in B and ``hi`` in A until the bracket is narrower
than twice the tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from consumer_theory.core import as_bundle, check_same_dim, ones
from consumer_theory.families import Utility
from consumer_theory.preferences import PreferenceRelation, SamplingConfig


class RepresentationError(RuntimeError):
    """Extraction failed; ``bracket`` holds the last (lo, hi) reached."""

    def __init__(self, message: str, bracket: tuple[float, float]):
        super().__init__(message)
        self.bracket = bracket


class NoBracket(RepresentationError):
    pass


class IterationLimit(RepresentationError):
    pass


@dataclass(frozen=True)
class ExtractionConfig:
    tolerance: float = 1e-9
    max_bracket: float = 1e9
    max_iterations: int = 200
    # x != 0 indifferent to both the origin and tol * 1 leaves t undetermined;
    # fail unless disabled
    strict_origin: bool = True

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be > 0, got {self.tolerance}")
        if not self.max_bracket > 0:
            raise ValueError(f"max_bracket must be > 0, got {self.max_bracket}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")


@dataclass(frozen=True)
class RayValue:
    value: float
    bracket_low: float
    bracket_high: float
    iterations: int = 0

    @property
    def width(self) -> float:
        return self.bracket_high - self.bracket_low


def extract_value(rel: PreferenceRelation, x, cfg: ExtractionConfig = ExtractionConfig()) -> RayValue:
    """The t with t * 1 ~ x, to within ``cfg.tolerance``.

    Raises NoBracket when the ray never becomes weakly preferred to x below
    ``cfg.max_bracket``, when x is not weakly preferred to the origin, or (with
    ``strict_origin``) when a nonzero x is indifferent to the origin and to
    ``tolerance * 1``; raises
    IterationLimit when bisection runs out of iterations.
    """
    x = as_bundle(x)
    check_same_dim(np.empty(rel.n), x)
    one = ones(rel.n)

    if not rel.weak_prefers(x, 0.0 * one):
        raise NoBracket("origin is strictly preferred to x; the ray has no lower end in B", (0.0, 0.0))
    if rel.weak_prefers(0.0 * one, x):
        # t = 0 is the answer only if every positive ray point beats x
        if cfg.strict_origin and np.any(x > 0) and rel.weak_prefers(x, cfg.tolerance * one):
            raise NoBracket("x is indifferent to the origin; no ray point above it separates A from B", (0.0, 0.0))
        return RayValue(0.0, 0.0, 0.0)

    lo, hi = 0.0, 1.0
    while True:
        probe = hi * one
        if rel.weak_prefers(probe, x):
            if rel.weak_prefers(x, probe):
                return RayValue(hi, hi, hi)
            break
        lo, hi = hi, 2.0 * hi
        if hi > cfg.max_bracket:
            raise NoBracket(f"no t <= {cfg.max_bracket:g} with t*1 weakly preferred to x", (lo, hi))

    iterations = 0
    while hi - lo > 2.0 * cfg.tolerance:
        if iterations >= cfg.max_iterations:
            raise IterationLimit(f"bracket width {hi - lo:.3g} after {iterations} iterations", (lo, hi))
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        iterations += 1
        probe = mid * one
        if rel.weak_prefers(probe, x):
            if rel.weak_prefers(x, probe):
                return RayValue(mid, mid, mid, iterations)
            hi = mid
        else:
            lo = mid
    return RayValue(0.5 * (lo + hi), lo, hi, iterations)


class ExtractedUtility(Utility):
    """Utility obtained pointwise from :func:`extract_value`.

    The gradient is a finite-difference estimate with step
    ``max(1e-5, 1e-5 * ||x||)``; central where the step stays in the orthant,
    forward otherwise.
    """

    def __init__(self, rel: PreferenceRelation, cfg: ExtractionConfig = ExtractionConfig()):
        self.rel = rel
        self.cfg = cfg
        self.n = rel.n

    def evaluate(self, x) -> float:
        return extract_value(self.rel, x, self.cfg).value

    def gradient(self, x) -> NDArray[np.float64]:
        x = np.asarray(self._vec(x))
        h = max(1e-5, 1e-5 * float(np.linalg.norm(x)))
        g = np.empty(self.n)
        f0 = None
        for i in range(self.n):
            up = x.copy()
            up[i] += h
            if x[i] >= h:
                down = x.copy()
                down[i] -= h
                g[i] = (self.evaluate(up) - self.evaluate(down)) / (2 * h)
            else:
                if f0 is None:
                    f0 = self.evaluate(x)
                g[i] = (self.evaluate(up) - f0) / h
        return g


def extract_function(rel: PreferenceRelation, cfg: ExtractionConfig = ExtractionConfig()) -> ExtractedUtility:
    return ExtractedUtility(rel, cfg)


@dataclass(frozen=True)
class OrdinalReport:
    pairs: int
    violations: int
    slack: float
    first_violation: tuple[NDArray[np.float64], NDArray[np.float64]] | None = None

    @property
    def ok(self) -> bool:
        return self.violations == 0


def ordinal_equivalence_check(
    rel: PreferenceRelation, u: Utility, cfg: SamplingConfig, slack: float = 2e-9
) -> OrdinalReport:
    """Count sampled pairs where ``u(x) >= u(y) - slack`` disagrees with ``x >= y``."""
    rng = np.random.default_rng([cfg.seed, 200])
    n = rel.n
    violations = 0
    first = None
    for _ in range(cfg.sample_count):
        x, y = cfg.sample(rng, n), cfg.sample(rng, n)
        if (u.evaluate(x) >= u.evaluate(y) - slack) != rel.weak_prefers(x, y):
            violations += 1
            if first is None:
                first = (as_bundle(x), as_bundle(y))
    return OrdinalReport(cfg.sample_count, violations, slack, first)
