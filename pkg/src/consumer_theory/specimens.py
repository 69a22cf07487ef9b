"""Named pathological preference relations and relation specs.

A relation spec is one of::

    {"specimen": "threshold", "n": 2}
    {"utility": {"family": "cobb_douglas", "a": [1, 1]}}
    {"family": "cobb_douglas", "a": [1, 1]}          # bare utility spec

Built-in specimens: ``threshold``, ``constant``, ``leontief_min``,
``satiated_quadratic``, ``cyclic3``.
"""

from __future__ import annotations

from typing import Any, Mapping

import numpy as np
from numpy.typing import NDArray

from consumer_theory.core import as_bundle
from consumer_theory.families import ConstantUtility, Utility, UtilitySpecError, make_utility
from consumer_theory.preferences import PreferenceRelation, UtilityInduced


class ThresholdUtility(Utility):
    """1 if x_1 > level else 0: the upper contour sets of the top class are open."""

    def __init__(self, n: int, level: float = 1.0):
        self.n = n
        self.level = level

    def evaluate(self, x) -> float:
        return 1.0 if self._vec(x)[0] > self.level else 0.0

    def gradient(self, x) -> NDArray[np.float64]:
        self._vec(x)
        return np.zeros(self.n)


class LeontiefMin(Utility):
    """min_i x_i; every bundle off the diagonal is redundant."""

    def __init__(self, n: int):
        self.n = n

    def evaluate(self, x) -> float:
        return float(self._vec(x).min())

    def gradient(self, x) -> NDArray[np.float64]:
        x = self._vec(x)
        g = np.zeros(self.n)
        g[int(np.argmin(x))] = 1.0
        return g


class SatiatedQuadratic(Utility):
    """-||x - c||^2, maximal at the bliss point c."""

    def __init__(self, n: int, center=None):
        self.n = n
        self.center = np.ones(n) if center is None else np.asarray(center, dtype=np.float64)

    def evaluate(self, x) -> float:
        d = self._vec(x) - self.center
        return float(-(d @ d))

    def gradient(self, x) -> NDArray[np.float64]:
        return -2.0 * (self._vec(x) - self.center)


class Cyclic3(PreferenceRelation):
    """Complete but intransitive: rock-paper-scissors over three share classes.

    A bundle's class is ``min(2, floor(3 * x_1 / sum(x)))``. Class k strictly
    beats class (k + 1) mod 3; inside a class, larger totals are preferred.
    """

    def __init__(self, n: int = 2):
        if n < 2:
            raise ValueError("cyclic3 needs at least two goods")
        self.n = n
        self.probe_points = tuple(
            as_bundle(np.r_[v, np.zeros(n - 2)]) for v in ([0.0, 3.0], [1.5, 1.5], [3.0, 0.0])
        )

    @staticmethod
    def share_class(x) -> int:
        x = np.asarray(x, dtype=np.float64)
        total = float(x.sum())
        if total == 0:
            return 0
        return min(2, int(3 * x[0] / total))

    def weak_prefers(self, x, y) -> bool:
        cx, cy = self.share_class(x), self.share_class(y)
        if cx == cy:
            return float(np.sum(x)) >= float(np.sum(y))
        return (cx + 1) % 3 == cy


SPECIMENS = ("threshold", "constant", "leontief_min", "satiated_quadratic", "cyclic3")


def make_specimen(name: str, n: int = 2) -> PreferenceRelation:
    if n < 1:
        raise ValueError("dimension must be >= 1")
    if name == "threshold":
        probes = [np.r_[2.0, np.zeros(n - 1)]]
        return UtilityInduced(ThresholdUtility(n), probes=probes, name="threshold")
    if name == "constant":
        return UtilityInduced(ConstantUtility(n), name="constant")
    if name == "leontief_min":
        probes = [np.r_[2.0, np.ones(n - 1)]]
        return UtilityInduced(LeontiefMin(n), probes=probes, name="leontief_min")
    if name == "satiated_quadratic":
        return UtilityInduced(SatiatedQuadratic(n), probes=[np.ones(n)], name="satiated_quadratic")
    if name == "cyclic3":
        return Cyclic3(n)
    raise KeyError(f"unknown specimen {name!r}; choose from {list(SPECIMENS)}")


def load_relation(spec: Mapping[str, Any]) -> PreferenceRelation:
    """Build a relation from a specimen name or a utility spec (see module docstring)."""
    if not isinstance(spec, Mapping):
        raise UtilitySpecError(f"relation spec must be a mapping, got {type(spec).__name__}")
    if "specimen" in spec:
        n = spec.get("n", 2)
        if isinstance(n, bool) or not isinstance(n, int):
            raise UtilitySpecError(f"field 'n' must be an integer, got {n!r}")
        return make_specimen(spec["specimen"], n)
    utility_spec = spec["utility"] if "utility" in spec else spec
    u = make_utility(utility_spec)
    return UtilityInduced(u, name=utility_spec.get("family"))
