"""Preference relations and sampling falsifiers for the preference axioms.

Every checker here is one-sided: a ``violated`` verdict comes with a concrete
counterexample that :func:`recheck` reproduces, while ``no-violation-found``
only means the sample did not refute the axiom.

Sampling is uniform on ``[0, box_upper]^n``. Each checker draws from its own
stream seeded by ``(cfg.seed, axiom)``, so a report does not depend on which
other checkers ran before it. Relations may expose ``probe_points``; those are
examined before any random sample.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from numpy.typing import NDArray

from consumer_theory.core import as_bundle, check_same_dim, dominates, ones

AXIOMS = (
    "completeness",
    "transitivity",
    "continuity",
    "strong_monotonicity",
    "strict_convexity",
    "local_nonsatiation",
)

NO_VIOLATION = "no-violation-found"
VIOLATED = "violated"


class PreferenceRelation(ABC):
    """Weak preference ``x >= y`` on bundles of a fixed dimension ``n``."""

    n: int
    probe_points: tuple[NDArray[np.float64], ...] = ()

    @abstractmethod
    def weak_prefers(self, x, y) -> bool: ...


class UtilityInduced(PreferenceRelation):
    """x >= y iff w(x) >= w(y) for a scalar field w (anything with ``evaluate`` and ``n``)."""

    def __init__(self, base, probes: Sequence = (), name: str | None = None):
        self.base = base
        self.n = base.n
        self.probe_points = tuple(as_bundle(p) for p in probes)
        self.name = name or type(base).__name__

    def weak_prefers(self, x, y) -> bool:
        return self.base.evaluate(x) >= self.base.evaluate(y)

    def __repr__(self):
        return f"UtilityInduced({self.name})"


def _dims(rel: PreferenceRelation, *bundles) -> None:
    check_same_dim(np.empty(rel.n), *(np.asarray(b) for b in bundles))


def strictly_prefers(rel: PreferenceRelation, x, y) -> bool:
    _dims(rel, x, y)
    return rel.weak_prefers(x, y) and not rel.weak_prefers(y, x)


def indifferent(rel: PreferenceRelation, x, y) -> bool:
    _dims(rel, x, y)
    return rel.weak_prefers(x, y) and rel.weak_prefers(y, x)


@dataclass(frozen=True)
class SamplingConfig:
    sample_count: int = 200
    box_upper: float = 4.0
    seed: int = 20240601
    epsilon: float = 0.1
    indifference_tol: float = 1e-6
    candidates: int = 32

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError(f"sample_count must be >= 1, got {self.sample_count}")
        if not self.box_upper > 0:
            raise ValueError(f"box_upper must be > 0, got {self.box_upper}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if self.indifference_tol < 0:
            raise ValueError(f"indifference_tol must be >= 0, got {self.indifference_tol}")
        if self.candidates < 1:
            raise ValueError(f"candidates must be >= 1, got {self.candidates}")

    def rng(self, stream: str) -> np.random.Generator:
        return np.random.default_rng([self.seed, AXIOMS.index(stream) if stream in AXIOMS else 99])

    def sample(self, rng: np.random.Generator, n: int) -> NDArray[np.float64]:
        return rng.uniform(0.0, self.box_upper, size=n)


@dataclass(frozen=True)
class AxiomReport:
    axiom: str
    verdict: str
    counterexample: tuple[NDArray[np.float64], ...] | None
    samples_used: int
    seed: int
    vacuous: bool = False
    candidates_per_point: int | None = None
    note: str = ""

    @property
    def violated(self) -> bool:
        return self.verdict == VIOLATED

    def as_row(self) -> dict:
        cx = "" if self.counterexample is None else ";".join(
            "(" + ",".join(f"{v:.12g}" for v in b) + ")" for b in self.counterexample
        )
        return {
            "axiom": self.axiom,
            "verdict": self.verdict,
            "samples_used": self.samples_used,
            "vacuous": self.vacuous,
            "counterexample": cx,
            "note": self.note,
        }


def _report(axiom, cfg, used, counterexample=None, **kw) -> AxiomReport:
    if counterexample is None:
        return AxiomReport(axiom, NO_VIOLATION, None, used, cfg.seed, **kw)
    cx = tuple(as_bundle(b) for b in counterexample)
    return AxiomReport(axiom, VIOLATED, cx, used, cfg.seed, **kw)


# --- redundancy ----------------------------------------------------------------


class Redundancy(NamedTuple):
    redundant: bool
    witness: NDArray[np.float64] | None

    def __bool__(self):
        return self.redundant


def _dominated_candidates(x: NDArray, cfg: SamplingConfig) -> list[NDArray]:
    """Bundles y <= x, y != x: single-coordinate cuts first, then random shrinks."""
    n = x.size
    out = []
    for frac in (0.5, 0.25, 0.75, 0.0, 1 - 1e-3, 1 - 1e-6):
        for i in range(n):
            if x[i] > 0:
                y = x.copy()
                y[i] = x[i] * frac
                out.append(y)
    rng = np.random.default_rng([cfg.seed, 101])
    for _ in range(cfg.candidates):
        out.append(x * rng.uniform(0.0, 1.0, size=n))
    return out


def is_redundant(rel: PreferenceRelation, x, cfg: SamplingConfig) -> Redundancy:
    """Search bundles dominated by ``x`` for one indifferent to it.

    ``False`` only means no witness was found among the candidates.
    """
    x = as_bundle(x)
    _dims(rel, x)
    if not np.any(x > 0):
        return Redundancy(False, None)
    for y in _dominated_candidates(x, cfg):
        if indifferent(rel, x, y):
            return Redundancy(True, as_bundle(y))
    return Redundancy(False, None)


def find_redundant(rel: PreferenceRelation, cfg: SamplingConfig) -> tuple[NDArray, NDArray] | None:
    """First redundant bundle (with witness) among probe points and samples, or None."""
    rng = np.random.default_rng([cfg.seed, 100])
    points = list(rel.probe_points) + [cfg.sample(rng, rel.n) for _ in range(cfg.sample_count)]
    for x in points:
        red = is_redundant(rel, x, cfg)
        if red:
            return as_bundle(x), red.witness
    return None


# --- checkers --------------------------------------------------------------------


def _completeness_fails(rel, x, y) -> bool:
    return not (rel.weak_prefers(x, y) or rel.weak_prefers(y, x))


def check_completeness(rel: PreferenceRelation, cfg: SamplingConfig) -> AxiomReport:
    probes = rel.probe_points
    pairs = [(a, b) for a in probes for b in probes]
    rng = cfg.rng("completeness")
    pairs += [(cfg.sample(rng, rel.n), cfg.sample(rng, rel.n)) for _ in range(cfg.sample_count)]
    for used, (x, y) in enumerate(pairs, 1):
        if _completeness_fails(rel, x, y):
            return _report("completeness", cfg, used, (x, y))
    return _report("completeness", cfg, len(pairs))


def _transitivity_fails(rel, x, y, z) -> bool:
    return rel.weak_prefers(x, y) and rel.weak_prefers(y, z) and not rel.weak_prefers(x, z)


def check_transitivity(rel: PreferenceRelation, cfg: SamplingConfig) -> AxiomReport:
    probes = rel.probe_points
    triples = [(a, b, c) for a in probes for b in probes for c in probes]
    rng = cfg.rng("transitivity")
    triples += [tuple(cfg.sample(rng, rel.n) for _ in range(3)) for _ in range(cfg.sample_count)]
    for used, (x, y, z) in enumerate(triples, 1):
        if _transitivity_fails(rel, x, y, z):
            return _report("transitivity", cfg, used, (x, y, z))
    return _report("transitivity", cfg, len(triples))


def _monotonicity_fails(rel, x, y) -> bool:
    return dominates(x, y) and not strictly_prefers(rel, x, y)


def check_strong_monotonicity(rel: PreferenceRelation, cfg: SamplingConfig) -> AxiomReport:
    """Pairs x >= y, x != y must satisfy x > y strictly.

    Dominated partners are built from x: even-indexed samples shrink one
    coordinate, odd-indexed samples shrink all coordinates at random.
    """
    probes = rel.probe_points
    pairs = [(a, b) for a in probes for b in probes if dominates(a, b)]
    rng = cfg.rng("strong_monotonicity")
    n = rel.n
    for k in range(cfg.sample_count):
        x = cfg.sample(rng, n)
        y = x.copy()
        if k % 2 == 0:
            i = (k // 2) % n
            y[i] = x[i] * rng.uniform(0.0, 1.0)
        else:
            y = x * rng.uniform(0.0, 1.0, size=n)
        if dominates(x, y):
            pairs.append((x, y))
    for used, (x, y) in enumerate(pairs, 1):
        if _monotonicity_fails(rel, x, y):
            return _report("strong_monotonicity", cfg, used, (x, y))
    return _report("strong_monotonicity", cfg, len(pairs))


# continuity


def _segment_switch(rel, y, a, b, max_iter: int = 200) -> tuple[NDArray, NDArray]:
    """Bisect the segment a -> b for the point where ``point >= y`` stops holding.

    Requires ``a >= y`` and not ``b >= y``; returns the last point on each side.
    """
    d = b - a
    lo, hi = 0.0, 1.0
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if rel.weak_prefers(a + mid * d, y):
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14:
            break
    return a + lo * d, a + hi * d


def _continuity_gap(rel, y, a, b, cfg: SamplingConfig) -> float | None:
    """Ray-scale distance between y and the two sides of the switch on [a, b].

    None when the segment is uninformative or the ray scale is unavailable.
    """
    from consumer_theory.representation import ExtractionConfig, RepresentationError, extract_value

    if not (rel.weak_prefers(a, y) and not rel.weak_prefers(b, y)):
        return None
    x_lo, x_hi = _segment_switch(rel, y, a, b)
    ecfg = ExtractionConfig(tolerance=max(cfg.indifference_tol * 1e-3, 1e-12), strict_origin=False)
    try:
        t_y = extract_value(rel, y, ecfg).value
        t_lo = extract_value(rel, np.maximum(x_lo, 0.0), ecfg).value
        t_hi = extract_value(rel, np.maximum(x_hi, 0.0), ecfg).value
    except RepresentationError:
        return None
    return max(abs(t_lo - t_y), abs(t_hi - t_y)) / (1.0 + abs(t_y))


def check_continuity(rel: PreferenceRelation, cfg: SamplingConfig) -> AxiomReport:
    """Probe closedness of the contour sets of sampled references y.

    For each segment [a, b] with ``a >= y`` and not ``b >= y`` the switch point
    is located by bisection. Closed upper and lower contour sets force that
    point to be indifferent to y; indifference is measured on the ray scale
    (the value t with t * 1 ~ x), so a jump in the relation shows up as a gap
    that does not shrink with the bisection width. Only informative segments
    count towards ``samples_used``.
    """
    rng = cfg.rng("continuity")
    n = rel.n
    refs = list(rel.probe_points) + [None] * cfg.sample_count
    used = 0
    for y in refs:
        y = cfg.sample(rng, n) if y is None else np.array(y)
        a, b = cfg.sample(rng, n), cfg.sample(rng, n)
        gap = _continuity_gap(rel, y, a, b, cfg)
        if gap is None:
            continue
        used += 1
        if gap > cfg.indifference_tol:
            return _report("continuity", cfg, used, (y, a, b), note=f"ray-scale gap {gap:.3g}")
    return _report("continuity", cfg, used, vacuous=used == 0)


# strict convexity


def _scale_to_indifference(rel, x, z, max_iter: int = 200, limit: float = 2.0**60):
    """Find c with c * z ~ x by bracketing and bisection on c.

    Returns (lower, upper) bundles: x is weakly preferred to the lower one and
    the upper one is weakly preferred to x. Equal when an exact tie is hit.
    None when no bracket exists below ``limit``.
    """
    if rel.weak_prefers(0.0 * z, x):
        return (0.0 * z, 0.0 * z) if rel.weak_prefers(x, 0.0 * z) else None
    lo, hi = 0.0, 1.0
    while not rel.weak_prefers(hi * z, x):
        lo, hi = hi, 2.0 * hi
        if hi > limit:
            return None
    if rel.weak_prefers(x, hi * z):
        return hi * z, hi * z
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= 1e-15 * hi:
            break
        c = mid * z
        if rel.weak_prefers(c, x):
            if rel.weak_prefers(x, c):
                return c, c
            hi = mid
        else:
            lo = mid
    return lo * z, hi * z


CONVEX_WEIGHTS = (0.25, 0.5, 0.75)


def check_strict_convexity(rel: PreferenceRelation, cfg: SamplingConfig) -> AxiomReport:
    """Mixtures of distinct, non-redundant indifferent bundles must beat the endpoint.

    For sampled x and direction z the partner y = c * z is found by bisection
    on c. The side of the bracket that x weakly beats is used, so rounding in
    the bisection can only make a genuine strict improvement harder to see.
    Mixing weights are fixed inside the open interval (0, 1).
    """
    rng = cfg.rng("strict_convexity")
    n = rel.n
    used = 0
    for _ in range(cfg.sample_count):
        x = cfg.sample(rng, n)
        z = cfg.sample(rng, n)
        if not np.any(x > 0) or not np.any(z > 0):
            continue
        pair = _scale_to_indifference(rel, x, z)
        if pair is None:
            continue
        y, y_up = pair
        if np.linalg.norm(y_up - y) > cfg.indifference_tol * (1.0 + np.linalg.norm(x)):
            continue
        if np.linalg.norm(y - x) <= 1e-4 * (1.0 + np.linalg.norm(x)):
            continue
        if is_redundant(rel, x, cfg) or is_redundant(rel, y, cfg):
            continue
        used += 1
        for t in CONVEX_WEIGHTS:
            m = (1.0 - t) * x + t * y
            if not strictly_prefers(rel, m, x):
                return _report("strict_convexity", cfg, used, (x, y, m), note=f"t={t}")
    note = "no indifferent non-redundant pair generated" if used == 0 else ""
    return _report("strict_convexity", cfg, used, vacuous=used == 0, note=note)


# local nonsatiation


def _nonsatiation_candidates(x: NDArray, cfg: SamplingConfig) -> list[NDArray]:
    n = x.size
    out = [x + (cfg.epsilon / (2 * n)) * ones(n)]
    rng = np.random.default_rng([cfg.seed, 102])
    for _ in range(cfg.candidates - 1):
        d = rng.normal(size=n)
        d /= np.linalg.norm(d)
        radius = 0.99 * cfg.epsilon * rng.uniform() ** (1.0 / n)
        out.append(np.maximum(x + radius * d, 0.0))
    return out


def _nonsatiation_fails(rel, x, cfg) -> bool:
    return not any(strictly_prefers(rel, y, x) for y in _nonsatiation_candidates(x, cfg))


def check_local_nonsatiation(rel: PreferenceRelation, cfg: SamplingConfig) -> AxiomReport:
    """Every sampled x needs a strictly better bundle among K candidates in its eps-ball."""
    rng = cfg.rng("local_nonsatiation")
    points = list(rel.probe_points) + [cfg.sample(rng, rel.n) for _ in range(cfg.sample_count)]
    for used, x in enumerate(points, 1):
        if _nonsatiation_fails(rel, np.asarray(x), cfg):
            return _report(
                "local_nonsatiation", cfg, used, (x,), candidates_per_point=cfg.candidates,
                note=f"no improving point among {cfg.candidates} candidates within eps={cfg.epsilon}",
            )
    return _report("local_nonsatiation", cfg, len(points), candidates_per_point=cfg.candidates)


CHECKERS: dict[str, Callable[[PreferenceRelation, SamplingConfig], AxiomReport]] = {
    "completeness": check_completeness,
    "transitivity": check_transitivity,
    "continuity": check_continuity,
    "strong_monotonicity": check_strong_monotonicity,
    "strict_convexity": check_strict_convexity,
    "local_nonsatiation": check_local_nonsatiation,
}


def check_all(rel: PreferenceRelation, cfg: SamplingConfig) -> list[AxiomReport]:
    return [CHECKERS[name](rel, cfg) for name in AXIOMS]


def recheck(rel: PreferenceRelation, report: AxiomReport, cfg: SamplingConfig) -> bool:
    """Re-evaluate a violated report's counterexample; True if the violation reproduces."""
    if not report.violated:
        return False
    cx = [np.asarray(b) for b in report.counterexample]
    if report.axiom == "completeness":
        return _completeness_fails(rel, *cx)
    if report.axiom == "transitivity":
        return _transitivity_fails(rel, *cx)
    if report.axiom == "strong_monotonicity":
        return _monotonicity_fails(rel, *cx)
    if report.axiom == "continuity":
        gap = _continuity_gap(rel, *cx, cfg)
        return gap is not None and gap > cfg.indifference_tol
    if report.axiom == "strict_convexity":
        x, _, m = cx
        return not strictly_prefers(rel, m, x)
    if report.axiom == "local_nonsatiation":
        return _nonsatiation_fails(rel, cx[0], cfg)
    raise ValueError(f"unknown axiom {report.axiom!r}")
