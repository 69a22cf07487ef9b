"""Utility maximization on the budget hyperplane.

``solve_demand`` maximizes u over {x >= 0 : <p, x> = r} by projected gradient
ascent: Barzilai-Borwein trial steps, Euclidean projection onto the weighted
simplex, and Armijo backtracking on the utility. Stationarity is measured
scale-free as the length of the projected step taken along the *unit*
gradient, so the same tolerance works for utilities of any magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from consumer_theory.core import (
    BudgetSet,
    DimensionError,
    DomainError,
    PriceSystem,
    as_bundle,
    check_same_dim,
    inner_product,
)
from consumer_theory.families import Utility

CONVERGED = "converged"
DEGENERATE_FACE = "degenerate_face"
ITERATION_LIMIT = "iteration_limit"


class NonFiniteUtilityError(FloatingPointError):
    """The utility or its gradient evaluated to inf/nan at an iterate."""


class DegenerateProblemError(ValueError):
    """Demand is not single-valued (the whole budget face is optimal)."""


@dataclass(frozen=True)
class ConsumerProblem:
    utility: Utility
    budget: BudgetSet

    def __post_init__(self):
        if self.utility.n != self.budget.n:
            raise DimensionError(f"utility has dimension {self.utility.n}, budget {self.budget.n}")

    @property
    def prices(self) -> PriceSystem:
        return self.budget.prices

    @property
    def income(self) -> float:
        return self.budget.income


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-8
    max_iterations: int = 10_000
    initial_point: Sequence[float] | None = None
    initial_step: float = 0.1
    shrink: float = 0.5
    sufficient_increase: float = 1e-4
    polish: float = 1e-3
    polish_iterations: int = 200

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be > 0, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not 0 < self.shrink < 1:
            raise ValueError(f"shrink factor must lie in (0, 1), got {self.shrink}")
        if not self.initial_step > 0:
            raise ValueError(f"initial_step must be > 0, got {self.initial_step}")
        if not 0 < self.sufficient_increase < 1:
            raise ValueError(f"sufficient_increase must lie in (0, 1), got {self.sufficient_increase}")


@dataclass(frozen=True)
class DemandSolution:
    bundle: NDArray[np.float64]
    multiplier: float
    indirect_value: float
    foc_residual_norm: float
    budget_gap: float
    iterations: int
    status: str
    active: tuple[int, ...] = field(default=())

    @property
    def is_interior(self) -> bool:
        return not self.active

    def as_record(self) -> dict:
        return {
            "x": self.bundle.tolist(),
            "lambda": self.multiplier,
            "v": self.indirect_value,
            "status": self.status,
            "foc_residual_norm": self.foc_residual_norm,
            "budget_gap": self.budget_gap,
            "iterations": self.iterations,
            "corner_goods": list(self.active),
        }


# --- projection -------------------------------------------------------------------


def project_onto_budget(prices: PriceSystem, r: float, v) -> NDArray[np.float64]:
    """Euclidean projection of ``v`` onto {x >= 0 : <p, x> = r}.

    The solution is x = max(v - theta * p, 0); theta is found by sorting the
    ratios v_i / p_i and scanning for the segment on which the budget holds.
    """
    p = prices.prices
    v = np.asarray(v, dtype=np.float64)
    check_same_dim(p, v)
    if r == 0:
        return np.zeros_like(v)
    order = np.argsort(-v / p, kind="stable")
    ratios = (v / p)[order]
    ps, vs = p[order], v[order]
    thetas = (np.cumsum(ps * vs) - r) / np.cumsum(ps * ps)
    n = len(v)
    k = n - 1
    for j in range(n):
        if ratios[j] > thetas[j] and (j == n - 1 or ratios[j + 1] <= thetas[j]):
            k = j
            break
    return np.maximum(v - thetas[k] * p, 0.0)


# --- solver -----------------------------------------------------------------------


def _multiplier(g: NDArray, p: NDArray, free: NDArray) -> float:
    """Least-squares fit of g = lambda * p over the goods not at a corner."""
    if not np.any(free):
        free = np.ones_like(free, dtype=bool)
    return float(g[free] @ p[free] / (p[free] @ p[free]))


def _stationarity(prices, r, x, g, length) -> float:
    norm = float(np.linalg.norm(g))
    if norm == 0:
        return 0.0
    sigma = 1e-2 * length
    step = project_onto_budget(prices, r, x + sigma * (g / norm)) - x
    return float(np.linalg.norm(step)) / sigma


def _tangent(d: NDArray, p: NDArray, x: NDArray) -> NDArray:
    """Remove the rounding residue of d along p, touching only goods not at zero."""
    free = (x + d) > 0
    if not np.any(free):
        return d
    out = d.copy()
    out[free] -= float(p @ d) / float(p[free] @ p[free]) * p[free]
    return out


def _checked(u: Utility, x) -> float:
    value = u.evaluate(x)
    if not math.isfinite(value):
        raise NonFiniteUtilityError(f"utility is {value} at x = {np.asarray(x).tolist()}")
    return value


def _checked_grad(u: Utility, x) -> NDArray[np.float64]:
    g = np.asarray(u.gradient(x), dtype=np.float64)
    if not np.all(np.isfinite(g)):
        raise NonFiniteUtilityError(f"gradient is {g.tolist()} at x = {np.asarray(x).tolist()}")
    return g


def _face_is_stationary(u: Utility, prices: PriceSystem, r: float, points, tol: float) -> bool:
    p = prices.prices
    for x in points:
        g = _checked_grad(u, x)
        lam = float(g @ p / (p @ p))
        if np.linalg.norm(g - lam * p) > tol * np.linalg.norm(g):
            return False
    return True


def _degeneracy_probes(prices: PriceSystem, r: float, x0) -> list[NDArray]:
    """The initial point plus points moved along budget-preserving directions."""
    p = prices.prices
    n = len(p)
    base = r / (n * p)
    pts = [np.asarray(x0, dtype=np.float64)]
    for j in range(n - 1):
        d = np.zeros(n)
        d[j] = 1.0 / p[j]
        d[j + 1] = -1.0 / p[j + 1]
        pts.append(base + 0.25 * (r / n) * d)
    return pts


def _finish(u, prices, r, x, iterations, status, length) -> DemandSolution:
    x = np.maximum(x, 0.0)
    g = _checked_grad(u, x)
    scale = float(np.max(x)) if x.size else 0.0
    free = x > 1e-14 * scale
    active = tuple(int(i) for i in np.flatnonzero(~free))
    res = _stationarity(prices, r, x, g, length) if status != DEGENERATE_FACE else 0.0
    bundle = as_bundle(x)
    return DemandSolution(
        bundle=bundle,
        multiplier=_multiplier(g, prices.prices, free),
        indirect_value=_checked(u, bundle),
        foc_residual_norm=res,
        budget_gap=inner_product(prices, bundle) - r,
        iterations=iterations,
        status=status,
        active=active,
    )


def solve_demand(prob: ConsumerProblem, cfg: SolverConfig = SolverConfig()) -> DemandSolution:
    """Maximize the utility over the budget hyperplane of ``prob``.

    Returns status ``degenerate_face`` with the canonical bundle (r/P) * 1 when
    the gradient is parallel to the prices across the face (utilities of the
    form F(<p, x>/P) are constant there), and ``iteration_limit`` with the best
    iterate when the tolerance is not reached.
    """
    u, prices, r = prob.utility, prob.prices, prob.income
    p = prices.prices
    n = prices.n

    if r == 0:
        x = as_bundle(np.zeros(n))
        return DemandSolution(x, 0.0, _checked(u, x), 0.0, 0.0, 0, CONVERGED)
    if n == 1:
        return _finish(u, prices, r, np.array([r / p[0]]), 0, CONVERGED, r / p[0])

    if cfg.initial_point is None:
        x = r / (n * p)
    else:
        x = np.asarray(cfg.initial_point, dtype=np.float64)
        check_same_dim(p, x)
        x = project_onto_budget(prices, r, x)
    length = float(np.linalg.norm(r / (n * p)))

    if _face_is_stationary(u, prices, r, _degeneracy_probes(prices, r, x), max(cfg.tolerance, 1e-12)):
        return _finish(u, prices, r, np.full(n, r / prices.total), 0, DEGENERATE_FACE, length)

    fx = _checked(u, x)
    g = _checked_grad(u, x)
    gnorm = float(np.linalg.norm(g))
    step = cfg.initial_step * length / gnorm
    step_min, step_max = 1e-30 * step, 1e30 * step

    # once within tolerance, keep going (bounded) towards tolerance * polish so
    # that the returned bundle does not depend on where the threshold was crossed
    polish_left = cfg.polish_iterations
    for k in range(cfg.max_iterations):
        res = _stationarity(prices, r, x, g, length)
        if res <= cfg.tolerance:
            if res <= cfg.tolerance * cfg.polish or polish_left == 0:
                return _finish(u, prices, r, x, k, CONVERGED, length)
            polish_left -= 1
        # steps much longer than the feasible set only overflow
        step = min(step, 1e4 * length / float(np.linalg.norm(g)))
        d = _tangent(project_onto_budget(prices, r, x + step * g) - x, p, x)
        # the normal part of g is ~lambda * p and large; dotting it with the
        # rounding residue of d would swamp the slope
        slope = float((g - float(g @ p) / float(p @ p) * p) @ d)
        if slope <= 0 or not np.any(d):
            # projected step vanished at this step length; retry shorter
            step = max(step * cfg.shrink, step_min)
            continue
        t = 1.0
        noise = 64 * np.finfo(float).eps * (abs(fx) + np.finfo(float).tiny)
        while True:
            x_new = x + t * d
            f_new = _checked(u, x_new)
            if f_new >= fx + cfg.sufficient_increase * t * slope:
                break
            # utility differences below rounding carry no information; still
            # ascending along d (nonnegative directional derivative) is enough
            if abs(f_new - fx) <= noise and float(_checked_grad(u, x_new) @ d) >= 0:
                break
            t *= cfg.shrink
            if t < 1e-20:
                break
        if t < 1e-20:
            # no ascent at rounding level: accept only if already stationary
            status = CONVERGED if _stationarity(prices, r, x, g, length) <= cfg.tolerance else ITERATION_LIMIT
            return _finish(u, prices, r, x, k, status, length)
        x_new = project_onto_budget(prices, r, x_new)
        g_new = _checked_grad(u, x_new)
        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        step = min(max(float(s @ s) / -sy, step_min), step_max) if sy < 0 else step_max
        x, fx, g = x_new, _checked(u, x_new), g_new

    return _finish(u, prices, r, x, cfg.max_iterations, ITERATION_LIMIT, length)


def _problem(utility: Utility, p, r: float) -> ConsumerProblem:
    prices = p if isinstance(p, PriceSystem) else PriceSystem(np.asarray(p, dtype=np.float64))
    return ConsumerProblem(utility, BudgetSet(prices, r))


def marshallian_demand(utility: Utility, p, r: float, cfg: SolverConfig = SolverConfig()) -> NDArray[np.float64]:
    return solve_demand(_problem(utility, p, r), cfg).bundle


def indirect_utility(utility: Utility, p, r: float, cfg: SolverConfig = SolverConfig()) -> float:
    return solve_demand(_problem(utility, p, r), cfg).indirect_value


def foc_residuals(utility: Utility, p: PriceSystem, x, lam: float, r: float) -> NDArray[np.float64]:
    """(du/dx_i - lambda p_i)_i followed by <p, x> - r.

    Only defined at interior bundles; corner solutions are not analysed.
    """
    x = np.asarray(x, dtype=np.float64)
    check_same_dim(p.prices, x)
    zero = np.flatnonzero(x <= 0)
    if zero.size:
        raise DomainError(
            f"first-order conditions need an interior bundle; goods {zero.tolist()} are at zero (corner solution)"
        )
    g = utility.gradient(x)
    return np.append(g - lam * p.prices, inner_product(p, x) - r)


def walras_check(p, r: float, x) -> float:
    """|<p, x> - r|; optimal bundles of monotone preferences exhaust income."""
    return abs(inner_product(p, x) - r)


WALRAS_RTOL = 1e-9


def walras_ok(p, r: float, x) -> bool:
    return walras_check(p, r, x) <= WALRAS_RTOL * (1.0 + r)


@dataclass(frozen=True)
class ContinuityReport:
    base: NDArray[np.float64]
    delta: float
    ratios: dict[str, float]
    max_ratio: float
    bound: float

    @property
    def discontinuous(self) -> bool:
        return self.max_ratio > self.bound


def perturbations(p: PriceSystem, r: float, delta: float) -> dict[str, tuple[NDArray, float]]:
    """The 2n + 1 relative perturbations p_i(1 +- delta) and r(1 + delta)."""
    out = {}
    for i in range(p.n):
        for sign, tag in ((1.0, "+"), (-1.0, "-")):
            q = p.prices.copy()
            q[i] *= 1.0 + sign * delta
            out[f"p{i + 1}{tag}"] = (q, r)
    out["r+"] = (p.prices.copy(), r * (1.0 + delta))
    return out


def relative_change_ratio(base, other, delta: float) -> float:
    if delta == 0:
        return 0.0
    base = np.asarray(base)
    return float(np.linalg.norm(np.asarray(other) - base) / np.linalg.norm(base) / delta)


def continuity_probe(
    utility: Utility, p: PriceSystem, r: float, delta: float,
    cfg: SolverConfig = SolverConfig(), bound: float = 1e3,
) -> ContinuityReport:
    """Largest relative demand change per unit relative perturbation of (p, r)."""
    if delta < 0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    base = solve_demand(_problem(utility, p, r), cfg)
    if base.status == DEGENERATE_FACE:
        raise DegenerateProblemError("demand is not single-valued: the whole budget face is optimal")
    ratios = {}
    for label, (q, rr) in perturbations(p, r, delta).items():
        x = base.bundle if delta == 0 else solve_demand(_problem(utility, q, rr), cfg).bundle
        ratios[label] = relative_change_ratio(base.bundle, x, delta)
    return ContinuityReport(base.bundle, delta, ratios, max(ratios.values()), bound)


def cobb_douglas_closed_form(a, p, r: float) -> NDArray[np.float64]:
    """x_i = a_i r / (p_i sum_j a_j)."""
    a = np.asarray(a, dtype=np.float64)
    prices = p.prices if isinstance(p, PriceSystem) else np.asarray(p, dtype=np.float64)
    check_same_dim(a, prices)
    if np.any(a <= 0) or np.any(prices <= 0) or r < 0:
        raise ValueError("closed form needs a_i > 0, p_i > 0 and r >= 0")
    return a * r / (prices * a.sum())
