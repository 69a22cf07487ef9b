import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from consumer_theory.core import PriceSystem
from consumer_theory.families import CobbDouglasUtility, ConstantUtility, ExponentialUtility, LinearUtility, Utility
from consumer_theory.preferences import PreferenceRelation, SamplingConfig, UtilityInduced
from consumer_theory.representation import (
    ExtractionConfig,
    IterationLimit,
    NoBracket,
    extract_function,
    extract_value,
    ordinal_equivalence_check,
)
from consumer_theory.specimens import make_specimen

SUM = UtilityInduced(LinearUtility(2.0, PriceSystem(np.ones(2))))
PRODUCT = UtilityInduced(CobbDouglasUtility([1.0, 1.0]))


class Negated(Utility):
    def __init__(self, base):
        self.base = base
        self.n = base.n

    def evaluate(self, x):
        return -self.base.evaluate(x)

    def gradient(self, x):
        return -self.base.gradient(x)


class Recording(PreferenceRelation):
    """Wraps a relation and logs every comparison against the ray."""

    def __init__(self, rel):
        self.rel = rel
        self.n = rel.n
        self.log = []

    def weak_prefers(self, x, y):
        out = self.rel.weak_prefers(x, y)
        self.log.append((np.array(x, dtype=float), np.array(y, dtype=float), out))
        return out


@pytest.mark.parametrize(
    "rel, x, expected",
    [(SUM, [2, 2], 2.0), (PRODUCT, [1, 4], 2.0), (SUM, [0, 0], 0.0), (PRODUCT, [0, 0], 0.0)],
)
def test_extract_value_examples(rel, x, expected):
    assert extract_value(rel, x).value == pytest.approx(expected, abs=1e-9)


def test_extract_value_threshold_no_bracket():
    with pytest.raises(NoBracket):
        extract_value(make_specimen("threshold"), [0.5, 0.5])


def test_extract_constant_fails_away_from_origin():
    rel = UtilityInduced(ConstantUtility(2))
    with pytest.raises(NoBracket):
        extract_value(rel, [2.0, 4.0])
    assert extract_value(rel, [2.0, 4.0], ExtractionConfig(strict_origin=False)).value == 0.0


def test_extract_value_no_bracket_below_cap():
    with pytest.raises(NoBracket) as err:
        extract_value(SUM, [100.0, 100.0], ExtractionConfig(max_bracket=10.0))
    lo, hi = err.value.bracket
    assert lo <= 10.0 < hi


def test_decreasing_relation_has_no_lower_end():
    u = ExponentialUtility(0.5, PriceSystem(np.ones(2)))
    with pytest.raises(NoBracket):
        extract_value(UtilityInduced(u), [1.0, 1.0])


def test_iteration_limit():
    with pytest.raises(IterationLimit) as err:
        extract_value(PRODUCT, [1.0, 3.0], ExtractionConfig(max_iterations=3))
    lo, hi = err.value.bracket
    assert lo < np.sqrt(3.0) < hi


def test_config_validation():
    for kw in ({"tolerance": 0.0}, {"max_bracket": -1.0}, {"max_iterations": 0}):
        with pytest.raises(ValueError):
            ExtractionConfig(**kw)


@settings(max_examples=100)
@given(st.lists(st.floats(0.01, 30.0), min_size=2, max_size=2))
def test_bisection_invariant(x):
    """Every bracket reached keeps lo in B and hi in A, and widths halve."""
    x = np.array(x)
    rec = Recording(PRODUCT)
    val = extract_value(rec, x)
    w = np.sqrt(x[0] * x[1])
    # rebuild the bisection brackets from the logged ray comparisons
    ray_vs_x = [(float(a[0]), out) for a, b, out in rec.log if np.all(a == a[0]) and np.array_equal(b, x)]
    lo, hi = 0.0, None
    widths = []
    for t, ray_ge_x in ray_vs_x:
        if ray_ge_x:
            hi = t if hi is None or t < hi else hi
        else:
            lo = max(lo, t)
        if hi is not None:
            assert lo * lo <= w * w + 1e-12 and hi * hi >= w * w - 1e-12
            widths.append(hi - lo)
    for a, b in zip(widths, widths[1:]):
        assert b <= a / 2 + 1e-15 or b == a
    assert abs(val.value - w) <= 1e-9
    assert val.width <= 2e-9


def test_ray_normalization():
    rng = np.random.default_rng(7)
    for rel in (SUM, PRODUCT):
        u = extract_function(rel)
        for t in rng.uniform(0, 50, 50):
            assert abs(u.evaluate(t * np.ones(2)) - t) <= 1e-9


def test_extracted_is_monotone_for_monotone_relation():
    u = extract_function(PRODUCT)
    rng = np.random.default_rng(8)
    for _ in range(50):
        y = rng.uniform(0.1, 4, 2)
        x = y + rng.uniform(0.01, 1, 2)
        assert u.evaluate(x) > u.evaluate(y)


def test_extracted_gradient():
    u = extract_function(PRODUCT)
    # u = sqrt(x1 x2)
    np.testing.assert_allclose(u.gradient([1.0, 4.0]), [1.0, 0.25], rtol=1e-4)
    assert np.all(u.gradient([0.0, 2.0]) >= 0)


def test_ordinal_equivalence():
    cfg = SamplingConfig(sample_count=500)
    rep = ordinal_equivalence_check(PRODUCT, extract_function(PRODUCT), cfg)
    assert rep.ok and rep.pairs == 500
    bad = ordinal_equivalence_check(PRODUCT, Negated(CobbDouglasUtility([1.0, 1.0])), cfg)
    assert bad.violations > 0 and bad.first_violation is not None


@pytest.mark.parametrize("c", [0.0, 0.3, 1.0, 7.25, 123.0])
def test_ray_point_returns_its_scale(c):
    for rel in (SUM, PRODUCT, make_specimen("leontief_min")):
        assert abs(extract_value(rel, c * np.ones(2)).value - c) <= 1e-9


def test_extracted_closed_forms():
    rng = np.random.default_rng(9)
    s, q = extract_function(SUM), extract_function(PRODUCT)
    for x in rng.uniform(0, 6, (50, 2)):
        assert abs(s.evaluate(x) - x.sum() / 2) <= 1e-9
        assert abs(q.evaluate(x) - np.sqrt(x[0] * x[1])) <= 1e-9


def test_inducing_utility_has_no_ordinal_violations():
    cfg = SamplingConfig(sample_count=500)
    assert ordinal_equivalence_check(PRODUCT, CobbDouglasUtility([1.0, 1.0]), cfg, slack=0.0).ok
