import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from consumer_theory.core import (
    BudgetSet,
    DegenerateInputError,
    DimensionError,
    PriceSystem,
    as_bundle,
    dominates,
    inner_product,
    project_to_budget_line,
)

prices_st = st.lists(st.floats(1e-3, 1e3), min_size=1, max_size=6)


@pytest.mark.parametrize(
    "p, x, expected",
    [((1, 1), (0, 0), 0.0), ((1, 2), (3, 1), 5.0), ((2, 2), (1, 1), 4.0)],
)
def test_inner_product(p, x, expected):
    assert inner_product(PriceSystem(np.array(p)), x) == expected


def test_inner_product_dimension_mismatch():
    with pytest.raises(DimensionError):
        inner_product(PriceSystem(np.array([1.0, 2.0])), [1.0, 2.0, 3.0])


@pytest.mark.parametrize(
    "x, y, expected",
    [((2, 2), (1, 2), True), ((1, 2), (1, 2), False), ((2, 1), (1, 2), False)],
)
def test_dominates(x, y, expected):
    assert dominates(x, y) is expected


def test_dominates_dimension_mismatch():
    with pytest.raises(DimensionError):
        dominates([1.0], [1.0, 2.0])


def test_dominates_is_strict_partial_order_on_grid():
    grid = [np.array(v, dtype=float) for v in itertools.product([0, 1, 2], repeat=2)]
    for x in grid:
        assert not dominates(x, x)
    for x, y in itertools.product(grid, repeat=2):
        assert not (dominates(x, y) and dominates(y, x))
    for x, y, z in itertools.product(grid, repeat=3):
        if dominates(x, y) and dominates(y, z):
            assert dominates(x, z)


@pytest.mark.parametrize(
    "p, r, x, expected",
    [((1, 1), 4, (1, 1), (2, 2)), ((1, 1), 2, (1, 1), (1, 1)), ((2, 1), 6, (1, 1), (2, 2))],
)
def test_project_to_budget_line(p, r, x, expected):
    b = BudgetSet(PriceSystem(np.array(p, dtype=float)), r)
    np.testing.assert_allclose(project_to_budget_line(b, x), expected, rtol=1e-12)


def test_project_rejects_degenerate_inputs():
    b = BudgetSet(PriceSystem(np.array([1.0, 1.0])), 4.0)
    with pytest.raises(DegenerateInputError):
        project_to_budget_line(b, [0.0, 0.0])
    with pytest.raises(DegenerateInputError):
        project_to_budget_line(BudgetSet(b.prices, 0.0), [1.0, 1.0])


@settings(max_examples=200)
@given(
    data=st.data(),
    prices=prices_st,
    r=st.floats(1e-3, 1e4),
)
def test_projection_lands_on_line_and_is_idempotent(data, prices, r):
    p = PriceSystem(np.array(prices))
    x = data.draw(st.lists(st.floats(1e-3, 1e3), min_size=p.n, max_size=p.n))
    b = BudgetSet(p, r)
    y = project_to_budget_line(b, x)
    assert abs(inner_product(p, y) - r) <= 1e-12 * r
    np.testing.assert_allclose(project_to_budget_line(b, y), y, rtol=1e-12)


@given(prices_st)
def test_price_weights_sum_to_one(prices):
    p = PriceSystem(np.array(prices))
    assert abs(p.weights.sum() - 1.0) <= 1e-12
    assert p.total == float(np.sum(np.array(prices)))


def test_price_system_rejects_nonpositive():
    with pytest.raises(ValueError):
        PriceSystem(np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        PriceSystem(np.array([1.0, -2.0]))


def test_bundle_validation_and_immutability():
    with pytest.raises(ValueError):
        as_bundle([1.0, -1.0])
    with pytest.raises(ValueError):
        as_bundle([np.nan])
    x = as_bundle([1.0, 2.0])
    with pytest.raises(ValueError):
        x[0] = 5.0


def test_zero_income_budget_is_legal():
    b = BudgetSet(PriceSystem(np.array([1.0, 2.0])), 0.0)
    assert b.contains([0.0, 0.0])
    assert not b.contains([0.1, 0.0])
    with pytest.raises(ValueError):
        BudgetSet(b.prices, -1.0)
