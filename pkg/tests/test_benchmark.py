from __future__ import annotations

import pytest

from bvqo.costing.model import FilterCostModel, gate_threshold
from bvqo.errors import ConfigError
from bvqo.execution.benchmark import breakeven_benchmark

GRID = (0.0, 0.05, 0.1, 0.15, 0.5, 0.95)


@pytest.fixture(scope="module")
def series():
    return breakeven_benchmark(2000, 50, GRID, seed=3)


def test_filter_costs_more_when_nothing_is_eliminated(series):
    first = series.points[0]
    assert first.eliminated == 0.0
    assert first.cost_with > first.cost_without


def test_filter_pays_off_when_most_tuples_are_eliminated(series):
    last = series.points[-1]
    assert last.eliminated == 0.95
    assert last.cost_with < last.cost_without


def test_breakeven_matches_cost_ratio(series):
    assert 0.0 < series.breakeven < 0.3
    assert series.breakeven == pytest.approx(gate_threshold(FilterCostModel()))


def test_cost_with_filter_falls_as_elimination_grows(series):
    costs = [p.cost_with for p in series.points]
    assert costs == sorted(costs, reverse=True)
    assert len({p.cost_without for p in series.points}) == 1


def test_simulated_costs_follow_the_formula(series):
    model = series.model
    fact, dim = series.fact_size, series.dim_size
    for p in series.points:
        survivors = fact - round(p.eliminated * fact)
        expected_with = fact * model.filter_check_cost_per_tuple + survivors * model.probe_cost_per_tuple + dim * model.build_cost_per_tuple
        assert p.cost_with == pytest.approx(expected_with)
        assert p.cost_without == pytest.approx(fact * model.probe_cost_per_tuple + dim * model.build_cost_per_tuple)


def test_series_serializes(series):
    payload = series.to_dict()
    assert payload["fact_size"] == 2000
    assert [p["e"] for p in payload["points"]] == list(GRID)


def test_no_breakeven_when_filters_never_pay():
    expensive = FilterCostModel(probe_cost_per_tuple=1.0, filter_check_cost_per_tuple=2.0)
    assert breakeven_benchmark(200, 20, (0.0, 0.5), expensive).breakeven is None


@pytest.mark.parametrize("kwargs", [{"grid": ()}, {"grid": (1.5,)}, {"fact_size": 0}])
def test_invalid_benchmarks(kwargs):
    arguments = {"fact_size": 100, "dim_size": 10, "grid": (0.5,)}
    arguments.update(kwargs)
    with pytest.raises(ConfigError):
        breakeven_benchmark(**arguments)
