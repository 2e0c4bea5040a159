import numpy as np
import pytest

from subgradpush.objectives import NoAnalyticOptimum, ObjectiveSpec, grid_search_optimum, weighted_median_interval

MEDIAN = [1, 2, 3, 4, 10]


def test_abs_subgradient_signs():
    spec = ObjectiveSpec("abs-deviation", [3.0])
    assert spec.subgradient(0, [5.0]).tolist() == [1.0]
    assert spec.subgradient(0, [1.0]).tolist() == [-1.0]
    assert spec.subgradient(0, [3.0]).tolist() == [0.0]


def test_l1_subgradient():
    spec = ObjectiveSpec("l1-distance", [[0.0, 0.0]])
    assert spec.subgradient(0, [2.0, -1.0]).tolist() == [1.0, -1.0]


def test_evaluate_median():
    assert ObjectiveSpec("abs-deviation", MEDIAN).evaluate_F([3.0]) == 11.0


def test_evaluate_l1():
    assert ObjectiveSpec("l1-distance", [[0, 0], [2, 2]]).evaluate_F([1.0, 1.0]) == 4.0


def test_optimum_median():
    z, f = ObjectiveSpec("abs-deviation", MEDIAN).optimum()
    assert z.tolist() == [3.0] and f == 11.0


def test_optimum_interval():
    spec = ObjectiveSpec("abs-deviation", [1, 3])
    lo, hi = spec.optimal_box()
    assert (lo[0], hi[0]) == (1.0, 3.0)
    z, f = spec.optimum()
    assert z.tolist() == [2.0] and f == 2.0
    assert spec.dist_to_opt([[2.5], [0.0], [4.0]]).tolist() == [0.0, 1.0, 1.0]


def test_optimum_l1_matches_grid():
    spec = ObjectiveSpec("l1-distance", [[0, 0], [2, 2], [0, 2]])
    z, f = spec.optimum()
    assert z.tolist() == [0.0, 2.0] and f == 4.0
    zg, fg = grid_search_optimum(spec)
    assert fg == pytest.approx(4.0, abs=1e-9)
    np.testing.assert_allclose(zg, [0.0, 2.0], atol=1e-3)


def test_weighted_median_ties_and_zero():
    assert weighted_median_interval([1, 2, 3, 4], [1, 1, 1, 1]) == (2.0, 3.0)
    assert weighted_median_interval([1, 2, 3], [1, 5, 1]) == (2.0, 2.0)
    assert weighted_median_interval([1, 2], [0, 0]) == (-np.inf, np.inf)


def test_lipschitz_constants():
    assert ObjectiveSpec("abs-deviation", MEDIAN, scales=[1, 2, 3, 4, 5]).L.tolist() == [1, 2, 3, 4, 5]
    np.testing.assert_allclose(ObjectiveSpec("l1-distance", np.zeros((2, 3))).L, [np.sqrt(3)] * 2)


def test_huber():
    spec = ObjectiveSpec("huber", [[0.0]], width=2.0)
    assert spec.value(0, [1.0]) == pytest.approx(0.25)
    assert spec.value(0, [4.0]) == pytest.approx(3.0)
    assert spec.subgradient(0, [1.0]).tolist() == [0.5]
    assert spec.subgradient(0, [-9.0]).tolist() == [-1.0]


def test_linear_clipped():
    spec = ObjectiveSpec("linear-clipped", [[0.0], [0.0]], directions=[[1.0], [-1.0]])
    assert spec.evaluate_F([2.0]) == 2.0
    assert spec.subgradients(np.array([[2.0], [2.0]])).tolist() == [[1.0], [0.0]]


def test_no_analytic_optimum():
    with pytest.raises(NoAnalyticOptimum):
        ObjectiveSpec("huber", [[0.0], [1.0]]).optimum()


def test_huber_grid_optimum():
    z, f = grid_search_optimum(ObjectiveSpec("huber", [[0.0], [1.0], [5.0]]))
    assert z[0] == pytest.approx(1.0, abs=1e-3)


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        ObjectiveSpec("abs-deviation", [[0.0, 1.0]])
    with pytest.raises(ValueError):
        ObjectiveSpec("nope", [0.0])
    with pytest.raises(ValueError):
        ObjectiveSpec("abs-deviation", [0.0, 1.0], scales=[1.0, -1.0])
    with pytest.raises(ValueError):
        ObjectiveSpec("abs-deviation", MEDIAN).evaluate_F([np.nan])
