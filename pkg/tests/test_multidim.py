import math

import numpy as np
import pytest

from excap.capacity import min_energy
from excap.exceptions import DegeneratePath, ValidationError
from excap.geometry import sheet_staircase, straight_line
from excap.kernels import BrownianSheet, GaussianSq, OrnsteinUhlenbeck
from excap.multidim import (
    PathSearchConfig,
    check_endpoint_condition,
    endpoint_capacity,
    path_capacity,
    path_search,
    perturbed_path,
    straight_line_optimality_check,
)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_staircase_condition_and_capacity(d):
    k = BrownianSheet(d)
    p = sheet_staircase(d)
    cond = check_endpoint_condition(k, p)
    predicted = 2 / (math.factorial(d) + math.factorial(d - 1))
    assert cond.holds
    assert cond.capacity == pytest.approx(predicted, rel=1e-12)
    assert path_capacity(k, p, n=201).capacity == pytest.approx(predicted, rel=0.01)


def test_sheet_d3_straight_line_fails():
    k = BrownianSheet(3)
    p = straight_line([1, 2, 3], [3, 1, 2])
    cond = check_endpoint_condition(k, p)
    assert not cond.holds
    assert cond.margin < 0
    assert math.isnan(cond.capacity)
    # L(u) = prod_{j=2,3} (j - u) + (1 + 2u) * 2 dips below 8 inside (0, 1)
    u = np.linspace(0, 1, 1001)
    L = (2 - u) * (3 - u) + (1 + 2 * u) * 2
    assert L.min() < 8 and L[0] == pytest.approx(8) and L[-1] == pytest.approx(8)


def test_sheet_d2_straight_line_margin_zero():
    cond = check_endpoint_condition(BrownianSheet(2), straight_line([1, 2], [2, 1]))
    assert cond.holds
    assert cond.margin == pytest.approx(0.0, abs=1e-12)


def test_endpoint_formula_consistency():
    k = BrownianSheet(2)
    p = sheet_staircase(2)
    expected = endpoint_capacity(k, p.start, p.end)
    assert path_capacity(k, p, n=201).capacity == pytest.approx(expected, rel=0.01)


def test_unequal_variances_never_hold():
    k = BrownianSheet(2)
    p = straight_line([1.0, 1.0], [2.0, 2.0])
    assert abs(k.eval(p.start, p.start) - k.eval(p.end, p.end)) > 1e-9
    assert not check_endpoint_condition(k, p).holds


def test_brownian_motion_delta_at_left_end():
    # for Brownian motion on [a, b] with 0 < a < b the point mass at a is optimal
    rep = min_energy(BrownianSheet(1), straight_line([1.5], [4.0]), n=201)
    assert rep.capacity == pytest.approx(1 / 1.5, rel=1e-9)
    assert rep.measure.w[0] == pytest.approx(1.0)


def test_isotropic_straight_line_reduces_to_1d():
    k2 = GaussianSq(1.0, dim=2)
    c2 = path_capacity(k2, straight_line([0.2, 0.1], [0.8, 0.9]), n=201).capacity
    c1 = min_energy(GaussianSq(1.0), straight_line([0.0], [1.0]), n=201).capacity
    assert c2 == pytest.approx(c1, abs=1e-6)


def test_degenerate_path():
    with pytest.raises(DegeneratePath):
        straight_line([1.0, 1.0], [1.0, 1.0])


def test_straight_line_optimality_small():
    k = GaussianSq(1.0, dim=2)
    cfg = PathSearchConfig(restarts=10, n=101)
    res = straight_line_optimality_check(k, [0, 0], [3, 0], cfg)
    assert len(res.perturbed_energies) == 10
    assert res.straight_energy >= res.best_perturbed_energy - 1e-6


def test_zero_perturbation_reproduces_straight_line():
    k = GaussianSq(1.0, dim=2)
    cfg = PathSearchConfig(restarts=3, perturbation_scale=0.0, n=101)
    res = straight_line_optimality_check(k, [0, 0], [1, 1], cfg)
    np.testing.assert_allclose(res.perturbed_energies, res.straight_energy, rtol=1e-12)


def test_optimality_check_rejects_sheet():
    with pytest.raises(ValidationError):
        straight_line_optimality_check(BrownianSheet(2), [1, 2], [2, 1], PathSearchConfig())


def test_perturbed_path_keeps_endpoints(rng):
    p = perturbed_path([0, 0], [1, 2], PathSearchConfig(control_points=5), rng)
    np.testing.assert_array_equal(p.start, [0, 0])
    np.testing.assert_array_equal(p.end, [1, 2])
    assert len(p.vertices) == 7


def test_search_beats_straight_line_on_sheet():
    k = BrownianSheet(3)
    a, b = [1, 2, 3], [3, 1, 2]
    cfg = PathSearchConfig(restarts=1, iters=40, n=101, perturbation_scale=0.2)
    res = path_search(k, a, b, cfg)
    straight = min_energy(k, straight_line(a, b), n=101).energy
    assert res.energy > straight
    assert res.energy <= 4.0 + 1e-9


def test_search_trace_monotone_and_deterministic():
    k = GaussianSq(1.0, dim=2)
    cfg = PathSearchConfig(restarts=2, iters=8, n=61, seed=7)
    r1 = path_search(k, [0, 0], [2, 1], cfg)
    r2 = path_search(k, [0, 0], [2, 1], cfg)
    assert r1.trace == r2.trace
    assert r1.path == r2.path
    for restart in (0, 1):
        e = [row[2] for row in r1.trace if row[0] == restart]
        assert all(y >= x for x, y in zip(e, e[1:]))


def test_search_isotropic_stays_near_straight_line():
    k = GaussianSq(1.0, dim=2)
    cfg = PathSearchConfig(restarts=1, iters=15, n=61)
    res = path_search(k, [0, 0], [2, 0], cfg)
    straight = min_energy(k, straight_line([0, 0], [2, 0]), n=61).energy
    assert res.energy == pytest.approx(straight, abs=1e-6)


def test_search_zero_iterations_returns_straight_line():
    k = OrnsteinUhlenbeck(1.0, dim=2)
    res = path_search(k, [0, 0], [1, 1], PathSearchConfig(iters=0, restarts=1, n=51))
    ref = straight_line([0, 0], [1, 1])
    np.testing.assert_allclose(res.path(np.linspace(0, 1, 11)), ref(np.linspace(0, 1, 11)), atol=1e-15)


def test_config_validation():
    with pytest.raises(ValidationError):
        PathSearchConfig(control_points=0)
    with pytest.raises(ValidationError):
        PathSearchConfig(perturbation_scale=-1)
