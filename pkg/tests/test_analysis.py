import math

import numpy as np
import pytest
from scipy.optimize import brentq

from excap.analysis import (
    classify_regime,
    critical_length,
    four_atom_energy,
    four_atom_fit,
    golden_section,
    limiting_shape,
    ou_closed_form,
    spectral_h,
    three_atom_params,
    three_atom_shape,
    two_atom_capacity,
    two_atom_condition,
)
from excap.capacity import DiscreteMeasure, certify, min_energy
from excap.exceptions import NoSignChange, NotInRegime, UncertifiedMeasure, ValidationError
from excap.geometry import straight_line
from excap.kernels import BrownianSheet, GaussianSq, OrnsteinUhlenbeck

G = GaussianSq(1.0)
OU = OrnsteinUhlenbeck(1.0)


def R(t):
    return math.exp(-t * t / 2)


def solve(kernel, a, n=401):
    return min_energy(kernel, straight_line([0.0], [a]), n=n)


def gauss_three_atom(a):
    """Hand-expanded three-atom quantities for the squared-exponential."""
    R0, Ra, Rh = 1.0, R(a), R(a / 2)
    eps = (R0 + Ra - 2 * Rh) / (3 * R0 + Ra - 4 * Rh)
    w = np.array([(1 - eps) / 2, eps, (1 - eps) / 2])
    locs = np.array([0, a / 2, a])
    E = w @ np.exp(-0.5 * (locs[:, None] - locs[None, :]) ** 2) @ w
    return eps, 1 / E


# ---- shapes -----------------------------------------------------------------

def test_two_atom_shape_formula():
    m = DiscreteMeasure.atoms([0, 1], [0.5, 0.5])
    s = limiting_shape(G, 0.0, 1.0, m, t_grid=101)
    expected = (np.exp(-s.t**2 / 2) + np.exp(-(1 - s.t) ** 2 / 2)) / (1 + math.exp(-0.5))
    np.testing.assert_allclose(s.x, expected, rtol=1e-13)
    assert s.x[0] == pytest.approx(1.0) and s.x[-1] == pytest.approx(1.0)


@pytest.mark.parametrize("a", [0.5, 2.0, 5.0])
def test_ou_shape_identically_one(a):
    m, _ = ou_closed_form(a, 401)
    s = limiting_shape(OU, 0.0, a, m)
    assert np.max(np.abs(s.x - 1)) <= 5e-3


@pytest.mark.parametrize("kernel,a", [(G, 1.0), (G, 3.0), (G, 4.5), (G, 7.0), (OU, 3.0)])
def test_shape_feasibility(kernel, a):
    rep = solve(kernel, a)
    s = limiting_shape(kernel, 0.0, a, rep.measure)
    assert s.x.min() >= 1 - 1e-3
    atoms, _ = rep.atoms()
    for loc, _ in atoms:
        x_at = np.interp(loc * a, s.t, s.x)
        assert abs(x_at - 1) <= 1e-3


def test_shape_rejects_uncertified_measure():
    m = DiscreteMeasure.atoms([0.0], [1.0])
    with pytest.raises(UncertifiedMeasure):
        limiting_shape(G, 0.0, 3.0, m)


def test_spectral_h():
    a = 1.5
    C = two_atom_capacity(G, a)
    m = DiscreteMeasure.atoms([0, 1], [0.5, 0.5])
    x = np.linspace(-3, 3, 13)
    np.testing.assert_allclose(spectral_h(a, C, m, x), C * (1 + np.exp(1j * a * x)) / 2, rtol=1e-14)
    assert spectral_h(a, C, m, [0.0])[0] == pytest.approx(C)
    point = DiscreteMeasure.atoms([0.0], [1.0])
    np.testing.assert_allclose(spectral_h(a, 1.0, point, x), np.ones_like(x))


# ---- closed-form regimes ---------------------------------------------------------

def test_two_atom_condition_examples():
    assert two_atom_condition(G, 1.0)[0]
    assert not two_atom_condition(G, 3.0)[0]
    for a in (0.1, 1.0, 10.0):
        assert not two_atom_condition(OU, a)[0]


@pytest.mark.parametrize("a", [0.3, 1.0, 1.8, 2.2])
def test_regime_consistency_two_atom(a):
    assert two_atom_condition(G, a)[0]
    assert solve(G, a).capacity == pytest.approx(two_atom_capacity(G, a), rel=0.01)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_two_point_benchmark(a):
    # in the two-atom regime C/2 is the two-point exponent 1/(R(0)+R(a))
    assert two_atom_capacity(G, a) / 2 == pytest.approx(1 / (1 + R(a)), rel=1e-15)


def test_three_atom_at_three():
    p = three_atom_params(G, 3.0)
    eps, C = gauss_three_atom(3.0)
    assert p.holds
    assert p.eps == pytest.approx(eps, rel=1e-12)
    assert p.capacity == pytest.approx(C, rel=1e-12)
    assert solve(G, 3.0, n=801).capacity == pytest.approx(p.capacity, rel=0.005)


def test_three_atom_vanishes_at_a1():
    a1 = critical_length(G, "a1", (1, 3), tol=1e-10)
    p = three_atom_params(G, a1)
    assert abs(p.eps) < 1e-6
    assert p.capacity == pytest.approx(two_atom_capacity(G, a1), abs=1e-6)


def test_three_atom_fails_past_a2():
    assert not three_atom_params(G, 4.5).holds


def test_three_atom_shape_requires_positive_mass():
    with pytest.raises(NotInRegime):
        three_atom_shape(G, 1.0, [0.5])


def test_three_atom_shape_touches_one_at_atoms():
    x = three_atom_shape(G, 3.0, [0.0, 1.5, 3.0])
    np.testing.assert_allclose(x, 1.0, atol=1e-12)


def test_golden_section():
    assert golden_section(lambda x: (x - 0.3) ** 2, 0, 1, tol=1e-10) == pytest.approx(0.3, abs=1e-8)
    assert golden_section(lambda x: x, 0, 1) == 0.0


def test_four_atom_fit_at_four_and_a_half():
    fit = four_atom_fit(G, 4.5)
    assert fit.eps == pytest.approx(0.36632, abs=5e-4)
    assert fit.d == pytest.approx(0.12285, abs=5e-4)
    locs = sorted(u for u in fit.measure.u)
    assert locs[1] == pytest.approx(0.37715, abs=5e-4)
    assert locs[2] == pytest.approx(0.62285, abs=5e-4)
    assert fit.measure.w[0] == pytest.approx(0.31684, abs=5e-4)
    assert fit.energy == pytest.approx(four_atom_energy(G, 4.5, fit.eps, fit.d))


def test_four_atom_fit_beyond_regime():
    with pytest.raises(NotInRegime):
        four_atom_fit(G, 7.0)


# ---- critical lengths --------------------------------------------------------------

def test_a1():
    assert critical_length(G, "a1", (1, 3)) == pytest.approx(2.2079, abs=1e-3)


def test_a1_oracle():
    # independent: the interior stationary point of R(t) + R(a - t) becomes
    # a minimum below R(0) + R(a); locate it with brentq on a dense grid
    def margin(a):
        t = np.linspace(1e-6, a / 2, 20001)
        return np.min(np.exp(-t**2 / 2) + np.exp(-(a - t) ** 2 / 2)) - 1 - R(a)

    ref = brentq(margin, 1.5, 3.0, xtol=1e-10)
    assert critical_length(G, "a1", (1, 3), tol=1e-8) == pytest.approx(ref, abs=1e-6)


def test_a2():
    assert critical_length(G, "a2", (3, 5)) == pytest.approx(3.9283, abs=1e-3)


def test_a2_closed_form_oracle():
    # for exp(-t^2/2) the shape's second derivative at the midpoint vanishes when
    # (1 - eps) (a^2/4 - 1) exp(-a^2/8) = eps
    def f(a):
        eps, _ = gauss_three_atom(a)
        return (1 - eps) * (a * a / 4 - 1) * math.exp(-a * a / 8) - eps

    ref = brentq(f, 3.0, 5.0, xtol=1e-12)
    assert critical_length(G, "a2", (3, 5), tol=1e-8) == pytest.approx(ref, abs=1e-5)


def test_critical_length_no_sign_change():
    with pytest.raises(NoSignChange):
        critical_length(OU, "a1", (0.1, 10))


def test_critical_length_bad_args():
    with pytest.raises(ValidationError):
        critical_length(G, "a3", (1, 3))
    with pytest.raises(ValidationError):
        critical_length(G, "a1", (3, 1))
    with pytest.raises(ValidationError):
        critical_length(BrownianSheet(2), "a1", (1, 3))


# ---- OU closed form -------------------------------------------------------------

def test_ou_closed_form_values():
    m, C = ou_closed_form(2.0, 401)
    assert C == 2.0
    assert m.w[0] == pytest.approx(0.25) and m.w[-1] == pytest.approx(0.25)
    assert m.w[1:-1].sum() == pytest.approx(0.5)
    assert ou_closed_form(1e-9, 5)[1] == pytest.approx(1.0)
    assert ou_closed_form(10.0, 11)[1] / 10 == pytest.approx(0.6)


def test_ou_closed_form_residuals_shrink_like_one_over_n():
    a = 1.0
    res = []
    for n in (101, 201, 401, 801):
        m, _ = ou_closed_form(a, n)
        Q = OU.gram(a * m.u)
        res.append(max(abs(r) for r in certify(Q, m)))
    ratios = np.array(res[:-1]) / np.array(res[1:])
    assert np.all(ratios > 1.8) and np.all(ratios < 2.2)


# ---- classification -------------------------------------------------------------

@pytest.mark.parametrize("a,regime", [(1.0, "TwoAtom"), (3.0, "ThreeAtom"), (4.5, "FourAtom")])
def test_classify(a, regime):
    assert classify_regime(G, a).regime == regime


def test_classify_falls_back_to_solver():
    r = classify_regime(OU, 3.0, solver_n=201)
    assert r.regime == "Diffuse"
    assert r.params["diffuse_mass"] == pytest.approx(0.6, rel=0.02)
    assert r.capacity == pytest.approx(2.5, rel=0.01)
    assert classify_regime(G, 12.0).regime == "Unknown"
