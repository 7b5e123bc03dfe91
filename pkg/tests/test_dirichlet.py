import math

import numpy as np
import pytest
from scipy.optimize import brentq

from crystalline.builtins import DEFAULT_XI, SQRT2, builtin_pair, lasso_polynomial
from crystalline.dirichlet import (DirichletSeries, FrequencyVec, count_zeros_rectangle, find_zeros,
                                   functional_eq_residual, laurent_L, secular_values,
                                   torus_zero_curve)
from crystalline.errors import NotSelfConjugate, ValidationError, WrongArity
from crystalline.polynomial import MultiPoly, derive_dual

XI = (1.0, SQRT2)


def test_frequency_vec():
    f = FrequencyVec.from_bases([math.e, math.e**2])
    assert np.allclose(f.xi, (1, 2)) and np.allclose(f.b, (math.e, math.e**2))
    with pytest.raises(ValidationError):
        FrequencyVec((1.0, -1.0))


def test_eval_at_zero(lasso):
    F = DirichletSeries(lasso, XI)
    assert F(0) == pytest.approx(lasso.P(np.ones(2)))
    assert abs(F(0)) < 1e-15


def test_derivative_matches_finite_difference(lasso):
    F = DirichletSeries(lasso, XI)
    s, h = 0.3 + 1.7j, 1e-6
    fd = (F(s + h) - F(s - h)) / (2 * h)
    assert abs(F.derivative(s) - fd) < 1e-8


@pytest.mark.parametrize("name", ["poisson", "lasso", "lee-yang", "spectral"])
def test_functional_equation(name):
    pair = builtin_pair(name)
    xi = DEFAULT_XI[name]
    rng = np.random.default_rng(7)
    s = rng.uniform(-2, 2, 100) + 1j * rng.uniform(-40, 40, 100)
    F, G = DirichletSeries(pair, xi), DirichletSeries(pair, xi, "G")
    assert functional_eq_residual(F, G, s) < 1e-10
    assert functional_eq_residual(F, G, [0j]) < 1e-14


def test_poisson_zeros(poisson):
    zeros = find_zeros(DirichletSeries(poisson, (1.0,)), (-2 * np.pi * 50.5, 2 * np.pi * 50.5))
    assert len(zeros) == 101
    assert np.max(np.abs(zeros.gammas - 2 * np.pi * np.arange(-50, 51))) < 1e-9
    assert np.all(zeros.multiplicities == 1)


def test_lasso_zeros_simple_symmetric_secular(lasso):
    zeros = find_zeros(DirichletSeries(lasso, XI), (-100, 100))
    assert np.all(zeros.multiplicities == 1)
    assert zeros.is_symmetric(1e-9)
    assert np.max(np.abs(secular_values(XI, zeros.gammas))) < 1e-8
    assert np.max(zeros.residuals) < 1e-9


def test_lasso_zeros_match_bracketing_oracle(lasso):
    # independent: dense sign changes of the secular function, refined by brentq
    f = lambda g: secular_values(XI, g)
    grid = np.linspace(1e-3, 60, 200001)
    v = f(grid)
    idx = np.flatnonzero(np.sign(v[:-1]) != np.sign(v[1:]))
    oracle = np.array([brentq(f, grid[i], grid[i + 1], xtol=1e-15) for i in idx])
    zeros = find_zeros(DirichletSeries(lasso, XI), (-60, 60))
    ours = zeros.gammas[(zeros.gammas > 1e-3) & (zeros.gammas < 60)]
    assert len(ours) == len(oracle)
    assert np.max(np.abs(ours - oracle)) < 1e-10


def test_rational_xi_zeros_are_multiples_of_pi(lasso):
    zeros = find_zeros(DirichletSeries(lasso, (1.0, 0.5)), (-50, 50))
    n = np.round(zeros.gammas / np.pi)
    assert np.max(np.abs(zeros.gammas - np.pi * n)) < 1e-9
    assert np.array_equal(n, np.arange(-15, 16))


@pytest.mark.parametrize("name", ["lee-yang", "spectral"])
def test_rectangle_count_matches_axis_count(name):
    pair = builtin_pair(name)
    series = DirichletSeries(pair, DEFAULT_XI[name])
    zeros = find_zeros(series, (-20, 20))
    assert np.all(zeros.multiplicities == 1)
    assert zeros.is_symmetric(1e-9)
    a, b = 0.05, 15.05
    on_axis = int(np.sum(zeros.multiplicities[(zeros.gammas > a) & (zeros.gammas < b)]))
    assert count_zeros_rectangle(series, a, b) == on_axis


def test_complex_coefficient_zeros():
    P = MultiPoly(1, {(0,): 1, (1,): -1j})
    pair = derive_dual(P)
    zeros = find_zeros(DirichletSeries(pair, (1.0,)), (-20, 20))
    # F(i g) = 1 - i e^{-i g} vanishes where e^{-i g} = -i, i.e. g = pi/2 + 2 pi n
    expected = np.pi / 2 + 2 * np.pi * np.arange(-3, 3)
    expected = expected[np.abs(expected) <= 20]
    assert np.allclose(zeros.gammas, expected, atol=1e-9)


def test_find_zeros_validation(lasso):
    with pytest.raises(ValidationError):
        find_zeros(DirichletSeries(lasso, XI), (-10, 10), oversample=2)
    with pytest.raises(WrongArity):
        DirichletSeries(lasso, (1.0,))


def test_secular_values_properties():
    assert secular_values(XI, [0.0])[0] == 0
    g = np.linspace(-20, 20, 101)
    assert np.allclose(secular_values(XI, -g), -secular_values(XI, g))
    with pytest.raises(WrongArity):
        secular_values((1.0,), [1.0])


def test_secular_matches_rotated_series(lasso):
    # the rotated F(i g) is proportional to L
    F = DirichletSeries(lasso, XI)
    g = np.linspace(0.1, 30, 50)
    rotated = (np.sqrt(F.conjugation_phase()) * np.exp(1j * g * F.omega / 2) * F.on_axis(g)).real
    assert np.allclose(rotated, 2 / 3 * secular_values(XI, g), atol=1e-13)


def test_torus_curve_two_components():
    curve = torus_zero_curve(lasso_polynomial(), 256)
    assert len(curve.components) == 2
    pts = curve.points
    assert np.max(np.abs(laurent_L(pts[:, 0], pts[:, 1]))) < 1e-10
    for comp in curve.components:
        d = np.diff(comp, axis=0)
        assert np.all(d[:, 0] * d[:, 1] < 0)
    # the components do not meet
    a, b = curve.components
    dist = np.min(np.hypot(*(a[:, None, :] - b[None, :, :]).transpose(2, 0, 1)))
    assert dist > 0.1


def test_torus_curve_errors():
    with pytest.raises(WrongArity):
        torus_zero_curve(MultiPoly(1, {(0,): 1, (1,): -1}))
    P = MultiPoly(2, {(0, 0): 1, (1, 0): 0.5, (0, 1): 0.25, (1, 1): 0.1})
    with pytest.raises(NotSelfConjugate):
        torus_zero_curve(P)
