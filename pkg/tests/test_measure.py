import math

import numpy as np
import pytest
from scipy import integrate

from crystalline.builtins import SQRT2, builtin_pair
from crystalline.errors import NotSelfDual, TailTooLarge, ValidationError, WindowExceeded
from crystalline.measure import (TestFunction, build_measure, build_spectrum, spectrum_growth,
                                 spectrum_window_mass, translation_bound_profile, verify_summation,
                                 verify_summation_symmetric, zero_density_bound)
from crystalline.polynomial import MultiPoly, derive_dual

XI = (1.0, SQRT2)


def quad_transform(test, g, half_width):
    """hhat(g) = int h(t) e^{i g t} dt by adaptive quadrature."""
    def part(fn):
        return integrate.quad(fn, -half_width, half_width, limit=400, epsabs=1e-13)[0]
    re = part(lambda t: (test.h(t) * np.exp(1j * g * t)).real)
    im = part(lambda t: (test.h(t) * np.exp(1j * g * t)).imag)
    return re + 1j * im


@pytest.mark.parametrize("test, width", [
    (TestFunction.gaussian(1.3), 15.0),
    (TestFunction.gaussian(0.7, shift=0.4), 10.0),
    (TestFunction.cosine(2.0), 2.0),
    (TestFunction.cosine(0.9, shift=-1.1), 0.9),
    (TestFunction.bump(1.5), 1.5),
])
@pytest.mark.parametrize("g", [0.0, 0.8, 3.7, -5.2])
def test_transform_matches_quadrature(test, width, g):
    assert abs(test.hhat(g) - quad_transform(test, g, width)) < 1e-9


def test_test_function_validation():
    with pytest.raises(ValidationError):
        TestFunction("triangle", 1.0)
    with pytest.raises(ValidationError):
        TestFunction.gaussian(0.0)


def test_zero_density_bound():
    assert zero_density_bound(1.0) == 2
    assert zero_density_bound(math.pi) == 2
    assert zero_density_bound(1 + 2 * SQRT2) == 3


def test_poisson_summation_matches_classical(poisson):
    sigma = 1.0
    test = TestFunction.gaussian(sigma)
    rep = verify_summation(poisson, (1.0,), test, 300.0, 20)
    assert rep.residual < 1e-10
    # independent: sum_n hhat(2 pi n) = sum_m h(m) for a Gaussian
    n = np.arange(-60, 61)
    direct_l = np.sum(sigma * np.sqrt(2 * np.pi) * np.exp(-(sigma * 2 * np.pi * n) ** 2 / 2))
    direct_r = np.sum(np.exp(-n.astype(float) ** 2 / (2 * sigma**2)))
    assert abs(rep.lhs - direct_l) < 1e-12
    assert abs(rep.rhs - direct_r) < 1e-12


def test_lasso_summation(lasso):
    rep = verify_summation(lasso, XI, TestFunction.gaussian(1.0), 200.0, 40)
    assert rep.tail_estimate < 1e-6
    assert rep.residual < rep.tail_estimate + 1e-8
    assert rep.honest


@pytest.mark.parametrize("variant", ["direct", "reflected", "combined"])
@pytest.mark.parametrize("name, xi", [("lee-yang", (1.0, SQRT2, math.sqrt(3))),
                                      ("spectral", (1.0, SQRT2, math.sqrt(3))),
                                      ("lasso", (1.0, 0.5))])
def test_summation_variants(name, xi, variant):
    rep = verify_summation(builtin_pair(name), xi, TestFunction.gaussian(1.0, shift=0.3), 60.0, 40,
                           variant=variant)
    assert rep.residual < rep.tail_estimate + 1e-8


def test_relaxed_pair_summation():
    from crystalline.polynomial import make_stable_pair
    P = MultiPoly.from_exact(1, {(0,): 1, (1,): -1})
    Q = MultiPoly.from_exact(1, {(0,): -1, (1,): 1})
    pair = make_stable_pair(P, Q, relaxed=True)
    rep = verify_summation(pair, (1.0,), TestFunction.gaussian(1.0), 300.0, 20)
    assert rep.relaxed and rep.residual < 1e-10


def test_symmetric_agrees_with_generic(lasso, poisson):
    test = TestFunction.gaussian(0.8)
    for pair, xi in ((lasso, XI), (poisson, (1.0,))):
        a = verify_summation(pair, xi, test, 200.0, 40)
        b = verify_summation_symmetric(pair, xi, test, 200.0, 40)
        assert abs(a.rhs - b.rhs) < 1e-12 and abs(a.lhs - b.lhs) < 1e-12


def test_symmetric_needs_self_dual():
    pair = derive_dual(MultiPoly.from_exact(1, {(0,): 1, (1,): -2}))
    with pytest.raises(NotSelfDual):
        verify_summation_symmetric(pair, (1.0,), TestFunction.gaussian(1.0), 50.0, 10)


def test_tail_too_large(lasso):
    with pytest.raises(TailTooLarge):
        verify_summation(lasso, XI, TestFunction.gaussian(0.2), 5.0, 5)


def test_bump_summation(lasso):
    rep = verify_summation(lasso, XI, TestFunction.bump(3.0), 300.0, 40)
    assert rep.tail_estimate < 0.1
    assert rep.residual < rep.tail_estimate + 1e-8


def test_cosine_window_sees_density(lasso):
    # a narrow transform centred on the axis: lhs is close to omega
    test = TestFunction.cosine(0.9)
    rep = verify_summation(lasso, XI, test, 300.0, 40, check_tail=False)
    assert rep.residual < rep.tail_estimate + 1e-8


def test_poisson_measure_atoms(poisson):
    m = build_measure(poisson, (1.0,), 40.0)
    assert np.allclose(m.positions, 2 * np.pi * np.arange(-6, 7))
    assert np.all(m.weights == 1)
    assert m.mass(-1, 1) == 1


def test_empty_window_single_atom(lasso):
    m = build_measure(lasso, XI, (0.0, 0.0))
    assert list(m.positions) == [0.0]


def test_nonsymmetric_window_rejected(lasso):
    with pytest.raises(ValidationError):
        build_measure(lasso, XI, (-1.0, 3.0))


def test_poisson_spectrum_is_comb(poisson):
    spec = build_spectrum(poisson, (1.0,), 6.5)
    assert np.allclose(spec.positions, np.arange(-6, 7))
    assert np.allclose(spec.weights, 1)


def test_lasso_spectrum_support(lasso):
    spec = build_spectrum(lasso, XI, 20.0)
    for pos, src in zip(spec.positions, spec.provenance):
        for sign, k in src:
            if k:
                assert k[1] % 2 == 0
                assert abs(pos - sign * (k[0] + SQRT2 * k[1])) < 1e-12


def test_spectrum_single_atom(lasso):
    spec = build_spectrum(lasso, XI, 0.5)
    assert len(spec) == 1 and spec.positions[0] == 0
    assert spec.weights[0] == pytest.approx(1 + 2 * SQRT2)


def test_rational_spectrum_merges_with_provenance(lasso):
    spec = build_spectrum(lasso, (1.0, 0.5), 10.0)
    assert len(np.unique(np.round(spec.positions, 9))) == len(spec)
    assert max(len(p) for p in spec.provenance) > 1


def test_spectrum_growth_slopes(lasso, poisson):
    A = [10, 20, 40, 80]
    rows, slope = spectrum_growth(build_spectrum(poisson, (1.0,), 80.0), A)
    assert abs(slope - 1) <= 0.1
    assert rows[0][1] == pytest.approx(21)
    _, slope = spectrum_growth(build_spectrum(lasso, XI, 80.0), A)
    assert slope <= 3


def test_translation_profile(poisson, lasso):
    m = build_measure(poisson, (1.0,), 30.0)
    prof = translation_bound_profile(m, np.linspace(-25, 25, 201))
    assert set(np.unique(prof)) <= {0, 1}
    with pytest.raises(WindowExceeded):
        translation_bound_profile(m, [29.5])
    ml = build_measure(lasso, XI, 60.0)
    prof = translation_bound_profile(ml, np.linspace(-55, 55, 301))
    assert prof.max() <= zero_density_bound(lasso.omega(XI))


def test_spectrum_window_mass_finite(lasso):
    spec = build_spectrum(lasso, XI, 60.0)
    mass = spectrum_window_mass(spec, [0.0, 20.0, 40.0])
    assert np.all(np.isfinite(mass))
