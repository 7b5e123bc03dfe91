import functools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from conftest import measure_from_points
from crystalline.analysis import (decompose_progressions, delone_check, gap_stats, lll_reduce,
                                  progression_intersection, rational_period, relation_probe)
from crystalline.builtins import SQRT2, builtin_pair
from crystalline.errors import PrecisionUnattainable, TooFewAtoms, ValidationError
from crystalline.measure import build_measure

XI = (1.0, SQRT2)


@functools.lru_cache(maxsize=None)
def lasso_measure():
    return build_measure(builtin_pair("lasso"), XI, 60.0)


def gram_schmidt(rows):
    """Exact Gram-Schmidt vectors and coefficients."""
    b = [[Fraction(v) for v in r] for r in rows]
    bs, mu = [], [[Fraction(0)] * len(b) for _ in b]
    for i, v in enumerate(b):
        w = list(v)
        for j in range(i):
            mu[i][j] = sum(x * y for x, y in zip(v, bs[j])) / sum(x * x for x in bs[j])
            w = [x - mu[i][j] * y for x, y in zip(w, bs[j])]
        bs.append(w)
    return bs, mu


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5).flatmap(
    lambda n: st.lists(st.lists(st.integers(-50, 50), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_lll_is_reduced_and_unimodular(rows):
    M = np.array(rows, dtype=float)
    assume(abs(np.linalg.det(M)) > 0.5)
    red = lll_reduce(rows)
    bs, mu = gram_schmidt(red)
    norms = [sum(x * x for x in v) for v in bs]
    for i in range(len(red)):
        for j in range(i):
            assert abs(mu[i][j]) <= Fraction(1, 2)
    for k in range(1, len(red)):
        assert norms[k] >= (Fraction(99, 100) - mu[k][k - 1] ** 2) * norms[k - 1]
    # same lattice: the transform between the bases is integral with det +-1
    T = np.linalg.solve(M.T, np.array(red, dtype=float).T).T
    assert np.allclose(T, np.round(T), atol=1e-6)
    assert abs(abs(np.linalg.det(np.round(T))) - 1) < 1e-6


def test_lll_recovers_short_vector():
    red = lll_reduce([[1, 0, 100001], [0, 1, 200002]])
    assert [2, -1, 0] in red or [-2, 1, 0] in red


def test_gap_stats_poisson(poisson):
    gs = gap_stats(build_measure(poisson, (1.0,), 100.0))
    assert abs(gs.min_gap - 2 * np.pi) < 1e-9 and abs(gs.max_gap - 2 * np.pi) < 1e-9


def test_gap_stats_lasso(lasso):
    gs = gap_stats(build_measure(lasso, XI, 200.0))
    assert gs.min_gap > 0.01
    assert gs.max_gap <= 2 * np.pi / (0.5 + SQRT2) + 1e-6


def test_gap_stats_two_atoms():
    gs = gap_stats(measure_from_points([0.3, 1.7]))
    assert gs.min_gap == gs.max_gap == pytest.approx(1.4)
    with pytest.raises(TooFewAtoms):
        gap_stats(measure_from_points([0.3]))


@given(st.lists(st.floats(-100, 100), min_size=2, max_size=30, unique=True), st.floats(-1e3, 1e3))
def test_gap_stats_translation_invariant(points, shift):
    x = np.array(points)
    assume(np.min(np.diff(np.sort(x))) > 1e-6)
    a = gap_stats(measure_from_points(x))
    b = gap_stats(measure_from_points(x + shift))
    assert a.min_gap == pytest.approx(b.min_gap, abs=1e-9)
    assert a.max_gap == pytest.approx(b.max_gap, abs=1e-9)


def test_delone_lasso(lasso):
    m = build_measure(lasso, XI, 200.0)
    R = 2 * np.pi / (0.5 + SQRT2)
    assert delone_check(m, 0.01, R)
    gs = gap_stats(m)
    assert not delone_check(m, gs.min_gap + 1e-3, R)
    assert not delone_check(m, 0.01, gs.max_gap - 1e-3)


def test_delone_poisson(poisson):
    m = build_measure(poisson, (1.0,), 200.0)
    assert delone_check(m, 2 * np.pi - 1e-6, 2 * np.pi + 1e-6)


def test_delone_window_too_short(lasso):
    m = build_measure(lasso, XI, 10.0)
    with pytest.raises(ValidationError):
        delone_check(m, 0.1, 3.0)


@settings(deadline=None)
@given(st.floats(0.0, 1.5), st.floats(1.8, 3.5), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_delone_monotone(r, R, dr, dR):
    m = lasso_measure()
    if delone_check(m, r, R):
        assert delone_check(m, r - dr, R + dR)


def test_progression_poisson(poisson):
    m = build_measure(poisson, (1.0,), 100.0)
    assert progression_intersection(m, 0.0, 2 * np.pi).count == len(m)


def test_progression_lasso_irrational(lasso):
    counts = []
    for A in (50.0, 100.0, 200.0):
        m = build_measure(lasso, XI, A)
        d = m.atoms.positive(1)[0]
        hits = progression_intersection(m, 0.0, d)
        counts.append(hits.count / (2 * A))
    assert counts == sorted(counts, reverse=True)


def test_progression_empty_and_limit():
    m = measure_from_points([], window=(-5.0, 5.0))
    assert progression_intersection(m, 0.0, 1.0).count == 0
    m = measure_from_points(np.arange(-4.0, 5.0), window=(-5.0, 5.0))
    assert progression_intersection(m, 0.0, 1.0, count_limit=3).count == 3
    with pytest.raises(ValidationError):
        progression_intersection(m, 0.0, 0.0)


def test_rational_period():
    assert rational_period([0.0, 1.0, 0.5, 1.5]) == pytest.approx(4 * np.pi)
    assert rational_period([1.0, SQRT2]) is None
    assert rational_period([2.0, 3.0]) == pytest.approx(2 * np.pi)


def test_rational_collapse(lasso):
    m = build_measure(lasso, (1.0, 0.5), 200.0)
    period = rational_period(lasso.P.exponents @ np.array([1.0, 0.5]))
    dec = decompose_progressions(m, period)
    assert dec.exact
    assert sum(p.members for p in dec.progressions) == len(m)


def test_irrational_does_not_collapse(lasso):
    m = build_measure(lasso, XI, 100.0)
    dec = decompose_progressions(m, 2 * np.pi)
    assert not dec.exact and dec.leftover > 0


def test_relation_trivial():
    assert relation_probe([1.0, 2.0]).found == (2, -1)


def test_relation_known_combination():
    x = [math.pi, math.e, 3 * math.pi - 2 * math.e]
    probe = relation_probe(x, precision=12, max_coeff=10)
    assert probe.found == (3, -2, -1)
    # re-evaluated residual honours the bound
    assert abs(sum(q * v for q, v in zip(probe.found, x))) < 1e-10


def test_relation_rational_zeros(lasso):
    z = build_measure(lasso, (1.0, 0.5), 40.0).atoms
    idx = np.flatnonzero(z.gammas > 1e-8)[:6]
    probe = relation_probe(z.gammas[idx], 12, 100, z.errors[idx], z.residuals[idx])
    assert probe.found is not None and max(map(abs, probe.found)) <= 100


def test_relation_irrational_zeros_none(lasso):
    z = build_measure(lasso, XI, 40.0).atoms
    idx = np.flatnonzero(z.gammas > 1e-8)[:8]
    probe = relation_probe(z.gammas[idx], 10, 1000, z.errors[idx], z.residuals[idx])
    assert probe.found is None
    assert "not a proof" in probe.to_dict()["label"]


def test_relation_errors():
    with pytest.raises(ValidationError):
        relation_probe([1.0])
    with pytest.raises(ValidationError):
        relation_probe([1.0] * 13)
    with pytest.raises(ValidationError):
        relation_probe([1.0, 2.0], precision=15)
    with pytest.raises(PrecisionUnattainable):
        relation_probe([1.0, 2.0], precision=10, residuals=[1e-11, 0.0])

