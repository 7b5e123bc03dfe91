"""Structural diagnostics on the support: gaps, Delone bounds, progressions, integer relations.

Everything here is empirical. A probe that finds no integer relation at a
given precision and coefficient bound says nothing about linear
independence over the rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import PrecisionUnattainable, TooFewAtoms, ValidationError
from .measure import CrystallineMeasure


@dataclass(frozen=True)
class GapStats:
    min_gap: float
    max_gap: float
    count: int
    window: tuple[float, float]


def gap_stats(measure: CrystallineMeasure) -> GapStats:
    x = measure.positions
    if len(x) < 2:
        raise TooFewAtoms(f"need at least 2 atoms, have {len(x)}")
    d = np.diff(x)
    return GapStats(float(d.min()), float(d.max()), len(x), measure.window)


def delone_check(measure: CrystallineMeasure, r_candidate: float, R_candidate: float) -> bool:
    """``True`` iff gaps are ``>= r`` and every length-``R`` interval in the window holds an atom."""
    lo, hi = measure.window
    if hi - lo < 10 * R_candidate:
        raise ValidationError("window must be at least 10 R long")
    x = measure.positions
    if len(x) < 2:
        raise TooFewAtoms(f"need at least 2 atoms, have {len(x)}")
    d = np.diff(x)
    if d.min() < r_candidate:
        return False
    return bool(d.max() <= R_candidate and x[0] - lo <= R_candidate and hi - x[-1] <= R_candidate)


@dataclass(frozen=True)
class ProgressionHits:
    count: int
    hits: np.ndarray
    window: tuple[float, float]

    @property
    def density(self) -> float:
        lo, hi = self.window
        return self.count / (hi - lo) if hi > lo else 0.0


def progression_intersection(measure: CrystallineMeasure, a: float, d: float,
                             tol: float = 1e-8, count_limit: int | None = None) -> ProgressionHits:
    """Atoms within ``tol`` of ``{a + n d}``; stops after ``count_limit`` hits."""
    if not d > 0:
        raise ValidationError("step must be positive")
    x = measure.positions
    off = x - a
    dist = np.abs(off - np.round(off / d) * d)
    hits = x[dist <= tol]
    if count_limit is not None:
        hits = hits[:count_limit]
    return ProgressionHits(len(hits), hits, measure.window)


# -- rational collapse --------------------------------------------------------


def rational_period(frequencies: Sequence[float], max_den: int = 1000, tol: float = 1e-12) -> float | None:
    """Smallest ``T`` with ``f T`` in ``2 pi Z`` for every ``f``, or ``None`` if incommensurable.

    Frequencies are compared against the first nonzero one with rational
    approximations of denominator at most ``max_den``.
    """
    fs = [float(f) for f in frequencies if abs(f) > tol]
    if not fs:
        return None
    ref = fs[0]
    ratios = []
    for f in fs:
        r = Fraction(f / ref).limit_denominator(max_den)
        if abs(float(r) - f / ref) > tol * max(1.0, abs(f / ref)):
            return None
        ratios.append(r)
    lcm = math.lcm(*(r.denominator for r in ratios))
    g = math.gcd(*(abs(r.numerator) * (lcm // r.denominator) for r in ratios))
    # frequencies are integer multiples of ref * g / lcm
    return 2 * math.pi * lcm / (abs(ref) * g)


@dataclass(frozen=True)
class Progression:
    offset: float
    period: float
    members: int


@dataclass(frozen=True)
class Decomposition:
    progressions: list[Progression]
    leftover: int
    missing: int
    period: float

    @property
    def exact(self) -> bool:
        return self.leftover == 0 and self.missing == 0


def decompose_progressions(measure: CrystallineMeasure, period: float, tol: float = 1e-8) -> Decomposition:
    """Split the atoms into progressions ``offset + n * period``.

    Atoms are grouped by residue mod ``period``; a class counts as a full
    progression only if every member inside the window is present.
    Atoms in incomplete classes are reported as ``leftover``.
    """
    if not period > 0:
        raise ValidationError("period must be positive")
    lo, hi = measure.window
    x = measure.positions
    if len(x) == 0:
        return Decomposition([], 0, 0, period)
    res = np.mod(x, period)
    order = np.argsort(res)
    clusters: list[list[int]] = []
    for i in order:
        if clusters and abs(res[i] - res[clusters[-1][-1]]) <= tol:
            clusters[-1].append(int(i))
        else:
            clusters.append([int(i)])
    # residues near the period wrap around to 0
    if len(clusters) > 1 and period - res[clusters[-1][-1]] + res[clusters[0][0]] <= tol:
        clusters[0].extend(clusters.pop())
    progs, leftover, missing = [], 0, 0
    for members in clusters:
        offset = float(x[members[0]] - period * np.round(x[members[0]] / period))
        n_lo = math.ceil((lo + tol - offset) / period)
        n_hi = math.floor((hi - tol - offset) / period)
        expected = max(0, n_hi - n_lo + 1)
        present = len({int(np.round((x[i] - offset) / period)) for i in members})
        gap = expected - present
        if gap > 0:
            leftover += len(members)
            missing += gap
        else:
            progs.append(Progression(offset, period, len(members)))
    progs.sort(key=lambda p: p.offset)
    return Decomposition(progs, leftover, missing, period)


# -- integer relations -----------------------------------------------------------


def lll_reduce(basis: Sequence[Sequence[int]], delta: Fraction = Fraction(99, 100)) -> list[list[int]]:
    """Exact integral LLL reduction of linearly independent integer rows.

    Keeps the Gram-Schmidt data as integers (the ``d_i``/``lambda_ij``
    formulation), so no rounding enters the reduction itself.
    """
    b = [[int(v) for v in row] for row in basis]
    n = len(b)
    if n == 0:
        return []
    delta = Fraction(delta)
    dn, dd = delta.numerator, delta.denominator

    def dot(u, v):
        return sum(x * y for x, y in zip(u, v))

    # 1-based bookkeeping: d[0] = 1, lam[k][j] for j < k
    d = [1] + [0] * n
    lam = [[0] * (n + 1) for _ in range(n + 1)]
    bb = [None] + b  # bb[1..n]

    def red(k, l):
        if 2 * abs(lam[k][l]) > d[l]:
            q = (2 * lam[k][l] + d[l]) // (2 * d[l])
            bb[k] = [x - q * y for x, y in zip(bb[k], bb[l])]
            lam[k][l] -= q * d[l]
            for i in range(1, l):
                lam[k][i] -= q * lam[l][i]

    def swap(k, kmax):
        bb[k], bb[k - 1] = bb[k - 1], bb[k]
        for j in range(1, k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lm = lam[k][k - 1]
        B = (d[k - 2] * d[k] + lm * lm) // d[k - 1]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k] * lam[i][k - 1] - lm * t) // d[k - 1]
            lam[i][k - 1] = (B * t + lm * lam[i][k]) // d[k]
        d[k - 1] = B

    d[1] = dot(bb[1], bb[1])
    if d[1] == 0:
        raise ValidationError("basis rows must be linearly independent")
    k, kmax = 2, 1
    while k <= n:
        if k > kmax:
            kmax = k
            for j in range(1, k + 1):
                u = dot(bb[k], bb[j])
                for i in range(1, j):
                    u = (d[i] * u - lam[k][i] * lam[j][i]) // d[i - 1]
                if j < k:
                    lam[k][j] = u
                else:
                    if u == 0:
                        raise ValidationError("basis rows must be linearly independent")
                    d[k] = u
        red(k, k - 1)
        # Lovasz: d_k d_{k-2} >= delta d_{k-1}^2 - lam^2
        if dd * (d[k] * d[k - 2] + lam[k][k - 1] ** 2) < dn * d[k - 1] ** 2:
            swap(k, kmax)
            k = max(2, k - 1)
        else:
            for l in range(k - 2, 0, -1):
                red(k, l)
            k += 1
    return [list(row) for row in bb[1:]]


@dataclass(frozen=True)
class RelationProbe:
    """Outcome of an integer-relation search (empirical, never a proof)."""

    vector: tuple[float, ...]
    precision: int
    max_coeff: int
    found: tuple[int, ...] | None
    residual: float | None
    noise_rejected: int = 0

    def to_dict(self) -> dict:
        return {
            "vector": list(self.vector),
            "precision": self.precision,
            "max_coeff": self.max_coeff,
            "found": None if self.found is None else list(self.found),
            "residual": self.residual,
            "noise_rejected": self.noise_rejected,
            "label": "empirical probe; absence of a relation is not a proof of independence",
        }


def _exact_dot(q: Sequence[int], x: Sequence[float]) -> float:
    return abs(float(sum(Fraction(qi) * Fraction(xi) for qi, xi in zip(q, x))))


def relation_probe(values: Sequence[float], precision: int = 10, max_coeff: int = 1000,
                   value_errors: Sequence[float] | None = None,
                   residuals: Sequence[float] | None = None) -> RelationProbe:
    """Search for integer ``q`` with ``q . values ~ 0`` by lattice reduction.

    The lattice rows are ``(e_i, round(10^precision * x_i))``, reduced with
    ``delta = 0.99``. A reduced row ``q`` is accepted only if
    ``||q||_inf <= max_coeff``, ``|q.x| < 10^(2-precision) ||q||_2``, and
    ``|q.x|`` is within the propagated input noise ``8 sum |q_i| err_i``.
    The last test rejects the near-relations that exist for any real
    vector at finite precision; ``noise_rejected`` counts them.

    Parameters
    ----------
    value_errors : sequence of float, optional
        Absolute uncertainty of each value; defaults to a few ulps.
    residuals : sequence of float, optional
        ``|F(i gamma)|`` of zeros fed in; must be below ``min(10^-precision, 1e-12)``.
    """
    x = [float(v) for v in values]
    if not 2 <= len(x) <= 12:
        raise ValidationError("relation_probe takes between 2 and 12 values")
    if not 1 <= precision <= 14:
        raise ValidationError("precision must be between 1 and 14 digits")
    if residuals is not None:
        limit = min(10.0 ** -precision, 1e-12)
        worst = max(float(r) for r in residuals)
        if worst >= limit:
            raise PrecisionUnattainable(f"zero residual {worst:.2e} above {limit:.0e}")
    eps = np.finfo(float).eps
    if value_errors is None:
        errs = [4 * eps * max(1.0, abs(v)) for v in x]
    else:
        errs = [float(e) for e in value_errors]
    scale = 10**precision
    n = len(x)
    basis = [[int(i == j) for j in range(n)] + [round(scale * x[i])] for i in range(n)]
    reduced = lll_reduce(basis)
    best, best_res, rejected = None, None, 0
    for row in reduced:
        q = row[:n]
        if not any(q) or max(abs(v) for v in q) > max_coeff:
            continue
        lead = next(v for v in q if v)
        if lead < 0:
            q = [-v for v in q]
        r = _exact_dot(q, x)
        norm2 = math.sqrt(sum(v * v for v in q))
        if r >= 10.0 ** (2 - precision) * norm2:
            continue
        noise = 8 * sum(abs(qi) * (e + eps * abs(xi)) for qi, e, xi in zip(q, errs, x))
        if r > noise:
            rejected += 1
            continue
        if best is None or norm2 < math.sqrt(sum(v * v for v in best)):
            best, best_res = tuple(q), r
    return RelationProbe(tuple(x), precision, max_coeff, best, best_res, rejected)
