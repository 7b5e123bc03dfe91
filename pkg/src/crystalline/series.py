"""Coefficients of ``log P = sum_k c(k) z^k`` for ``P(0) = 1``.

Two routes are provided:

* :func:`log_coeffs_recurrence` solves ``P * E(log P) = E(P)`` shell by
  shell, where ``E = sum_j z_j d/dz_j`` multiplies ``z^k`` by ``|k|``.
  This is the production path.
* :func:`log_coeffs_multinomial` expands ``log(1 + u) = sum (-1)^(v+1) u^v / v``
  with ``u = P - 1`` and reads off ``[z^k] u^v`` for every power. It is
  exponential-ish in the truncation degree and serves as a test oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .errors import NotNormalized, ValidationError
from .polynomial import Exponent, MultiPoly

DROP_TOL = 1e-15


@dataclass(frozen=True)
class LogCoeffTable:
    """Truncated table ``k -> c(k)`` for ``1 <= |k| <= degree_max``."""

    n: int
    degree_max: int
    coeffs: Mapping[Exponent, complex]
    exact: Mapping[Exponent, Fraction] | None = field(default=None, compare=False)

    def __getitem__(self, k) -> complex:
        return self.coeffs.get(tuple(k), 0j)

    def __len__(self) -> int:
        return len(self.coeffs)

    def __iter__(self):
        return iter(self.coeffs)

    def items(self):
        return self.coeffs.items()

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Exponents ``(N, n)`` and coefficients ``(N,)`` as arrays."""
        if not self.coeffs:
            return np.zeros((0, self.n), dtype=np.int64), np.zeros(0, dtype=complex)
        exps = np.array(list(self.coeffs), dtype=np.int64)
        return exps, np.array(list(self.coeffs.values()), dtype=complex)

    def shell_max(self) -> dict[int, float]:
        """Largest ``|c(k)|`` on each total-degree shell."""
        out: dict[int, float] = {}
        for k, c in self.coeffs.items():
            d = sum(k)
            out[d] = max(out.get(d, 0.0), abs(c))
        return dict(sorted(out.items()))

    def max_abs_diff(self, other: "LogCoeffTable") -> float:
        keys = set(self.coeffs) | set(other.coeffs)
        return max((abs(self[k] - other[k]) for k in keys), default=0.0)


def _check(P: MultiPoly, D: int):
    if D < 1:
        raise ValidationError("degree_max must be >= 1")
    c0 = P.exact.get((0,) * P.n) if P.exact is not None else P.constant
    if c0 != 1:
        raise NotNormalized(f"P(0) = {c0}, expected 1")


def _reachable(support: list[Exponent], n: int, D: int) -> list[Exponent]:
    """Exponents of total degree <= D reachable as sums of support vectors."""
    zero = (0,) * n
    seen = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for k in frontier:
            for m in support:
                s = tuple(a + b for a, b in zip(k, m))
                if sum(s) <= D and s not in seen:
                    seen.add(s)
                    nxt.append(s)
        frontier = nxt
    seen.discard(zero)
    return sorted(seen, key=lambda k: (sum(k), k))


def _finish(n: int, D: int, values: dict, exact: bool) -> LogCoeffTable:
    if exact:
        ex = {k: v for k, v in values.items() if v != 0}
        return LogCoeffTable(n, D, {k: complex(float(v)) for k, v in ex.items()}, ex)
    return LogCoeffTable(n, D, {k: complex(v) for k, v in values.items() if abs(v) >= DROP_TOL})


def log_coeffs_recurrence(P: MultiPoly, D: int, exact: bool = False) -> LogCoeffTable:
    """Graded recurrence ``|k| c(k) = |k| a(k) - sum_{0<m<=k} a(m) |k-m| c(k-m)``.

    ``exact=True`` runs in rational arithmetic (only for rational ``P``).
    """
    _check(P, D)
    if exact and P.exact is None:
        raise ValidationError("exact arithmetic needs rational coefficients")
    n = P.n
    zero = (0,) * n
    src = P.exact if exact else P.terms
    a = {k: v for k, v in src.items() if k != zero}
    support = list(a)
    c: dict[Exponent, complex | Fraction] = {}
    for k in _reachable(support, n, D):
        deg = sum(k)
        acc = deg * a.get(k, 0)
        for m, am in a.items():
            r = tuple(x - y for x, y in zip(k, m))
            if min(r) < 0:
                continue
            cr = c.get(r)
            if cr is not None:
                acc -= am * (deg - sum(m)) * cr
        c[k] = acc / deg if exact else complex(acc) / deg
    return _finish(n, D, c, exact)


def log_coeffs_multinomial(P: MultiPoly, D: int, exact: bool | None = None) -> LogCoeffTable:
    """Oracle: ``c(k) = sum_v (-1)^(v+1)/v [z^k] u^v`` with ``u = P - 1``.

    Each power ``u^v`` is the sum over ordered v-tuples of support
    exponents; the tuples are accumulated by extending ``u^(v-1)`` with one
    more factor. Rational ``P`` defaults to exact arithmetic.
    """
    _check(P, D)
    if exact is None:
        exact = P.exact is not None
    n = P.n
    zero = (0,) * n
    src = P.exact if exact else P.terms
    u = {k: v for k, v in src.items() if k != zero}
    min_deg = min((sum(k) for k in u), default=D + 1)
    one = Fraction(1) if exact else 1.0
    total: dict[Exponent, complex | Fraction] = {}
    power = {zero: one}
    nu = 0
    while power and nu * min_deg < D:
        nu += 1
        nxt: dict[Exponent, complex | Fraction] = {}
        for k, pk in power.items():
            for m, am in u.items():
                s = tuple(x + y for x, y in zip(k, m))
                if sum(s) <= D:
                    nxt[s] = nxt.get(s, 0) + pk * am
        power = nxt
        sign = one if nu % 2 else -one
        for k, v in power.items():
            total[k] = total.get(k, 0) + sign * v / nu
    return _finish(n, D, total, exact)


def example_cn(n1: int, n2: int, exact: bool = False):
    """Closed-form ``c(n1, 2 n2)`` for ``1 - z1/3 + z2^2/3 - z1 z2^2``.

    Sums ``-(k1+k2+k3-1)! / (k1! k2! k3!) * (-1)^k2 / 3^(k1+k2)`` over
    ``k1 + k3 = n1``, ``k2 + k3 = n2``.
    """
    if n1 < 0 or n2 < 0 or (n1, n2) == (0, 0):
        raise ValidationError("need n1, n2 >= 0 and (n1, n2) != (0, 0)")
    total = Fraction(0)
    for k3 in range(min(n1, n2) + 1):
        k1, k2 = n1 - k3, n2 - k3
        num = math.factorial(k1 + k2 + k3 - 1)
        den = math.factorial(k1) * math.factorial(k2) * math.factorial(k3) * 3 ** (k1 + k2)
        total -= Fraction((-1) ** k2 * num, den)
    return total if exact else complex(float(total))


@dataclass(frozen=True)
class BoundCheck:
    bound: float
    max_found: float
    passed: bool
    K: float
    degree: int


def sup_modulus_on_torus(P: MultiPoly, grid: int = 64, samples: int = 10**6, seed: int = 0) -> float:
    """Estimate ``max |P|`` on the unit polycircle (equal to the polydisk sup)."""
    n = P.n
    if n <= 3:
        theta = 2 * np.pi * np.arange(grid) / grid
        mesh = np.stack(np.meshgrid(*([theta] * n), indexing="ij"), axis=-1).reshape(-1, n)
    else:
        from scipy.stats import qmc

        mesh = 2 * np.pi * qmc.Halton(d=n, seed=seed).random(samples)
    best = 0.0
    for chunk in np.array_split(mesh, max(1, len(mesh) // 65536)):
        best = max(best, float(np.max(np.abs(P(np.exp(1j * chunk))))))
    return best


def coeff_bound_check(P: MultiPoly, table: LogCoeffTable) -> BoundCheck:
    """Compare ``max |c(k)|`` with ``sqrt((2 ln K)^2 + (pi deg P)^2)``.

    Uses the probability-normalized torus measure: then the Fourier
    coefficient of ``log P(r e^{i theta})`` is ``r^|k| c(k)`` and its real and
    imaginary parts are bounded by ``2 ln K`` and ``pi deg P``.
    """
    K = sup_modulus_on_torus(P)
    bound = math.hypot(2 * math.log(max(K, 1.0)), math.pi * P.degree)
    found = max((abs(c) for c in table.coeffs.values()), default=0.0)
    return BoundCheck(bound, found, found <= bound * (1 + 1e-6), K, P.degree)
