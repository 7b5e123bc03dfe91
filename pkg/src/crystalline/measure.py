"""The atomic measure on the zeros, its Fourier transform, and the summation identity.

Fourier convention: ``hhat(gamma) = int h(t) exp(i gamma t) dt``. With it,

    sum_gamma m(gamma) hhat(gamma)
        = omega h(0) - sum_k (xi.k) c_P(k) h(xi.k) - sum_k (xi.k) c_Q(k) h(-xi.k)

where ``omega = xi . ell`` and ``gamma`` runs over zeros of ``F(i gamma)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Literal, Sequence

import numpy as np
from scipy import integrate, special

from .dirichlet import DirichletSeries, FrequencyVec, ZeroList, find_zeros
from .errors import NotSelfDual, TailTooLarge, ValidationError, WindowExceeded
from .polynomial import StablePair
from .series import LogCoeffTable, coeff_bound_check, log_coeffs_recurrence

TAIL_LIMIT = 0.1


def zero_density_bound(omega: float) -> int:
    """Atoms of the measure in any closed interval of length 2."""
    return math.ceil(omega / math.pi) + 1


# -- test functions ----------------------------------------------------------


@dataclass(frozen=True)
class TestFunction:
    """Pair ``(h, hhat)`` with a closed-form (or quadrature) transform.

    ``kind`` is one of ``"gaussian"`` (``param`` = sigma), ``"cosine"``
    (``h = cos^2(pi t / 2w)`` on ``|t| < w``, ``param`` = w) or ``"bump"``
    (``exp(1 - 1/(1 - (t/w)^2))``, transform by quadrature). ``shift`` moves
    ``hhat`` to ``hhat(gamma - shift)``, i.e. multiplies ``h`` by
    ``exp(-i shift t)``.
    """

    __test__ = False  # not a pytest class

    kind: Literal["gaussian", "cosine", "bump"] = "gaussian"
    param: float = 1.0
    shift: float = 0.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "cosine", "bump"):
            raise ValidationError(f"unknown test function kind {self.kind!r}")
        if not self.param > 0:
            raise ValidationError("test function parameter must be positive")

    @classmethod
    def gaussian(cls, sigma: float = 1.0, shift: float = 0.0) -> "TestFunction":
        return cls("gaussian", sigma, shift)

    @classmethod
    def cosine(cls, width: float, shift: float = 0.0) -> "TestFunction":
        return cls("cosine", width, shift)

    @classmethod
    def bump(cls, width: float, shift: float = 0.0) -> "TestFunction":
        return cls("bump", width, shift)

    @property
    def support(self) -> float:
        """Half-width of ``supp h`` (``inf`` for the Gaussian)."""
        return math.inf if self.kind == "gaussian" else self.param

    def _h0(self, t: np.ndarray) -> np.ndarray:
        p = self.param
        if self.kind == "gaussian":
            return np.exp(-t**2 / (2 * p**2))
        inside = np.abs(t) < p
        if self.kind == "cosine":
            return np.where(inside, np.cos(np.pi * t / (2 * p)) ** 2, 0.0)
        u = np.where(inside, t / p, 0.0)
        return np.where(inside, np.exp(1 - 1 / (1 - u**2)), 0.0)

    def h(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = self._h0(t)
        if self.shift:
            return out * np.exp(-1j * self.shift * t)
        return out

    def _hhat0(self, g: np.ndarray) -> np.ndarray:
        p = self.param
        if self.kind == "gaussian":
            return p * math.sqrt(2 * math.pi) * np.exp(-(p * g) ** 2 / 2)
        if self.kind == "cosine":
            a = math.pi / p

            def sinc(x):
                return np.sinc(x / math.pi)

            return p * sinc(g * p) + p / 2 * (sinc((g + a) * p) + sinc((g - a) * p))
        flat = np.atleast_1d(g).astype(float)
        vals = np.array([self._bump_hat(float(x)) for x in flat.ravel()])
        return vals.reshape(np.shape(g))

    def _bump_hat(self, g: float) -> float:
        p = self.param

        def f(t):
            return math.exp(1 - 1 / (1 - (t / p) ** 2)) if abs(t) < p else 0.0

        if g == 0:
            val, _ = integrate.quad(f, 0, p, epsabs=1e-14, epsrel=1e-13, limit=200)
        else:
            val, _ = integrate.quad(f, 0, p, weight="cos", wvar=abs(g), epsabs=1e-14, limit=400)
        return 2 * val

    def hhat(self, gamma) -> np.ndarray:
        g = np.asarray(gamma, dtype=float) - self.shift
        return self._hhat0(g)

    def h_envelope(self, t: float) -> float:
        """``sup_{|u| >= t} |h(u)|`` for ``t >= 0``."""
        if t >= self.support:
            return 0.0
        return float(self._h0(np.asarray(t)))

    @cached_property
    def _bump_derivative_l1(self) -> dict[int, float]:
        """``||h^(k)||_1`` for k = 2, 4 by finite differences on a fine grid."""
        p = self.param
        t = np.linspace(-p, p, 400001)
        d = self._h0(t)
        out = {}
        for k in range(1, 5):
            d = np.gradient(d, t)
            if k % 2 == 0:
                out[k] = float(integrate.trapezoid(np.abs(d), t))
        return out

    def hhat_tail(self, A: float, density: float) -> float:
        """Bound on ``sum |hhat(gamma)|`` over atoms with ``|gamma| > A``.

        ``density`` bounds the number of atoms per unit length.
        """
        a_eff = A - abs(self.shift)
        if a_eff <= 0:
            return math.inf
        p = self.param
        if self.kind == "gaussian":
            env = p * math.sqrt(2 * math.pi) * math.exp(-(p * a_eff) ** 2 / 2)
            integral = math.pi * special.erfc(p * a_eff / math.sqrt(2))
        elif self.kind == "cosine":
            a = math.pi / p
            if a_eff <= a * 1.01:
                return math.inf
            env = a * a / (a_eff * (a_eff**2 - a * a))
            integral = 0.5 * math.log(a_eff**2 / (a_eff**2 - a * a))
        else:
            # |hhat(g)| <= ||h^(k)||_1 / |g|^k
            env, integral = min(
                (ck / a_eff**k, ck / ((k - 1) * a_eff ** (k - 1)))
                for k, ck in self._bump_derivative_l1.items()
            )
        return 2 * density * (env + integral)


# -- measures ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CrystallineMeasure:
    """Atoms at the zeros, weighted by multiplicity."""

    atoms: ZeroList
    pair: StablePair
    freq: FrequencyVec

    @property
    def positions(self) -> np.ndarray:
        return self.atoms.gammas

    @property
    def weights(self) -> np.ndarray:
        return self.atoms.multiplicities

    @property
    def window(self) -> tuple[float, float]:
        return self.atoms.window

    def __len__(self):
        return len(self.atoms)

    def mass(self, lo: float, hi: float) -> int:
        x = self.positions
        return int(np.sum(self.weights[(x >= lo) & (x <= hi)]))


def _symmetric_window(window) -> tuple[float, float]:
    if np.isscalar(window):
        A = float(window)
        return (-A, A)
    a, b = (float(v) for v in window)
    if abs(a + b) > 1e-12 * max(1.0, abs(b)):
        raise ValidationError(f"window {window} is not symmetric")
    return (a, b)


def build_measure(pair: StablePair, freq, window, oversample: int = 32) -> CrystallineMeasure:
    """Crystalline measure on the zeros of ``F`` inside ``window`` (``A`` or ``(-A, A)``)."""
    series = DirichletSeries(pair, freq)
    zeros = find_zeros(series, _symmetric_window(window), oversample)
    return CrystallineMeasure(zeros, pair, series.freq)


def log_tables(pair: StablePair, D: int) -> tuple[LogCoeffTable, LogCoeffTable]:
    """Tables for ``log P`` and ``log Q`` (``Q`` normalized for relaxed pairs)."""
    tp = log_coeffs_recurrence(pair.P, D)
    if pair.self_dual:
        return tp, tp
    q = pair.Q.normalized() if pair.relaxed else pair.Q
    return tp, log_coeffs_recurrence(q, D)


@dataclass(frozen=True)
class SpectrumMeasure:
    """Atoms ``(position, weight)`` of the Fourier transform inside ``[-A, A]``.

    ``provenance[i]`` lists the ``(sign, k)`` terms merged into atom ``i``;
    the atom at 0 carries ``(0, ())``.
    """

    positions: np.ndarray
    weights: np.ndarray
    window: tuple[float, float]
    degree_max: int
    provenance: list[list[tuple[int, tuple[int, ...]]]] = field(repr=False)

    def __len__(self):
        return len(self.positions)

    def total_variation(self, A: float) -> float:
        return float(np.sum(np.abs(self.weights[np.abs(self.positions) <= A])))


def build_spectrum(pair: StablePair, freq, window) -> SpectrumMeasure:
    """Fourier transform atoms: ``(0, omega)``, ``(+xi.k, -(xi.k) c_P(k))``, ``(-xi.k, -(xi.k) c_Q(k))``."""
    freq = freq if isinstance(freq, FrequencyVec) else FrequencyVec(tuple(freq))
    a, A = _symmetric_window(window)
    xi = freq.array
    D = max(1, math.ceil(A / float(xi.min())))
    tp, tq = log_tables(pair, D)
    raw: list[tuple[float, complex, tuple[int, tuple[int, ...]]]] = [
        (0.0, complex(pair.omega(xi)), (0, ()))]
    for sign, table in ((1, tp), (-1, tq)):
        for k, c in table.items():
            pos = float(np.dot(xi, k))
            if pos <= A:
                raw.append((sign * pos, -pos * c, (sign, k)))
    raw.sort(key=lambda r: r[0])
    positions: list[float] = []
    weights: list[complex] = []
    prov: list[list] = []
    for pos, w, src in raw:
        if positions and abs(pos - positions[-1]) <= 1e-12 * max(1.0, abs(pos)):
            weights[-1] += w
            prov[-1].append(src)
        else:
            positions.append(pos)
            weights.append(w)
            prov.append([src])
    return SpectrumMeasure(np.array(positions), np.array(weights, dtype=complex), (a, A), D, prov)


def spectrum_growth(spec: SpectrumMeasure, A_values: Sequence[float]) -> tuple[list[tuple[float, float]], float]:
    """``|muhat|([-A, A])`` for each ``A`` and the least-squares log-log slope."""
    A_values = [float(v) for v in A_values]
    if any(b <= a for a, b in zip(A_values, A_values[1:])):
        raise ValidationError("A_values must be increasing")
    if A_values and A_values[-1] > spec.window[1] + 1e-12:
        raise WindowExceeded(f"A = {A_values[-1]} beyond spectrum window {spec.window}")
    rows = [(A, spec.total_variation(A)) for A in A_values]
    slope = math.nan
    if len(rows) >= 2:
        slope = float(np.polyfit(np.log([r[0] for r in rows]), np.log([r[1] for r in rows]), 1)[0])
    return rows, slope


def translation_bound_profile(measure: CrystallineMeasure, x_values) -> np.ndarray:
    """``mu(x + [-1, 1])`` for each ``x``."""
    a, b = measure.window
    xs = np.asarray(x_values, dtype=float)
    if np.any(xs - 1 < a) or np.any(xs + 1 > b):
        raise WindowExceeded(f"x +- 1 must stay inside {measure.window}")
    return np.array([measure.mass(x - 1, x + 1) for x in xs])


def spectrum_window_mass(spec: SpectrumMeasure, x_values) -> np.ndarray:
    """``|muhat|(x + [-1, 1])`` for each ``x``."""
    a, b = spec.window
    xs = np.asarray(x_values, dtype=float)
    if np.any(xs - 1 < a) or np.any(xs + 1 > b):
        raise WindowExceeded(f"x +- 1 must stay inside {spec.window}")
    p, w = spec.positions, np.abs(spec.weights)
    return np.array([float(np.sum(w[(p >= x - 1) & (p <= x + 1)])) for x in xs])


# -- the summation identity --------------------------------------------------


@dataclass(frozen=True)
class SummationReport:
    lhs: complex
    rhs: complex
    residual: float
    window: float
    degree_max: int
    tail_estimate: float
    tail_zeros: float
    tail_coeffs: float
    atoms: int
    variant: str
    relaxed: bool

    @property
    def honest(self) -> bool:
        """Residual within the certified truncation budget."""
        return self.residual <= self.tail_estimate + 1e-6

    def to_dict(self) -> dict:
        return {
            "lhs": {"re": self.lhs.real, "im": self.lhs.imag},
            "rhs": {"re": self.rhs.real, "im": self.rhs.imag},
            "residual": self.residual,
            "tail_estimate": self.tail_estimate,
            "tail_zeros": self.tail_zeros,
            "tail_coeffs": self.tail_coeffs,
            "window": self.window,
            "degree_max": self.degree_max,
            "atoms": self.atoms,
            "variant": self.variant,
            "relaxed": self.relaxed,
        }


def _coeff_tail(test: TestFunction, xi: np.ndarray, n: int, D: int, C: float) -> float:
    """Bound on the dropped terms ``|k| > D`` of one coefficient sum."""
    xmin, xmax = float(xi.min()), float(xi.max())
    total = 0.0
    d = D + 1
    while True:
        env = test.h_envelope(d * xmin)
        term = (d + 1) ** n * d * xmax * C * env
        total += term
        if env == 0.0 or (term < 1e-30 * max(total, 1e-300) and d * xmin > 3 * test.param):
            break
        d += 1
        if d > D + 10**6:
            return math.inf
    return total


def _sum_parts(pair: StablePair, xi: np.ndarray, test: TestFunction, D: int):
    tp, tq = log_tables(pair, D)
    out = []
    for table in (tp, tq):
        exps, c = table.arrays()
        pos = exps @ xi
        out.append((pos, c))
    return out, (tp, tq)


def verify_summation(pair: StablePair, freq, test: TestFunction, A: float, D: int,
                     variant: Literal["direct", "reflected", "combined"] = "direct",
                     oversample: int = 32, zeros: ZeroList | None = None,
                     check_tail: bool = True) -> SummationReport:
    """Evaluate both sides of the summation identity at truncation ``(A, D)``.

    ``variant="reflected"`` sums ``hhat(-gamma)`` with the roles of ``c_P``
    and ``c_Q`` swapped; ``"combined"`` adds the two.

    Raises
    ------
    TailTooLarge
        If the certified truncation bound exceeds 0.1.
    """
    freq = freq if isinstance(freq, FrequencyVec) else FrequencyVec(tuple(freq))
    xi = freq.array
    if A <= 0 or D < 1:
        raise ValidationError("need A > 0 and D >= 1")
    if zeros is None:
        zeros = find_zeros(DirichletSeries(pair, freq), (-A, A), oversample)
    g, m = zeros.gammas, zeros.multiplicities
    omega = pair.omega(xi)
    h0 = complex(test.h(0.0))

    (pos_p, c_p), (pos_q, c_q) = _sum_parts(pair, xi, test, D)[0]
    sum_p_plus = np.sum(pos_p * c_p * test.h(pos_p))
    sum_p_minus = np.sum(pos_p * c_p * test.h(-pos_p))
    sum_q_plus = np.sum(pos_q * c_q * test.h(pos_q))
    sum_q_minus = np.sum(pos_q * c_q * test.h(-pos_q))
    direct_l = np.sum(m * test.hhat(g))
    refl_l = np.sum(m * test.hhat(-g))
    direct_r = omega * h0 - sum_p_plus - sum_q_minus
    refl_r = omega * h0 - sum_q_plus - sum_p_minus
    if variant == "direct":
        lhs, rhs, sides = direct_l, direct_r, 1
    elif variant == "reflected":
        lhs, rhs, sides = refl_l, refl_r, 1
    elif variant == "combined":
        lhs, rhs, sides = direct_l + refl_l, direct_r + refl_r, 2
    else:
        raise ValidationError(f"unknown variant {variant!r}")

    tail_z, tail_c = _tails(pair, xi, test, A, D, sides)
    report = SummationReport(complex(lhs), complex(rhs), float(abs(lhs - rhs)), float(A), int(D),
                             tail_z + tail_c, tail_z, tail_c, int(np.sum(m)), variant, pair.relaxed)
    if check_tail and report.tail_estimate > TAIL_LIMIT:
        raise TailTooLarge(f"tail estimate {report.tail_estimate:.3e} exceeds {TAIL_LIMIT}")
    return report


def _tails(pair: StablePair, xi: np.ndarray, test: TestFunction, A: float, D: int, sides: int):
    omega = pair.omega(xi)
    # per unit length: a length-1 interval sits inside a length-2 one
    tail_z = sides * test.hhat_tail(A, zero_density_bound(omega))
    polys = [pair.P, pair.Q.normalized() if pair.relaxed else pair.Q]
    tail_c = 0.0
    for poly in polys:
        if test.h_envelope((D + 1) * float(xi.min())) == 0.0:
            continue
        dummy = LogCoeffTable(poly.n, D, {})
        C = coeff_bound_check(poly, dummy).bound
        tail_c += sides * _coeff_tail(test, xi, poly.n, D, C)
    return tail_z, tail_c


def verify_summation_symmetric(pair: StablePair, freq, test: TestFunction, A: float, D: int,
                               oversample: int = 32, zeros: ZeroList | None = None,
                               check_tail: bool = True) -> SummationReport:
    """Self-dual form: ``omega h(0) - sum (xi.k) c_P(k) (h(xi.k) + h(-xi.k))``."""
    if not pair.self_dual:
        raise NotSelfDual("P and Q differ")
    freq = freq if isinstance(freq, FrequencyVec) else FrequencyVec(tuple(freq))
    xi = freq.array
    if zeros is None:
        zeros = find_zeros(DirichletSeries(pair, freq), (-A, A), oversample)
    g, m = zeros.gammas, zeros.multiplicities
    tp = log_coeffs_recurrence(pair.P, D)
    exps, c = tp.arrays()
    pos = exps @ xi
    lhs = np.sum(m * test.hhat(g))
    rhs = pair.omega(xi) * complex(test.h(0.0)) - np.sum(pos * c * (test.h(pos) + test.h(-pos)))
    tail_z, tail_c = _tails(pair, xi, test, A, D, 1)
    report = SummationReport(complex(lhs), complex(rhs), float(abs(lhs - rhs)), float(A), int(D),
                             tail_z + tail_c, tail_z, tail_c, int(np.sum(m)), "symmetric", pair.relaxed)
    if check_tail and report.tail_estimate > TAIL_LIMIT:
        raise TailTooLarge(f"tail estimate {report.tail_estimate:.3e} exceeds {TAIL_LIMIT}")
    return report
