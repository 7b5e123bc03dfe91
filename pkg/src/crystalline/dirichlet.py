"""Finite Dirichlet series ``F(s) = P(e^{-xi_1 s}, ..., e^{-xi_n s})`` and their zeros.

Stability puts every zero on the imaginary axis, so zeros are located as
real roots ``gamma`` of ``gamma -> F(i gamma)``. When the coefficients satisfy
``conj(a(m)) = theta * a(ell - m)`` (self-conjugate case, e.g. real
self-dual pairs) the rotated function ``sqrt(theta) e^{i gamma omega / 2} F(i gamma)``
is real and zeros are bracketed by sign changes.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .errors import NotSelfConjugate, ValidationError, WindowTooCoarse, WrongArity
from .polynomial import MultiPoly, StablePair

NEWTON_TOL = 1e-12
NEWTON_MAXITER = 60
DEDUP_TOL = 1e-8
RESIDUAL_MAX = 1e-9
CONJ_TOL = 1e-12


@dataclass(frozen=True)
class FrequencyVec:
    """Logarithmic frequencies ``xi_j = ln b_j > 0``."""

    xi: tuple[float, ...]

    def __post_init__(self):
        xi = tuple(float(x) for x in self.xi)
        if not xi or any(not x > 0 or not math.isfinite(x) for x in xi):
            raise ValidationError(f"frequencies must be positive and finite, got {xi}")
        object.__setattr__(self, "xi", xi)

    @classmethod
    def from_bases(cls, b: Sequence[float]) -> "FrequencyVec":
        return cls(tuple(math.log(v) for v in b))

    @property
    def b(self) -> tuple[float, ...]:
        return tuple(math.exp(x) for x in self.xi)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.xi)

    def __len__(self):
        return len(self.xi)


def _as_freq(freq) -> FrequencyVec:
    return freq if isinstance(freq, FrequencyVec) else FrequencyVec(tuple(freq))


@dataclass(frozen=True, eq=False)
class DirichletSeries:
    """``F`` (side ``"F"``, built on ``P``) or ``G`` (side ``"G"``, built on ``Q``)."""

    pair: StablePair
    freq: FrequencyVec
    side: Literal["F", "G"] = "F"

    def __post_init__(self):
        object.__setattr__(self, "freq", _as_freq(self.freq))
        if len(self.freq) != self.pair.n:
            raise WrongArity(f"{len(self.freq)} frequencies for {self.pair.n} variables")
        if self.side not in ("F", "G"):
            raise ValidationError("side must be 'F' or 'G'")

    @property
    def poly(self) -> MultiPoly:
        return self.pair.P if self.side == "F" else self.pair.Q

    @property
    def omega(self) -> float:
        return self.pair.omega(self.freq.xi)

    @property
    def frequencies(self) -> np.ndarray:
        """``xi . m`` for each term, aligned with ``poly.coefficients``."""
        return self.poly.exponents @ self.freq.array

    def __call__(self, s):
        return self.eval(s)

    def eval(self, s):
        """``F(s) = sum_m a(m) exp(-(xi . m) s)``."""
        s_arr = np.asarray(s, dtype=complex)
        out = np.exp(-np.multiply.outer(s_arr, self.frequencies)) @ self.poly.coefficients
        return complex(out) if s_arr.ndim == 0 else out

    def derivative(self, s):
        """``F'(s)``."""
        s_arr = np.asarray(s, dtype=complex)
        f = self.frequencies
        out = np.exp(-np.multiply.outer(s_arr, f)) @ (-f * self.poly.coefficients)
        return complex(out) if s_arr.ndim == 0 else out

    def on_axis(self, gamma):
        """``F(i gamma)`` for real ``gamma``."""
        return self.eval(1j * np.asarray(gamma, dtype=float))

    def conjugation_phase(self) -> complex | None:
        """Unit ``theta`` with ``conj(a(m)) = theta a(ell - m)``, or ``None``."""
        p = self.poly
        ell = self.pair.ell
        top = p.coeff(ell)
        c0 = p.constant
        if top == 0 or c0 == 0:
            return None
        theta = c0.conjugate() / top
        if abs(abs(theta) - 1) > CONJ_TOL:
            return None
        for m, a in p.terms.items():
            mirror = tuple(x - y for x, y in zip(ell, m))
            if min(mirror) < 0 or abs(a.conjugate() - theta * p.coeff(mirror)) > CONJ_TOL:
                return None
        return theta


def functional_eq_residual(F: DirichletSeries, G: DirichletSeries, s_samples) -> float:
    """Max of ``|F(-s) - eta^{-1} e^{s omega} G(s)| / (1 + |F(-s)|)``."""
    if F.pair is not G.pair or F.freq != G.freq:
        raise ValidationError("F and G must share pair and frequencies")
    s = np.asarray(s_samples, dtype=complex)
    lhs = F.eval(-s)
    rhs = np.exp(s * F.omega) * G.eval(s) / F.pair.eta
    return float(np.max(np.abs(lhs - rhs) / (1 + np.abs(lhs))))


# -- zero finding ----------------------------------------------------------


@dataclass(frozen=True)
class ZeroList:
    """Real zeros ``gamma`` of ``F(i gamma)`` inside ``window``."""

    gammas: np.ndarray
    multiplicities: np.ndarray
    window: tuple[float, float]
    residuals: np.ndarray
    slopes: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.gammas)

    @property
    def errors(self) -> np.ndarray:
        """First-order error estimate ``|F| / |F'|`` plus rounding in ``gamma``."""
        with np.errstate(divide="ignore"):
            est = np.where(self.slopes > 0, self.residuals / self.slopes, np.inf)
        return est + np.finfo(float).eps * np.abs(self.gammas)

    def positive(self, count: int | None = None) -> np.ndarray:
        g = self.gammas[self.gammas > DEDUP_TOL]
        return g if count is None else g[:count]

    def is_symmetric(self, tol: float = 1e-9) -> bool:
        g = self.gammas
        a, b = self.window
        inner = g[(np.abs(g) <= min(-a, b) - tol)]
        if len(inner) == 0:
            return True
        return bool(np.all(np.abs(np.sort(-inner) - inner) <= tol))


def _refine_bracket(fn, dfn, lo, hi, flo, fhi, x0):
    """Newton on a real function safeguarded by the bracket ``[lo, hi]``."""
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if flo > 0:
        lo, hi = hi, lo  # keep fn(lo) < 0
    x = x0
    dx_old = abs(hi - lo)
    for _ in range(NEWTON_MAXITER):
        fx, dfx = fn(x), dfn(x)
        if fx == 0:
            return x
        if fx < 0:
            lo = x
        else:
            hi = x
        step = fx / dfx if dfx != 0 else math.inf
        xn = x - step
        if not (min(lo, hi) < xn < max(lo, hi)) or abs(2 * step) > dx_old:
            xn = 0.5 * (lo + hi)
        dx_old = abs(xn - x)
        if xn == x or abs(xn - x) <= 4 * np.finfo(float).eps * max(1.0, abs(x)):
            return xn
        x = xn
    return x


def _newton_complex(series: DirichletSeries, gamma0: float) -> tuple[complex, bool]:
    """Complex Newton on ``g -> F(i g)`` starting at real ``gamma0``."""
    g = complex(gamma0)
    for _ in range(NEWTON_MAXITER):
        f = series.eval(1j * g)
        df = 1j * series.derivative(1j * g)
        if df == 0:
            return g, False
        step = f / df
        g -= step
        if abs(step) <= 4 * np.finfo(float).eps * max(1.0, abs(g)):
            break
    return g, abs(series.eval(1j * g)) < RESIDUAL_MAX


def multiplicity(series: DirichletSeries, gamma: float, radius: float, points: int = 128) -> int:
    """Winding number of ``F`` around a circle centred at ``i gamma``."""
    phi = 2 * np.pi * np.arange(points + 1) / points
    vals = series.eval(1j * gamma + radius * np.exp(1j * phi))
    dphase = np.angle(vals[1:] / vals[:-1])
    return int(round(float(np.sum(dphase)) / (2 * np.pi)))


def find_zeros(series: DirichletSeries, window: tuple[float, float], oversample: int = 32) -> ZeroList:
    """Locate all zeros ``i gamma`` of ``F`` with ``gamma`` in ``window``.

    Scans ``F(i gamma)`` on a grid of spacing ``2 pi / (omega * oversample)``,
    polishes each candidate and assigns multiplicities by the argument
    principle.

    Raises
    ------
    WindowTooCoarse
        When polishing shows the grid missed an oscillation: a candidate
        without a sign change converged to an odd-order zero, or a
        candidate wandered more than two grid cells from its seed.
    """
    a, b = float(window[0]), float(window[1])
    if not (math.isfinite(a) and math.isfinite(b)) or a > b:
        raise ValidationError(f"bad window {window}")
    if oversample < 4:
        raise ValidationError("oversample must be >= 4")
    omega = series.omega
    h = 2 * np.pi / (omega * oversample)
    count = int(math.ceil((b - a) / h)) + 3
    grid = a - h + h * np.arange(count)
    freqs = series.frequencies
    coeffs = series.poly.coefficients
    theta = series.conjugation_phase()
    # Lipschitz bound on |F(i g)| over one grid cell
    lip = float(np.sum(np.abs(coeffs) * np.abs(freqs))) * h

    found: list[float] = []
    if theta is not None:
        c = cmath.sqrt(theta)
        rot = omega / 2 - freqs

        def real_fn(g):
            return float((c * np.exp(1j * g * rot) @ coeffs).real)

        def real_dfn(g):
            return float((c * (1j * rot) * np.exp(1j * g * rot) @ coeffs).real)

        values = (c * np.exp(1j * np.multiply.outer(grid, rot)) @ coeffs).real
        sign_change = values[:-1] * values[1:] <= 0
        for i in np.flatnonzero(sign_change):
            lo, hi = grid[i], grid[i + 1]
            x0 = lo - values[i] * (hi - lo) / (values[i + 1] - values[i]) if values[i + 1] != values[i] else lo
            found.append(_refine_bracket(real_fn, real_dfn, lo, hi, values[i], values[i + 1], x0))
        mag = np.abs(values)
        touched = np.zeros(count, dtype=bool)
        touched[:-1] |= sign_change
        touched[1:] |= sign_change
        cand = [i for i in range(1, count - 1)
                if mag[i] <= mag[i - 1] and mag[i] <= mag[i + 1] and mag[i] <= lip and not touched[i]]
    else:
        mag = np.abs(np.exp(-1j * np.multiply.outer(grid, freqs)) @ coeffs)
        cand = [i for i in range(1, count - 1)
                if mag[i] <= mag[i - 1] and mag[i] <= mag[i + 1] and mag[i] <= lip]

    for i in cand:
        g, ok = _newton_complex(series, grid[i])
        if not ok or abs(g.imag) > 1e-9:
            continue
        if any(abs(g.real - k) <= DEDUP_TOL for k in found):
            continue
        if abs(g.real - grid[i]) > 2 * h:
            raise WindowTooCoarse(
                f"candidate at {grid[i]:.6g} converged to {g.real:.6g}; raise oversample")
        found.append(g.real)
        if theta is not None:
            m = multiplicity(series, g.real, min(1e-4, h / 4))
            if m % 2 == 1:
                raise WindowTooCoarse(
                    f"odd-order zero near {g.real:.6g} without a sign change; raise oversample")

    found.sort()
    merged: list[float] = []
    for g in found:
        if merged and abs(g - merged[-1]) <= DEDUP_TOL:
            continue
        merged.append(g)
    gammas = np.array([g for g in merged if a <= g <= b])

    mults = np.empty(len(gammas), dtype=int)
    for j, g in enumerate(gammas):
        gaps = []
        if j > 0:
            gaps.append(g - gammas[j - 1])
        if j + 1 < len(gammas):
            gaps.append(gammas[j + 1] - g)
        r = min([1e-4] + [d / 2 for d in gaps])
        mults[j] = multiplicity(series, g, r)
    residuals = np.abs(series.on_axis(gammas)) if len(gammas) else np.zeros(0)
    slopes = np.abs(series.derivative(1j * gammas)) if len(gammas) else np.zeros(0)
    if np.any(mults < 1):
        raise WindowTooCoarse("a polished point has non-positive winding; raise oversample")
    if np.any(residuals >= RESIDUAL_MAX):
        raise WindowTooCoarse(f"zero residual {residuals.max():.2e} above {RESIDUAL_MAX:g}")
    return ZeroList(gammas, mults, (a, b), residuals, slopes)


def count_zeros_rectangle(series: DirichletSeries, gamma_a: float, gamma_b: float,
                          sigma: float = 1.0, step: float = 0.01) -> int:
    """Argument-principle count of zeros in ``[-sigma, sigma] x [gamma_a, gamma_b]``.

    The horizontal sides must avoid zeros; pick ``gamma_a``, ``gamma_b``
    between consecutive on-axis zeros.
    """
    corners = [complex(-sigma, gamma_a), complex(sigma, gamma_a),
               complex(sigma, gamma_b), complex(-sigma, gamma_b)]
    total = 0.0
    for z0, z1 in zip(corners, corners[1:] + corners[:1]):
        n = max(16, int(math.ceil(abs(z1 - z0) / step)))
        while True:
            t = np.linspace(0.0, 1.0, n + 1)
            vals = series.eval(z0 + (z1 - z0) * t)
            d = np.angle(vals[1:] / vals[:-1])
            if np.max(np.abs(d)) < np.pi / 4 or n > 2**22:
                break
            n *= 4
        total += float(np.sum(d))
    return int(round(total / (2 * np.pi)))


# -- the lasso secular equation and its torus curve ------------------------


def secular_values(freq, gammas) -> np.ndarray:
    """``3 sin(g (xi1/2 + xi2)) + sin(g (xi1/2 - xi2))`` for each ``g``."""
    freq = _as_freq(freq)
    if len(freq) != 2:
        raise WrongArity("the secular equation is defined for two frequencies")
    x1, x2 = freq.xi
    g = np.asarray(gammas, dtype=float)
    return 3 * np.sin(g * (x1 / 2 + x2)) + np.sin(g * (x1 / 2 - x2))


def laurent_L(x, y) -> np.ndarray:
    """``L(x, y) = 3 sin(x/2 + y) + sin(x/2 - y)``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return 3 * np.sin(x / 2 + y) + np.sin(x / 2 - y)


@dataclass(frozen=True)
class TorusCurve:
    """Ordered polylines of the zero set of ``P(e^{ix}, e^{iy})`` on ``[0, 2 pi]^2``."""

    components: list[np.ndarray]
    resolution: int

    @property
    def points(self) -> np.ndarray:
        if not self.components:
            return np.zeros((0, 2))
        return np.vstack(self.components)


def torus_real_function(P: MultiPoly, ell: Sequence[int]):
    """Real-valued rotation ``Re(sqrt(theta) e^{-i ell.t/2} P(e^{i t}))`` of ``P`` on the torus."""
    top = P.coeff(ell)
    if top == 0:
        raise NotSelfConjugate("no top coefficient")
    theta = P.constant.conjugate() / top
    for m, a in P.terms.items():
        mirror = tuple(x - y for x, y in zip(ell, m))
        if min(mirror) < 0 or abs(a.conjugate() - theta * P.coeff(mirror)) > CONJ_TOL or abs(abs(theta) - 1) > CONJ_TOL:
            raise NotSelfConjugate("P is not self-conjugate; its torus zero set is not a curve")
    c = cmath.sqrt(theta)
    exps = P.exponents.astype(float) - np.asarray(ell, dtype=float) / 2
    coeffs = c * P.coefficients

    def fn(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        phase = np.multiply.outer(x, exps[:, 0]) + np.multiply.outer(y, exps[:, 1])
        return (np.exp(1j * phase) @ coeffs).real

    return fn


def torus_zero_curve(P: MultiPoly, resolution: int = 256, ell: Sequence[int] | None = None) -> TorusCurve:
    """Marching-squares trace of the zero curve of a self-conjugate two-variable ``P``.

    Nodes sit at cell centres ``(i + 1/2) 2 pi / resolution`` so no node
    falls on an exact zero at the corners of the square. Each edge crossing
    is refined by bisection to full precision.
    """
    if P.n != 2:
        raise WrongArity("torus curves need a two-variable polynomial")
    if resolution < 64:
        raise ValidationError("resolution must be >= 64")
    ell = tuple(ell) if ell is not None else P.max_degrees
    fn = torus_real_function(P, ell)
    N = resolution
    t = (np.arange(N) + 0.5) * 2 * np.pi / N
    X, Y = np.meshgrid(t, t, indexing="ij")
    V = fn(X, Y)
    pos = V > 0

    def crossing(p0, p1, v0):
        # bisection along the edge from p0 to p1; v0 = fn(p0)
        lo, hi = np.array(p0, dtype=float), np.array(p1, dtype=float)
        s0 = v0 > 0
        for _ in range(64):
            mid = 0.5 * (lo + hi)
            vm = float(fn(mid[0], mid[1]))
            if vm == 0:
                return mid
            if (vm > 0) == s0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    edge_pt: dict[tuple, np.ndarray] = {}

    def edge(i0, j0, i1, j1):
        key = (i0, j0, i1, j1)
        if key not in edge_pt:
            edge_pt[key] = crossing((t[i0], t[j0]), (t[i1], t[j1]), V[i0, j0])
        return key

    adjacency: dict[tuple, list[tuple]] = {}

    def link(k1, k2):
        adjacency.setdefault(k1, []).append(k2)
        adjacency.setdefault(k2, []).append(k1)

    for i in range(N - 1):
        for j in range(N - 1):
            corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
            signs = [pos[c] for c in corners]
            if all(signs) or not any(signs):
                continue
            sides = []
            for s in range(4):
                c0, c1 = corners[s], corners[(s + 1) % 4]
                if signs[s] != signs[(s + 1) % 4]:
                    a0, a1 = sorted([c0, c1])
                    sides.append(edge(*a0, *a1))
            if len(sides) == 2:
                link(sides[0], sides[1])
            else:
                # saddle: resolve with the centre value
                centre = float(fn(t[i] + np.pi / N, t[j] + np.pi / N)) > 0
                if centre == signs[0]:
                    link(sides[0], sides[3])
                    link(sides[1], sides[2])
                else:
                    link(sides[0], sides[1])
                    link(sides[2], sides[3])

    components = []
    unvisited = set(adjacency)
    while unvisited:
        ends = [k for k in unvisited if len(adjacency[k]) == 1]
        start = min(ends) if ends else min(unvisited)
        chain = [start]
        unvisited.discard(start)
        cur = start
        while True:
            nxt = [k for k in adjacency[cur] if k in unvisited]
            if not nxt:
                break
            cur = nxt[0]
            unvisited.discard(cur)
            chain.append(cur)
        pts = np.array([edge_pt[k] for k in chain])
        if len(pts) > 1 and pts[0, 0] > pts[-1, 0]:
            pts = pts[::-1]
        components.append(pts)
    components.sort(key=lambda c: (c[0, 0], c[0, 1]))
    return TorusCurve(components, N)
