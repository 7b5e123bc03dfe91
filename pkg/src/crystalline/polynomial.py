"""Sparse multivariate polynomials and stable pairs.

A :class:`MultiPoly` stores complex coefficients keyed by exponent tuples.
When every coefficient is rational (e.g. the ``+-1/3`` of the lasso
polynomial) an exact :class:`fractions.Fraction` copy is kept as well and
identity checks run on it instead of on the binary floats.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import (
    EntryOutOfRange,
    NoFunctionalEquation,
    NotNormalized,
    NotSymmetric,
    NotUnitary,
    Unsupported,
    ValidationError,
    ZeroColumnSum,
    ZeroTopCoefficient,
)

Exponent = tuple[int, ...]

FE_TOL = 1e-12
MAX_SPECTRAL_SIZE = 8
MAX_LEE_YANG_SIZE = 20


def _check_exponent(exp: Iterable[int], n: int) -> Exponent:
    k = tuple(int(e) for e in exp)
    if len(k) != n:
        raise ValidationError(f"exponent {k} has length {len(k)}, expected {n}")
    if any(e < 0 for e in k):
        raise ValidationError(f"exponent {k} has a negative entry")
    return k


class MultiPoly:
    """Sparse polynomial in ``n`` variables with complex coefficients.

    Parameters
    ----------
    n : int
        Number of variables.
    terms : mapping
        Exponent tuple -> coefficient. Exact zeros are dropped.
    exact : mapping, optional
        Exponent tuple -> Fraction, the exact rational form of ``terms``.
    """

    __slots__ = ("n", "terms", "exact", "_exps", "_coeffs")

    def __init__(self, n: int, terms: Mapping[Sequence[int], complex],
                 exact: Mapping[Sequence[int], Fraction] | None = None):
        if n < 1:
            raise ValidationError("a polynomial needs at least one variable")
        self.n = int(n)
        clean: dict[Exponent, complex] = {}
        for exp, c in terms.items():
            k = _check_exponent(exp, self.n)
            c = complex(c)
            if c != 0:
                clean[k] = clean.get(k, 0j) + c
        self.terms = {k: c for k, c in sorted(clean.items()) if c != 0}
        if exact is not None:
            ex = {_check_exponent(k, self.n): Fraction(v) for k, v in exact.items()}
            ex = {k: v for k, v in sorted(ex.items()) if v != 0}
            if set(ex) != set(self.terms):
                raise ValidationError("exact and float coefficient supports differ")
            self.exact = ex
        else:
            self.exact = None
        self._exps = None
        self._coeffs = None

    @classmethod
    def from_exact(cls, n: int, terms: Mapping[Sequence[int], Fraction | int]) -> "MultiPoly":
        ex = {tuple(k): Fraction(v) for k, v in terms.items()}
        return cls(n, {k: complex(float(v)) for k, v in ex.items()}, exact=ex)

    @classmethod
    def constant_poly(cls, n: int, value=1) -> "MultiPoly":
        zero = (0,) * n
        if isinstance(value, Rational):
            return cls.from_exact(n, {zero: Fraction(value)})
        return cls(n, {zero: value})

    @classmethod
    def monomial(cls, exp: Sequence[int], coeff=1) -> "MultiPoly":
        n = len(exp)
        if isinstance(coeff, Rational):
            return cls.from_exact(n, {tuple(exp): Fraction(coeff)})
        return cls(n, {tuple(exp): coeff})

    # -- basic queries ---------------------------------------------------

    def coeff(self, exp: Sequence[int]) -> complex:
        return self.terms.get(tuple(exp), 0j)

    @property
    def constant(self) -> complex:
        return self.coeff((0,) * self.n)

    @property
    def degree(self) -> int:
        """Total degree (max over terms of the exponent sum)."""
        return max((sum(k) for k in self.terms), default=0)

    @property
    def max_degrees(self) -> Exponent:
        """Per-variable maximum degree."""
        if not self.terms:
            return (0,) * self.n
        return tuple(int(v) for v in np.max(self.exponents, axis=0))

    @property
    def is_constant(self) -> bool:
        return all(sum(k) == 0 for k in self.terms)

    @property
    def is_real(self) -> bool:
        return all(c.imag == 0 for c in self.terms.values())

    @property
    def exponents(self) -> np.ndarray:
        if self._exps is None:
            self._exps = np.array(list(self.terms) or [(0,) * self.n], dtype=np.int64).reshape(-1, self.n)
        return self._exps

    @property
    def coefficients(self) -> np.ndarray:
        if self._coeffs is None:
            self._coeffs = np.array(list(self.terms.values()) or [0j], dtype=complex)
        return self._coeffs

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        parts = []
        for k, c in self.terms.items():
            if self.exact is not None:
                cs = str(self.exact[k])
            else:
                cs = f"{c:.6g}"
            mono = "*".join(f"z{j + 1}^{e}" if e > 1 else f"z{j + 1}" for j, e in enumerate(k) if e)
            parts.append(f"({cs})" + (f"*{mono}" if mono else ""))
        return f"MultiPoly(n={self.n}, " + (" + ".join(parts) or "0") + ")"

    def __call__(self, z) -> np.ndarray | complex:
        """Evaluate at points ``z`` of shape ``(..., n)``."""
        z = np.asarray(z, dtype=complex)
        scalar = z.ndim == 1
        z = np.atleast_2d(z)
        if z.shape[-1] != self.n:
            raise ValidationError(f"points have {z.shape[-1]} coordinates, expected {self.n}")
        # (..., T, n) power table, product over variables
        powers = np.prod(z[..., None, :] ** self.exponents, axis=-1)
        out = powers @ self.coefficients
        return complex(out[0]) if scalar else out

    # -- arithmetic ------------------------------------------------------

    def _combine(self, other: "MultiPoly", sign: int) -> "MultiPoly":
        if other.n != self.n:
            raise ValidationError("variable counts differ")
        terms = dict(self.terms)
        for k, c in other.terms.items():
            terms[k] = terms.get(k, 0j) + sign * c
        exact = None
        if self.exact is not None and other.exact is not None:
            exact = dict(self.exact)
            for k, c in other.exact.items():
                exact[k] = exact.get(k, Fraction(0)) + sign * c
            exact = {k: v for k, v in exact.items() if v != 0}
            terms = {k: complex(float(v)) for k, v in exact.items()}
        return MultiPoly(self.n, terms, exact)

    def __add__(self, other: "MultiPoly") -> "MultiPoly":
        return self._combine(other, 1)

    def __sub__(self, other: "MultiPoly") -> "MultiPoly":
        return self._combine(other, -1)

    def __neg__(self) -> "MultiPoly":
        return self.scale(-1)

    def __mul__(self, other: "MultiPoly") -> "MultiPoly":
        if not isinstance(other, MultiPoly):
            return self.scale(other)
        if other.n != self.n:
            raise ValidationError("variable counts differ")
        terms: dict[Exponent, complex] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                terms[k] = terms.get(k, 0j) + c1 * c2
        exact = None
        if self.exact is not None and other.exact is not None:
            exact = {}
            for k1, c1 in self.exact.items():
                for k2, c2 in other.exact.items():
                    k = tuple(a + b for a, b in zip(k1, k2))
                    exact[k] = exact.get(k, Fraction(0)) + c1 * c2
            exact = {k: v for k, v in exact.items() if v != 0}
            terms = {k: complex(float(v)) for k, v in exact.items()}
        return MultiPoly(self.n, terms, exact)

    def scale(self, factor) -> "MultiPoly":
        if isinstance(factor, Rational) and self.exact is not None:
            f = Fraction(factor)
            ex = {k: v * f for k, v in self.exact.items()}
            return MultiPoly(self.n, {k: complex(float(v)) for k, v in ex.items()}, ex)
        return MultiPoly(self.n, {k: c * factor for k, c in self.terms.items()})

    def shift(self, exp: Sequence[int]) -> "MultiPoly":
        """Multiply by the monomial ``z**exp``."""
        def mv(k):
            return tuple(a + b for a, b in zip(k, exp))
        ex = None if self.exact is None else {mv(k): v for k, v in self.exact.items()}
        return MultiPoly(self.n, {mv(k): c for k, c in self.terms.items()}, ex)

    def normalized(self) -> "MultiPoly":
        """Divide by the constant term."""
        if self.exact is not None:
            c0 = self.exact.get((0,) * self.n, Fraction(0))
            if c0 == 0:
                raise NotNormalized("constant term vanishes")
            return self.scale(1 / c0)
        c0 = self.constant
        if c0 == 0:
            raise NotNormalized("constant term vanishes")
        return self.scale(1 / c0)

    def max_abs_diff(self, other: "MultiPoly") -> float:
        """Coefficient-wise sup distance; exact when both sides are rational."""
        if self.exact is not None and other.exact is not None:
            keys = set(self.exact) | set(other.exact)
            return float(max((abs(self.exact.get(k, 0) - other.exact.get(k, 0)) for k in keys),
                             default=Fraction(0)))
        keys = set(self.terms) | set(other.terms)
        return max((abs(self.coeff(k) - other.coeff(k)) for k in keys), default=0.0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiPoly) or other.n != self.n:
            return NotImplemented
        return self.max_abs_diff(other) == 0

    __hash__ = None


class Involuted(NamedTuple):
    """``P^iota`` written as ``z**(-shift) * poly``."""

    poly: MultiPoly
    shift: Exponent


def involute(p: MultiPoly) -> Involuted:
    """Substitute ``z_j -> 1/z_j`` and clear denominators.

    ``shift`` is the per-variable maximum degree of ``p``; ``poly`` is
    ``z**shift * p(1/z)``, an ordinary polynomial.
    """
    if not p.terms:
        raise ValidationError("cannot involute the zero polynomial")
    d = p.max_degrees

    def flip(k):
        return tuple(a - b for a, b in zip(d, k))

    ex = None if p.exact is None else {flip(k): v for k, v in p.exact.items()}
    return Involuted(MultiPoly(p.n, {flip(k): c for k, c in p.terms.items()}, ex), d)


def reflected_shifted(p: MultiPoly, ell: Sequence[int]) -> MultiPoly:
    """Return ``z**ell * p^iota`` (requires ``ell >= max_degrees``)."""
    inv = involute(p)
    extra = tuple(a - b for a, b in zip(ell, inv.shift))
    if any(e < 0 for e in extra):
        raise NoFunctionalEquation(f"ell={tuple(ell)} is below the degree vector {inv.shift}")
    return inv.poly.shift(extra)


@dataclass(frozen=True, eq=False)
class StablePair:
    """Validated quadruple ``(P, Q, ell, eta)`` with ``Q = eta z^ell P^iota``.

    ``relaxed`` marks pairs admitted with ``Q(0) != 1``; downstream code
    then normalizes ``Q`` before taking logarithms.
    """

    P: MultiPoly
    Q: MultiPoly
    ell: Exponent
    eta: complex
    relaxed: bool = False
    residual: float = 0.0

    @property
    def n(self) -> int:
        return self.P.n

    @property
    def self_dual(self) -> bool:
        return self.P.max_abs_diff(self.Q) <= FE_TOL

    def omega(self, xi: Sequence[float]) -> float:
        """Return ``xi . ell``."""
        return float(np.dot(np.asarray(xi, dtype=float), self.ell))


def functional_equation_residual(P: MultiPoly, Q: MultiPoly, ell: Sequence[int], eta) -> float:
    """Coefficient-wise sup of ``|Q - eta z^ell P^iota|``."""
    rhs = reflected_shifted(P, ell)
    if isinstance(eta, Rational) and rhs.exact is not None:
        rhs = rhs.scale(Fraction(eta))
    else:
        rhs = rhs.scale(complex(eta))
    return Q.max_abs_diff(rhs)


def _exact_constant(p: MultiPoly):
    if p.exact is not None:
        return p.exact.get((0,) * p.n, Fraction(0))
    return p.constant


def make_stable_pair(P: MultiPoly, Q: MultiPoly, relaxed: bool = False) -> StablePair:
    """Solve for the unique ``(ell, eta)`` tying ``Q`` to ``P`` and validate.

    ``ell`` is forced to be the per-variable degree vector of ``P``: the
    constant of ``Q`` must come from a top term of ``P`` and every other term
    must stay at non-negative exponents. With ``relaxed=True`` the constant
    of ``Q`` may differ from 1.
    """
    if P.n != Q.n:
        raise ValidationError("P and Q have different variable counts")
    p0, q0 = _exact_constant(P), _exact_constant(Q)
    if p0 != 1:
        raise NotNormalized(f"P(0) = {p0}, expected 1")
    if q0 != 1 and not relaxed:
        raise NotNormalized(f"Q(0) = {q0}, expected 1 (pass relaxed=True to admit it)")
    if q0 == 0:
        raise NotNormalized("Q(0) = 0")
    ell = P.max_degrees
    if any(e <= 0 for e in ell):
        raise NoFunctionalEquation(f"degree vector {ell} has a zero entry")
    if Q.max_degrees != ell:
        raise NoFunctionalEquation(f"degree vectors differ: {ell} vs {Q.max_degrees}")
    top = P.exact.get(ell, Fraction(0)) if P.exact is not None else P.coeff(ell)
    if top == 0:
        raise NoFunctionalEquation(f"P has no term at z^{ell}")
    eta = q0 / top
    res = functional_equation_residual(P, Q, ell, eta)
    if res > FE_TOL:
        raise NoFunctionalEquation(f"functional equation residual {res:.3e} exceeds {FE_TOL:g}")
    return StablePair(P, Q, ell, complex(eta), relaxed=(q0 != 1), residual=res)


def derive_dual(P: MultiPoly) -> StablePair:
    """Build ``Q = eta z^ell P^iota`` with ``ell`` the degree vector and ``Q(0) = 1``."""
    if _exact_constant(P) != 1:
        raise NotNormalized(f"P(0) = {P.constant}, expected 1")
    ell = P.max_degrees
    if any(e <= 0 for e in ell):
        raise ZeroTopCoefficient(f"degree vector {ell} has a zero entry")
    top = P.exact.get(ell, Fraction(0)) if P.exact is not None else P.coeff(ell)
    if top == 0:
        raise ZeroTopCoefficient(f"coefficient at z^{ell} vanishes")
    eta = 1 / top
    Q = reflected_shifted(P, ell)
    Q = Q.scale(eta) if isinstance(eta, Rational) else Q.scale(complex(eta))
    return make_stable_pair(P, Q)


# -- the two constructor families ---------------------------------------


def _leibniz_det(m: np.ndarray) -> complex:
    """Determinant by expansion over permutations."""
    k = m.shape[0]
    if k == 0:
        return 1.0 + 0j
    total = 0j
    for perm in itertools.permutations(range(k)):
        inversions = sum(1 for i in range(k) for j in range(i + 1, k) if perm[i] > perm[j])
        term = 1.0 + 0j
        for i, j in enumerate(perm):
            term *= m[i, j]
        total += -term if inversions % 2 else term
    return total


def _r_polynomial(monomials: Sequence[Exponent], S: np.ndarray, n: int) -> MultiPoly:
    # det(I - D S) = sum over index subsets J of (-1)^|J| det(S_JJ) prod_{j in J} z^{a_j}
    k = len(monomials)
    terms: dict[Exponent, complex] = {}
    for size in range(k + 1):
        for J in itertools.combinations(range(k), size):
            minor = _leibniz_det(S[np.ix_(J, J)]) if J else 1.0 + 0j
            exp = tuple(sum(monomials[j][v] for j in J) for v in range(n))
            terms[exp] = terms.get(exp, 0j) + (-1) ** size * minor
    return MultiPoly(n, terms)


def spectral_pair(monomials: Sequence[Sequence[int]], S) -> StablePair:
    """Secular pair ``P = R_S``, ``Q = R_{S^-1}`` for a unitary ``S``.

    Parameters
    ----------
    monomials : sequence of exponent vectors
        One monomial ``z^{a_j}`` per row of ``S``.
    S : (k, k) array_like
        Unitary scattering matrix.
    """
    S = np.asarray(S, dtype=complex)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValidationError("S must be square")
    k = S.shape[0]
    if len(monomials) != k:
        raise ValidationError(f"{len(monomials)} monomials for a {k}x{k} matrix")
    if k > MAX_SPECTRAL_SIZE:
        raise Unsupported(f"determinant expansion limited to k <= {MAX_SPECTRAL_SIZE}")
    if np.max(np.abs(S @ S.conj().T - np.eye(k))) >= 1e-10:
        raise NotUnitary("S S* differs from the identity by more than 1e-10")
    n = len(monomials[0])
    mons = [_check_exponent(m, n) for m in monomials]
    ell = tuple(sum(m[v] for m in mons) for v in range(n))
    if any(e <= 0 for e in ell):
        raise ZeroColumnSum(f"column sums {ell} must all be positive")
    P = _r_polynomial(mons, S, n)
    Q = _r_polynomial(mons, np.linalg.inv(S), n)
    eta = 1 / _leibniz_det(-S)
    res = functional_equation_residual(P, Q, ell, eta)
    if res > FE_TOL:
        raise NoFunctionalEquation(f"spectral pair residual {res:.3e}")
    return StablePair(P, Q, ell, complex(eta), residual=res)


def lee_yang_polynomial(A) -> MultiPoly:
    """Lee-Yang polynomial ``sum_S prod_{i in S, j not in S} A_ij z^S``.

    Rational matrices (ints or Fractions) give an exact polynomial.
    """
    exact = all(isinstance(a, Rational) for row in A for a in row)
    arr = np.asarray(A, dtype=object if exact else float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError("A must be square")
    n = arr.shape[0]
    if n < 1:
        raise ValidationError("A must be non-empty")
    if n > MAX_LEE_YANG_SIZE:
        raise Unsupported(f"Lee-Yang enumeration limited to n <= {MAX_LEE_YANG_SIZE}")
    for i in range(n):
        for j in range(n):
            if arr[i, j] != arr[j, i]:
                raise NotSymmetric(f"A[{i},{j}] != A[{j},{i}]")
            if not -1 <= arr[i, j] <= 1:
                raise EntryOutOfRange(f"A[{i},{j}] = {arr[i, j]} outside [-1, 1]")
    terms = {}
    for mask in range(1 << n):
        inside = [i for i in range(n) if mask >> i & 1]
        outside = [j for j in range(n) if not mask >> j & 1]
        # canonical (min, max) order keeps P and its dual bitwise identical
        pairs = sorted((min(i, j), max(i, j)) for i in inside for j in outside)
        c = Fraction(1) if exact else 1.0
        for i, j in pairs:
            c = c * arr[i, j]
        exp = tuple(int(mask >> i & 1) for i in range(n))
        if c != 0:
            terms[exp] = c
    if exact:
        return MultiPoly.from_exact(n, terms)
    return MultiPoly(n, terms)


def lee_yang(A) -> StablePair:
    """Self-dual Lee-Yang pair (``ell = (1, ..., 1)``, ``eta = 1``)."""
    P = lee_yang_polynomial(A)
    return make_stable_pair(P, P)


# -- file format ---------------------------------------------------------


def _coeff_to_json(c: complex, exact: Fraction | None) -> dict:
    if exact is not None:
        return {"num": exact.numerator, "den": exact.denominator}
    return {"re": c.real, "im": c.imag}


def _coeff_from_json(obj: Mapping) -> tuple[complex, Fraction | None]:
    if "num" in obj:
        den = int(obj.get("den", 1))
        if den == 0:
            raise ValidationError("zero denominator")
        f = Fraction(int(obj["num"]), den)
        return complex(float(f)), f
    if "re" in obj or "im" in obj:
        return complex(float(obj.get("re", 0.0)), float(obj.get("im", 0.0))), None
    raise ValidationError(f"unrecognised coefficient {dict(obj)!r}")


def poly_to_dict(p: MultiPoly) -> dict:
    return {
        "n": p.n,
        "terms": [
            {"exp": list(k), "coeff": _coeff_to_json(c, None if p.exact is None else p.exact[k])}
            for k, c in p.terms.items()
        ],
    }


def poly_from_dict(obj: Mapping) -> MultiPoly:
    try:
        n = int(obj["n"])
        raw = obj["terms"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"polynomial object needs 'n' and 'terms': {exc}") from None
    terms: dict[Exponent, complex] = {}
    exact: dict[Exponent, Fraction] = {}
    all_exact = True
    for t in raw:
        k = _check_exponent(t["exp"], n)
        if k in terms:
            raise ValidationError(f"duplicate exponent {k}")
        c, f = _coeff_from_json(t["coeff"])
        terms[k] = c
        if f is None:
            all_exact = False
        else:
            exact[k] = f
    if (0,) * n not in terms:
        raise ValidationError("the constant term must be present")
    return MultiPoly(n, terms, exact if all_exact else None)


def pair_to_dict(pair: StablePair) -> dict:
    out = poly_to_dict(pair.P)
    out["Q"] = poly_to_dict(pair.Q)
    out["ell"] = list(pair.ell)
    out["eta"] = {"re": pair.eta.real, "im": pair.eta.imag}
    if pair.relaxed:
        out["relaxed"] = True
    return out


def pair_from_dict(obj: Mapping) -> StablePair:
    """Read a pair file; without ``Q`` the dual is derived from ``P``."""
    P = poly_from_dict(obj)
    if "Q" not in obj:
        pair = derive_dual(P)
    else:
        pair = make_stable_pair(P, poly_from_dict(obj["Q"]), relaxed=bool(obj.get("relaxed", False)))
    if "ell" in obj and tuple(int(e) for e in obj["ell"]) != pair.ell:
        raise NoFunctionalEquation(f"file ell {obj['ell']} disagrees with derived {pair.ell}")
    if "eta" in obj:
        eta, _ = _coeff_from_json(obj["eta"])
        if abs(eta - pair.eta) > FE_TOL:
            raise NoFunctionalEquation(f"file eta {eta} disagrees with derived {pair.eta}")
    return pair


def load_pair(path) -> StablePair:
    with open(path) as fh:
        return pair_from_dict(json.load(fh))


def load_poly(path) -> MultiPoly:
    with open(path) as fh:
        return poly_from_dict(json.load(fh))
