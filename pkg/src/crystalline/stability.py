"""Randomized search for zeros of a polynomial inside the open unit polydisk.

A ``NoCounterexampleFound`` verdict is evidence, never a certificate.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from .errors import DegenerateInput, ValidationError
from .polynomial import MultiPoly, StablePair

DEFAULT_RADII = (0.5, 0.9, 0.99, 0.999)
DEFAULT_BUDGET = 10**5
WITNESS_TOL = 1e-9
INSIDE_MARGIN = 1e-9


class Verdict(str, enum.Enum):
    NO_COUNTEREXAMPLE = "NoCounterexampleFound"
    COUNTEREXAMPLE = "CounterexampleFound"


@dataclass(frozen=True)
class StabilityReport:
    samples_tested: int
    min_modulus_found: float
    verdict: Verdict
    witness: tuple[complex, ...] | None = None
    witness_value: float | None = None
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "samples_tested": self.samples_tested,
            "min_modulus_found": self.min_modulus_found,
            "verdict": self.verdict.value,
            "witness": None if self.witness is None
            else [{"re": z.real, "im": z.imag} for z in self.witness],
            "witness_value": self.witness_value,
            "seed": self.seed,
        }


def _univariate_coeffs(P: MultiPoly, var: int, fixed: np.ndarray) -> np.ndarray:
    """Coefficients (highest first) of ``P`` in ``z_var`` with the others fixed.

    ``fixed`` has shape ``(N, n)``; column ``var`` is ignored.
    """
    exps = P.exponents
    others = np.delete(exps, var, axis=1)
    base = np.prod(np.delete(fixed, var, axis=1)[:, None, :] ** others, axis=-1) * P.coefficients
    deg = int(exps[:, var].max())
    out = np.zeros((fixed.shape[0], deg + 1), dtype=complex)
    for t, d in enumerate(exps[:, var]):
        out[:, deg - d] += base[:, t]
    return out


def _batched_roots(coeffs: np.ndarray) -> list[np.ndarray]:
    """Roots of each row via companion-matrix eigenvalues."""
    out = [np.zeros(0, dtype=complex)] * coeffs.shape[0]
    # rows may have leading zeros; group by effective degree
    lead = np.argmax(coeffs != 0, axis=1)
    for start in np.unique(lead):
        rows = np.flatnonzero(lead == start)
        c = coeffs[rows, start:]
        d = c.shape[1] - 1
        if d < 1:
            continue
        comp = np.zeros((len(rows), d, d), dtype=complex)
        comp[:, 0, :] = -c[:, 1:] / c[:, :1]
        comp[:, np.arange(1, d), np.arange(d - 1)] = 1
        for row, eig in zip(rows, np.linalg.eigvals(comp)):
            out[row] = eig
    return out


def _polish(P: MultiPoly, z: np.ndarray, var: int) -> np.ndarray:
    """Newton in one coordinate to drive ``|P(z)|`` below the witness threshold."""
    z = z.copy()
    dP = MultiPoly(P.n, {
        tuple(e - (j == var) for j, e in enumerate(k)): c * k[var]
        for k, c in P.terms.items() if k[var] > 0
    })
    for _ in range(50):
        val = P(z)
        if abs(val) < 1e-15:
            break
        der = dP(z)
        if der == 0:
            break
        z[var] -= val / der
    return z


def falsify_stability(P: MultiPoly, budget: int = DEFAULT_BUDGET, radii=DEFAULT_RADII,
                      seed: int = 0) -> StabilityReport:
    """Search for ``z`` in the open polydisk with ``P(z) = 0``.

    Half the budget evaluates ``|P|`` at scrambled Halton points on polycircles
    of the given radii; the other half fixes all but one variable at random
    points of the closed disk of radius ``max(radii)`` and solves the
    remaining univariate polynomial by companion-matrix eigenvalues.
    """
    if budget < 1:
        raise ValidationError("budget must be >= 1")
    radii = tuple(float(r) for r in radii)
    if not radii or any(not 0 < r < 1 for r in radii):
        raise ValidationError("radii must lie in (0, 1)")
    if P.is_constant:
        raise DegenerateInput("constant polynomial")
    n = P.n
    rng = np.random.default_rng(seed)
    tested = 0
    best = np.inf
    witness = None

    # phase (a): polycircle sampling
    per_radius = max(1, (budget // 2) // len(radii))
    for r in radii:
        sob = qmc.Halton(d=n, scramble=True, seed=rng).random(per_radius)
        z = r * np.exp(2j * np.pi * sob)
        for chunk in np.array_split(z, max(1, len(z) // 20000)):
            vals = np.abs(P(chunk))
            tested += len(chunk)
            k = int(np.argmin(vals))
            if vals[k] < best:
                best = float(vals[k])
                if vals[k] < WITNESS_TOL:
                    witness = chunk[k]

    # phase (b): univariate slices
    rmax = max(radii)
    active = [j for j in range(n) if P.exponents[:, j].max() > 0]
    remaining = max(1, budget - tested)
    per_var = max(1, remaining // len(active))
    for var in active:
        if witness is not None:
            break
        rad = rmax * np.sqrt(rng.random((per_var, n)))
        fixed = rad * np.exp(2j * np.pi * rng.random((per_var, n)))
        for chunk in np.array_split(np.arange(per_var), max(1, per_var // 20000)):
            rows = fixed[chunk]
            all_roots = _batched_roots(_univariate_coeffs(P, var, rows))
            tested += len(rows)
            for row, roots in zip(rows, all_roots):
                inside = roots[np.abs(roots) < 1 - INSIDE_MARGIN]
                if len(inside):
                    z = row.copy()
                    z[var] = inside[np.argmin(np.abs(inside))]
                    z = _polish(P, z, var)
                    val = abs(P(z))
                    best = min(best, val)
                    if val < WITNESS_TOL and np.all(np.abs(z) < 1):
                        witness = z
                        break
            if witness is not None:
                break

    if witness is not None:
        value = float(abs(P(witness)))
        return StabilityReport(tested, min(best, value), Verdict.COUNTEREXAMPLE,
                               tuple(complex(v) for v in witness), value, seed)
    return StabilityReport(tested, float(best), Verdict.NO_COUNTEREXAMPLE, seed=seed)


def verify_pair_stability(pair: StablePair, budget: int = DEFAULT_BUDGET, radii=DEFAULT_RADII,
                          seed: int = 0) -> tuple[StabilityReport, StabilityReport]:
    """Run :func:`falsify_stability` on both members of the pair."""
    q = pair.Q.normalized() if pair.relaxed else pair.Q
    return (falsify_stability(pair.P, budget, radii, seed),
            falsify_stability(q, budget, radii, seed))
