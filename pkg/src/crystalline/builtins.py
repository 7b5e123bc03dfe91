"""Named pairs reproducible without authoring files."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .errors import ConfigInvalid
from .polynomial import MultiPoly, StablePair, derive_dual, lee_yang, spectral_pair

SQRT2 = math.sqrt(2.0)

# default frequency vectors, xi_j = ln b_j
DEFAULT_XI = {
    "poisson": (1.0,),
    "lasso": (1.0, SQRT2),
    "lee-yang": (1.0, SQRT2, math.sqrt(3.0)),
    "spectral": (1.0, SQRT2, math.sqrt(3.0)),
}

LEE_YANG_MATRIX = [
    [Fraction(1), Fraction(1, 2), Fraction(-1, 3)],
    [Fraction(1, 2), Fraction(1), Fraction(1, 4)],
    [Fraction(-1, 3), Fraction(1, 4), Fraction(1)],
]


def poisson_polynomial() -> MultiPoly:
    """``1 - z1``."""
    return MultiPoly.from_exact(1, {(0,): 1, (1,): -1})


def lasso_polynomial() -> MultiPoly:
    """``1 - z1/3 + z2^2/3 - z1 z2^2`` with exact thirds."""
    third = Fraction(1, 3)
    return MultiPoly.from_exact(2, {(0, 0): 1, (1, 0): -third, (0, 2): third, (1, 2): -1})


def star_scattering_matrix(k: int = 3) -> np.ndarray:
    """Neumann vertex scattering matrix ``(2/k) J - I`` of a k-star graph."""
    return 2.0 / k * np.ones((k, k)) - np.eye(k)


def poisson_pair() -> StablePair:
    return derive_dual(poisson_polynomial())


def lasso_pair() -> StablePair:
    return derive_dual(lasso_polynomial())


def lee_yang_pair() -> StablePair:
    return lee_yang(LEE_YANG_MATRIX)


def spectral_builtin_pair() -> StablePair:
    """Three-edge star graph with edge lengths mapped to z1, z2, z3."""
    mons = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    return spectral_pair(mons, star_scattering_matrix(3))


BUILTINS = {
    "poisson": poisson_pair,
    "lasso": lasso_pair,
    "lee-yang": lee_yang_pair,
    "spectral": spectral_builtin_pair,
}


def builtin_pair(name: str) -> StablePair:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise ConfigInvalid(f"unknown builtin {name!r}; choose from {sorted(BUILTINS)}") from None
