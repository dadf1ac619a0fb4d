"""Tanh-sinh and Gauss-Legendre rules on the unit interval.

The tanh-sinh rule returns each abscissa together with its distance to the
right end, ``1 - s``, computed without cancellation.  Integrands with
algebraic singularities at either end are then evaluated relative to the
nearer endpoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = ["QuadratureError", "TanhSinhRule", "gauss_legendre", "tanh_sinh"]

# abscissae closer than this to an end are dropped; weights there are ~1e-200
_S_MIN = 1e-200


class QuadratureError(ArithmeticError):
    """Raised when a quadrature fails to reach its tolerance."""


@dataclass(frozen=True)
class TanhSinhRule:
    s: np.ndarray  # abscissae in (0, 1), increasing
    sc: np.ndarray  # 1 - s
    w: np.ndarray  # weights for the unit interval


@lru_cache(maxsize=32)
def tanh_sinh(level: int) -> TanhSinhRule:
    """Tanh-sinh rule on ``[0, 1]`` with step ``h = 2**-level``."""
    h = 2.0**-level
    # e^{-pi sinh t} = _S_MIN
    t_max = math.asinh(-math.log(_S_MIN) / math.pi)
    n = int(math.ceil(t_max / h))
    t = h * np.arange(-n, n + 1)
    y = np.pi * np.sinh(t)
    s = 1.0 / (1.0 + np.exp(-y))
    sc = 1.0 / (1.0 + np.exp(y))
    w = h * np.pi * np.cosh(t) * s * sc
    keep = (s > _S_MIN) & (sc > _S_MIN)
    return TanhSinhRule(s[keep], sc[keep], w[keep])


@lru_cache(maxsize=8)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """``n``-point Gauss-Legendre nodes and weights on ``[0, 1]``."""
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1) / 2, w / 2
