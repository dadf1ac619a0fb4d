"""Real-line edge integrals of the T family and the limits of ``theta_h``.

The inner and outer edge vectors of the twisted square annulus reduce to real
integrals after substituting ``zeta = sn``:

    psi1 = 2 m^{1/8} / (4 K~) * int_0^1  zeta^{1/2} dzeta / sqrt((1 - zeta^2)(1 - m~ zeta^2))
    psi2 = e^{3 pi i/4} m^{1/8} / (4 K~) * int_0^inf  xi^{1/2} dxi / sqrt((1 + xi^2)(1 + m~ xi^2))

with ``m^{1/8}`` on the ``arg m = 2 pi r + arg m~`` branch.  They equal the flat
edges ``int_0^{1/2} G dz`` and ``int_0^{tau~/2} G dz`` and serve as an
independent check of the path integrals in :mod:`gyre.weierstrass`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .elliptic import EllipticModulus
from .quadrature import QuadratureError, tanh_sinh
from .weierstrass import edge_vectors_T, get_family, theta_h, theta_h_reference

__all__ = [
    "AsymptoteReport",
    "asymptote_report",
    "closed_form_edges_T",
    "psi1",
    "psi1_integral",
    "psi2",
    "psi2_integral",
    "theta_h_asymptote",
]


def _continuous_sqrt(w: np.ndarray) -> np.ndarray:
    """Square root continuous along the ordered samples ``w``, principal at ``w[0]``."""
    arg = np.unwrap(np.angle(w))
    arg += np.angle(w[0]) - arg[0]
    return np.sqrt(np.abs(w)) * np.exp(0.5j * arg)


def _ts_integrate(fn, tol: float = 1e-13, max_level: int = 12) -> complex:
    """Tanh-sinh integral over ``[0, 1]`` of ``fn(s, 1 - s)``, doubling until stable."""
    prev = None
    for level in range(3, max_level + 1):
        rule = tanh_sinh(level)
        val = complex(np.sum(rule.w * fn(rule.s, rule.sc)))
        if prev is not None and abs(val - prev) <= tol * max(1.0, abs(val)):
            return val
        prev = val
    raise QuadratureError("tanh-sinh did not converge for the edge integral")


def _check_real_path(mt: complex, bad_side: str) -> None:
    # the real integration path meets the branch point 1/sqrt(m~) (resp. i/sqrt(m~))
    if abs(mt.imag) <= 1e-12 * abs(mt):
        if (bad_side == "gt1" and mt.real >= 1) or (bad_side == "neg" and mt.real <= 0):
            raise ValueError(f"m~ = {mt!r} puts a branch point on the real integration path")


def psi1_integral(mt: complex, tol: float = 1e-13) -> complex:
    """``int_0^1 zeta^{1/2} dzeta / sqrt((1 - zeta^2)(1 - m~ zeta^2))``."""
    mt = complex(mt)
    _check_real_path(mt, "gt1")

    def fn(s, sc):
        root = _continuous_sqrt(1 - mt * s * s)
        return np.sqrt(s) / (np.sqrt(sc * (1 + s)) * root)

    return _ts_integrate(fn, tol)


def psi2_integral(mt: complex, tol: float = 1e-13) -> complex:
    """``int_0^inf xi^{1/2} dxi / sqrt((1 + xi^2)(1 + m~ xi^2))`` via ``xi = u / (1 - u)``."""
    mt = complex(mt)
    _check_real_path(mt, "neg")

    def fn(s, sc):
        # xi^{1/2} dxi / sqrt(...) = (s/sc)^{1/2} du / sqrt((sc^2 + s^2)(sc^2 + m~ s^2))
        root = _continuous_sqrt(sc * sc + mt * s * s)
        return np.sqrt(s / sc) / (np.sqrt(sc * sc + s * s) * root)

    return _ts_integrate(fn, tol)


def _prefactor(mod: EllipticModulus) -> complex:
    return mod.m_power(0.125) / (4 * mod.K)


def psi1(tau: complex, tol: float = 1e-13) -> complex:
    """Inner edge vector ``int_0^{1/2} G dz`` of the T family from the real integral."""
    mod = EllipticModulus.from_tau(tau)
    return 2 * _prefactor(mod) * psi1_integral(mod.m, tol)


def psi2(tau: complex, tol: float = 1e-13) -> complex:
    """Edge ``int_0^{tau~/2} G dz`` from an inner vertex to the nearest outer vertex (T family)."""
    mod = EllipticModulus.from_tau(tau)
    return cmath.exp(0.75j * math.pi) * _prefactor(mod) * psi2_integral(mod.m, tol)


def closed_form_edges_T(tau: complex) -> tuple[complex, complex]:
    """``(inner, outer)`` edge vectors from complete elliptic integrals of parameter ``mu``."""
    return edge_vectors_T(tau)


def theta_h_asymptote(tau: complex, family) -> float:
    """``Re(1 - tau) pi/4`` (T) or ``Re(1/2 - tau) pi/3`` (R), the ``Im tau -> inf`` limit of ``theta_h``."""
    return theta_h_reference(complex(tau), family)


@dataclass(frozen=True)
class AsymptoteReport:
    tau: complex
    theta_h_numeric: float
    theta_h_asymptote: float
    deviation: float
    regime: str


def asymptote_report(tau: complex, family="T", regime: str = "tau_inf") -> AsymptoteReport:
    """Compare ``theta_h`` with its limit: ``tau_inf`` (large ``Im tau``) or ``tau_to_one`` (limit ``0``)."""
    fam = get_family(family)
    if regime == "tau_inf":
        ref = theta_h_asymptote(tau, fam)
    elif regime == "tau_to_one":
        ref = 0.0
    else:
        raise ValueError(f"unknown regime {regime!r}")
    num = theta_h(tau, fam)
    dev = abs(math.remainder(num - ref, 2 * math.pi))
    return AsymptoteReport(complex(tau), num, ref, dev, regime)
