"""Theta series, modular lambda, complete elliptic integrals and Jacobi functions.

Conventions
-----------
A torus modulus ``tau`` (``Im tau > 0``) fixes the parameter ``m = lambda(2 tau)``
and the quarter period ``K``.  The co-period is ``K' = -2i tau K`` (defined from
``tau``, never as ``K(1 - m)``), so ``sn(u; tau)`` has periods ``4K`` and
``2iK' = 4 tau K``.  In terms of the unit-torus coordinate ``zeta = u / (4K)``
the periods are ``1`` and ``tau``.

Everything is evaluated from theta series with nome ``q = exp(2 i pi tau)``.
Square roots of ``m`` that appear in identities use the branch
``arg m = 2 pi r + arg m_tilde`` where ``tau = r + tau_tilde`` and
``-1/2 < Re tau_tilde <= 1/2``.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ConvergenceError",
    "EllipticModulus",
    "PoleError",
    "ReducedTau",
    "check_tau",
    "complete_K",
    "jacobi_sc",
    "jacobi_sn",
    "jacobi_sncndn",
    "modular_lambda",
    "nome",
    "reduce_tau",
    "sn_unit",
]

#: Largest nome modulus accepted by the theta series.
MAX_NOME = 0.985
#: Pole guard radius, measured in unit-torus coordinates.
POLE_GUARD = 1e-8
_SERIES_RTOL = 1e-16


class ConvergenceError(ArithmeticError):
    """Raised when a series is asked to work too close to its circle of convergence."""


class PoleError(ZeroDivisionError):
    """Raised when a Jacobi function is evaluated within the guard radius of a pole."""

    def __init__(self, point: complex, pole: complex):
        self.point = point
        self.pole = pole
        super().__init__(f"lattice-reduced point {point!r} lies within {POLE_GUARD:g} of pole {pole!r}")


def check_tau(tau: complex) -> complex:
    tau = complex(tau)
    if not tau.imag > 0:
        raise ValueError(f"tau must lie in the upper half-plane, got {tau!r}")
    return tau


@dataclass(frozen=True)
class ReducedTau:
    """``tau = r + tilde`` with ``-1/2 < Re tilde <= 1/2``."""

    r: int
    tilde: complex

    @property
    def value(self) -> complex:
        return self.r + self.tilde


def reduce_tau(tau: complex) -> ReducedTau:
    tau = check_tau(tau)
    r = math.floor(tau.real + 0.5)
    tilde = tau - r
    if tilde.real <= -0.5:  # guards the rounding of floor at exact half-integers
        r -= 1
        tilde += 1
    return ReducedTau(int(r), tilde)


def nome(tau: complex) -> complex:
    """Return ``q = exp(i pi tau)``."""
    tau = check_tau(tau)
    return cmath.exp(1j * math.pi * tau)


def _n_terms(tau_s: complex) -> int:
    # |q|^(n^2) < rtol with |q| = exp(-pi Im tau_s); the extra terms absorb exp(2n |Im v|) growth
    aq = math.exp(-math.pi * tau_s.imag)
    if aq > MAX_NOME:
        raise ConvergenceError(f"nome modulus {aq:.4f} exceeds {MAX_NOME}; Im tau too small")
    n = math.sqrt(-math.log(_SERIES_RTOL) / (math.pi * tau_s.imag))
    return int(n) + 4


def _thetas(v, tau_s: complex):
    """All four Jacobi theta functions at ``v`` for nome ``exp(i pi tau_s)``.

    ``v`` is expected in the reduced strip ``|Im v| <= pi Im tau_s / 2``.
    """
    v = np.asarray(v, dtype=complex)
    n_max = _n_terms(tau_s)
    shape = v.shape
    v = v.reshape(-1, 1)
    n = np.arange(n_max + 1)
    half = np.exp(1j * np.pi * tau_s * (n + 0.5) ** 2)
    full = np.exp(1j * np.pi * tau_s * n[1:] ** 2)
    sign_h = (-1.0) ** n
    sign_f = (-1.0) ** n[1:]
    odd = (2 * n + 1) * v
    even = 2 * n[1:] * v
    t1 = 2 * np.sum(sign_h * half * np.sin(odd), axis=1)
    t2 = 2 * np.sum(half * np.cos(odd), axis=1)
    cos_even = np.cos(even)
    t3 = 1 + 2 * np.sum(full * cos_even, axis=1)
    t4 = 1 + 2 * np.sum(sign_f * full * cos_even, axis=1)
    return t1.reshape(shape), t2.reshape(shape), t3.reshape(shape), t4.reshape(shape)


def _theta_constants(tau_s: complex):
    _, t2, t3, t4 = _thetas(0.0, tau_s)
    return complex(t2), complex(t3), complex(t4)


def modular_lambda(tau: complex) -> complex:
    """Modular lambda ``theta_2^4 / theta_3^4`` at nome ``exp(i pi tau)``."""
    tau = check_tau(tau)
    t2, t3, _ = _theta_constants(tau)
    return (t2 / t3) ** 4


def _agm(a: complex, b: complex) -> complex:
    for _ in range(100):
        if abs(a - b) <= 1e-16 * abs(a):
            break
        a, b = (a + b) / 2, cmath.sqrt(a * b)
        # the "right" choice of square root keeps the principal branch
        if abs(a - b) > abs(a + b):
            b = -b
    return (a + b) / 2


def complete_K(m: complex) -> complex:
    """Principal-branch complete elliptic integral of the first kind, parameter ``m``.

    Cut along ``[1, inf)``.  A warning is issued close to the cut.
    """
    m = complex(m)
    if m.imag == 0 and m.real >= 1:
        raise ValueError(f"K(m) is on its branch cut at m={m!r}")
    if m.real > 1 and abs(m.imag) < 1e-12 * max(1.0, abs(m)):
        warnings.warn(f"m={m!r} is close to the branch cut [1, inf) of K", RuntimeWarning, stacklevel=2)
    if m == 0:
        return complex(math.pi / 2)
    return math.pi / (2 * _agm(1.0 + 0j, cmath.sqrt(1 - m)))


@dataclass(frozen=True)
class EllipticModulus:
    """Parameter and quarter periods attached to ``tau``.

    ``K`` is ``(pi/2) theta_3^2`` at nome ``exp(2 i pi tau)``; it is the analytic
    continuation of ``K(m)`` in ``tau`` and coincides with the principal value
    whenever ``2 tau`` lies in the usual fundamental domain of Gamma(2).
    ``rho = theta_2 / theta_3`` is the fourth root of ``m`` that is analytic in
    ``tau`` on the whole upper half-plane, and ``k = rho ** 2``.  Inside the
    moduli domains this is ``m ** (1/4)`` with ``arg m = 2 pi r + arg m_tilde``
    (see :meth:`m_power`); elsewhere the principal ``arg m_tilde`` can jump and
    only the analytic root is consistent.
    """

    tau: complex
    reduced: ReducedTau
    m: complex
    k: complex
    K: complex
    Kprime: complex
    rho: complex

    @classmethod
    def from_tau(cls, tau: complex) -> "EllipticModulus":
        tau = check_tau(tau)
        red = reduce_tau(tau)
        t2, t3, _ = _theta_constants(2 * tau)
        ratio = t2 / t3
        K = math.pi / 2 * t3 * t3
        return cls(tau, red, ratio**4, ratio**2, K, -2j * tau * K, ratio)

    @property
    def arg_m_tilde(self) -> float:
        """Principal ``arg m_tilde``; ``+pi`` on the line ``Re tau_tilde = 1/2`` where ``m`` is negative."""
        m = self.m
        if m.real < 0 and abs(m.imag) <= 1e-13 * abs(m):
            return math.pi
        return cmath.phase(m)

    def m_tilde_power(self, exponent: float) -> complex:
        """Principal power ``m_tilde ** exponent``."""
        return cmath.exp(exponent * complex(math.log(abs(self.m)), self.arg_m_tilde))

    def m_power(self, exponent: float) -> complex:
        """``m ** exponent`` with ``arg m = 2 pi r + arg m_tilde``."""
        arg = 2 * math.pi * self.reduced.r + self.arg_m_tilde
        return cmath.exp(exponent * complex(math.log(abs(self.m)), arg))


def _reduce_unit(zeta, tau: complex, return_shift: bool = False):
    """Reduce unit-torus coordinates modulo the lattice ``<1, tau>``.

    With ``return_shift`` the number ``b`` of ``tau``-translations removed is also
    returned (``cn`` and ``dn`` change sign under each of them).
    """
    zeta = np.asarray(zeta, dtype=complex)
    b = np.round(zeta.imag / tau.imag)
    zeta = zeta - b * tau
    a = np.round(zeta.real)
    if return_shift:
        return zeta - a, b
    return zeta - a


def _guard_poles(zeta, tau: complex) -> None:
    for pole in (tau / 2, (1 + tau) / 2):
        # reduce the offset from the pole so any lattice translate is caught
        off = _reduce_unit(zeta - pole, tau)
        hit = np.abs(off) < POLE_GUARD
        if np.any(hit):
            idx = np.flatnonzero(hit.ravel())[0]
            raise PoleError(complex(np.ravel(zeta)[idx]), pole)


def sncndn_unit(zeta, tau: complex, *, guard: bool = True):
    """``sn, cn, dn`` of ``u = 4 K zeta`` for unit-torus coordinates ``zeta`` (vectorized)."""
    tau = check_tau(tau)
    tau = reduce_tau(tau).tilde  # the functions only depend on the lattice <1, tau>
    zeta, b = _reduce_unit(zeta, tau, return_shift=True)
    if guard:
        _guard_poles(zeta, tau)
    tau_s = 2 * tau
    c2, c3, c4 = _theta_constants(tau_s)
    t1, t2, t3, t4 = _thetas(2 * np.pi * zeta, tau_s)
    sign = 1 - 2 * (np.abs(b) % 2)  # cn(u + 2iK') = -cn(u), dn(u + 2iK') = -dn(u)
    sn = (c3 / c2) * t1 / t4
    cn = sign * (c4 / c2) * t2 / t4
    dn = sign * (c4 / c3) * t3 / t4
    return sn, cn, dn


def sn_unit(zeta, tau: complex, *, guard: bool = True):
    """``sn(4 K zeta; tau)``; periods 1 and ``tau``, zeros at 0 and 1/2."""
    return sncndn_unit(zeta, tau, guard=guard)[0]


def _as_output(x):
    x = np.asarray(x)
    return complex(x) if x.ndim == 0 else x


def jacobi_sncndn(z, tau: complex):
    """``sn, cn, dn`` of argument ``z`` for the modulus attached to ``tau``."""
    mod = EllipticModulus.from_tau(tau)
    sn, cn, dn = sncndn_unit(np.asarray(z, dtype=complex) / (4 * mod.K), mod.tau)
    return _as_output(sn), _as_output(cn), _as_output(dn)


def jacobi_sn(z, tau: complex):
    """Jacobi ``sn(z; tau)`` with periods ``4K`` and ``2iK'``.

    Raises :class:`PoleError` when ``z`` is within the guard radius of a pole.
    """
    return jacobi_sncndn(z, tau)[0]


def jacobi_sc(z, tau: complex):
    """Jacobi ``sc = sn / cn``.

    The imaginary transformation reads ``sn(z; tau) = -i sc(iz; -1/(4 tau))`` in
    this normalization of ``tau`` (``m(-1/(4 tau)) = 1 - m(tau)``).
    """
    sn, cn, _ = jacobi_sncndn(z, tau)
    return _as_output(np.asarray(sn) / np.asarray(cn))
