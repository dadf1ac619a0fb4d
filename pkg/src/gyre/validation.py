"""Self-check suites used by ``gyre validate``.

Each suite returns a list of :class:`Check` rows (name, measured value, bound,
pass flag).  Suites are deterministic: random samples come from fixed seeds.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .asymptotics import asymptote_report, closed_form_edges_T, psi1, psi2_integral
from .elliptic import EllipticModulus, jacobi_sc, jacobi_sn, jacobi_sncndn
from .period import pitch_reflect, residual, wrap_angle
from .weierstrass import WeierstrassData, get_family, in_omega, psi, psi_closed_form_T, psi_pair, theta_h

__all__ = ["Check", "SUITES", "random_moduli", "random_elliptic_pairs", "run_suite"]


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    bound: float
    passed: bool

    @classmethod
    def below(cls, name: str, value: float, bound: float) -> "Check":
        return cls(name, float(value), float(bound), bool(value < bound))


def random_moduli(n: int, family="T", seed: int = 0, im_min: float = 0.05, im_max: float = 2.5, margin: float = 0.02):
    """``n`` moduli drawn uniformly from the open domain, ``margin`` away from its corners."""
    fam = get_family(family)
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        tau = complex(rng.uniform(-1, fam.right_edge), rng.uniform(im_min, im_max))
        if in_omega(tau, fam) and abs(tau + 1) > margin and abs(tau - fam.right_edge) > margin:
            out.append(tau)
    return out


def random_elliptic_pairs(n: int, seed: int = 0, im_range=(0.5, 3.0)):
    """``(z, tau)`` pairs with ``z = 4K (u + v tau)``, ``|v| <= 0.4`` (off the poles of ``sn``)."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        tau = complex(rng.uniform(-1.0, 1.0), rng.uniform(*im_range))
        u, v = rng.uniform(-0.5, 0.5), rng.uniform(-0.4, 0.4)
        K = EllipticModulus.from_tau(tau).K
        out.append((4 * K * (u + v * tau), tau))
    return out


def _rel(a, b) -> float:
    return abs(a - b) / max(1.0, abs(b))


def _derivative(f: Callable[[complex], complex], z: complex, h: float = 1e-3) -> complex:
    """Five-point central difference."""
    return (-f(z + 2 * h) + 8 * f(z + h) - 8 * f(z - h) + f(z - 2 * h)) / (12 * h)


def suite_identities(n: int = 100, seed: int = 11) -> list[Check]:
    """Jacobi ``sn`` identities at ``n`` random ``(z, tau)``, ``Im tau`` in ``[0.5, 3]``."""
    worst = dict.fromkeys(
        ["periodicity", "oddness", "reflection 2K-z", "shift 2K+z", "shift iK'", "imaginary transform", "derivative"], 0.0
    )
    for z, tau in random_elliptic_pairs(n, seed):
        mod = EllipticModulus.from_tau(tau)
        K, iKp = mod.K, 1j * mod.Kprime
        s = jacobi_sn(z, tau)
        per = max(_rel(jacobi_sn(z + 4 * K, tau), s), _rel(jacobi_sn(z + 2 * iKp, tau), s))
        worst["periodicity"] = max(worst["periodicity"], per)
        worst["oddness"] = max(worst["oddness"], _rel(jacobi_sn(-z, tau), -s))
        worst["reflection 2K-z"] = max(worst["reflection 2K-z"], _rel(jacobi_sn(2 * K - z, tau), s))
        worst["shift 2K+z"] = max(worst["shift 2K+z"], _rel(jacobi_sn(2 * K + z, tau), -s))
        k = mod.rho**2
        if abs(s) > 1e-3:
            worst["shift iK'"] = max(worst["shift iK'"], _rel(jacobi_sn(z + iKp, tau), 1 / (k * s)))
        worst["imaginary transform"] = max(worst["imaginary transform"], _rel(-1j * jacobi_sc(1j * z, -1 / (4 * tau)), s))
        _, cn, dn = jacobi_sncndn(z, tau)
        fd = _derivative(lambda w: jacobi_sn(w, tau), z, 1e-3 * max(1.0, abs(K)))
        worst["derivative"] = max(worst["derivative"], _rel(fd, cn * dn))
    return [Check.below(name, val, 1e-8) for name, val in worst.items()]


def suite_closedform(n: int = 20, seed: int = 3) -> list[Check]:
    """Quadrature ``psi`` and the inner edge against their elliptic-integral forms (T)."""
    taus = random_moduli(n, "T", seed, im_min=0.2)
    w_psi = w_edge = 0.0
    for tau in taus:
        num = psi(WeierstrassData("T", tau))
        w_psi = max(w_psi, abs(num - psi_closed_form_T(tau)) / abs(num))
        inner, _ = closed_form_edges_T(tau)
        ref = psi1(tau)
        w_edge = max(w_edge, abs(inner - ref) / abs(ref))
    return [
        Check.below(f"psi numeric vs closed form ({n} moduli)", w_psi, 1e-8),
        Check.below("inner edge vs real-line quadrature", w_edge, 1e-8),
    ]


def suite_asymptotics() -> list[Check]:
    """Large-``Im tau`` limits of ``theta_h`` (T and R) and the behaviour near ``tau = 1``."""
    out = []
    for fam, xs in (("T", (-0.8, -0.3, 0.4, 0.9)), ("R", (-0.8, -0.5, -0.1, 0.3))):
        for t, bound in ((4.0, 1e-2), (6.0, 1e-3)):
            dev = max(asymptote_report(complex(x, t), fam).deviation for x in xs)
            out.append(Check.below(f"{fam}: theta_h - asymptote at Im tau = {t:g}", dev, bound))
    mags = [abs(theta_h(1 + e * cmath.exp(0.75j * math.pi), "T")) for e in (0.2, 0.1, 0.05)]
    out.append(Check("T: |theta_h| decreasing towards tau = 1", mags[-1], mags[0], mags[0] > mags[1] > mags[2]))
    cusp = [complex(1 - d, f * math.sqrt(d - d * d)) for d in (0.05, 0.02, 0.01) for f in (1.01, 1.5, 3.0)]
    worst = max(residual(tau, "T") for tau in cusp)
    out.append(Check.below("T: residual < 0 near tau = 1", worst, 0.0))
    out.append(Check.below("psi2 integral at m~ = 1", abs(psi2_integral(1.0) - math.pi / math.sqrt(2)), 1e-12))
    return out


def suite_period_invariants(seed: int = 5) -> list[Check]:
    """Boundary calibration, the hCLP point, pitch reflection and the dual integral."""
    out = []
    ts = np.linspace(0.6, 2.5, 5)
    left = max(abs(wrap_angle(theta_h(complex(-1, t), f) - math.pi / 2)) for t in ts for f in "TR")
    right = max(abs(wrap_angle(theta_h(complex(get_family(f).right_edge, t), f))) for t in ts for f in "TR")
    out.append(Check.below("theta_h = pi/2 on Re tau = -1", left, 1e-8))
    out.append(Check.below("theta_h = 0 on the right edge", right, 1e-8))
    out.append(Check.below("R: theta_h((1+i)/2) = 0", abs(theta_h(0.5 + 0.5j, "R")), 1e-6))
    worst = 0.0
    for tau in random_moduli(10, "T", seed, im_min=0.2):
        for k in (1, 2):
            lhs = theta_h(tau, "T") + theta_h(pitch_reflect(tau, k), "T")
            worst = max(worst, abs(wrap_angle(lhs - cmath.phase(tau + 1 - 1 / (2 * k)))))
    out.append(Check.below("pitch-reflection functional equation", worst, 1e-8))
    worst = 0.0
    for i, tau in enumerate(random_moduli(20, "T", seed + 1, im_min=0.2)):
        fam = "TR"[i % 2] if in_omega(tau, "R") else "T"
        IG, IH = psi_pair(WeierstrassData(fam, tau))
        worst = max(worst, abs(IG - IH) / abs(IG))
    out.append(Check.below("dual integral identity", worst, 1e-8))
    return out


SUITES: dict[str, Callable[[], list[Check]]] = {
    "identities": suite_identities,
    "asymptotics": suite_asymptotics,
    "closedform": suite_closedform,
    "period-invariants": suite_period_invariants,
}


def run_suite(name: str) -> list[Check]:
    try:
        fn = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}") from None
    return fn()
