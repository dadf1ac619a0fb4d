"""Weierstrass data on branched tori for the T (order-4 screw) and R (order-3 screw) families.

The Gauss map is ``G = (rho sn(4Kz; tau)) ** e`` with ``e = 1/2`` (T) or
``e = 2/3`` (R) and ``rho = m ** (1/4)``; the height differential is
``exp(-i theta) dz``.

Multivalued roots are handled by analytic continuation.  The lower strip
``0 < Im z < Im tau / 2`` contains no zero or pole of ``sn(4Kz)``, so a single
branch of ``G`` (the *strip branch*) is fixed there by taking the principal
root at the chord midpoint ``(1 + tau) / 4`` and continuing along straight
lines.  Every integral below runs over straight segments of the closed strip
whose interiors avoid the branch points.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .elliptic import EllipticModulus, ReducedTau, check_tau, complete_K, sn_unit
from .quadrature import QuadratureError, gauss_legendre, tanh_sinh

__all__ = [
    "ContinuationError",
    "FAMILY_R",
    "FAMILY_T",
    "Family",
    "FlatPolyline",
    "SingularPathError",
    "WeierstrassData",
    "flat_structure",
    "gauss_map_along",
    "get_family",
    "immersion",
    "immersion_at",
    "in_omega",
    "psi",
    "psi_closed_form_T",
    "psi_pair",
    "segment_integrals",
    "theta_h",
    "theta_h_reference",
]

#: Minimum distance (unit-torus coordinates) between a path interior and a branch point.
GUARD_RADIUS = 1e-8
QUAD_TOL = 1e-12
_MAX_JUMP = math.pi / 4  # largest accepted change of arg(rho sn) between samples


class ContinuationError(ArithmeticError):
    """The argument of the Gauss map could not be followed continuously."""


class SingularPathError(ValueError):
    """A path interior comes within the guard radius of a branch point."""


@dataclass(frozen=True)
class Family:
    tag: str
    screw_order: int
    root_exponent: float
    torus_width: float  # the torus is C / <torus_width, tau>
    strip_period: float
    hyperelliptic_height: float  # dh integrated from 0 to this point matches (1+tau)/2 at pitch 1

    @property
    def angle_step(self) -> float:
        """Additive ambiguity of ``arg psi`` from the choice of root: ``pi`` (T), ``2 pi / 3`` (R)."""
        return math.pi if self.tag == "T" else 2 * math.pi / 3

    @property
    def right_edge(self) -> float:
        """``Re tau`` of the right boundary line of the moduli domain."""
        return 1.0 if self.tag == "T" else 0.5


FAMILY_T = Family("T", 4, 0.5, 1.0, 2.0, 1.0)
FAMILY_R = Family("R", 3, 2.0 / 3.0, 0.5, 1.5, 0.75)


def get_family(tag: "str | Family") -> Family:
    if isinstance(tag, Family):
        return tag
    try:
        return {"T": FAMILY_T, "R": FAMILY_R}[str(tag).upper()]
    except KeyError:
        raise ValueError(f"unknown family {tag!r}; expected 'T' or 'R'") from None


@dataclass(frozen=True)
class WeierstrassData:
    """Family, torus modulus and associate angle; immutable once built."""

    family: Family
    tau: complex
    theta: float = math.pi / 2
    modulus: EllipticModulus = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "family", get_family(self.family))
        object.__setattr__(self, "tau", check_tau(self.tau))
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "modulus", EllipticModulus.from_tau(self.tau))

    @property
    def reduced(self) -> ReducedTau:
        return self.modulus.reduced

    @property
    def rho(self) -> complex:
        """Lopez-Ros factor ``m ** (1/4)``, on the branch analytic in ``tau``."""
        return self.modulus.rho

    @property
    def dh(self) -> complex:
        return cmath.exp(-1j * self.theta)

    def with_theta(self, theta: float) -> "WeierstrassData":
        return WeierstrassData(self.family, self.tau, theta)


def in_omega(tau: complex, family: "str | Family") -> bool:
    """Whether ``tau`` lies in the open moduli domain of the family.

    ``-1 < Re tau < 1`` (T) or ``< 1/2`` (R), and outside both circles
    ``|tau +- 1/2| <= 1/2``.
    """
    fam = get_family(family)
    tau = complex(tau)
    return (
        tau.imag > 0
        and -1 < tau.real < fam.right_edge
        and abs(tau + 0.5) > 0.5
        and abs(tau - 0.5) > 0.5
    )


# -- evaluation of rho * sn(4Kz) -------------------------------------------------


def _half_lattice(p: complex, tau: complex):
    """Return ``(a, b)`` if ``p = a/2 + b tau/2`` for integers a, b, else None."""
    b = 2 * p.imag / tau.imag
    a = 2 * (p.real - b * tau.real / 2)
    ra, rb = round(a), round(b)
    if abs(a - ra) < 1e-12 and abs(b - rb) < 1e-12:
        return int(ra), int(rb)
    return None


def _is_branch_point(p: complex, tau: complex) -> bool:
    return _half_lattice(complex(p), tau) is not None


def _f_near(data: WeierstrassData, anchor, w):
    """``rho sn(4K(anchor + w))`` from the offset ``w`` to the half-lattice point ``anchor``."""
    a, b = anchor
    s = sn_unit(w, data.tau, guard=False)
    if b % 2:
        s = 1 / (data.modulus.k * s)
    if a % 2:
        s = -s
    return data.rho * s


def _f(data: WeierstrassData, z):
    return data.rho * sn_unit(z, data.tau, guard=False)


def _f_segment(data: WeierstrassData, A: complex, B: complex, s, sc):
    """``rho sn`` at ``A + (B - A) s``; endpoints on the half lattice are approached by offsets."""
    d = B - A
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.asarray(_f(data, A + d * s), dtype=complex).copy()
        for end, near, offset in (
            (A, s < 0.5, lambda m: d * s[m]),
            (B, s >= 0.5, lambda m: -d * sc[m]),
        ):
            anchor = _half_lattice(end, data.tau)
            if anchor is not None and np.any(near):
                out[near] = _f_near(data, anchor, offset(near))
    return out


def _check_interior(data: WeierstrassData, A: complex, B: complex) -> None:
    """Raise if the open segment (A, B) comes within the guard radius of a branch point."""
    tau = data.tau
    d = B - A
    ims = np.array([A.imag, B.imag])
    q = np.arange(math.floor(2 * ims.min() / tau.imag) - 1, math.ceil(2 * ims.max() / tau.imag) + 2)
    shift = q * tau.real / 2
    lo = math.floor(2 * (min(A.real, B.real) - shift.max())) - 2
    hi = math.ceil(2 * (max(A.real, B.real) - shift.min())) + 2
    p = np.arange(lo, hi + 1)
    pts = (p[None, :] / 2 + q[:, None] * tau / 2).ravel()
    t = np.clip(((pts - A) * np.conj(d)).real / abs(d) ** 2, 0.0, 1.0)
    dist = np.abs(A + d * t - pts)
    inner = (t > 0) & (t < 1) & (np.abs(pts - A) > GUARD_RADIUS) & (np.abs(pts - B) > GUARD_RADIUS)
    if np.any(inner & (dist < GUARD_RADIUS)):
        raise SingularPathError(f"segment {A!r} -> {B!r} passes a branch point; re-route the path")


# -- continuation ---------------------------------------------------------------


def _unwrap_logs(f: np.ndarray, start: complex, start_index: int = 0) -> np.ndarray:
    """Continuous ``log f`` along ordered samples with ``log f[start_index] = start``."""
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.log(f[1:] / f[:-1])
    if d.size and not np.all(np.abs(d.imag) < _MAX_JUMP):
        raise ContinuationError("argument jump between consecutive samples is too large")
    L = np.empty(f.shape, dtype=complex)
    L[start_index] = start
    L[start_index + 1 :] = start + np.cumsum(d[start_index:])
    L[:start_index] = start - np.cumsum(d[:start_index][::-1])[::-1]
    return L


def _continue_straight(data: WeierstrassData, za: complex, zb: complex, La: complex) -> complex:
    """Continue ``log(rho sn)`` from ``za`` (value ``La``) to ``zb`` along the straight segment."""
    n = 65
    while n <= 1 << 16:
        t = np.linspace(0.0, 1.0, n)
        f = _f_segment(data, za, zb, t, 1 - t)
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.log(f[1:] / f[:-1])
        if np.all(np.isfinite(d)) and np.all(np.abs(d.imag) < _MAX_JUMP / 2):
            return La + np.sum(d)
        n = 2 * n - 1
    raise ContinuationError(f"cannot follow arg(G) from {za!r} to {zb!r}")


def strip_seed(data: WeierstrassData) -> complex:
    return (1 + data.tau) / 4


def strip_log(data: WeierstrassData, z: complex) -> complex:
    """``log(rho sn(4Kz))`` on the strip branch at a regular point ``z`` of the closed strip."""
    z = complex(z)
    h = data.tau.imag / 2
    if not (-1e-12 * h <= z.imag <= h * (1 + 1e-12)):
        raise ValueError(f"{z!r} is outside the lower strip 0 <= Im z <= Im tau / 2")
    zs = strip_seed(data)
    L0 = complex(np.log(_f(data, zs)))
    if z == zs:
        return L0
    return _continue_straight(data, zs, z, L0)


def gauss_map_along(path: Sequence[complex], data: WeierstrassData) -> np.ndarray:
    """Gauss map along a sampled path by continuous choice of the root.

    The root is seeded with its principal value at the first sample that is not a
    branch point.  Samples that are themselves branch points are returned as
    ``0`` (zeros of ``G``) or ``inf`` (poles); they may only occur at the ends.
    Between samples the path is refined until the argument of ``G`` changes by
    less than ``pi/2`` per step; interior samples closer than the guard radius to
    a branch point raise :class:`SingularPathError`.
    """
    pts = np.asarray(path, dtype=complex).ravel()
    if pts.size == 0:
        return np.zeros(0, dtype=complex)
    e = data.family.root_exponent
    singular = np.array([_is_branch_point(p, data.tau) for p in pts])
    if np.any(singular[1:-1]):
        raise SingularPathError("branch point in the interior of the path")
    for i in range(1, pts.size - 1):
        if _near_branch(pts[i], data.tau):
            raise SingularPathError(f"interior sample {pts[i]!r} is within the guard radius of a branch point")
    regular = np.flatnonzero(~singular)
    out = np.empty(pts.size, dtype=complex)
    if regular.size == 0:
        raise SingularPathError("path consists of branch points only")
    first = regular[0]
    L = complex(np.log(_f(data, pts[first])))
    out[first] = np.exp(e * L)
    for i in range(first + 1, regular[-1] + 1):
        if pts[i] != pts[i - 1]:
            _check_interior(data, pts[i - 1], pts[i])
        L = _continue_refined(data, pts[i - 1], pts[i], L)
        out[i] = np.exp(e * L)
    for i in np.flatnonzero(singular):
        a, b = _half_lattice(pts[i], data.tau)
        out[i] = np.inf if b % 2 else 0.0
    return out


def _near_branch(p: complex, tau: complex) -> bool:
    b = 2 * p.imag / tau.imag
    a = 2 * (p.real - b * tau.real / 2)
    off = (a - round(a)) / 2 + (b - round(b)) * tau / 2
    return abs(off) < GUARD_RADIUS


def _continue_refined(data, za, zb, La, depth=0):
    if za == zb:
        return La
    fa, fb = complex(_f(data, za)), complex(_f(data, zb))
    d = cmath.log(fb / fa)
    if abs(d.imag) < _MAX_JUMP:
        return La + d
    if depth > 40:
        raise ContinuationError(f"cannot bound the argument jump between {za!r} and {zb!r}")
    zm = (za + zb) / 2
    Lm = _continue_refined(data, za, zm, La, depth + 1)
    return _continue_refined(data, zm, zb, Lm, depth + 1)


# -- integrals --------------------------------------------------------------------


def segment_integrals(data: WeierstrassData, A: complex, B: complex, tol: float = QUAD_TOL):
    """``(int G dz, int dz / G)`` over the straight segment ``A -> B`` on the strip branch.

    Endpoints may be branch points (algebraic endpoint singularities are absorbed
    by the tanh-sinh substitution); the interior must be regular.  Convergence is
    checked by doubling the node count.
    """
    A, B = complex(A), complex(B)
    if A == B:
        return 0j, 0j
    _check_interior(data, A, B)
    e = data.family.root_exponent
    mid = (A + B) / 2
    L_mid = strip_log(data, mid)
    prev = None
    for level in range(3, 12):
        rule = tanh_sinh(level)
        f = _f_segment(data, A, B, rule.s, rule.sc)
        i_mid = int(np.argmin(np.abs(rule.s - 0.5)))
        try:
            L = _unwrap_logs(f, L_mid, i_mid)
        except ContinuationError:
            prev = None
            continue
        w = rule.w * (B - A)
        with np.errstate(over="ignore", invalid="ignore"):
            vals = (np.sum(w * np.exp(e * L)), np.sum(w * np.exp(-e * L)))
        if prev is not None:
            err = max(abs(vals[0] - prev[0]), abs(vals[1] - prev[1]))
            scale = max(1.0, abs(vals[0]), abs(vals[1]))
            if err <= tol * scale:
                return complex(vals[0]), complex(vals[1])
        prev = vals
    raise QuadratureError(f"tanh-sinh did not converge on {A!r} -> {B!r}")


def polyline_integrals(data: WeierstrassData, vertices: Sequence[complex], tol: float = QUAD_TOL):
    IG = IH = 0j
    for A, B in zip(vertices[:-1], vertices[1:]):
        g, h = segment_integrals(data, A, B, tol)
        IG += g
        IH += h
    return IG, IH


def psi_pair(data: WeierstrassData, tol: float = QUAD_TOL):
    """``(int G dz, int dz/G)`` over the chord ``0 -> (1+tau)/2``, split at its midpoint."""
    end = (1 + data.tau) / 2
    return polyline_integrals(data, [0j, end / 2, end], tol)


def psi(data: WeierstrassData, tol: float = QUAD_TOL, check: bool = True) -> complex:
    """``psi(tau) = int_0^{(1+tau)/2} G dz``; the dual integral of ``1/G`` is checked against it."""
    IG, IH = psi_pair(data, tol)
    if check and abs(IG - IH) > 1e-6 * abs(IG):
        raise QuadratureError(f"dual integrals disagree: {IG!r} vs {IH!r}")
    return IG


def theta_h_reference(tau: complex, family: "str | Family") -> float:
    """Large-``Im tau`` limit of ``theta_h``; used to select the sheet of ``arg psi``."""
    fam = get_family(family)
    if fam.tag == "T":
        return (1 - tau.real) * math.pi / 4
    return (0.5 - tau.real) * math.pi / 3


def pin_angle(raw: float, reference: float, step: float) -> float:
    """The representative of ``raw`` modulo ``step`` closest to ``reference``."""
    return raw + step * round((reference - raw) / step)


def theta_h(tau: complex, family: "str | Family", tol: float = QUAD_TOL) -> float:
    """Horizontal associate angle ``arg psi(tau)``.

    ``arg psi`` is defined up to ``pi`` (T) or ``2 pi / 3`` (R).  The sheet is
    the one nearest to the large-``Im tau`` asymptote, which is continuous on the
    closure of the moduli domain and equals ``pi/2`` on ``Re tau = -1``.
    """
    fam = get_family(family)
    data = WeierstrassData(fam, tau, 0.0)
    raw = cmath.phase(psi(data, tol))
    return pin_angle(raw, theta_h_reference(complex(tau), fam), fam.angle_step)


def psi_closed_form_T(tau: complex) -> complex:
    """Elliptic-integral expression of ``psi`` for the T family.

    With ``A = e^{r pi i/4} m~^{-1/8} / (2 sqrt2 sqrt(1 + m~^{1/2}) K(m~))`` and
    ``mu = (1 + m~^{1/4})^2 / (2 + 2 m~^{1/2})`` the inner and outer edge vectors
    are ``A (K(mu) -+ K'(mu))``; the chord integral is
    ``(1-i)/2 inner + (1+i)/2 e^{-i r pi/2} outer``.  For ``r = 1`` this is
    ``A (1 - i) K(mu)``.
    """
    inner, outer = edge_vectors_T(tau)
    r = EllipticModulus.from_tau(tau).reduced.r
    return (1 - 1j) / 2 * inner + (1 + 1j) / 2 * cmath.exp(-0.5j * math.pi * r) * outer


def edge_vectors_T(tau: complex):
    """Closed-form inner and outer edge vectors ``A (K(mu) - K'(mu))``, ``A (K(mu) + K'(mu))``."""
    mod = EllipticModulus.from_tau(tau)
    r = mod.reduced.r
    q = mod.m_tilde_power(0.25)
    h = q * q
    mu = (1 + q) ** 2 / (2 + 2 * h)
    pref = cmath.exp(0.25j * math.pi * r) / (2 * math.sqrt(2))
    A = pref * mod.m_tilde_power(-0.125) / cmath.sqrt(1 + h) / mod.K
    Kmu, Kpmu = complete_K(mu), complete_K(1 - mu)
    return A * (Kmu - Kpmu), A * (Kmu + Kpmu)


# -- flat structures ----------------------------------------------------------------


@dataclass(frozen=True)
class FlatPolyline:
    """Image of a boundary line of the lower strip under ``Phi1`` or ``Phi2``.

    ``vertices`` are the images of the branch points on that line (first to last),
    ``samples`` a dense curve through them, ``params`` the z-values of the samples.
    """

    vertices: np.ndarray
    samples: np.ndarray
    map_tag: str
    params: np.ndarray = field(repr=False, default=None)
    vertex_params: np.ndarray = field(repr=False, default=None)


def _edge_cumulative(data, A, B, ts, tol):
    """Cumulative integrals ``int_A^{A+(B-A)t}`` of ``G`` and ``1/G`` for ``t`` in ``ts``."""
    outG = np.empty(len(ts), dtype=complex)
    outH = np.empty(len(ts), dtype=complex)
    for i, t in enumerate(ts):
        if t == 0:
            outG[i] = outH[i] = 0
        else:
            outG[i], outH[i] = segment_integrals(data, A, A + (B - A) * t, tol)
    return outG, outH


def flat_structure(data: WeierstrassData, map_tag: str = "Phi1", n_samples: int = 16, tol: float = 1e-10):
    """Images of the two boundary lines of the lower strip over one strip period.

    ``Phi1 = int dh G`` and ``Phi2 = int dh / G`` with ``dh = e^{-i theta} dz``,
    both normalized by ``Phi(0) = 0``.  The bottom line runs over
    ``[0, strip_period]`` with vertices at the zeros ``n/2``; the top line runs
    over ``tau~/2 + [0, strip_period]`` with vertices at the poles, and is joined
    to the bottom through the segment ``0 -> tau~/2``.

    Returns ``(bottom, top)`` as :class:`FlatPolyline`.
    """
    if map_tag not in ("Phi1", "Phi2"):
        raise ValueError(f"map_tag must be 'Phi1' or 'Phi2', got {map_tag!r}")
    pick = 0 if map_tag == "Phi1" else 1
    fam = data.family
    n_edges = int(round(fam.strip_period * 2))
    tt = data.reduced.tilde / 2
    lines = []
    for base, start in ((0j, 0j), (tt, None)):
        if start is None:
            start = segment_integrals(data, 0j, tt, tol)[pick]
        verts = [start]
        samples = [start]
        params = [base]
        cur = start
        ts = np.linspace(0, 1, n_samples + 1)[1:]
        for j in range(n_edges):
            A = base + j / 2
            B = A + 0.5
            g, h = _edge_cumulative(data, A, B, ts, tol)
            vals = (g, h)[pick]
            samples.extend(cur + vals)
            params.extend(A + 0.5 * ts)
            cur = cur + vals[-1]
            verts.append(cur)
        dh = data.dh
        lines.append(
            FlatPolyline(
                dh * np.array(verts),
                dh * np.array(samples),
                map_tag,
                np.array(params),
                base + 0.5 * np.arange(n_edges + 1),
            )
        )
    return lines[0], lines[1]


# -- the immersion ------------------------------------------------------------------

BASE_POINT = 0.25 + 0j


def _components(IG: complex, IH: complex, dh: complex, dz: complex) -> np.ndarray:
    return np.array(
        [
            (0.5 * dh * (IH - IG)).real,
            (0.5j * dh * (IH + IG)).real,
            (dh * dz).real,
        ]
    )


def immersion_at(data: WeierstrassData, z: complex, tol: float = QUAD_TOL, via=None) -> np.ndarray:
    """Image of one point of the closed strip, integrated from the base point ``1/4``.

    The path runs ``1/4 -> via -> z`` with ``via`` defaulting to the chord midpoint,
    so branch points are only ever path ends.
    """
    z = complex(z)
    if via is None:
        via = strip_seed(data)
    verts = [BASE_POINT, via, z] if z != via else [BASE_POINT, via]
    IG, IH = polyline_integrals(data, verts, tol)
    return _components(IG, IH, data.dh, z - BASE_POINT)




def _gap_integrals(data, a, b, La, tol=1e-13, depth=0):
    """Vectorized adaptive Gauss-Legendre over short regular gaps ``a -> b``.

    ``La`` is the strip-branch log of ``rho sn`` at each gap start; inside a gap
    the branch follows ``La + Log(f / f(a))``, which is valid while that ratio
    keeps its argument inside ``(-pi, pi)``.  Returns ``(int G, int 1/G, Lb)``.
    """
    e = data.family.root_exponent
    x1, w1 = gauss_legendre(8)
    x2, w2 = gauss_legendre(16)
    d = b - a
    fa = _f(data, a)
    res = []
    spread = np.zeros(a.shape)
    for x, w in ((x1, w1), (x2, w2)):
        r = np.log(_f(data, a[:, None] + d[:, None] * x[None, :]) / fa[:, None])
        spread = np.maximum(spread, np.max(np.abs(r.imag), axis=1))
        L = La[:, None] + r
        res.append((np.exp(e * L) @ w * d, np.exp(-e * L) @ w * d))
    Lb = La + np.log(_f(data, b) / fa)
    err = np.maximum(np.abs(res[0][0] - res[1][0]), np.abs(res[0][1] - res[1][1]))
    scale = np.maximum(1.0, np.maximum(np.abs(res[1][0]), np.abs(res[1][1])))
    ok = (err <= tol * scale) & (spread < 2.5)
    IG, IH = res[1][0].copy(), res[1][1].copy()
    if not np.all(ok):
        if depth > 30:
            raise QuadratureError("adaptive Gauss-Legendre did not converge near a branch point")
        bad = ~ok
        m = (a[bad] + b[bad]) / 2
        g1, h1, Lm = _gap_integrals(data, a[bad], m, La[bad], tol, depth + 1)
        g2, h2, Lb2 = _gap_integrals(data, m, b[bad], Lm, tol, depth + 1)
        IG[bad], IH[bad], Lb[bad] = g1 + g2, h1 + h2, Lb2
    return IG, IH, Lb


def _logs_along(data, pts: np.ndarray, L0: np.ndarray, sing: np.ndarray) -> np.ndarray:
    """Strip-branch logs along rows of ``pts`` from ``L0`` at column 0 (NaN at singular points)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        f = _f(data, np.where(sing, np.nan, pts))
        d = np.log(f[:, 1:] / f[:, :-1])
    big = np.abs(d.imag) >= _MAX_JUMP
    for i, j in zip(*np.nonzero(big)):
        d[i, j] = _continue_refined(data, pts[i, j], pts[i, j + 1], 0j)
    return np.concatenate([L0[:, None], L0[:, None] + np.cumsum(d, axis=1)], axis=1)


def _cumulative_lines(data, pts: np.ndarray, L0: np.ndarray):
    """Cumulative integrals along each row of ``pts``; returns arrays of shape ``pts.shape``.

    Gaps ending on a branch point are handled by the endpoint-safe tanh-sinh rule.
    """
    sing = np.vectorize(lambda p: _near_branch(complex(p), data.tau))(pts)
    if np.any(sing[:, :-1]):
        raise SingularPathError("only the last point of a grid line may be a branch point")
    L = _logs_along(data, pts, L0, sing)
    a, b = pts[:, :-1].ravel(), pts[:, 1:].ravel()
    end = sing[:, 1:].ravel()
    g = np.empty(a.shape, dtype=complex)
    h = np.empty(a.shape, dtype=complex)
    if np.any(~end):
        g[~end], h[~end], _ = _gap_integrals(data, a[~end], b[~end], L[:, :-1].ravel()[~end])
    for i in np.flatnonzero(end):
        g[i], h[i] = segment_integrals(data, a[i], b[i])
    g = g.reshape(pts.shape[0], -1)
    h = h.reshape(pts.shape[0], -1)
    zero = np.zeros((pts.shape[0], 1), dtype=complex)
    return np.concatenate([zero, np.cumsum(g, axis=1)], axis=1), np.concatenate([zero, np.cumsum(h, axis=1)], axis=1), L


def immersion(data: WeierstrassData, x: Sequence[float], y: Sequence[float]) -> np.ndarray:
    """Immersion on the grid ``x[j] + i y[i]`` of the closed lower strip.

    Returns an array of shape ``(len(y), len(x), 3)``; the base point ``1/4`` maps
    to the origin.  Paths run up the line ``Re z = 1/4`` to the middle row
    ``Im tau / 4``, along that row, then along each column; they only touch the
    boundary lines at their ends, where branch points are allowed.  The third
    coordinate is ``Re(e^{-i theta}(z - 1/4))`` exactly.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    hmax = data.tau.imag / 2
    if np.any(y < 0) or np.any(y > hmax * (1 + 1e-12)):
        raise ValueError("grid rows must lie in 0 <= Im z <= Im tau / 2")
    yc = hmax / 2
    x0 = BASE_POINT.real
    # base point -> middle row
    up0 = BASE_POINT + 1j * np.linspace(0, yc, 9)
    g0, h0, L0 = _cumulative_lines(data, up0[None, :], np.array([strip_log(data, BASE_POINT)]))
    # middle row, both directions from Re z = 1/4
    order = np.argsort(x)
    xs = x[order]
    n_left = int(np.searchsorted(xs, x0))
    row_g = np.empty(x.size, dtype=complex)
    row_h = np.empty(x.size, dtype=complex)
    row_L = np.empty(x.size, dtype=complex)
    for sel in (np.arange(n_left, x.size), np.arange(n_left - 1, -1, -1)):
        if sel.size == 0:
            continue
        line = _densify(np.concatenate([[x0], xs[sel]]) + 1j * yc)
        g, h, L = _cumulative_lines(data, line[None, :], L0[:, -1])
        keep = np.arange(1, sel.size + 1) * _DENSE
        row_g[order[sel]] = g0[0, -1] + g[0, keep]
        row_h[order[sel]] = h0[0, -1] + h[0, keep]
        row_L[order[sel]] = L[0, keep]
    out = np.empty((y.size, x.size, 3))
    dh = data.dh
    ys = np.sort(np.unique(y))
    for part in (ys[ys >= yc], ys[ys < yc][::-1]):
        if part.size == 0:
            continue
        col = _densify(np.concatenate([[yc], part]))
        pts = x[:, None] + 1j * col[None, :]
        g, h, _ = _cumulative_lines(data, pts, row_L)
        for k, yv in enumerate(part, start=1):
            kk = k * _DENSE
            IG = row_g + g[:, kk]
            IH = row_h + h[:, kk]
            comp = np.stack(
                [
                    (0.5 * dh * (IH - IG)).real,
                    (0.5j * dh * (IH + IG)).real,
                    (dh * (x + 1j * yv - BASE_POINT)).real,
                ],
                axis=-1,
            )
            out[y == yv] = comp
    return out


_DENSE = 2  # sub-panels per grid gap


def _densify(v: np.ndarray) -> np.ndarray:
    t = np.arange(_DENSE) / _DENSE
    seg = v[:-1, None] + (v[1:] - v[:-1])[:, None] * t[None, :]
    return np.concatenate([seg.ravel(), v[-1:]])
