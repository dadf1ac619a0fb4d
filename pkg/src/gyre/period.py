"""Period condition ``theta_h(tau) = theta_v(tau; p)`` and its solution curves.

``theta_v`` makes the helical boundaries close up with pitch ``p``; ``theta_h``
makes the images of ``0`` and ``(1 + tau) / 2`` vertically aligned.  Their
difference, the *residual*, vanishes exactly at moduli that give triply
periodic surfaces.  Roots are bracketed on vertical lines ``Re tau = r`` and
refined with Brent's method; family curves are traced by warm-started
continuation in ``r``.
"""

from __future__ import annotations

import cmath
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .weierstrass import (
    QUAD_TOL,
    Family,
    WeierstrassData,
    get_family,
    in_omega,
    psi,
    psi_closed_form_T,
    theta_h,
)

__all__ = [
    "ContinuationBreakError",
    "ExtrapolationError",
    "FamilyCurve",
    "MultipleRootsWarning",
    "NoBracketError",
    "Pitch",
    "PitchError",
    "SolvedPoint",
    "locate_intersection",
    "locate_tD_intersection",
    "intersection_by_closed_form",
    "pitch_reflect",
    "residual",
    "solve_on_vertical",
    "theta_v",
    "trace_family",
    "wrap_angle",
]

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-10
SCAN_MIN, SCAN_MAX, SCAN_POINTS = 0.05, 20.0, 120


class PitchError(ValueError):
    """Raised when ``theta_v`` is requested for the degenerate pitch ``p = 0``."""


class NoBracketError(RuntimeError):
    """No sign change of the residual was found; ``table`` holds the scan as ``(Im tau, residual)`` rows."""

    def __init__(self, message: str, table: np.ndarray):
        super().__init__(message)
        self.table = table


class ContinuationBreakError(RuntimeError):
    """Family tracing failed; ``last_good`` is the last accepted point (or ``None``)."""

    def __init__(self, message: str, last_good: "SolvedPoint | None"):
        super().__init__(message)
        self.last_good = last_good


class ExtrapolationError(ArithmeticError):
    """Richardson extrapolation did not settle."""


class MultipleRootsWarning(RuntimeWarning):
    """More than one root of the residual on a vertical line."""


@dataclass(frozen=True)
class Pitch:
    """Pitch ``p >= 0``; ``p = 0`` tags the degenerate tP / H case and has no ``theta_v``."""

    p: int = 1

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 0:
            raise ValueError(f"pitch must be a nonnegative integer, got {self.p!r}")
        object.__setattr__(self, "p", int(self.p))


def _pitch(pitch) -> Pitch:
    return pitch if isinstance(pitch, Pitch) else Pitch(int(pitch))


def wrap_angle(a: float) -> float:
    """Map an angle to ``(-pi, pi]``."""
    w = math.remainder(a, 2 * math.pi)
    return math.pi if w == -math.pi else w


def theta_v(tau: complex, family: "str | Family", pitch: "int | Pitch" = 1) -> float:
    """Vertical associate angle ``arg(tau + 1 - c/p) - pi/2`` with ``c = 2`` (T) or ``3/2`` (R)."""
    fam = get_family(family)
    p = _pitch(pitch).p
    if p == 0:
        raise PitchError("theta_v is undefined for pitch 0")
    tau = complex(tau)
    if not tau.imag > 0:
        raise ValueError(f"tau must lie in the upper half-plane, got {tau!r}")
    c = 2.0 if fam.tag == "T" else 1.5
    return wrap_angle(cmath.phase(tau + 1 - c / p) - math.pi / 2)


def residual(tau: complex, family: "str | Family", pitch: "int | Pitch" = 1, tol: float = QUAD_TOL) -> float:
    """``theta_h(tau) - theta_v(tau; p)`` wrapped to ``(-pi, pi]``."""
    return wrap_angle(theta_h(tau, family, tol) - theta_v(tau, family, pitch))


@dataclass(frozen=True)
class SolvedPoint:
    tau: complex
    theta: float
    residual: float
    psi: complex
    other_roots: tuple = ()

    @property
    def re_tau(self) -> float:
        return self.tau.real

    @property
    def im_tau(self) -> float:
        return self.tau.imag


def _finish(tau: complex, fam: Family, pitch: Pitch, tol: float, others=()) -> SolvedPoint:
    th = theta_v(tau, fam, pitch)
    res = residual(tau, fam, pitch, tol)
    return SolvedPoint(tau, th, res, psi(WeierstrassData(fam, tau, 0.0), tol), tuple(others))


def _refine(f: Callable[[float], float], a: float, b: float, fa: float, fb: float) -> float:
    if fa == 0:
        return a
    if fb == 0:
        return b
    return brentq(f, a, b, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)


def _brackets(ts: np.ndarray, rs: np.ndarray):
    """Index pairs with a genuine sign change (not a wrap-around jump at +-pi)."""
    out = []
    for i in range(len(ts) - 1):
        a, b = rs[i], rs[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a == 0 or a * b < 0:
            if abs(a) < math.pi / 2 and abs(b) < math.pi / 2:
                out.append(i)
    return out


def solve_on_vertical(
    r: float,
    family: "str | Family",
    pitch: "int | Pitch" = 1,
    t_min: float = SCAN_MIN,
    t_max: float = SCAN_MAX,
    n_scan: int = SCAN_POINTS,
    tol: float = QUAD_TOL,
    residual_tol: float = RESIDUAL_TOL,
) -> SolvedPoint:
    """Root of the residual on ``Re tau = r``.

    ``Im tau`` is scanned on a geometric grid (points outside the moduli domain
    are skipped) and every sign change is refined with Brent's method.  The
    lowest root is returned; any further roots are reported in ``other_roots``
    together with a :class:`MultipleRootsWarning` (uniqueness is never assumed).
    """
    fam = get_family(family)
    pitch = _pitch(pitch)
    ts = np.geomspace(t_min, t_max, n_scan)
    rs = np.full(n_scan, np.nan)
    for i, t in enumerate(ts):
        tau = complex(r, t)
        if pitch.p == 1 and not in_omega(tau, fam):
            continue
        rs[i] = residual(tau, fam, pitch, tol)
    idx = _brackets(ts, rs)
    if not idx:
        raise NoBracketError(f"no sign change of the residual on Re tau = {r}", np.column_stack([ts, rs]))
    f = lambda t: residual(complex(r, t), fam, pitch, tol)
    roots = [_refine(f, ts[i], ts[i + 1], rs[i], rs[i + 1]) for i in idx]
    points = [_finish(complex(r, t), fam, pitch, tol) for t in roots]
    for pt in points:
        if abs(pt.residual) > residual_tol:
            raise ArithmeticError(f"root at {pt.tau!r} has residual {pt.residual:.3g} > {residual_tol:g}")
    if len(points) > 1:
        warnings.warn(
            f"{len(points)} roots on Re tau = {r}: " + ", ".join(f"{p.im_tau:.8f}" for p in points),
            MultipleRootsWarning,
            stacklevel=2,
        )
    best = points[0]
    return SolvedPoint(best.tau, best.theta, best.residual, best.psi, tuple(p.tau for p in points[1:]))


@dataclass
class FamilyCurve:
    """Solved points of one family ordered by increasing ``Re tau``."""

    family: Family
    pitch: Pitch
    points: list = field(default_factory=list)

    def rows(self):
        """``(re_tau, im_tau, theta, residual, psi)`` tuples."""
        return [(p.re_tau, p.im_tau, p.theta, p.residual, p.psi) for p in self.points]

    @property
    def re_tau(self) -> np.ndarray:
        return np.array([p.re_tau for p in self.points])

    @property
    def im_tau(self) -> np.ndarray:
        return np.array([p.im_tau for p in self.points])


def _local_solve(r, fam, pitch, t_guess, tol, residual_tol, width=0.05):
    """Bracket a root near ``t_guess`` by expanding a multiplicative window."""
    f = lambda t: residual(complex(r, t), fam, pitch, tol)
    lo = hi = t_guess
    f_lo = f_hi = f(t_guess)
    if f_lo == 0:
        return _finish(complex(r, t_guess), fam, pitch, tol)
    w = width
    for _ in range(12):
        a, b = t_guess / (1 + w), t_guess * (1 + w)
        if not in_omega(complex(r, a), fam):
            a = lo
        fa, fb = f(a), f(b)
        for (x0, f0, x1, f1) in ((a, fa, lo, f_lo), (hi, f_hi, b, fb)):
            if f0 * f1 < 0 and abs(f0) < math.pi / 2 and abs(f1) < math.pi / 2:
                t = _refine(f, min(x0, x1), max(x0, x1), *((f0, f1) if x0 < x1 else (f1, f0)))
                pt = _finish(complex(r, t), fam, pitch, tol)
                if abs(pt.residual) <= residual_tol:
                    return pt
        lo, f_lo, hi, f_hi = a, fa, b, fb
        w *= 2
    return None


def trace_family(
    family: "str | Family",
    pitch: "int | Pitch" = 1,
    r_min: float = -0.95,
    r_max: float = 0.95,
    step: float = 0.05,
    tol: float = QUAD_TOL,
    residual_tol: float = RESIDUAL_TOL,
) -> FamilyCurve:
    """Trace the solution curve over ``r_min <= Re tau <= r_max`` (grid ``r_min + k step``).

    Predictor: linear extrapolation of ``Im tau`` from the last two points.
    Corrector: a local bracket around the prediction, falling back to a full
    :func:`solve_on_vertical` scan.  When the corrector lands more than five
    predictor steps away from the prediction the step is halved (intermediate
    points are used for continuation only; the curve holds the grid points).
    """
    fam = get_family(family)
    pitch = _pitch(pitch)
    if step <= 0 or r_max < r_min:
        raise ValueError("need step > 0 and r_min <= r_max")
    n = int(math.floor((r_max - r_min) / step + 1e-9))
    grid = [r_min + k * step for k in range(n + 1)]
    curve = FamilyCurve(fam, pitch)
    history: list[SolvedPoint] = []

    def full(r):
        pt = solve_on_vertical(r, fam, pitch, tol=tol, residual_tol=residual_tol)
        if history and pt.other_roots:
            # several roots: keep the one continuing the curve
            cands = [pt.tau] + list(pt.other_roots)
            best = min(cands, key=lambda z: abs(z.imag - history[-1].im_tau))
            pt = _finish(best, fam, pitch, tol)
        return pt

    def advance(r_from_pts, r):
        if len(r_from_pts) < 2:
            return full(r)
        p0, p1 = r_from_pts[-2], r_from_pts[-1]
        slope = (p1.im_tau - p0.im_tau) / (p1.re_tau - p0.re_tau)
        dr = r - p1.re_tau
        pred = p1.im_tau + slope * dr
        if pred <= 0:
            pred = p1.im_tau / 2
        pt = _local_solve(r, fam, pitch, pred, tol, residual_tol)
        if pt is None:
            pt = full(r)
        jump = abs(pt.im_tau - pred)
        allowed = 5 * max(abs(pred - p1.im_tau), 1e-3)
        if jump > allowed:
            return None
        return pt

    for r in grid:
        if not history:
            pt = full(r)
        else:
            pt = None
            sub = [history[-1]]
            if len(history) >= 2:
                sub = history[-2:]
            target = r
            pieces = 1
            while pt is None or sub[-1].re_tau < target - 1e-14:
                if pieces > 64:
                    raise ContinuationBreakError(f"step halving failed before Re tau = {r}", history[-1])
                h = (target - sub[-1].re_tau) / pieces
                r_next = sub[-1].re_tau + h
                cand = advance(sub, r_next)
                if cand is None:
                    pieces *= 2
                    pt = None
                    continue
                sub = (sub + [cand])[-2:]
                pt = cand
        log.debug("traced Re tau=%.6f Im tau=%.10f residual=%.2e", pt.re_tau, pt.im_tau, pt.residual)
        if history and abs(pt.im_tau - history[-1].im_tau) > 0.5:
            raise ContinuationBreakError(f"Im tau jumps at Re tau = {r}", history[-1])
        history.append(pt)
        curve.points.append(pt)
    return curve


def pitch_reflect(tau: complex, k: int) -> complex:
    """``tau' = -((2k-1) conj(tau) + 2k - 2) / (2k conj(tau) + 2k - 1)``.

    The anti-Moebius reflection in the circle ``|tau + 1 - 1/(2k)| = 1/(2k)``;
    solutions of pitch ``p`` at ``tau`` correspond to pitch ``4k - p`` at ``tau'``.
    """
    if int(k) != k or k < 1:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    c = complex(tau).conjugate()
    return -((2 * k - 1) * c + (2 * k - 2)) / (2 * k * c + (2 * k - 1))


# -- intersections with the tD / rPD lines ------------------------------------------


def _richardson(hs: np.ndarray, ts: np.ndarray) -> tuple[float, float]:
    """Two-term Richardson extrapolation to ``h = 0`` for halving ``h``; returns (value, error estimate)."""
    r1 = 2 * ts[1:] - ts[:-1]
    r2 = (4 * r1[1:] - r1[:-1]) / 3
    return float(r2[-1]), float(abs(r2[-1] - r2[-2])) if len(r2) > 1 else float(abs(r2[-1] - r1[-1]))


@dataclass(frozen=True)
class IntersectionResult:
    im_tau: float
    error_estimate: float
    samples: tuple  # (r, Im tau) along the approach
    cross_check: "float | None" = None


def locate_intersection(
    family: "str | Family",
    k_min: int = 4,
    k_max: int = 9,
    tol: float = QUAD_TOL,
    cross_check: bool = True,
) -> IntersectionResult:
    """``Im tau`` where the family curve meets the line ``Re tau = right edge``.

    Solves at ``r = edge - 2^{-k}`` (each solve warm-started from the previous)
    and Richardson-extrapolates in ``edge - r``.  The result is cross-checked by
    the derivative condition at the edge (see :func:`intersection_by_closed_form`).
    """
    fam = get_family(family)
    edge = fam.right_edge
    ks = np.arange(k_min, k_max + 1)
    hs = 2.0 ** -ks
    ims = []
    prev = None
    for h in hs:
        r = edge - h
        pt = None
        if prev is not None:
            pt = _local_solve(r, fam, Pitch(1), prev, tol, RESIDUAL_TOL)
        if pt is None:
            pt = solve_on_vertical(r, fam, 1, tol=tol)
        ims.append(pt.im_tau)
        prev = pt.im_tau
    ims = np.array(ims)
    value, err = _richardson(hs, ims)
    if not math.isfinite(value) or err > 1e-2:
        raise ExtrapolationError(f"Richardson extrapolation unsettled: {value} +- {err}")
    check = intersection_by_closed_form(fam, guess=value) if cross_check else None
    return IntersectionResult(value, err, tuple(zip((edge - hs).tolist(), ims.tolist())), check)


def locate_tD_intersection(**kwargs) -> IntersectionResult:
    """tG meets tD: the T curve at ``Re tau = 1``."""
    return locate_intersection("T", **kwargs)


def _edge_derivative(fam: Family, t: float) -> float:
    """``d residual / d Re tau`` at ``edge + i t``, where the residual itself vanishes."""
    edge = fam.right_edge
    tau = complex(edge, t)
    # theta_v = arg(tau - edge) - pi/2 for p = 1, so d theta_v / d Re tau = -1/t there
    if fam.tag == "T":
        h = 1e-5
        # psi is analytic in tau: d arg psi / d Re tau = Im(psi'/psi)
        dlog = (cmath.log(psi_closed_form_T(tau + h)) - cmath.log(psi_closed_form_T(tau - h))) / (2 * h)
        d_theta_h = dlog.imag
    else:
        h = 1e-4
        d_theta_h = (theta_h(tau + h, fam) - theta_h(tau - h, fam)) / (2 * h)
    return d_theta_h + 1.0 / t


def intersection_by_closed_form(family: "str | Family" = "T", guess: float = 1.5, span: float = 0.5) -> float:
    """Edge point where ``d residual / d Re tau`` vanishes.

    The residual is identically zero on the right edge, so the family curve
    (the nontrivial zero set) leaves the edge exactly where the derivative across
    it changes sign.  For T the derivative of ``arg psi`` is taken from the
    closed-form elliptic-integral expression; for R by differencing ``theta_h``.
    """
    fam = get_family(family)
    f = lambda t: _edge_derivative(fam, t)
    a, b = max(guess - span, 0.05), guess + span
    fa, fb = f(a), f(b)
    if fa * fb > 0:
        ts = np.linspace(0.1, 5, 50)
        vals = [f(t) for t in ts]
        for i in range(len(ts) - 1):
            if vals[i] * vals[i + 1] < 0:
                a, b = ts[i], ts[i + 1]
                break
        else:
            raise NoBracketError("no sign change of the edge derivative", np.column_stack([ts, vals]))
    return brentq(f, a, b, xtol=1e-12)
