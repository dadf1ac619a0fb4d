"""Quad meshes of twisted catenoids and ribbons, unit assembly and file exporters.

The lower strip ``0 <= Im z <= Im tau / 2`` is sampled on a rectangular grid
whose columns sit half a cell away from the branch points ``n/2`` of the bottom
line, so no vertex is ever a branch point.  With ``theta = pi/2`` the strip over
one strip period closes up into a twisted square (T) or triangular (R)
catenoid; at a solved point it opens into a ribbon bounded by two helices.

Two adjacent ribbons form a fundamental unit: the second is the image of the
first under the inversion through the image of ``1/4`` (the midpoint of the
first bottom edge), and every boundary edge of the first ribbon is glued to the
second by a lattice translation.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .period import FamilyCurve, theta_v
from .weierstrass import (
    BASE_POINT,
    FlatPolyline,
    WeierstrassData,
    immersion,
    immersion_at,
    theta_h,
)

__all__ = [
    "ExportError",
    "Isometry",
    "Mesh",
    "NotSolvedError",
    "SeamMismatchError",
    "catenoid_mesh",
    "export_csv_curve",
    "export_obj",
    "export_svg_flat",
    "format_csv_curve",
    "fundamental_unit",
    "hausdorff",
    "mean_curvature",
    "read_csv_curve",
    "ribbon_mesh",
]

CSV_HEADER = ("re_tau", "im_tau", "theta", "residual", "psi_re", "psi_im")


class NotSolvedError(ValueError):
    """A ribbon was requested away from a solution of the period condition."""


class SeamMismatchError(ArithmeticError):
    """Identified boundary samples of two ribbons do not coincide."""


class ExportError(OSError):
    """Writing an export file failed; the message carries the path."""


# -- types ---------------------------------------------------------------------------


def _frozen(a, dtype, shape_tail):
    arr = np.array(a, dtype=dtype).reshape((-1,) + shape_tail)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Mesh:
    """Quad mesh in raw Weierstrass units.

    Parameters
    ----------
    vertices : (n, 3) array
    quads : (k, 4) integer array of vertex indices
    boundary_loops : mapping label -> vertex indices, in order along the boundary
    lattice_vectors : optional (3, 3) array, rows are the generators
    grid_shape : ``(rows, cols)`` when the vertices are a parameter grid (row-major)
    params : parameter ``z`` of every vertex, when known
    closed : whether the boundary loops close up (catenoids) or are open helices
    meta : free-form metadata (family, tau, theta, ...)
    """

    vertices: np.ndarray
    quads: np.ndarray
    boundary_loops: dict = field(default_factory=dict)
    lattice_vectors: np.ndarray | None = None
    grid_shape: tuple | None = None
    params: np.ndarray | None = field(default=None, repr=False)
    closed: bool = True
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = _frozen(self.vertices, float, (3,))
        q = _frozen(self.quads, np.int64, (4,))
        if q.size and (q.min() < 0 or q.max() >= len(v)):
            raise ValueError("quad references a vertex out of range")
        loops = {k: _frozen(ix, np.int64, ()) for k, ix in self.boundary_loops.items()}
        for k, ix in loops.items():
            if ix.size and (ix.min() < 0 or ix.max() >= len(v)):
                raise ValueError(f"boundary loop {k!r} references a vertex out of range")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "quads", q)
        object.__setattr__(self, "boundary_loops", loops)
        if self.lattice_vectors is not None:
            lat = _frozen(self.lattice_vectors, float, (3,))
            if lat.shape != (3, 3):
                raise ValueError("lattice_vectors must be three 3-vectors")
            scale = np.prod(np.linalg.norm(lat, axis=1))
            if scale == 0 or abs(np.linalg.det(lat)) < 1e-9 * scale:
                raise ValueError("lattice vectors are linearly dependent")
            object.__setattr__(self, "lattice_vectors", lat)
        if self.params is not None:
            object.__setattr__(self, "params", _frozen(self.params, complex, ()))

    @classmethod
    def empty(cls) -> "Mesh":
        return cls(np.zeros((0, 3)), np.zeros((0, 4), dtype=np.int64))

    @property
    def diameter(self) -> float:
        if len(self.vertices) == 0:
            return 0.0
        return float(np.linalg.norm(np.ptp(self.vertices, axis=0)))

    def loop_points(self, label: str) -> np.ndarray:
        return self.vertices[self.boundary_loops[label]]


@dataclass(frozen=True)
class Isometry:
    """Rigid motion ``x -> matrix @ x + offset`` of a given kind.

    ``kind`` is ``screw`` (rotation by ``2 pi / order`` about a vertical axis
    plus a vertical translation), ``inversion`` (point reflection) or
    ``translation``.
    """

    kind: str
    matrix: np.ndarray
    offset: np.ndarray
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("screw", "inversion", "translation"):
            raise ValueError(f"unknown isometry kind {self.kind!r}")

    @classmethod
    def screw(cls, order: int, center: Sequence[float], shift: float) -> "Isometry":
        a = 2 * math.pi / order
        c, s = math.cos(a), math.sin(a)
        R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
        p = np.array([center[0], center[1], 0.0])
        off = p - R @ p + np.array([0.0, 0.0, shift])
        return cls("screw", R, off, {"order": order, "angle": a, "center": tuple(p[:2]), "shift": shift})

    @classmethod
    def inversion(cls, center: Sequence[float]) -> "Isometry":
        c = np.asarray(center, dtype=float)
        return cls("inversion", -np.eye(3), 2 * c, {"center": tuple(c)})

    @classmethod
    def translation(cls, vector: Sequence[float]) -> "Isometry":
        return cls("translation", np.eye(3), np.asarray(vector, dtype=float), {"vector": tuple(vector)})

    def apply(self, points) -> np.ndarray:
        return np.asarray(points, dtype=float) @ self.matrix.T + self.offset


# -- grids ---------------------------------------------------------------------------


def _columns(data: WeierstrassData, ncols: int, h: float) -> np.ndarray:
    """Column abscissae, half a cell off the zeros ``n/2`` of the bottom line.

    If that would put a column on a pole ``tau~/2 + n/2`` of the top line, the
    whole grid is shifted by a quarter cell.
    """
    x = (np.arange(ncols) + 0.5) * h
    top = data.reduced.tilde.real / 2
    off = np.abs(((x - top) * 2 + 0.5) % 1 - 0.5) / 2
    if off.min() < 1e-3 * h:
        x = x + h / 4
    return x


def _grid_mesh(data, nu, nv, ncols, periodic, meta) -> Mesh:
    if nu < 3 or nv < 1:
        raise ValueError("need nu >= 3 and nv >= 1")
    fam = data.family
    h = fam.strip_period / nu
    x = _columns(data, ncols, h)
    y = np.linspace(0.0, data.tau.imag / 2, nv + 1)
    pts = immersion(data, x, y)
    verts = pts.reshape(-1, 3)
    idx = np.arange((nv + 1) * ncols).reshape(nv + 1, ncols)
    right = np.roll(idx, -1, axis=1) if periodic else idx[:, 1:]
    left = idx if periodic else idx[:, :-1]
    quads = np.stack([left[:-1], right[:-1], right[1:], left[1:]], axis=-1).reshape(-1, 4)
    params = (x[None, :] + 1j * y[:, None]).ravel()
    loops = {"bottom": idx[0], "top": idx[-1]}
    return Mesh(verts, quads, loops, None, (nv + 1, ncols), params, periodic, meta)


def _meta(data: WeierstrassData, kind: str, **extra) -> dict:
    out = {"kind": kind, "family": data.family.tag, "tau": data.tau, "theta": data.theta}
    out.update(extra)
    return out


def catenoid_mesh(data: WeierstrassData, nu: int = 32, nv: int = 12) -> Mesh:
    """Twisted catenoid: the closed lower strip over one strip period at ``theta = pi/2``.

    ``nu`` columns per strip period (a multiple of ``2 * strip_period`` keeps the
    screw symmetry exact on the vertex set), ``nv`` cells between the boundary
    lines.  The bottom loop lies in the plane at height ``0`` and the top loop in
    the plane at height ``Im tau / 2``.
    """
    if abs(math.remainder(data.theta - math.pi / 2, 2 * math.pi)) > 1e-12:
        raise ValueError(f"twisted catenoids need theta = pi/2, got {data.theta!r}")
    return _grid_mesh(data, nu, nv, nu, True, _meta(data, "catenoid"))


def _spacing(data: WeierstrassData) -> float:
    """Vertical distance between the images of ``0`` and ``(1 + tau)/2``."""
    return float(immersion_at(data, (1 + data.tau) / 2)[2] - immersion_at(data, 0)[2])


def ribbon_mesh(data: WeierstrassData, nu: int = 32, nv: int = 12, turns: int = 1, pitch: int = 1) -> Mesh:
    """Ribbon over ``turns`` strip periods at a solved point of the period condition.

    Raises
    ------
    NotSolvedError
        if ``theta`` or ``theta_h(tau)`` differs from ``theta_v(tau)`` by more than ``1e-6``.
    """
    if turns < 1:
        raise ValueError("turns must be a positive integer")
    tv = theta_v(data.tau, data.family, pitch)
    th = theta_h(data.tau, data.family)
    for name, val in (("theta", data.theta), ("theta_h", th)):
        if abs(math.remainder(val - tv, 2 * math.pi)) > 1e-6:
            raise NotSolvedError(f"{name} = {val:.9g} differs from theta_v = {tv:.9g}; not a solved point")
    spacing = _spacing(data)
    P = data.family.strip_period
    helix = float(immersion_at(data, BASE_POINT + P)[2] - immersion_at(data, BASE_POINT)[2])
    meta = _meta(data, "ribbon", pitch=pitch, turns=turns, spacing=spacing, helix_pitch=helix)
    return _grid_mesh(data, nu, nv, nu * turns, False, meta)


# -- fundamental unit ----------------------------------------------------------------

_SEAM_FRACTIONS = (0.15, 0.5, 0.85)


def _edge_partner(data, base: complex, edge: int, samples: Sequence[float]):
    """Find ``c`` with ``X(z) + X(c - z)`` constant on one boundary edge.

    Returns ``(c, translation, spread)`` for the best candidate ``c = 1/2 + k/2 + 2 base``.
    """
    P = data.family.strip_period
    zs = [base + edge / 2 + 0.5 * s for s in samples]
    X = [immersion_at(data, z) for z in zs]
    best = None
    for k in np.arange(-2 * P, 2 * P + 1):
        c = 0.5 + k / 2 + 2 * base
        L = np.array([x + immersion_at(data, c - z) for x, z in zip(X, zs)])
        spread = float(np.ptp(L, axis=0).max())
        if best is None or spread < best[2] - 1e-12:
            best = (c, L.mean(axis=0), spread)
    return best


def _horizontal_pair(vectors: np.ndarray) -> np.ndarray:
    """Two translations with the shortest independent horizontal parts."""
    hv = vectors[:, :2]
    norms = np.linalg.norm(hv, axis=1)
    order = [i for i in np.argsort(norms, kind="stable") if norms[i] > 1e-9]
    first = order[0]
    for j in order[1:]:
        cross = abs(hv[first, 0] * hv[j, 1] - hv[first, 1] * hv[j, 0])
        if cross > 1e-6 * norms[first] * norms[j]:
            return vectors[[first, j]]
    raise ArithmeticError("boundary translations do not span the horizontal plane")


def fundamental_unit(mesh: Mesh, data: WeierstrassData, tol: float = 1e-5) -> Mesh:
    """Assemble the ribbon with its inverted copy and compute the lattice.

    The second ribbon is the point reflection of the first through the image of
    ``1/4``.  Each bottom and top edge of the first ribbon is identified with the
    second by a translation; seams are checked at the ribbon's own boundary
    samples.  Lattice generators: the screw composed to a full turn (vertical)
    and the two boundary translations with the shortest independent horizontal
    parts.

    Raises
    ------
    SeamMismatchError
        if identified boundary samples deviate by more than ``tol`` times the diameter.
    """
    if mesh.meta.get("kind") != "ribbon" or mesh.params is None:
        raise ValueError("fundamental_unit needs a mesh built by ribbon_mesh")
    fam = data.family
    P = fam.strip_period
    center = immersion_at(data, BASE_POINT)
    inv = Isometry.inversion(center)
    diam = mesh.diameter
    n_edges = int(round(2 * P))
    translations = []
    worst = 0.0
    for label, base in (("bottom", 0j), ("top", data.reduced.tilde / 2)):
        ix = mesh.boundary_loops[label]
        zs = mesh.params[ix]
        for e in range(n_edges):
            c, L, spread = _edge_partner(data, base, e, _SEAM_FRACTIONS)
            # the ribbon's own samples on this edge
            rel = (zs - base).real - e / 2
            on_edge = ix[(rel > 0) & (rel < 0.5)]
            shift = L - 2 * center
            dev = spread
            for i in on_edge:
                z = mesh.params[i]
                glued = inv.apply(immersion_at(data, c - z)) + shift
                dev = max(dev, float(np.abs(glued - mesh.vertices[i]).max()))
            worst = max(worst, dev)
            if dev > tol * diam:
                raise SeamMismatchError(
                    f"{label} edge {e}: identified samples deviate by {dev:.3g} (> {tol:g} x diameter {diam:.3g})"
                )
            translations.append(shift)
    vertical = immersion_at(data, BASE_POINT + P) - immersion_at(data, BASE_POINT)
    horiz = _horizontal_pair(np.array(translations))
    lattice = np.vstack([horiz, vertical])
    n = len(mesh.vertices)
    verts = np.vstack([mesh.vertices, inv.apply(mesh.vertices)])
    quads = np.vstack([mesh.quads, mesh.quads[:, ::-1] + n])
    loops = dict(mesh.boundary_loops)
    loops.update({f"{k}_inverted": v + n for k, v in mesh.boundary_loops.items()})
    step = immersion_at(data, BASE_POINT + 0.5)[2] - center[2]
    screw = Isometry.screw(fam.screw_order, center, float(step))
    meta = dict(mesh.meta, kind="unit", seam_deviation=worst, translations=np.array(translations), screw=screw, inversion=inv)
    return Mesh(verts, quads, loops, lattice, None, None, False, meta)


# -- diagnostics ---------------------------------------------------------------------


def mean_curvature(mesh: Mesh) -> np.ndarray:
    """Discrete mean curvature at the interior vertices of a grid mesh.

    The immersion is conformal in ``z``, so ``H = |Delta X| / (2 lambda)`` with the
    five-point Laplacian and ``lambda = (|X_x|^2 + |X_y|^2) / 2``.  Boundary vertices
    get ``nan``.
    """
    if mesh.grid_shape is None or mesh.params is None:
        raise ValueError("mean_curvature needs a grid mesh")
    rows, cols = mesh.grid_shape
    V = mesh.vertices.reshape(rows, cols, 3)
    Z = mesh.params.reshape(rows, cols)
    hy = (Z[1, 0] - Z[0, 0]).imag
    hx = (Z[0, 1] - Z[0, 0]).real
    # columns wrap for closed meshes; for open ones the wrapped end columns are discarded
    Vx_p, Vx_m = np.roll(V, -1, axis=1), np.roll(V, 1, axis=1)
    lap = (Vx_p - 2 * V + Vx_m) / hx**2
    lap[1:-1] += (V[2:] - 2 * V[1:-1] + V[:-2]) / hy**2
    dx = (Vx_p - Vx_m) / (2 * hx)
    dy = np.zeros_like(V)
    dy[1:-1] = (V[2:] - V[:-2]) / (2 * hy)
    lam = 0.5 * (np.sum(dx**2, axis=-1) + np.sum(dy**2, axis=-1))
    H = np.linalg.norm(lap, axis=-1) / (2 * lam)
    H[0] = H[-1] = np.nan
    if not mesh.closed:
        H[:, 0] = H[:, -1] = np.nan
    return H.ravel()


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two finite point sets."""
    from scipy.spatial import cKDTree

    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(max(cKDTree(b).query(a)[0].max(), cKDTree(a).query(b)[0].max()))


# -- exporters -----------------------------------------------------------------------


def _num(x: float, digits: int) -> str:
    s = f"{float(x) + 0.0:.{digits}g}"
    return "0" if s == "-0" else s


def _tau_text(tau: complex) -> str:
    return f"{_num(tau.real, 12)}+{_num(tau.imag, 12)}i"


def _write(path, text: str) -> None:
    try:
        with open(path, "w", newline="\n", encoding="ascii") as fh:
            fh.write(text)
    except OSError as err:
        raise ExportError(f"cannot write {os.fspath(path)!r}: {err.strerror or err}") from err


def export_obj(mesh: Mesh, path) -> None:
    """ASCII OBJ: header comment, ``v`` lines (9 significant digits), 1-based ``f`` quads."""
    m = mesh.meta
    if "family" in m:
        head = f"# gyre family={m['family']} tau={_tau_text(complex(m['tau']))} theta={_num(m['theta'], 12)}"
    else:
        head = "# gyre"
    lines = [head]
    lines += ["v " + " ".join(_num(c, 9) for c in v) for v in mesh.vertices]
    lines += ["f " + " ".join(str(int(i) + 1) for i in q) for q in mesh.quads]
    _write(path, "\n".join(lines) + "\n")


def export_svg_flat(polylines: "FlatPolyline | Iterable[FlatPolyline]", path, size: int = 1000, margin: float = 50.0) -> None:
    """SVG of flat-structure polylines: one path each, branch-point images as 3-unit circles."""
    if isinstance(polylines, FlatPolyline):
        polylines = [polylines]
    polylines = list(polylines)
    allpts = np.concatenate([np.asarray(p.samples) for p in polylines] + [np.asarray(p.vertices) for p in polylines]) if polylines else np.zeros(0, complex)
    if allpts.size:
        lo = complex(allpts.real.min(), allpts.imag.min())
        span = max(allpts.real.max() - lo.real, allpts.imag.max() - lo.imag) or 1.0
    else:
        lo, span = 0j, 1.0
    scale = (size - 2 * margin) / span

    def xy(w):
        return f"{_num(margin + (w.real - lo.real) * scale, 7)},{_num(size - margin - (w.imag - lo.imag) * scale, 7)}"

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
    ]
    for i, p in enumerate(polylines):
        pts = np.asarray(p.samples)
        d = "M " + " L ".join(xy(w) for w in pts)
        out.append(f'<path id="polyline{i}" class="{p.map_tag}" d="{d}" fill="none" stroke="black" stroke-width="1"/>')
        for w in np.asarray(p.vertices):
            c = xy(w).split(",")
            out.append(f'<circle cx="{c[0]}" cy="{c[1]}" r="3" fill="red"/>')
    out.append("</svg>")
    _write(path, "\n".join(out) + "\n")


def format_csv_curve(curve: FamilyCurve) -> str:
    """CSV text ``re_tau,im_tau,theta,residual,psi_re,psi_im`` with 12 significant digits."""
    lines = [",".join(CSV_HEADER)]
    for re, im, th, res, psi in curve.rows():
        vals = (re, im, th, res, complex(psi).real, complex(psi).imag)
        lines.append(",".join(_num(v, 12) for v in vals))
    return "\n".join(lines) + "\n"


def export_csv_curve(curve: FamilyCurve, path) -> None:
    """Write :func:`format_csv_curve` to ``path`` (LF line endings)."""
    _write(path, format_csv_curve(curve))


def read_csv_curve(path) -> np.ndarray:
    """Parse a file written by :func:`export_csv_curve` into an ``(n, 6)`` array."""
    with open(path, newline="", encoding="ascii") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"{os.fspath(path)!r} is not a family-curve table")
    return np.array([[float(v) for v in r] for r in rows[1:]], dtype=float).reshape(-1, 6)
