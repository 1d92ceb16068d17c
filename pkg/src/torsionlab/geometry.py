"""Computational geometry for strictly convex planar polygons.

Provides the polygon type with its measures (area, perimeter, diameter),
the inradius via a Chebyshev-center linear program, the distance-to-boundary
function, inward erosion (inner parallel bodies), the exact average distance
to the boundary via layer-cake integration, and deterministic random
polygon samplers.

All computations run in coordinates translated to the vertex centroid so
that thin or far-offset domains (aspect ratios up to ~1e4) remain well
conditioned.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from .errors import InvalidDomainError, SamplingError

# Relative tolerances from the construction contract: consecutive vertices
# must be separated by more than SEPARATION_RTOL * diameter and every
# consecutive cross product must exceed CONVEXITY_RTOL * diameter^2.
SEPARATION_RTOL = 1e-12
CONVEXITY_RTOL = 1e-12


def _as_vertex_array(vertices) -> np.ndarray:
    v = np.array(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2:
        raise InvalidDomainError("vertices must be an (n, 2) array of planar points")
    if not np.all(np.isfinite(v)):
        raise InvalidDomainError("vertices must be finite numbers")
    return v


def _validate_convex_ccw(v: np.ndarray) -> None:
    n = len(v)
    if n < 3:
        raise InvalidDomainError(f"a polygon needs at least 3 vertices, got {n}")
    diff = v[:, None, :] - v[None, :, :]
    diam = math.sqrt(float(np.max(np.einsum("ijk,ijk->ij", diff, diff))))
    if diam <= 0.0:
        raise InvalidDomainError("all vertices coincide")
    e = np.roll(v, -1, axis=0) - v
    seplen = np.hypot(e[:, 0], e[:, 1])
    short = np.flatnonzero(seplen <= SEPARATION_RTOL * diam)
    if short.size:
        i = int(short[0])
        raise InvalidDomainError(
            f"vertices {i} and {(i + 1) % n} coincide (separation "
            f"{seplen[i]:.3e} <= {SEPARATION_RTOL:g} x diameter)"
        )
    e_next = np.roll(e, -1, axis=0)
    cross = e[:, 0] * e_next[:, 1] - e[:, 1] * e_next[:, 0]
    bad = np.flatnonzero(cross <= CONVEXITY_RTOL * diam * diam)
    if bad.size:
        i = int(bad[0])
        j, k = (i + 1) % n, (i + 2) % n
        pts = ", ".join(f"({float(v[m][0]):g}, {float(v[m][1]):g})" for m in (i, j, k))
        raise InvalidDomainError(
            f"vertex triple ({i}, {j}, {k}) violates strict convexity / "
            f"counter-clockwise order: cross product {cross[i]:.6e} at points {pts}"
        )


class ConvexPolygon:
    """Strictly convex polygon with counter-clockwise vertices.

    Instances are immutable: the vertex array is read-only and all derived
    quantities are cached. Construction validates vertex count, separation
    and strict convexity; near-degenerate inputs are rejected, not repaired.
    """

    def __init__(self, vertices, validate: bool = True):
        v = _as_vertex_array(vertices)
        if validate:
            _validate_convex_ccw(v)
        elif len(v) < 3:
            raise InvalidDomainError("a polygon needs at least 3 vertices")
        v.setflags(write=False)
        self.vertices = v

    def __repr__(self):
        return f"ConvexPolygon({len(self.vertices)} vertices, area={self.area:.6g})"

    # -- basic measures ----------------------------------------------------

    @cached_property
    def _center(self) -> np.ndarray:
        """Vertex centroid used as the local origin for conditioning."""
        return self.vertices.mean(axis=0)

    @cached_property
    def _centered(self) -> np.ndarray:
        return self.vertices - self._center

    @cached_property
    def area(self) -> float:
        w = self._centered
        x, y = w[:, 0], w[:, 1]
        x1, y1 = np.roll(x, -1), np.roll(y, -1)
        return float(0.5 * np.sum(x * y1 - x1 * y))

    @cached_property
    def perimeter(self) -> float:
        e = np.roll(self._centered, -1, axis=0) - self._centered
        return float(np.sum(np.hypot(e[:, 0], e[:, 1])))

    @cached_property
    def diameter(self) -> float:
        w = self._centered
        diff = w[:, None, :] - w[None, :, :]
        return math.sqrt(float(np.max(np.einsum("ijk,ijk->ij", diff, diff))))

    @cached_property
    def centroid(self) -> np.ndarray:
        """Area centroid of the polygon."""
        w = self._centered
        x, y = w[:, 0], w[:, 1]
        x1, y1 = np.roll(x, -1), np.roll(y, -1)
        cross = x * y1 - x1 * y
        cx = np.sum((x + x1) * cross) / (6.0 * self.area)
        cy = np.sum((y + y1) * cross) / (6.0 * self.area)
        return np.array([cx, cy]) + self._center

    # -- edge half-planes --------------------------------------------------

    @cached_property
    def _edge_lines(self) -> tuple[np.ndarray, np.ndarray]:
        """Outward unit normals N and offsets c with interior = {N.x < c}.

        Both are expressed in centered coordinates.
        """
        w = self._centered
        e = np.roll(w, -1, axis=0) - w
        length = np.hypot(e[:, 0], e[:, 1])
        normals = np.stack([e[:, 1], -e[:, 0]], axis=1) / length[:, None]
        offsets = np.einsum("ij,ij->i", normals, w)
        return normals, offsets

    def boundary_distances(self, points) -> np.ndarray:
        """Distance to the boundary for an array of points, 0 outside."""
        pts = np.atleast_2d(np.asarray(points, dtype=float)) - self._center
        normals, offsets = self._edge_lines
        d = np.min(offsets[None, :] - pts @ normals.T, axis=1)
        return np.maximum(d, 0.0)

    def boundary_distance(self, x) -> float:
        """Distance from an interior point to the boundary.

        Points outside the polygon return 0.0 by convention; use
        `contains` to distinguish that case.
        """
        return float(self.boundary_distances(np.asarray(x, dtype=float))[0])

    def contains(self, x, tol: float = 0.0) -> bool:
        pts = np.asarray(x, dtype=float) - self._center
        normals, offsets = self._edge_lines
        return bool(np.all(pts @ normals.T <= offsets + tol))

    # -- inradius (Chebyshev center) ---------------------------------------

    @cached_property
    def _inradius_center(self) -> tuple[float, np.ndarray]:
        normals, offsets = self._edge_lines
        n = len(offsets)
        # maximize r subject to N.x + r <= c; variables (x1, x2, r)
        a_ub = np.hstack([normals, np.ones((n, 1))])
        res = linprog(
            c=[0.0, 0.0, -1.0],
            A_ub=a_ub,
            b_ub=offsets,
            bounds=[(None, None), (None, None), (0.0, None)],
            method="highs",
        )
        if not res.success:
            raise InvalidDomainError(f"inradius linear program failed: {res.message}")
        center = np.asarray(res.x[:2])
        # report the radius realized at the returned center so the pair is
        # feasible to machine precision
        radius = float(np.min(offsets - normals @ center))
        return radius, center + self._center

    @property
    def inradius(self) -> float:
        return self._inradius_center[0]

    @property
    def incenter(self) -> np.ndarray:
        return self._inradius_center[1]


# -- constructors -----------------------------------------------------------


def make_rectangle(L: float, R: float) -> ConvexPolygon:
    """Rectangle (0, L) x (0, 2R) with half-width R (inradius for L >= 2R)."""
    if L <= 0 or R <= 0:
        raise InvalidDomainError("rectangle needs L > 0 and R > 0")
    return ConvexPolygon([(0.0, 0.0), (L, 0.0), (L, 2.0 * R), (0.0, 2.0 * R)])


def make_regular_ngon(n: int, circumradius: float = 1.0) -> ConvexPolygon:
    if n < 3:
        raise InvalidDomainError("regular polygon needs n >= 3")
    if circumradius <= 0:
        raise InvalidDomainError("circumradius must be positive")
    theta = 2.0 * np.pi * np.arange(n) / n
    verts = circumradius * np.stack([np.cos(theta), np.sin(theta)], axis=1)
    return ConvexPolygon(verts)


def make_ellipse_polygon(a: float, b: float, n: int) -> ConvexPolygon:
    """Inscribed polygon with n vertices at uniform parameter angles."""
    if a <= 0 or b <= 0:
        raise InvalidDomainError("ellipse semi-axes must be positive")
    if n < 3:
        raise InvalidDomainError("ellipse polygon needs n >= 3")
    theta = 2.0 * np.pi * np.arange(n) / n
    verts = np.stack([a * np.cos(theta), b * np.sin(theta)], axis=1)
    return ConvexPolygon(verts)


def make_triangle(p0, p1, p2) -> ConvexPolygon:
    """Triangle from three points, reordered counter-clockwise if needed."""
    v = _as_vertex_array([p0, p1, p2])
    e0, e1 = v[1] - v[0], v[2] - v[1]
    if e0[0] * e1[1] - e0[1] * e1[0] < 0.0:
        v = v[::-1]
    return ConvexPolygon(v)


@dataclass(frozen=True)
class ShapeSpec:
    """Declarative shape description; each kind builds a ConvexPolygon."""

    kind: str
    params: dict

    KINDS = ("polygon", "rectangle", "regular_ngon", "ellipse_polygon", "triangle", "random")

    @classmethod
    def from_json(cls, obj) -> "ShapeSpec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        if not isinstance(obj, dict) or "kind" not in obj:
            raise InvalidDomainError('shape spec must be an object with a "kind" field')
        kind = obj["kind"]
        if kind not in cls.KINDS:
            raise InvalidDomainError(
                f"unknown shape kind {kind!r}; expected one of {cls.KINDS}"
            )
        params = {k: v for k, v in obj.items() if k != "kind"}
        return cls(kind, params)

    def build(self) -> ConvexPolygon:
        p = self.params
        try:
            if self.kind == "polygon":
                return ConvexPolygon(p["vertices"])
            if self.kind == "rectangle":
                return make_rectangle(float(p["L"]), float(p["R"]))
            if self.kind == "regular_ngon":
                return make_regular_ngon(int(p["n"]), float(p.get("circumradius", 1.0)))
            if self.kind == "ellipse_polygon":
                return make_ellipse_polygon(float(p["a"]), float(p["b"]), int(p["n"]))
            if self.kind == "triangle":
                pts = p["points"]
                return make_triangle(pts[0], pts[1], pts[2])
            if self.kind == "random":
                return random_convex_polygon(
                    p["seed"], int(p.get("n", 24)), p.get("mode", "hull-of-uniform")
                )
        except KeyError as exc:
            raise InvalidDomainError(
                f"shape kind {self.kind!r} is missing parameter {exc}"
            ) from None
        raise InvalidDomainError(f"unknown shape kind {self.kind!r}")


def shape_from_json(obj) -> ConvexPolygon:
    return ShapeSpec.from_json(obj).build()


def polygon_to_json(poly: ConvexPolygon) -> dict:
    return {"kind": "polygon", "vertices": [[float(x), float(y)] for x, y in poly.vertices]}


# -- transforms -------------------------------------------------------------


def scale(poly: ConvexPolygon, t: float) -> ConvexPolygon:
    """Dilation t * poly about the origin."""
    if not t > 0.0:
        raise InvalidDomainError("scale factor must be positive")
    return ConvexPolygon(poly.vertices * t, validate=False)


def translate(poly: ConvexPolygon, shift) -> ConvexPolygon:
    return ConvexPolygon(poly.vertices + np.asarray(shift, dtype=float), validate=False)


# -- inward erosion ---------------------------------------------------------


def _clip_halfplanes(normals: np.ndarray, offsets: np.ndarray, seed_box: float):
    """Reference half-plane intersection by successive polygon clipping.

    Slow fallback; starts from a bounding box and clips by every line.
    Returns the vertex array or None when the intersection is empty.
    """
    s = seed_box
    poly = [(-s, -s), (s, -s), (s, s), (-s, s)]
    for k in range(len(offsets)):
        nx, ny = normals[k]
        c = offsets[k]
        out = []
        m = len(poly)
        if m == 0:
            return None
        for i in range(m):
            a = poly[i]
            b = poly[(i + 1) % m]
            da = nx * a[0] + ny * a[1] - c
            db = nx * b[0] + ny * b[1] - c
            if da <= 0.0:
                out.append(a)
            if (da < 0.0 < db) or (db < 0.0 < da):
                t = da / (da - db)
                out.append((a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
        poly = out
    if len(poly) < 3:
        return None
    return np.asarray(poly)


def _active_halfplanes(normals: np.ndarray, offsets: np.ndarray, scale_len: float):
    """Vertices of the intersection of half-planes N.x <= c.

    The normals come from one convex polygon (sorted by angle), so the
    intersection is found by repeatedly discarding edges whose chord between
    neighbouring lines has non-positive length. Edges of a convex body
    always measure at least their true length against a superset of active
    lines, so discarded lines are genuinely redundant. A final containment
    check guards the degenerate paths and falls back to successive clipping.

    Returns (active_indices, vertices) or None when empty.
    """
    n = len(offsets)
    active = np.arange(n)
    len_tol = 1e-14 * scale_len
    while active.size >= 3:
        na = normals[active]
        ca = offsets[active]
        nb = np.roll(na, -1, axis=0)
        cb = np.roll(ca, -1)
        det = na[:, 0] * nb[:, 1] - na[:, 1] * nb[:, 0]
        if np.any(det <= 1e-14):
            verts = _clip_halfplanes(normals, offsets, 4.0 * scale_len)
            if verts is None:
                return None
            return _indices_for_vertices(normals, offsets, verts, scale_len), verts
        # vertex between consecutive active lines k and k+1
        x = (ca * nb[:, 1] - cb * na[:, 1]) / det
        y = (na[:, 0] * cb - nb[:, 0] * ca) / det
        ends = np.stack([x, y], axis=1)
        starts = np.roll(ends, 1, axis=0)
        tangents = np.stack([-na[:, 1], na[:, 0]], axis=1)
        lengths = np.einsum("ij,ij->i", ends - starts, tangents)
        bad = lengths <= len_tol
        if not bad.any():
            # verify that removed lines contain every vertex (catches any
            # over-removal); extremely rare, handled by the clip fallback
            removed = np.setdiff1d(np.arange(n), active, assume_unique=True)
            if removed.size:
                viol = normals[removed] @ ends.T - offsets[removed][:, None]
                if float(np.max(viol)) > 1e-9 * scale_len:
                    verts = _clip_halfplanes(normals, offsets, 4.0 * scale_len)
                    if verts is None:
                        return None
                    return _indices_for_vertices(normals, offsets, verts, scale_len), verts
            return active, ends
        active = active[~bad]
    return None


def _indices_for_vertices(normals, offsets, verts, scale_len):
    touch = np.abs(normals @ verts.T - offsets[:, None]) <= 1e-9 * scale_len
    counts = touch.sum(axis=1)
    return np.flatnonzero(counts >= 2)


def _erode_lines(poly: ConvexPolygon, t: float):
    normals, offsets = poly._edge_lines
    return _active_halfplanes(normals, offsets - t, poly.diameter)


def erode(poly: ConvexPolygon, t: float):
    """Inner parallel body: intersection of edge half-planes offset by t.

    Returns a ConvexPolygon, or None (empty) when t >= inradius. The result
    can contain edges shorter than the strict construction tolerance, so it
    skips revalidation.
    """
    if t < 0.0:
        raise InvalidDomainError("erosion offset must be nonnegative")
    if t == 0.0:
        return poly
    if t >= poly.inradius:
        return None
    res = _erode_lines(poly, t)
    if res is None:
        return None
    _, verts = res
    return ConvexPolygon(verts + poly._center, validate=False)


def _eroded_area(poly: ConvexPolygon, t: float) -> float:
    if t >= poly.inradius:
        return 0.0
    res = _erode_lines(poly, t)
    if res is None:
        return 0.0
    _, w = res
    x, y = w[:, 0], w[:, 1]
    return max(float(0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)), 0.0)


def _eroded_edge_count(poly: ConvexPolygon, t: float) -> int:
    if t >= poly.inradius:
        return 0
    res = _erode_lines(poly, t)
    return 0 if res is None else len(res[0])


def average_distance(poly: ConvexPolygon) -> float:
    """Mean distance to the boundary over the polygon.

    Uses the layer-cake identity: the integral of the distance function is
    the integral over t of area(erode(poly, t)). Between edge-vanishing
    offsets the eroded area is a quadratic in t, so a Simpson rule per piece
    integrates it exactly. The event offsets are located by bisection on
    the eroded edge count.
    """
    r = poly.inradius
    tol = 1e-12 * r
    events: list[float] = []

    def locate(t0: float, m0: int, t1: float, m1: int) -> None:
        # all edge-count breakpoints inside (t0, t1]
        if m0 == m1:
            return
        if t1 - t0 <= tol:
            events.append(t1)
            return
        tm = 0.5 * (t0 + t1)
        mm = _eroded_edge_count(poly, tm)
        locate(t0, m0, tm, mm)
        locate(tm, mm, t1, m1)

    locate(0.0, len(poly.vertices), r, 0)
    cuts = [0.0]
    for e in sorted(events):
        if e - cuts[-1] > tol:
            cuts.append(e)
    if r - cuts[-1] > tol:
        cuts.append(r)
    else:
        cuts[-1] = r
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        fa = _eroded_area(poly, a)
        fm = _eroded_area(poly, 0.5 * (a + b))
        fb = _eroded_area(poly, b)
        total += (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return total / poly.area


# -- random samplers --------------------------------------------------------

MAX_SAMPLER_ATTEMPTS = 100


def random_convex_polygon(seed, n: int = 24, mode: str = "hull-of-uniform") -> ConvexPolygon:
    """Deterministic random convex polygon in the unit disk.

    hull-of-uniform: convex hull of n uniform points in the unit disk
    (vertex count <= n). perturbed-ngon: convex hull of a regular n-gon
    whose radii are jittered by up to 30%.
    """
    if n < 3:
        raise InvalidDomainError("sampler needs n >= 3")
    if mode not in ("hull-of-uniform", "perturbed-ngon"):
        raise InvalidDomainError(f"unknown sampler mode {mode!r}")
    rng = np.random.default_rng(seed)
    for _ in range(MAX_SAMPLER_ATTEMPTS):
        if mode == "hull-of-uniform":
            radius = np.sqrt(rng.uniform(size=n))
            theta = rng.uniform(0.0, 2.0 * np.pi, size=n)
            pts = np.stack([radius * np.cos(theta), radius * np.sin(theta)], axis=1)
            try:
                hull = ConvexHull(pts)
                return ConvexPolygon(pts[hull.vertices])
            except Exception:
                continue
        else:
            radius = 1.0 + 0.3 * rng.uniform(-1.0, 1.0, size=n)
            theta = 2.0 * np.pi * np.arange(n) / n
            pts = np.stack([radius * np.cos(theta), radius * np.sin(theta)], axis=1)
            try:
                hull = ConvexHull(pts)
                return ConvexPolygon(pts[hull.vertices])
            except Exception:
                continue
    raise SamplingError(
        f"no valid convex polygon after {MAX_SAMPLER_ATTEMPTS} attempts "
        f"(seed={seed}, n={n}, mode={mode})"
    )
