"""Planar primitives: points, lines, circles, polygons and their predicates.

All geometry is double precision.  Incidence tests use a single global
tolerance ``TOL`` which every predicate accepts as an optional override, so
that certificate runs are reproducible.  Closed sets are the convention
throughout: tangency counts as intersection.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import EmptySetError, InvalidShapeError

# Global incidence tolerance (scene units), overridable per call.
TOL = 1e-9


def _require_finite(*values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise InvalidShapeError(f"non-finite coordinate {v!r}")


@dataclass(frozen=True)
class Point:
    """A point of the plane in scene units."""

    x: float
    y: float

    def __post_init__(self) -> None:
        _require_finite(self.x, self.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    def distance_to(self, other: "Point") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Line:
    """Oriented line in normal form.

    The line is the set ``offset * n + t * direction`` for ``t`` real, where
    ``n`` is ``direction`` rotated by +90 degrees.  ``t`` is the arc-length
    parameter used by all interval-valued operations.  The representation is
    canonicalized so that ``direction.y > 0``, or ``direction.y == 0`` and
    ``direction.x > 0``; construction flips ``(direction, offset)`` as needed.
    """

    direction: tuple[float, float]
    offset: float

    def __post_init__(self) -> None:
        dx, dy = self.direction
        _require_finite(dx, dy, self.offset)
        norm = math.hypot(dx, dy)
        if norm < 1e-12:
            raise InvalidShapeError("line direction must be a nonzero vector")
        dx, dy = dx / norm, dy / norm
        off = float(self.offset)
        if dy < 0.0 or (dy == 0.0 and dx < 0.0):
            dx, dy, off = -dx, -dy, -off
        object.__setattr__(self, "direction", (dx, dy))
        object.__setattr__(self, "offset", off)
        if abs(math.hypot(dx, dy) - 1.0) > 1e-12:
            raise InvalidShapeError("direction normalization failed")

    @property
    def normal(self) -> tuple[float, float]:
        dx, dy = self.direction
        return (-dy, dx)

    @property
    def base(self) -> np.ndarray:
        nx, ny = self.normal
        return np.array([self.offset * nx, self.offset * ny])

    @classmethod
    def horizontal(cls, y: float) -> "Line":
        return cls((1.0, 0.0), y)

    @classmethod
    def vertical(cls, x: float) -> "Line":
        # normal of direction (0,1) is (-1,0), so offset is -x
        return cls((0.0, 1.0), -x)

    @classmethod
    def from_point_direction(cls, p: Point, d: tuple[float, float]) -> "Line":
        norm = math.hypot(*d)
        if norm < 1e-12:
            raise InvalidShapeError("line direction must be a nonzero vector")
        dx, dy = d[0] / norm, d[1] / norm
        offset = p.x * (-dy) + p.y * dx
        return cls((dx, dy), offset)

    def point_at(self, t: float | np.ndarray) -> np.ndarray:
        b = self.base
        d = np.asarray(self.direction)
        t = np.asarray(t, dtype=float)
        return b + np.multiply.outer(t, d)

    def project(self, pts: np.ndarray) -> np.ndarray:
        """Arc-length parameters of the orthogonal projections of ``pts``."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return pts @ np.asarray(self.direction)

    def distance_to_points(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        nx, ny = self.normal
        return np.abs(pts[:, 0] * nx + pts[:, 1] * ny - self.offset)


@dataclass(frozen=True)
class Interval1D:
    """Closed parameter interval on a line, ``lo <= hi``."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        _require_finite(self.lo, self.hi)
        if self.lo > self.hi:
            raise InvalidShapeError(f"interval with lo {self.lo} > hi {self.hi}")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def degenerate(self) -> bool:
        return self.hi - self.lo <= TOL


@dataclass(frozen=True)
class Circle:
    center: Point
    radius: float

    def __post_init__(self) -> None:
        _require_finite(self.radius)
        if self.radius <= 0.0:
            raise InvalidShapeError(f"circle radius must be positive, got {self.radius}")


def _polygon_signed_area(v: np.ndarray) -> float:
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _segments_properly_intersect(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1 = orient(q1, q2, p1)
    d2 = orient(q1, q2, p2)
    d3 = orient(p1, p2, q1)
    d4 = orient(p1, p2, q2)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


@dataclass(frozen=True)
class Polygon:
    """Simple closed polygon, stored counter-clockwise."""

    vertices: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise InvalidShapeError("polygon needs at least 3 planar vertices")
        if not np.all(np.isfinite(v)):
            raise InvalidShapeError("polygon has non-finite vertices")
        area = _polygon_signed_area(v)
        if abs(area) < 1e-18:
            raise InvalidShapeError("polygon is degenerate (zero area)")
        if area < 0:
            v = v[::-1].copy()
        n = len(v)
        # simplicity: no proper crossing between non-adjacent edges
        if n <= 64:
            for i in range(n):
                a1, a2 = v[i], v[(i + 1) % n]
                for j in range(i + 1, n):
                    if j == i or (j + 1) % n == i or (i + 1) % n == j:
                        continue
                    if _segments_properly_intersect(a1, a2, v[j], v[(j + 1) % n]):
                        raise InvalidShapeError("polygon is self-intersecting")
        object.__setattr__(self, "vertices", v)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)


Shape = Circle | Polygon


@dataclass(frozen=True)
class SceneComponent:
    """One complementary component of the scene.

    ``index`` 0 is reserved for the unbounded component; its stored shape is
    the boundary curve and the component is the closure of the exterior.
    """

    index: int
    shape: Shape
    bounded: bool = True

    def __post_init__(self) -> None:
        if self.index < 0:
            raise InvalidShapeError("component index must be non-negative")
        if (self.index == 0) == self.bounded:
            raise InvalidShapeError("index 0 must be the unbounded component and vice versa")

    # --- region predicates (closed-set convention) ---

    def _inside_curve(self, pts: np.ndarray, tol: float) -> np.ndarray:
        """Closed containment in the region enclosed by the boundary curve."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if isinstance(self.shape, Circle):
            c = self.shape.center
            d = np.hypot(pts[:, 0] - c.x, pts[:, 1] - c.y)
            return d <= self.shape.radius + tol
        inside = points_in_polygon(pts, self.shape.vertices)
        near = polygon_boundary_distance(pts, self.shape.vertices) <= tol
        return inside | near

    def contains(self, pts: np.ndarray, tol: float = TOL) -> np.ndarray:
        """Membership in the closed region represented by this component."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.bounded:
            return self._inside_curve(pts, tol)
        # closure of the exterior: everything except the open inside
        return ~self._inside_curve(pts, -tol)

    def boundary_distance(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if isinstance(self.shape, Circle):
            c = self.shape.center
            d = np.hypot(pts[:, 0] - c.x, pts[:, 1] - c.y)
            return np.abs(d - self.shape.radius)
        return polygon_boundary_distance(pts, self.shape.vertices)

    def region_distance(self, pts: np.ndarray, tol: float = TOL) -> np.ndarray:
        """Distance from points to the closed region (0 inside)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        d = self.boundary_distance(pts)
        return np.where(self.contains(pts, tol), 0.0, d)

    def bbox(self) -> tuple[float, float, float, float]:
        if isinstance(self.shape, Circle):
            c, r = self.shape.center, self.shape.radius
            return (c.x - r, c.y - r, c.x + r, c.y + r)
        v = self.shape.vertices
        return (v[:, 0].min(), v[:, 1].min(), v[:, 0].max(), v[:, 1].max())

    def diameter(self) -> float:
        if isinstance(self.shape, Circle):
            return 2.0 * self.shape.radius
        v = self.shape.vertices
        d2 = np.sum((v[:, None, :] - v[None, :, :]) ** 2, axis=-1)
        return math.sqrt(float(d2.max()))

    def boundary_points(self, n: int) -> np.ndarray:
        """Roughly arc-length uniform boundary sample, vertices included."""
        if isinstance(self.shape, Circle):
            th = np.linspace(0.0, 2.0 * math.pi, n, endpoint=False)
            c, r = self.shape.center, self.shape.radius
            return np.column_stack([c.x + r * np.cos(th), c.y + r * np.sin(th)])
        return sample_polygon_boundary(self.shape.vertices, n)


# ---------------------------------------------------------------------------
# low-level vector helpers
# ---------------------------------------------------------------------------

def points_in_polygon(pts: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    """Strict crossing-number containment test, vectorized over points."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    v = np.asarray(vertices, dtype=float)
    x, y = pts[:, 0][:, None], pts[:, 1][:, None]
    x1, y1 = v[:, 0][None, :], v[:, 1][None, :]
    x2, y2 = np.roll(v[:, 0], -1)[None, :], np.roll(v[:, 1], -1)[None, :]
    cond = (y1 > y) != (y2 > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xin = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
    crossing = cond & (x < xin)
    return np.sum(crossing, axis=1) % 2 == 1


def segment_distance(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distances from points to the segments [a_i, b_i], broadcast (n, m)."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    ab = b - a  # (m,2)
    ap = pts[:, None, :] - a[None, :, :]  # (n,m,2)
    denom = np.sum(ab * ab, axis=1)  # (m,)
    denom = np.where(denom < 1e-300, 1.0, denom)
    t = np.clip(np.sum(ap * ab[None, :, :], axis=2) / denom[None, :], 0.0, 1.0)
    proj = a[None, :, :] + t[:, :, None] * ab[None, :, :]
    return np.hypot(pts[:, None, 0] - proj[:, :, 0], pts[:, None, 1] - proj[:, :, 1])


def polygon_boundary_distance(pts: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    v = np.asarray(vertices, dtype=float)
    return segment_distance(pts, v, np.roll(v, -1, axis=0)).min(axis=1)


def sample_polygon_boundary(vertices: np.ndarray, n: int) -> np.ndarray:
    """n boundary points spread by arc length; all vertices are included."""
    v = np.asarray(vertices, dtype=float)
    nv = len(v)
    seg = np.roll(v, -1, axis=0) - v
    lengths = np.hypot(seg[:, 0], seg[:, 1])
    per = max(n - nv, 0)
    quota = np.floor(per * lengths / lengths.sum()).astype(int)
    pts = []
    for i in range(nv):
        k = quota[i] + 1
        t = np.arange(k) / k
        pts.append(v[i] + t[:, None] * seg[i])
    return np.vstack(pts)


# ---------------------------------------------------------------------------
# scene-level operations
# ---------------------------------------------------------------------------

def distance_to_component(p: Point, c: SceneComponent) -> float:
    """Euclidean distance from ``p`` to the boundary curve of ``c``."""
    if isinstance(c.shape, Polygon) and c.shape.n_vertices < 3:
        raise InvalidShapeError("degenerate polygon")
    return float(c.boundary_distance(p.as_array()[None, :])[0])


def _merge_close(params: np.ndarray, tol: float) -> np.ndarray:
    if len(params) == 0:
        return params
    params = np.sort(params)
    keep = [params[0]]
    for t in params[1:]:
        if t - keep[-1] > tol:
            keep.append(t)
    return np.asarray(keep)


def line_component_hits(line: Line, c: SceneComponent, tol: float = TOL) -> list[Interval1D]:
    """Parameter intervals of the line lying in the closed region of ``c``.

    Tangency is reported as a degenerate interval.  For the unbounded
    component the complement of the enclosed region is clipped to a finite
    parameter window that covers the scene; beyond it the line is trivially
    inside, so a non-empty result still certifies intersection.
    """
    if c.bounded:
        return _line_region_hits(line, c, tol)
    # exterior component: window large enough to contain the boundary curve
    x0, y0, x1, y1 = c.bbox()
    scale = max(x1 - x0, y1 - y0, 1.0)
    tmid = float(line.project(np.array([[(x0 + x1) / 2, (y0 + y1) / 2]]))[0])
    window = Interval1D(tmid - 4 * scale, tmid + 4 * scale)
    inner = _line_region_hits(line, c, tol)
    out: list[Interval1D] = []
    cursor = window.lo
    for iv in inner:
        if iv.lo > cursor:
            out.append(Interval1D(cursor, min(iv.lo, window.hi)))
        cursor = max(cursor, iv.hi)
    if cursor < window.hi:
        out.append(Interval1D(cursor, window.hi))
    return out


def _line_region_hits(line: Line, c: SceneComponent, tol: float) -> list[Interval1D]:
    """Hits of the closed region enclosed by the boundary curve of ``c``."""
    if isinstance(c.shape, Circle):
        ctr, r = c.shape.center, c.shape.radius
        nx, ny = line.normal
        d = ctr.x * nx + ctr.y * ny - line.offset
        t0 = ctr.x * line.direction[0] + ctr.y * line.direction[1]
        if abs(d) > r + tol:
            return []
        if abs(abs(d) - r) <= tol:
            return [Interval1D(t0, t0)]
        half = math.sqrt(max(r * r - d * d, 0.0))
        return [Interval1D(t0 - half, t0 + half)]

    v = c.shape.vertices
    if len(v) < 3:
        raise InvalidShapeError("degenerate polygon")
    d = np.asarray(line.direction)
    b = line.base
    p = v
    q = np.roll(v, -1, axis=0)
    e = q - p
    denom = d[0] * e[:, 1] - d[1] * e[:, 0]
    w = p - b
    params = []
    scale = max(np.abs(v).max(), 1.0)
    for i in range(len(v)):
        if abs(denom[i]) < 1e-14:
            continue  # parallel edge; endpoints come from the adjacent edges
        # solve b + t d = p + s e for (t, s)
        s = (w[i, 0] * d[1] - w[i, 1] * d[0]) / denom[i]
        if -tol / scale <= s <= 1 + tol / scale:
            t = (w[i, 0] * e[i, 1] - w[i, 1] * e[i, 0]) / denom[i]
            params.append(t)
    params = _merge_close(np.asarray(params, dtype=float), 10 * tol)
    if len(params) == 0:
        return []
    out: list[Interval1D] = []
    if len(params) == 1:
        pt = line.point_at(params[0])
        if polygon_boundary_distance(pt[None, :], v)[0] <= 10 * tol:
            out.append(Interval1D(params[0], params[0]))
        return out
    mids = (params[:-1] + params[1:]) / 2.0
    inside = points_in_polygon(line.point_at(mids), v)
    i = 0
    while i < len(mids):
        if inside[i]:
            j = i
            while j + 1 < len(mids) and inside[j + 1]:
                j += 1
            out.append(Interval1D(params[i], params[j + 1]))
            i = j + 1
        else:
            i += 1
    if not out:
        # all midpoints outside: the contact is a single touch point
        pt = line.point_at(params[0])
        if polygon_boundary_distance(pt[None, :], v)[0] <= 10 * tol:
            out.append(Interval1D(params[0], params[0]))
    return out


class HausdorffResult(NamedTuple):
    directed_ab: float
    directed_ba: float
    symmetric: float


def hausdorff_distance(a: np.ndarray, b: np.ndarray) -> HausdorffResult:
    """Directed sup-distances between finite point samples, both ways."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.size == 0 or b.size == 0:
        raise EmptySetError("hausdorff_distance requires non-empty samples")
    d = np.hypot(a[:, None, 0] - b[None, :, 0], a[:, None, 1] - b[None, :, 1])
    ab = float(d.min(axis=1).max())
    ba = float(d.min(axis=0).max())
    return HausdorffResult(ab, ba, max(ab, ba))


def _range_gap(lo: float, hi: float, r: float) -> float:
    """Distance from ``r`` to the interval [lo, hi]."""
    if lo <= r <= hi:
        return 0.0
    return min(abs(lo - r), abs(hi - r))


def _boundary_min_distance(a: SceneComponent, b: SceneComponent) -> float:
    """Minimum distance between the two boundary curves."""
    sa, sb = a.shape, b.shape
    if isinstance(sa, Circle) and isinstance(sb, Circle):
        d = math.hypot(sa.center.x - sb.center.x, sa.center.y - sb.center.y)
        # distance from circle b's radius to the range of |q - center_b|, q on a
        return _range_gap(abs(d - sa.radius), d + sa.radius, sb.radius)
    if isinstance(sa, Circle):
        return _boundary_min_distance(b, a)
    va = sa.vertices
    ea1, ea2 = va, np.roll(va, -1, axis=0)
    if isinstance(sb, Circle):
        c = sb.center.as_array()[None, :]
        best = math.inf
        dlo = segment_distance(c, ea1, ea2)[0]
        dends = np.hypot(va[:, 0] - sb.center.x, va[:, 1] - sb.center.y)
        dhi = np.maximum(dends, np.roll(dends, -1))
        for lo, hi in zip(dlo, dhi):
            best = min(best, _range_gap(lo, hi, sb.radius))
        return best
    vb = sb.vertices
    for i in range(len(va)):
        for j in range(len(vb)):
            if _segments_properly_intersect(va[i], va[(i + 1) % len(va)],
                                            vb[j], vb[(j + 1) % len(vb)]):
                return 0.0
    best = min(
        float(segment_distance(vb, ea1, ea2).min()),
        float(segment_distance(va, vb, np.roll(vb, -1, axis=0)).min()),
    )
    return best


def component_closures_intersect(a: SceneComponent, b: SceneComponent, tol: float = TOL) -> bool:
    """True iff the closed regions of ``a`` and ``b`` come within ``tol``."""
    if tol < 0:
        raise ValueError("tolerance must be non-negative")
    if not a.bounded and not b.bounded:
        return True
    if not a.bounded or not b.bounded:
        bounded, unbounded = (b, a) if not a.bounded else (a, b)
        # bounded region meets the exterior closure unless strictly inside
        probe = _region_probe_points(bounded)
        if np.any(unbounded.contains(probe, tol)):
            return True
        return _boundary_min_distance(a, b) <= tol
    # quick accept: one region's probe points inside the other
    if np.any(b.contains(_region_probe_points(a), tol)):
        return True
    if np.any(a.contains(_region_probe_points(b), tol)):
        return True
    return _boundary_min_distance(a, b) <= tol


def _region_probe_points(c: SceneComponent) -> np.ndarray:
    if isinstance(c.shape, Circle):
        ctr, r = c.shape.center, c.shape.radius
        th = np.linspace(0, 2 * math.pi, 16, endpoint=False)
        ring = np.column_stack([ctr.x + r * np.cos(th), ctr.y + r * np.sin(th)])
        return np.vstack([[ctr.x, ctr.y], ring])
    return c.shape.vertices


# ---------------------------------------------------------------------------
# scene JSON
# ---------------------------------------------------------------------------

def component_to_json(c: SceneComponent, level: int | None = None) -> dict:
    if isinstance(c.shape, Circle):
        shape = {"circle": {"cx": c.shape.center.x, "cy": c.shape.center.y, "r": c.shape.radius}}
    else:
        shape = {"polygon": [[float(x), float(y)] for x, y in c.shape.vertices]}
    entry: dict = {"index": c.index, "bounded": c.bounded, "shape": shape}
    if level is not None:
        entry["level"] = level
    return entry


def component_from_json(entry: dict) -> SceneComponent:
    shape = entry["shape"]
    if "circle" in shape:
        sc = shape["circle"]
        shp: Shape = Circle(Point(sc["cx"], sc["cy"]), sc["r"])
    elif "polygon" in shape:
        shp = Polygon(np.asarray(shape["polygon"], dtype=float))
    else:
        raise InvalidShapeError(f"unknown shape keys {sorted(shape)}")
    return SceneComponent(entry["index"], shp, entry["bounded"])


def scene_to_json(components: Iterable[SceneComponent],
                  levels: Sequence[int] | None = None) -> str:
    comps = list(components)
    idx = [c.index for c in comps]
    if len(set(idx)) != len(idx):
        raise InvalidShapeError("component indices must be unique")
    entries = [
        component_to_json(c, None if levels is None else levels[i])
        for i, c in enumerate(comps)
    ]
    return json.dumps({"components": entries}, sort_keys=True)


def scene_from_json(text: str) -> list[SceneComponent]:
    data = json.loads(text)
    return [component_from_json(e) for e in data["components"]]
