"""Detour paths: corridor-following polylines for lines against a nested
fractal approximation, their independent verification, and the greedy
grouping of paths by touching closure families.

A path for a line L at tolerance eps is built at the smallest level m whose
solids are smaller than eps: the line is kept where it runs outside the
level-m solids, and each crossing of a solid is replaced by the boundary arc
of that solid on the side of smaller diameter.  The components recorded as
touched are the pass-through components of the straight stretches and the
owners of the boundary edges the arcs run along.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ExceptionalLineError, ResolutionError
from .fractals import FractalApproximation
from .geometry import (Interval1D, Line, Polygon, SceneComponent,
                       component_closures_intersect, line_component_hits,
                       segment_distance)

VERTEX_TOL = 1e-9


# ---------------------------------------------------------------------------
# scene wrapper: indexed components and point location
# ---------------------------------------------------------------------------

class FractalScene:
    """Indexed complementary components of a fractal approximation.

    Component 0 is the unbounded one; holes are numbered from 1 in removal
    order.  Built once per (fractal, level) pair and reused across lines.
    """

    def __init__(self, f: FractalApproximation, max_level: int | None = None):
        self.fractal = f
        self.max_level = f.max_level if max_level is None else max_level
        self.outer = f.outer_component()
        self.holes = f.hole_components(self.max_level)
        self.components = {0: self.outer}
        for h in self.holes:
            self.components[h.index] = h
        self._hole_tris: list[tuple[np.ndarray, np.ndarray]] = []
        idx = 1
        if f.kind == "gasket":
            for j in range(self.max_level + 1):
                tris = f.levels[j].holes
                ids = np.arange(idx, idx + len(tris), dtype=np.int64)
                idx += len(tris)
                self._hole_tris.append((tris, ids))

    def component(self, k: int) -> SceneComponent:
        return self.components[k]

    def locate(self, pt) -> int | None:
        """Component index containing ``pt``; None inside the solid set."""
        p = np.asarray(pt, dtype=float)[None, :]
        if not self.outer._inside_curve(p, 0.0)[0]:
            return 0
        if self.fractal.kind == "gasket":
            for tris, ids in self._hole_tris:
                if len(tris) == 0:
                    continue
                hit = _point_in_triangles(p[0], tris)
                if hit >= 0:
                    return int(ids[hit])
            return None
        for comp in self.holes:
            if comp.contains(p, -1e-12)[0]:
                return comp.index
        return None


def _point_in_triangles(pt: np.ndarray, tris: np.ndarray) -> int:
    """Index of the triangle strictly containing ``pt``, else -1."""
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    d1 = (b[:, 0] - a[:, 0]) * (pt[1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (pt[0] - a[:, 0])
    d2 = (c[:, 0] - b[:, 0]) * (pt[1] - b[:, 1]) - (c[:, 1] - b[:, 1]) * (pt[0] - b[:, 0])
    d3 = (a[:, 0] - c[:, 0]) * (pt[1] - c[:, 1]) - (a[:, 1] - c[:, 1]) * (pt[0] - c[:, 0])
    inside = ((d1 > 0) & (d2 > 0) & (d3 > 0)) | ((d1 < 0) & (d2 < 0) & (d3 < 0))
    hits = np.flatnonzero(inside)
    return int(hits[0]) if len(hits) else -1


# ---------------------------------------------------------------------------
# interval cover
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoverInterval:
    """Crossing of one solid: parameters of first entry and last exit."""

    interval: Interval1D
    solid: int            # solid index within the level
    degenerate: bool = False


def solid_components(f: FractalApproximation, level: int) -> list[SceneComponent]:
    """Solids of one level as bounded polygon components (1-based index).

    Cached on the approximation object; the lists are reused heavily by the
    per-line sweeps.
    """
    cache = getattr(f, "_solid_component_cache", None)
    if cache is None:
        cache = {}
        object.__setattr__(f, "_solid_component_cache", cache)
    if level in cache:
        return cache[level]
    if f.kind == "gasket":
        tris = f.levels[level].solids
        out = [SceneComponent(i + 1, Polygon(t)) for i, t in enumerate(tris)]
    elif f.kind == "carpet":
        corners, side = f.solid_squares(level)
        out = []
        for i, (x0, y0) in enumerate(corners):
            sq = np.array([[x0, y0], [x0 + side, y0],
                           [x0 + side, y0 + side], [x0, y0 + side]])
            out.append(SceneComponent(i + 1, Polygon(sq)))
    else:
        raise ValueError(f"no polygonal solids for kind {f.kind!r}")
    cache[level] = out
    return out


def interval_cover(line: Line, f: FractalApproximation, level: int,
                   tol: float = VERTEX_TOL) -> list[CoverInterval]:
    """Ordered solid crossings of the line at the given level.

    Each interval runs from the first entry into a solid to the last exit
    from that same solid; the sweep then continues with the next solid.  A
    tangential touch comes back as a degenerate interval with a flag.
    """
    hits: list[CoverInterval] = []
    for comp in solid_components(f, level):
        for iv in line_component_hits(line, comp, tol):
            hits.append(CoverInterval(iv, comp.index - 1, iv.degenerate))
    hits.sort(key=lambda h: (h.interval.lo, h.interval.hi))
    out: list[CoverInterval] = []
    cursor = -math.inf
    for h in hits:
        if h.interval.lo < cursor - tol:
            continue  # swallowed by the previous solid's crossing
        out.append(h)
        cursor = max(cursor, h.interval.hi)
    return out


# ---------------------------------------------------------------------------
# detour path construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DetourPath:
    polyline: np.ndarray          # (m, 2) vertices
    touched: frozenset[int]       # complementary component indices
    line: Line
    epsilon: float
    level: int
    arc_margins: tuple[float, ...] = ()   # diam(arc) per replaced crossing


@dataclass
class DetourReport:
    status: str                   # "ok" or "failed"
    path: DetourPath | None
    level: int
    violations: list[str]
    hausdorff_margin: float       # max distance of path vertices to the line
    touched_count: int

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def _fractal_vertices(f: FractalApproximation, level: int) -> np.ndarray:
    """Solid and hole vertices of all levels up to ``level``."""
    if f.kind == "gasket":
        parts = [f.levels[level].solids.reshape(-1, 2)]
        for j in range(level + 1):
            if len(f.levels[j].holes):
                parts.append(f.levels[j].holes.reshape(-1, 2))
        return np.vstack(parts)
    if f.kind == "carpet":
        corners, side = f.solid_squares(level)
        offs = np.array([[0, 0], [1, 0], [1, 1], [0, 1]]) * side
        return (corners[:, None, :] + offs[None, :, :]).reshape(-1, 2)
    raise ValueError("vertex sets exist for gasket and carpet kinds")


def required_level(f: FractalApproximation, epsilon: float) -> int:
    """Smallest level whose solids are all smaller than ``epsilon``."""
    for m in range(f.max_level + 1):
        if f.max_solid_diameter(m) < epsilon:
            return m
    raise ResolutionError(
        f"epsilon {epsilon} is below the resolution of the generated levels "
        f"(deepest level {f.max_level})")


def check_exceptional(line: Line, f: FractalApproximation, level: int,
                      tol: float = VERTEX_TOL) -> None:
    """Reject lines passing within ``tol`` of any vertex up to ``level``."""
    verts = _fractal_vertices(f, level)
    d = line.distance_to_points(verts)
    j = int(np.argmin(d))
    if d[j] <= tol:
        raise ExceptionalLineError(
            f"line passes within {d[j]:.2e} of vertex ({verts[j, 0]}, {verts[j, 1]})")


def _edge_index(poly: np.ndarray, p: np.ndarray, tol: float) -> int:
    d = segment_distance(p[None, :], poly, np.roll(poly, -1, axis=0))[0]
    j = int(np.argmin(d))
    if d[j] > 100 * tol:
        raise RuntimeError(f"point not on polygon boundary (distance {d[j]:.2e})")
    return j


def _arc_route(poly: np.ndarray, entry: np.ndarray, exit_: np.ndarray,
               tol: float) -> list[np.ndarray]:
    """Boundary route from entry to exit along the smaller-diameter side.

    Ties go to the counter-clockwise side (polygons are stored CCW).
    """
    n = len(poly)
    ei = _edge_index(poly, entry, tol)
    xi = _edge_index(poly, exit_, tol)
    if ei == xi:
        return [entry, exit_]

    def walk_ccw(start_edge, end_edge, a, b):
        pts = [a]
        e = start_edge
        guard = 0
        while e != end_edge:
            pts.append(poly[(e + 1) % n])
            e = (e + 1) % n
            guard += 1
            if guard > n + 1:
                raise RuntimeError("boundary walk failed to terminate")
        pts.append(b)
        return pts

    ccw = walk_ccw(ei, xi, entry, exit_)
    cw = walk_ccw(xi, ei, exit_, entry)[::-1]

    def diam(pts):
        arr = np.asarray(pts)
        d2 = (arr[:, None, 0] - arr[None, :, 0]) ** 2 \
            + (arr[:, None, 1] - arr[None, :, 1]) ** 2
        return math.sqrt(float(d2.max()))

    return ccw if diam(ccw) <= diam(cw) else cw


def _edge_owner(scene: FractalScene, a: np.ndarray, b: np.ndarray,
                tol: float) -> int | None:
    """Complementary component whose boundary carries the edge [a, b].

    Probes a hair off the edge midpoint on both sides; the solid side
    locates nothing (the scene only knows holes up to the working level),
    while the outward side lands inside the owning open component.  The
    offset is far above the incidence tolerance and far below any hole size
    at the working level.
    """
    mid = (a + b) / 2.0
    t = b - a
    norm = math.hypot(t[0], t[1])
    if norm < tol:
        return None
    nrm = np.array([t[1], -t[0]]) / norm
    eps_out = max(norm * 1e-6, 1e-12)
    for side in (1.0, -1.0):
        k = scene.locate(mid + side * eps_out * nrm)
        if k is None:
            continue
        comp = scene.component(k)
        if float(comp.boundary_distance(mid[None, :])[0]) <= 100 * tol + 2 * eps_out:
            return k
    return None


def detour_path(line: Line, f: FractalApproximation, epsilon: float,
                scene: FractalScene | None = None,
                tol: float = VERTEX_TOL) -> DetourReport:
    """Construct the corridor path for ``line`` at tolerance ``epsilon``.

    Any condition that fails during construction is recorded and the report
    comes back as a failure instead of a path.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    level = required_level(f, epsilon)
    check_exceptional(line, f, level, tol)
    if scene is None:
        scene = FractalScene(f, level)
    solids = solid_components(f, level)
    cover = interval_cover(line, f, level, tol)
    violations: list[str] = []

    outer = scene.outer
    bx0, by0, bx1, by1 = outer.bbox()
    mid = np.array([[(bx0 + bx1) / 2.0, (by0 + by1) / 2.0]])
    tmid = float(line.project(mid)[0])
    half_span = 2.0 * max(bx1 - bx0, by1 - by0, 1.0)
    t_lo, t_hi = tmid - half_span, tmid + half_span

    touched: set[int] = set()
    points: list[np.ndarray] = [line.point_at(t_lo)]
    arc_margins: list[float] = []
    cursor = t_lo

    def mark_gap(a: float, b: float) -> None:
        if b - a <= tol:
            return
        k = scene.locate(line.point_at((a + b) / 2.0))
        if k is None:
            violations.append(
                f"gap midpoint at t={(a + b) / 2.0:.6f} lies inside the "
                "solid approximation")
        else:
            touched.add(k)

    for cv in cover:
        iv = cv.interval
        mark_gap(cursor, iv.lo)
        entry = line.point_at(iv.lo)
        exit_ = line.point_at(iv.hi)
        points.append(entry)
        if cv.degenerate:
            arc_margins.append(0.0)
            cursor = iv.hi
            continue
        poly = solids[cv.solid].shape.vertices
        route = _arc_route(poly, entry, exit_, tol)
        arr = np.asarray(route)
        d2 = (arr[:, None, 0] - arr[None, :, 0]) ** 2 \
            + (arr[:, None, 1] - arr[None, :, 1]) ** 2
        arc_diam = math.sqrt(float(d2.max()))
        arc_margins.append(arc_diam)
        if arc_diam >= epsilon:
            violations.append(
                f"replacement arc diameter {arc_diam:.4f} >= epsilon {epsilon}")
        for a, b in zip(route[:-1], route[1:]):
            owner = _edge_owner(scene, np.asarray(a), np.asarray(b), tol)
            if owner is None:
                violations.append(
                    f"arc edge of solid {cv.solid} has no complementary owner")
            else:
                touched.add(owner)
        points.extend(np.asarray(p) for p in route[1:])
        cursor = iv.hi
    mark_gap(cursor, t_hi)
    points.append(line.point_at(t_hi))

    polyline = np.vstack(points)
    haus = float(line.distance_to_points(polyline).max())
    if haus > epsilon:
        violations.append(f"path strays {haus:.4f} from the line (eps {epsilon})")
    for k in sorted(touched):
        if k != 0 and not line_component_hits(line, scene.component(k), tol):
            violations.append(f"touched component {k} is missed by the line")

    path = DetourPath(polyline, frozenset(touched), line, epsilon, level,
                      tuple(arc_margins))
    status = "ok" if not violations else "failed"
    return DetourReport(status, path if status == "ok" else None, level,
                        violations, haus, len(touched))


# ---------------------------------------------------------------------------
# independent verification
# ---------------------------------------------------------------------------

@dataclass
class VerifyReport:
    hausdorff_ok: bool
    hausdorff_margin: float
    touched_finite: bool
    touched_count: int
    coverage_ok: bool
    coverage_margin: float
    line_hits_ok: bool
    missed_components: list[int]

    @property
    def all_ok(self) -> bool:
        return (self.hausdorff_ok and self.touched_finite and self.coverage_ok
                and self.line_hits_ok)


def verify_detour(p: DetourPath, f: FractalApproximation,
                  scene: FractalScene | None = None,
                  samples_per_segment: int = 4,
                  tol: float = VERTEX_TOL) -> VerifyReport:
    """Re-check the three detour conditions from raw geometry.

    Nothing from the constructor is trusted beyond the recorded polyline and
    touched set: the path must stay within epsilon of the line, every sample
    of it must lie within tolerance of some touched closure, the touched
    family must be finite, and the line must meet each touched closure.
    """
    if scene is None:
        scene = FractalScene(f, p.level)
    pts = [p.polyline]
    for t in np.linspace(0.0, 1.0, samples_per_segment + 2)[1:-1]:
        pts.append(p.polyline[:-1] * (1 - t) + p.polyline[1:] * t)
    samples = np.vstack(pts)

    haus = float(p.line.distance_to_points(samples).max())
    hausdorff_ok = haus <= p.epsilon + tol

    comps = [scene.component(k) for k in sorted(p.touched)]
    if comps:
        cover = np.full(len(samples), np.inf)
        for comp in comps:
            cover = np.minimum(cover, comp.region_distance(samples, tol))
        coverage_margin = float(cover.max())
    else:
        coverage_margin = math.inf
    coverage_ok = coverage_margin <= 100 * tol

    missed = []
    for k in sorted(p.touched):
        if k == 0:
            continue  # every scene line meets the unbounded closure
        if not line_component_hits(p.line, scene.component(k), tol):
            missed.append(k)
    return VerifyReport(hausdorff_ok, haus, len(p.touched) < math.inf,
                        len(p.touched), coverage_ok, coverage_margin,
                        not missed, missed)


# ---------------------------------------------------------------------------
# grouping
# ---------------------------------------------------------------------------

@dataclass
class GroupPartition:
    groups: list[frozenset[int]]              # path ids per group
    touched_sets: list[frozenset[int]]        # component ids per group
    witness: list[list[tuple[int, int]]]      # verified contact edges


def group_paths(paths: list[DetourPath], f: FractalApproximation,
                scene: FractalScene | None = None,
                tol: float = VERTEX_TOL) -> GroupPartition:
    """Union-find merge of paths whose touched-closure unions intersect.

    Two paths land in one group when a touched component of one comes
    within ``tol`` of a touched component of the other; merging runs to a
    fixpoint.  Each group carries a spanning list of verified closure
    contacts as its connectivity witness.
    """
    if scene is None:
        level = max((p.level for p in paths), default=0)
        scene = FractalScene(f, level)
    contact: dict[tuple[int, int], bool] = {}

    def touching(a: int, b: int) -> bool:
        if a == b:
            return True
        key = (min(a, b), max(a, b))
        hit = contact.get(key)
        if hit is None:
            hit = component_closures_intersect(
                scene.component(a), scene.component(b), tol)
            contact[key] = hit
        return hit

    parent = list(range(len(paths)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    for i in range(len(paths)):
        for j in range(i + 1, len(paths)):
            if find(i) == find(j):
                continue
            if any(touching(a, b) for a in paths[i].touched
                   for b in paths[j].touched):
                union(i, j)

    grouped: dict[int, list[int]] = {}
    for i in range(len(paths)):
        grouped.setdefault(find(i), []).append(i)

    out_groups, out_touched, out_witness = [], [], []
    for root in sorted(grouped):
        ids = grouped[root]
        comps = sorted({k for i in ids for k in paths[i].touched})
        edges: list[tuple[int, int]] = []
        seen = {comps[0]} if comps else set()
        frontier = list(seen)
        while frontier:
            cur = frontier.pop()
            for other in comps:
                if other not in seen and touching(cur, other):
                    seen.add(other)
                    frontier.append(other)
                    edges.append((cur, other))
        out_groups.append(frozenset(ids))
        out_touched.append(frozenset(comps))
        out_witness.append(edges)
    return GroupPartition(out_groups, out_touched, out_witness)


# ---------------------------------------------------------------------------
# structural checks
# ---------------------------------------------------------------------------

@dataclass
class StructuralReport:
    kind: str
    max_hole_diameter: list[float]   # per level, starting at level 1
    area_fraction: list[float]       # area(K_m) / area(K_0) per level
    strictly_decreasing: bool


def structural_checks(f: FractalApproximation) -> StructuralReport:
    """Per-level hole-diameter decay and solid-area decay of the scene."""
    diams: list[float] = []
    for m in range(1, f.max_level + 1):
        d = f.hole_diameters(m)
        diams.append(float(d.max()) if len(d) else 0.0)
    dec = all(b < a for a, b in zip(diams, diams[1:]) if b > 0.0)

    areas: list[float] = []
    if f.kind == "gasket":
        # width^2 sums are exact dyadic rationals: fraction = (3/4)^m exactly
        for m in range(f.max_level + 1):
            tris = f.levels[m].solids
            w = tris[:, :, 0].max(axis=1) - tris[:, :, 0].min(axis=1)
            areas.append(float(np.sum(w * w)))
    elif f.kind == "carpet":
        for m in range(f.max_level + 1):
            areas.append(f.n_solids(m) * (9.0 ** (-m)))
    else:
        c = f.circles
        r0 = float(c.radii[c.enclosing][0])
        total = math.pi * r0 ** 2
        removed = 0.0
        for m in range(f.max_level + 1):
            removed += float(np.sum(
                math.pi * c.radii[(c.levels == m) & ~c.enclosing] ** 2))
            areas.append((total - removed) / total)
    return StructuralReport(f.kind, diams, areas, dec)
