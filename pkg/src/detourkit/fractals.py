"""Generators for the example scenes: triangle and square nested fractals,
tangent-circle packings, the staircase function and escape-time rasters.

The leveled approximations keep their geometry in flat numpy arrays (one
block per level) so that deep levels stay cheap; ``SceneComponent`` views
are materialized on demand for the object-level API.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import IllConditionedError, ResourceLimitError
from .geometry import Circle, Point, Polygon, SceneComponent, segment_distance

SQRT3 = math.sqrt(3.0)

GASKET_MAX_LEVEL = 20
CARPET_MAX_LEVEL = 12
_APOLLONIAN_CIRCLE_CAP = 2_000_000


@dataclass(frozen=True)
class FractalLevel:
    """Solid pieces and holes present at one construction level.

    ``solids`` holds triangle vertex arrays (n, 3, 2) for the gasket and
    integer cell indices (n, 2) for the carpet (cell k spans
    [k, k+1] * 3**-level).  ``holes`` uses the same convention for the pieces
    removed at this level.
    """

    solids: np.ndarray
    holes: np.ndarray


@dataclass(frozen=True)
class CircleData:
    """Flat arrays describing the circles of a packing."""

    centers: np.ndarray   # (n, 2)
    radii: np.ndarray     # (n,)
    levels: np.ndarray    # (n,) generation depth; seed circles are level 0
    enclosing: np.ndarray  # (n,) bool, True only for the outer circle


@dataclass(frozen=True)
class FractalApproximation:
    """Nested approximation of a compact set by leveled solids and holes."""

    kind: str  # one of {"gasket", "carpet", "apollonian"}
    levels: list[FractalLevel]
    circles: CircleData | None = None
    interstices: list[np.ndarray] = field(default_factory=list)

    @property
    def max_level(self) -> int:
        if self.kind == "apollonian":
            return len(self.interstices) - 1
        return len(self.levels) - 1

    def solid_triangles(self, level: int) -> np.ndarray:
        if self.kind != "gasket":
            raise ValueError(f"no triangle solids for kind {self.kind!r}")
        return self.levels[level].solids

    def solid_squares(self, level: int) -> tuple[np.ndarray, float]:
        """Lower-left corners (n, 2) and common side of the carpet solids."""
        if self.kind != "carpet":
            raise ValueError("solid_squares is only defined for the carpet")
        side = 3.0 ** (-level)
        return self.levels[level].solids * side, side

    def n_solids(self, level: int) -> int:
        if self.kind == "apollonian":
            return len(self.interstices[level])
        return len(self.levels[level].solids)

    def n_holes_at(self, level: int) -> int:
        if self.kind == "apollonian":
            c = self.circles
            return int(np.sum((c.levels == level) & ~c.enclosing))
        return len(self.levels[level].holes)

    def n_holes_cumulative(self, level: int) -> int:
        return sum(self.n_holes_at(j) for j in range(level + 1))

    def hole_components(self, max_level: int | None = None) -> list[SceneComponent]:
        """Scene components for all holes through ``max_level``, indexed from
        1 in removal order; :meth:`outer_component` supplies index 0."""
        out: list[SceneComponent] = []
        top = self.max_level if max_level is None else max_level
        idx = 1
        for j in range(top + 1):
            for comp in self._holes_at(j, idx):
                out.append(comp)
                idx += 1
        return out

    def _holes_at(self, level: int, start_index: int) -> list[SceneComponent]:
        comps: list[SceneComponent] = []
        if self.kind == "gasket":
            for i, tri in enumerate(self.levels[level].holes):
                comps.append(SceneComponent(start_index + i, Polygon(tri)))
        elif self.kind == "carpet":
            side = 3.0 ** (-level)
            for i, (ix, iy) in enumerate(self.levels[level].holes):
                x0, y0 = ix * side, iy * side
                sq = np.array([[x0, y0], [x0 + side, y0],
                               [x0 + side, y0 + side], [x0, y0 + side]])
                comps.append(SceneComponent(start_index + i, Polygon(sq)))
        else:
            c = self.circles
            sel = np.flatnonzero((c.levels == level) & ~c.enclosing)
            for i, k in enumerate(sel):
                circle = Circle(Point(*c.centers[k]), float(c.radii[k]))
                comps.append(SceneComponent(start_index + i, circle))
        return comps

    def outer_component(self) -> SceneComponent:
        """The unbounded complementary component, index 0."""
        if self.kind == "gasket":
            return SceneComponent(0, Polygon(self.levels[0].solids[0]), bounded=False)
        if self.kind == "carpet":
            sq = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
            return SceneComponent(0, Polygon(sq), bounded=False)
        c = self.circles
        k = int(np.flatnonzero(c.enclosing)[0])
        return SceneComponent(0, Circle(Point(*c.centers[k]), float(c.radii[k])),
                              bounded=False)

    def hole_diameters(self, level: int) -> np.ndarray:
        """Diameters of the holes removed at ``level``.

        Gasket hole diameters equal their horizontal width, which is an exact
        dyadic float; carpet holes are squares of side 3**-level.
        """
        if self.kind == "gasket":
            tri = self.levels[level].holes
            if len(tri) == 0:
                return np.zeros(0)
            return tri[:, :, 0].max(axis=1) - tri[:, :, 0].min(axis=1)
        if self.kind == "carpet":
            n = len(self.levels[level].holes)
            return np.full(n, math.sqrt(2.0) * 3.0 ** (-level))
        c = self.circles
        return 2.0 * c.radii[(c.levels == level) & ~c.enclosing]

    def max_solid_diameter(self, level: int) -> float:
        if self.kind == "gasket":
            tri = self.levels[level].solids
            return float((tri[:, :, 0].max(axis=1) - tri[:, :, 0].min(axis=1)).max())
        if self.kind == "carpet":
            return math.sqrt(2.0) * 3.0 ** (-level)
        tri = self.interstices[level]
        if len(tri) == 0:
            return 0.0
        corners = _interstice_corners(self.circles, tri)
        d = np.zeros(len(tri))
        for a, b in ((0, 1), (0, 2), (1, 2)):
            d = np.maximum(d, np.hypot(corners[:, a, 0] - corners[:, b, 0],
                                       corners[:, a, 1] - corners[:, b, 1]))
        return float(d.max())


# ---------------------------------------------------------------------------
# gasket and carpet
# ---------------------------------------------------------------------------

def gasket_levels(m: int) -> FractalApproximation:
    """Triangle fractal approximation down to level ``m``.

    The outer triangle has side 1 and vertices (0,0), (1,0), (1/2, sqrt3/2).
    Level j holds 3**j solid triangles of side 2**-j; the hole removed inside
    a solid is the middle quarter spanned by its edge midpoints.
    """
    if m < 0:
        raise ValueError("level must be non-negative")
    if m > GASKET_MAX_LEVEL:
        raise ResourceLimitError(f"gasket level {m} exceeds guard {GASKET_MAX_LEVEL}")
    base = np.array([[[0.0, 0.0], [1.0, 0.0], [0.5, SQRT3 / 2.0]]])
    levels = [FractalLevel(base, np.zeros((0, 3, 2)))]
    solids = base
    for _ in range(m):
        a, b, c = solids[:, 0], solids[:, 1], solids[:, 2]
        ab = (a + b) / 2.0
        bc = (b + c) / 2.0
        ca = (c + a) / 2.0
        children = np.concatenate([
            np.stack([a, ab, ca], axis=1),
            np.stack([ab, b, bc], axis=1),
            np.stack([ca, bc, c], axis=1),
        ])
        holes = np.stack([ab, bc, ca], axis=1)
        levels.append(FractalLevel(children, holes))
        solids = children
    return FractalApproximation("gasket", levels)


_CARPET_KEEP = np.array(
    [(i, j) for j in range(3) for i in range(3) if not (i == 1 and j == 1)],
    dtype=np.int64)


def carpet_levels(m: int) -> FractalApproximation:
    """Square fractal approximation: unit square, middle ninths removed."""
    if m < 0:
        raise ValueError("level must be non-negative")
    if m > CARPET_MAX_LEVEL:
        raise ResourceLimitError(f"carpet level {m} exceeds guard {CARPET_MAX_LEVEL}")
    cells = np.zeros((1, 2), dtype=np.int64)
    levels = [FractalLevel(cells, np.zeros((0, 2), dtype=np.int64))]
    for _ in range(m):
        base = cells * 3
        children = (base[:, None, :] + _CARPET_KEEP[None, :, :]).reshape(-1, 2)
        holes = base + 1
        levels.append(FractalLevel(children, holes))
        cells = children
    return FractalApproximation("carpet", levels)


# ---------------------------------------------------------------------------
# tangent circles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TangentCircleTriple:
    """Three mutually tangent circles with disjoint interiors."""

    c1: SceneComponent
    c2: SceneComponent
    c3: SceneComponent

    def __post_init__(self) -> None:
        for c in (self.c1, self.c2, self.c3):
            if not isinstance(c.shape, Circle):
                raise IllConditionedError("triple members must be circles")
        cs = self.circles()
        scale = max(max(c.radius for c in cs), 1.0)
        for i in range(3):
            for j in range(i + 1, 3):
                a, b = cs[i], cs[j]
                gap = math.hypot(a.center.x - b.center.x, a.center.y - b.center.y) \
                    - (a.radius + b.radius)
                if abs(gap) > 1e-9 * scale:
                    raise IllConditionedError(
                        f"circles {i} and {j} are not tangent (gap {gap:.3e})")

    def circles(self) -> tuple[Circle, Circle, Circle]:
        return (self.c1.shape, self.c2.shape, self.c3.shape)  # type: ignore[return-value]

    @classmethod
    def three_unit(cls) -> "TangentCircleTriple":
        centers = [(0.0, 0.0), (2.0, 0.0), (1.0, SQRT3)]
        comps = [SceneComponent(i + 1, Circle(Point(*c), 1.0))
                 for i, c in enumerate(centers)]
        return cls(*comps)


def _tangency_newton(centers: np.ndarray, radii: np.ndarray, signs: np.ndarray,
                     c0: np.ndarray, r0: float, tol: float = 1e-12):
    """Damped Newton solve of |c - c_i| = r + sign_i * r_i for (c, r).

    ``signs`` is +1 for external tangency; -1 marks a wall that surrounds the
    unknown circle (the enclosing circle), turning the equation into
    |c - c_i| = r_i - r, handled by negating both sides.
    """
    x = np.array([c0[0], c0[1], abs(r0)], dtype=float)

    def residual(x):
        d = np.hypot(x[0] - centers[:, 0], x[1] - centers[:, 1])
        target = np.where(signs > 0, x[2] + radii, radii - x[2])
        return d - target

    res = residual(x)
    for _ in range(80):
        norm = np.abs(res).max()
        if norm < tol:
            break
        d = np.hypot(x[0] - centers[:, 0], x[1] - centers[:, 1])
        d = np.where(d < 1e-300, 1.0, d)
        jac = np.column_stack([
            (x[0] - centers[:, 0]) / d,
            (x[1] - centers[:, 1]) / d,
            np.where(signs > 0, -np.ones(3), np.ones(3)),
        ])
        cond = np.linalg.cond(jac)
        if not np.isfinite(cond) or cond > 1e8:
            raise IllConditionedError(f"tangency system condition number {cond:.3e}")
        step = np.linalg.solve(jac, -res)
        lam = 1.0
        for _ in range(40):
            cand = x + lam * step
            cres = residual(cand)
            if np.abs(cres).max() < norm:
                x, res = cand, cres
                break
            lam *= 0.5
        else:
            break
    if np.abs(res).max() > 1e-9:
        raise IllConditionedError(
            f"tangency solve stalled at residual {np.abs(res).max():.3e}")
    return x[:2], float(x[2])


def _enclosing_newton(centers: np.ndarray, radii: np.ndarray,
                      c0: np.ndarray, r0: float):
    """Newton solve of |c - c_i| = r - r_i for the circle enclosing all walls."""
    x = np.array([c0[0], c0[1], abs(r0)], dtype=float)

    def residual(x):
        d = np.hypot(x[0] - centers[:, 0], x[1] - centers[:, 1])
        return d - (x[2] - radii)

    res = residual(x)
    for _ in range(80):
        norm = np.abs(res).max()
        if norm < 1e-12:
            break
        d = np.hypot(x[0] - centers[:, 0], x[1] - centers[:, 1])
        d = np.where(d < 1e-300, 1.0, d)
        jac = np.column_stack([(x[0] - centers[:, 0]) / d,
                               (x[1] - centers[:, 1]) / d,
                               -np.ones(3)])
        cond = np.linalg.cond(jac)
        if not np.isfinite(cond) or cond > 1e8:
            raise IllConditionedError(f"tangency system condition number {cond:.3e}")
        step = np.linalg.solve(jac, -res)
        lam = 1.0
        for _ in range(40):
            cand = x + lam * step
            cres = residual(cand)
            if np.abs(cres).max() < norm:
                x, res = cand, cres
                break
            lam *= 0.5
        else:
            break
    if np.abs(res).max() > 1e-9:
        raise IllConditionedError(
            f"enclosing solve stalled at residual {np.abs(res).max():.3e}")
    return x[:2], float(x[2])


def soddy_circles(t: TangentCircleTriple) -> tuple[SceneComponent, SceneComponent]:
    """The two circles tangent to all three members of ``t``.

    Returns (inner, outer).  The outer circle encloses the triple and is
    flagged via ``bounded=False`` (its signed curvature in the tangency
    quadratic is negative).  Seeds come from the curvature form, then a
    damped Newton iteration drives the tangency residuals to 1e-12.
    """
    cs = t.circles()
    centers = np.array([[c.center.x, c.center.y] for c in cs])
    radii = np.array([c.radius for c in cs])
    k = 1.0 / radii
    z = centers[:, 0] + 1j * centers[:, 1]

    root = 2.0 * math.sqrt(max(k[0] * k[1] + k[1] * k[2] + k[2] * k[0], 0.0))
    k_inner = k.sum() + root
    k_outer = k.sum() - root  # negative: the second solution encloses the triple
    zroot = 2.0 * np.sqrt(k[0] * k[1] * z[0] * z[1] + k[1] * k[2] * z[1] * z[2]
                          + k[2] * k[0] * z[2] * z[0])

    def newton_from_seed(k4: float, solver):
        best = None
        for sgn in (1.0, -1.0):
            z4 = (k[0] * z[0] + k[1] * z[1] + k[2] * z[2] + sgn * zroot) / k4
            c0 = np.array([z4.real, z4.imag])
            try:
                c_fit, r_fit = solver(centers, radii, c0, abs(1.0 / k4))
            except IllConditionedError:
                continue
            if best is None or r_fit >= 0:
                best = (c_fit, r_fit)
                break
        if best is None:
            raise IllConditionedError("no tangent circle found from curvature seeds")
        return best

    inner_c, inner_r = newton_from_seed(
        k_inner, lambda ce, ra, c0, r0: _tangency_newton(ce, ra, np.ones(3), c0, r0))
    outer_c, outer_r = newton_from_seed(k_outer, _enclosing_newton)
    inner = SceneComponent(1, Circle(Point(*inner_c), inner_r))
    outer = SceneComponent(0, Circle(Point(*outer_c), outer_r), bounded=False)
    return inner, outer


def _interstice_corners(circles: CircleData, triples: np.ndarray) -> np.ndarray:
    """Pairwise tangency points (n, 3, 2) of interstice wall triples."""
    ctr, rad, enc = circles.centers, circles.radii, circles.enclosing
    out = np.zeros((len(triples), 3, 2))
    for m, (i, j) in enumerate(((0, 1), (0, 2), (1, 2))):
        a, b = triples[:, i], triples[:, j]
        ca, cb = ctr[a], ctr[b]
        d = np.hypot(cb[:, 0] - ca[:, 0], cb[:, 1] - ca[:, 1])
        d = np.where(d < 1e-300, 1.0, d)
        # tangency against the enclosing wall sits at distance r_a beyond c_b
        ra = np.where(enc[a], -rad[a], rad[a])
        out[:, m] = ca + (cb - ca) * (ra / d)[:, None]
    return out


def apollonian(seed: TangentCircleTriple, min_radius: float) -> FractalApproximation:
    """Circle packing generated from three mutually tangent seed circles.

    Every packing circle of radius >= ``min_radius`` is emitted together with
    the enclosing circle (level 0, enclosing flag).  Each curvilinear
    interstice is filled by the circle tangent to its three walls, obtained
    by reflecting the known opposite tangent circle in curvature form and
    refined by the Newton solve.  An interstice whose inscribed circle falls
    below ``min_radius`` is pruned: the inscribed circle is the largest one
    the interstice contains, so no descendant can reach the threshold.
    """
    if min_radius <= 0:
        raise ValueError("min_radius must be positive")
    inner, outer = soddy_circles(seed)
    del inner  # regenerated as the first reflection below
    cs = seed.circles()
    centers: list[np.ndarray] = [np.array([outer.shape.center.x, outer.shape.center.y])]
    radii: list[float] = [outer.shape.radius]
    levels: list[int] = [0]
    enclosing: list[bool] = [True]
    for c in cs:
        centers.append(np.array([c.center.x, c.center.y]))
        radii.append(c.radius)
        levels.append(0)
        enclosing.append(False)

    # frontier entries: (wall ids, id of the circle already tangent to all walls)
    frontier: list[tuple[list[int], int]] = [
        ([1, 2, 3], 0), ([0, 1, 2], 3), ([0, 1, 3], 2), ([0, 2, 3], 1)]
    interstices: list[np.ndarray] = []
    gen = 0
    while frontier:
        interstices.append(np.asarray([t for t, _ in frontier], dtype=np.int64))
        gen += 1
        next_frontier: list[tuple[list[int], int]] = []
        for triple, opp in frontier:
            sgn = np.array([-1.0 if enclosing[t] else 1.0 for t in triple])
            k = sgn / np.array([radii[t] for t in triple])
            k_opp = (-1.0 if enclosing[opp] else 1.0) / radii[opp]
            z = np.array([complex(centers[t][0], centers[t][1]) for t in triple])
            z_opp = complex(centers[opp][0], centers[opp][1])
            k_new = 2.0 * k.sum() - k_opp
            if k_new <= 0:
                raise IllConditionedError("reflection produced an unbounded circle")
            z_new = (2.0 * (k * z).sum() - k_opp * z_opp) / k_new
            tri_centers = np.array([centers[t] for t in triple])
            tri_radii = np.array([radii[t] for t in triple])
            c_new, r_new = _tangency_newton(tri_centers, tri_radii, sgn,
                                            np.array([z_new.real, z_new.imag]),
                                            1.0 / k_new)
            if r_new < min_radius:
                continue
            new_id = len(radii)
            if new_id > _APOLLONIAN_CIRCLE_CAP:
                raise ResourceLimitError("apollonian circle cap exceeded")
            centers.append(c_new)
            radii.append(r_new)
            levels.append(gen)
            enclosing.append(False)
            for drop in range(3):
                child = list(triple)
                opp_child = child[drop]
                child[drop] = new_id
                next_frontier.append((child, opp_child))
        frontier = next_frontier

    data = CircleData(np.asarray(centers), np.asarray(radii, dtype=float),
                      np.asarray(levels, dtype=np.int64),
                      np.asarray(enclosing, dtype=bool))
    n_levels = len(interstices)
    lvls = [FractalLevel(np.zeros((0, 3, 2)), np.zeros((0, 3, 2)))
            for _ in range(n_levels)]
    return FractalApproximation("apollonian", lvls, circles=data,
                                interstices=interstices)


# ---------------------------------------------------------------------------
# staircase and escape-time raster
# ---------------------------------------------------------------------------

def cantor_staircase(x: float, iterations: int = 48) -> float:
    """Staircase value of ``x`` truncated to ``iterations`` ternary digits.

    Monotone non-decreasing in ``x``; exact on plateau points once the digit
    budget reaches them.  Inputs outside [0, 1] are clamped with a warning.
    """
    if iterations <= 0 or iterations > 64:
        raise ValueError("iterations must be in 1..64")
    if x < 0.0 or x > 1.0:
        warnings.warn("staircase input clamped to [0, 1]", stacklevel=2)
        x = min(max(x, 0.0), 1.0)
    if x == 1.0:
        return 1.0
    value = 0.0
    weight = 0.5
    for _ in range(iterations):
        x *= 3.0
        digit = int(x)
        if digit == 1:
            return value + weight
        if digit >= 2:
            value += weight
            x -= 2.0
        weight *= 0.5
    return value


def staircase_array(x: np.ndarray, iterations: int = 48) -> np.ndarray:
    """Vectorized :func:`cantor_staircase` (inputs clamped silently)."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0).copy()
    value = np.where(x == 1.0, 1.0, 0.0)
    active = (x < 1.0) & (x > 0.0)
    weight = 0.5
    for _ in range(iterations):
        x[active] *= 3.0
        digit = np.floor(x).astype(np.int64)
        middle = active & (digit == 1)
        value[middle] += weight
        active = active & ~middle
        upper = active & (digit >= 2)
        value[upper] += weight
        x[upper] -= 2.0
        weight *= 0.5
    return value


JULIA_MAPS = ("z2+lambda/z2", "z2-16/27z")


def julia_raster(map_id: str, lam: complex = 0.0, grid: int = 256,
                 max_iter: int = 64, window: float = 2.0) -> np.ndarray:
    """Escape-iteration counts per pixel; ``max_iter`` marks bounded orbits.

    Visualization only; no certificate consumes the raster.
    """
    if map_id not in JULIA_MAPS:
        raise ValueError(f"unknown map {map_id!r}; expected one of {JULIA_MAPS}")
    if grid < 1 or grid * grid > 4096 * 4096:
        raise ResourceLimitError("raster resolution exceeds 4096^2")
    xs = np.linspace(-window, window, grid)
    ys = np.linspace(-window, window, grid)
    z = (xs[None, :] + 1j * ys[:, None]).astype(np.complex128)
    counts = np.full(z.shape, max_iter, dtype=np.int32)
    alive = np.ones(z.shape, dtype=bool)
    for it in range(max_iter):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            if map_id == "z2+lambda/z2":
                znew = z * z if lam == 0 else z * z + lam / (z * z)
            else:
                znew = z * z - 16.0 / (27.0 * z)
        z = np.where(alive, znew, z)
        escaped = alive & (~np.isfinite(z.real) | ~np.isfinite(z.imag)
                           | (np.abs(z) > 4.0))
        counts[escaped] = it + 1
        alive &= ~escaped
    return counts


def raster_to_pgm(counts: np.ndarray, max_iter: int) -> bytes:
    """Grayscale binary PGM encoding of an escape-count raster."""
    scale = 255.0 / max(max_iter, 1)
    img = np.clip(counts * scale, 0, 255).astype(np.uint8)
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode()
    return header + img.tobytes()


# ---------------------------------------------------------------------------
# structural verification
# ---------------------------------------------------------------------------

@dataclass
class NestedConstructionReport:
    kind: str
    contact_violations: list[str]
    component_counts: list[int]
    max_solid_diameter: list[float]

    @property
    def passed(self) -> bool:
        return not self.contact_violations


def verify_nested_construction(f: FractalApproximation,
                               tol: float = 1e-9) -> NestedConstructionReport:
    """Check the contact conditions of the nested removal construction.

    Every hole removed at level m inside a solid of level m-1 must reach each
    positive-length portion of the solid's boundary contributed by an earlier
    component (isolated single-point contacts of earlier boundaries are not
    walls and are skipped; for circle packings the wall contact is the
    tangency of the new circle to each of its three bounding circles).  The
    report also lists the per-level solid counts, which witness that each
    interior stage has finitely many components, and the max solid diameter
    decay.
    """
    if f.kind not in ("gasket", "apollonian"):
        raise ValueError("verification supports gasket and apollonian kinds")
    violations: list[str] = []
    counts = [f.n_solids(m) for m in range(f.max_level + 1)]
    diams = [f.max_solid_diameter(m) for m in range(f.max_level + 1)]
    if f.kind == "gasket":
        for m in range(1, f.max_level + 1):
            violations += _gasket_contact_violations(f, m, tol)
    else:
        c = f.circles
        for k in range(len(c.radii)):
            if c.levels[k] >= 1 and not c.enclosing[k]:
                violations += _apollonian_contact_violations(f, k, tol)
    return NestedConstructionReport(f.kind, violations, counts, diams)


def _gasket_contact_violations(f: FractalApproximation, m: int,
                               tol: float) -> list[str]:
    out: list[str] = []
    parents = f.levels[m - 1].solids
    holes = f.levels[m].holes
    earlier = [f.outer_component()] + f.hole_components(m - 1)
    for hi in range(len(holes)):
        hole = holes[hi]
        parent = parents[hi]  # holes are generated in parent order
        edge_a = parent
        edge_b = np.roll(parent, -1, axis=0)
        mids = (edge_a + edge_b) / 2.0
        probes = np.vstack([edge_a, mids, edge_b])
        for comp in earlier:
            on_curve = comp.boundary_distance(probes) <= tol
            on_edge = on_curve[:3] & on_curve[3:6] & on_curve[6:]
            if not np.any(on_edge):
                continue
            sel = np.flatnonzero(on_edge)
            gap = segment_distance(hole, edge_a[sel], edge_b[sel]).min()
            if gap > tol:
                out.append(
                    f"level {m} hole {hi}: no contact with component "
                    f"{comp.index} along its parent wall (gap {gap:.3e})")
    return out


def _apollonian_contact_violations(f: FractalApproximation, k: int,
                                   tol: float) -> list[str]:
    c = f.circles
    gen = int(c.levels[k])
    d = np.hypot(c.centers[:, 0] - c.centers[k, 0],
                 c.centers[:, 1] - c.centers[k, 1])
    target = np.where(c.enclosing, c.radii - c.radii[k], c.radii + c.radii[k])
    resid = np.abs(d - target)
    resid[c.levels >= gen] = np.inf
    resid[k] = np.inf
    if np.sum(np.isfinite(resid)) < 3:
        return [f"circle {k} (gen {gen}) has fewer than 3 earlier candidates"]
    worst = float(np.sort(resid)[:3].max())
    if worst > tol:
        return [f"circle {k} (gen {gen}): worst wall tangency residual {worst:.3e}"]
    return []
