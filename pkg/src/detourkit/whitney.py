"""Whitney cube decomposition of a bounded open planar domain.

The sweep is a level-by-level quadtree pass over dyadic cubes in the fixed
scene frame (cube = [ix 2^-j, (ix+1) 2^-j] x [iy 2^-j, (iy+1) 2^-j]).  A cube
is accepted once diam(Q) <= dist(Q, boundary) <= 4 diam(Q); the upper half is
automatic because every accepted cube's parent failed the lower half.  All
cube-to-boundary distances come from the domain oracle in closed form, which
keeps the selection sharp.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .domains import Domain
from .errors import OracleError, ResourceLimitError, UncoveredPointError

SQRT2 = math.sqrt(2.0)

MAX_CUTOFF = 24
_LEVEL_BIAS = 16
_COORD_BIAS = 1 << 27

#: comparability constants: ell(Q) <= corner delta <= CORNER_UPPER * ell(Q)
CORNER_LOWER = 1.0
CORNER_UPPER = 4.0 * SQRT2 + SQRT2


def _pack(level: np.ndarray, ix: np.ndarray, iy: np.ndarray) -> np.ndarray:
    lv = (np.asarray(level, dtype=np.int64) + _LEVEL_BIAS) << 56
    return lv | ((np.asarray(ix, dtype=np.int64) + _COORD_BIAS) << 28) \
        | (np.asarray(iy, dtype=np.int64) + _COORD_BIAS)


@dataclass(frozen=True)
class DyadicCube:
    """One closed dyadic cube of the scene frame."""

    level: int
    ix: int
    iy: int

    @property
    def side(self) -> float:
        return 2.0 ** (-self.level)

    @property
    def center(self) -> tuple[float, float]:
        s = self.side
        return ((self.ix + 0.5) * s, (self.iy + 0.5) * s)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        s = self.side
        return (self.ix * s, self.iy * s, (self.ix + 1) * s, (self.iy + 1) * s)

    def corners(self) -> np.ndarray:
        x0, y0, x1, y1 = self.bounds
        return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])


class WhitneyDecomposition:
    """Accepted dyadic cubes of a domain with their adjacency graph.

    Cubes are stored in canonical (level, ix, iy) order in flat arrays:
    ``levels``, ``ix``, ``iy``, ``centers`` (n, 2), ``delta_center`` (boundary
    distance at the center), ``dist`` (exact distance from the cube to the
    boundary) and ``dist_hi`` (min of the corner/center distances, an upper
    bound for the former).  Instances are immutable apart from lazily built
    caches; refinement returns a new object.
    """

    def __init__(self, domain: Domain, min_level_cutoff: int,
                 levels: np.ndarray, ix: np.ndarray, iy: np.ndarray,
                 dist: np.ndarray, corner_upper: float = CORNER_UPPER):
        # canonical (level, ix, iy) order; the packed key order matches it
        order = np.argsort(_pack(levels, ix, iy))
        self.domain = domain
        self.min_level_cutoff = int(min_level_cutoff)
        self.levels = np.asarray(levels, dtype=np.int64)[order]
        self.ix = np.asarray(ix, dtype=np.int64)[order]
        self.iy = np.asarray(iy, dtype=np.int64)[order]
        self.dist = np.asarray(dist, dtype=float)[order]
        self.side = 2.0 ** (-self.levels.astype(float))
        self.centers = np.column_stack([(self.ix + 0.5) * self.side,
                                        (self.iy + 0.5) * self.side])
        self.delta_center = domain.boundary_distance(self.centers) \
            if len(self.levels) else np.zeros(0)
        self.corner_upper = corner_upper
        if np.any(self.delta_center <= 0.0):
            raise OracleError("inside cube center with zero boundary distance")
        self.keys = _pack(self.levels, self.ix, self.iy)
        self.uncovered_area = max(domain.area() - float(np.sum(self.side ** 2)), 0.0)
        self._edges: tuple[np.ndarray, np.ndarray] | None = None
        self._kdtree = None

    # --- basic accessors ---------------------------------------------------

    def __len__(self) -> int:
        return len(self.levels)

    @property
    def n_cubes(self) -> int:
        return len(self.levels)

    def cube(self, i: int) -> DyadicCube:
        return DyadicCube(int(self.levels[i]), int(self.ix[i]), int(self.iy[i]))

    def corner_deltas(self) -> np.ndarray:
        """Boundary distances at the 4 corners of every cube, shape (n, 4)."""
        out = np.empty((len(self), 4))
        x0 = self.ix * self.side
        y0 = self.iy * self.side
        for k, (ox, oy) in enumerate(((0, 0), (1, 0), (1, 1), (0, 1))):
            pts = np.column_stack([x0 + ox * self.side, y0 + oy * self.side])
            out[:, k] = self.domain.boundary_distance(pts)
        return out

    # --- point location ----------------------------------------------------

    def find_cubes(self, point) -> list[int]:
        """Indices of every accepted closed cube containing ``point``.

        A point on a shared cube boundary belongs to up to four cubes; the
        list is sorted canonically and empty when the point is uncovered.
        """
        x, y = float(point[0]), float(point[1])
        hits: list[int] = []
        for lv in np.unique(self.levels):
            s = 2.0 ** (-float(lv))
            eps = s * 1e-12
            cells = {(math.floor((x + sx * eps) / s), math.floor((y + sy * eps) / s))
                     for sx in (-1.0, 1.0) for sy in (-1.0, 1.0)}
            for cx, cy in sorted(cells):
                cand = _pack(np.array([lv]), np.array([cx]), np.array([cy]))
                pos = np.searchsorted(self.keys, cand[0])
                if pos < len(self.keys) and self.keys[pos] == cand[0]:
                    hits.append(int(pos))
        return sorted(set(hits))

    def find_cube(self, point) -> int:
        """Index of the accepted cube containing ``point``.

        Ties on shared boundaries go to the cube with the nearest center.
        Raises :class:`UncoveredPointError` naming the nearest cube when the
        point is not covered.
        """
        x, y = float(point[0]), float(point[1])
        hits = self.find_cubes(point)
        if hits:
            return min(hits, key=lambda i: (
                (x - self.centers[i, 0]) ** 2 + (y - self.centers[i, 1]) ** 2, i))
        near = self.nearest_cube(point)
        cube = self.cube(near)
        raise UncoveredPointError(
            f"point ({x}, {y}) not covered; nearest cube level={cube.level} "
            f"ix={cube.ix} iy={cube.iy}")

    def nearest_cube(self, point) -> int:
        from scipy.spatial import cKDTree

        if self._kdtree is None:
            self._kdtree = cKDTree(self.centers)
        k = min(32, len(self))
        _, idx = self._kdtree.query([point[0], point[1]], k=k)
        idx = np.atleast_1d(idx)
        best, best_d = int(idx[0]), math.inf
        for i in idx:
            d = self.cube_point_distance(int(i), point)
            if d < best_d - 1e-15 or (abs(d - best_d) <= 1e-15
                                      and self.side[i] < self.side[best]):
                best, best_d = int(i), d
        return best

    def cube_point_distance(self, i: int, point) -> float:
        s = self.side[i]
        dx = max(abs(point[0] - self.centers[i, 0]) - s / 2.0, 0.0)
        dy = max(abs(point[1] - self.centers[i, 1]) - s / 2.0, 0.0)
        return math.hypot(dx, dy)

    # --- adjacency ----------------------------------------------------------

    def adjacency_edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Edges (m, 2) over cube ids and their quasihyperbolic weights.

        Cubes are adjacent exactly when they share a boundary segment of
        positive length; for dyadic cubes that is the same as the smaller
        cube's face being contained in a face of the larger one, and corner
        contacts are excluded.  The weight of an edge is the center distance
        over the harmonic mean boundary distance:
        ``|x1 - x2| * 2 / (delta1 + delta2)``.
        """
        if self._edges is not None:
            return self._edges
        n = len(self)
        if n == 0:
            self._edges = (np.zeros((0, 2), dtype=np.int64), np.zeros(0))
            return self._edges
        # touching cubes differ by at most 2 levels (side ratio 4); 4 is
        # slack for decompositions assembled by hand
        max_diff = min(int(self.levels.max() - self.levels.min()), 4)
        edges = _probe_pairs(self.keys, self.levels, self.ix, self.iy, max_diff)
        a = edges[:, 0]
        b = edges[:, 1]
        d = np.hypot(self.centers[a, 0] - self.centers[b, 0],
                     self.centers[a, 1] - self.centers[b, 1])
        w = d * 2.0 / (self.delta_center[a] + self.delta_center[b])
        self._edges = (edges, w)
        return self._edges

    # --- serialization -------------------------------------------------------

    def cubes_csv(self) -> str:
        buf = io.StringIO()
        buf.write("level,ix,iy,side,dist_lo,dist_hi\n")
        hi = self.corner_deltas().min(axis=1)
        hi = np.minimum(hi, self.delta_center)
        for i in range(len(self)):
            buf.write(f"{self.levels[i]},{self.ix[i]},{self.iy[i]},"
                      f"{float(self.side[i])!r},{float(self.dist[i])!r},"
                      f"{float(hi[i])!r}\n")
        return buf.getvalue()

    def edges_csv(self) -> str:
        edges, w = self.adjacency_edges()
        buf = io.StringIO()
        buf.write("id1,id2,weight\n")
        for (a, b), wt in zip(edges, w):
            buf.write(f"{a},{b},{float(wt)!r}\n")
        return buf.getvalue()


def whitney_decompose(domain: Domain, min_level_cutoff: int) -> WhitneyDecomposition:
    """Dyadic Whitney decomposition of ``domain`` down to the cutoff level.

    Cubes at levels beyond the cutoff are omitted; the area they would have
    covered is reported via ``uncovered_area``.
    """
    if min_level_cutoff > MAX_CUTOFF:
        raise ResourceLimitError(f"cutoff {min_level_cutoff} exceeds {MAX_CUTOFF}")
    x0, y0, x1, y1 = domain.bbox()
    extent = max(x1 - x0, y1 - y0)
    if extent <= 0:
        warnings.warn("empty domain; returning empty decomposition", stacklevel=2)
        z = np.zeros(0, dtype=np.int64)
        return WhitneyDecomposition(domain, min_level_cutoff, z, z, z, np.zeros(0))
    j0 = math.floor(-math.log2(extent))
    side0 = 2.0 ** (-j0)
    gx = np.arange(math.floor(x0 / side0), math.floor(x1 / side0) + 1, dtype=np.int64)
    gy = np.arange(math.floor(y0 / side0), math.floor(y1 / side0) + 1, dtype=np.int64)
    ix, iy = np.meshgrid(gx, gy, indexing="ij")
    ix = ix.ravel()
    iy = iy.ravel()

    acc_levels, acc_ix, acc_iy, acc_dist = [], [], [], []
    level = j0
    while len(ix) and level <= min_level_cutoff:
        s = 2.0 ** (-level)
        cx = (ix + 0.5) * s
        cy = (iy + 0.5) * s
        dist = domain.cube_boundary_distance_capped(
            cx, cy, np.full(len(ix), s / 2.0), 8.0 * s)
        inside = domain.contains(np.column_stack([cx, cy]))
        accept = inside & (dist >= s * SQRT2)
        discard = (~inside) & (dist > 0.0)
        if np.any(accept):
            acc_levels.append(np.full(int(accept.sum()), level, dtype=np.int64))
            acc_ix.append(ix[accept])
            acc_iy.append(iy[accept])
            acc_dist.append(dist[accept])
        split = ~(accept | discard)
        ix, iy = _split_cells(ix[split], iy[split])
        level += 1

    if not acc_levels:
        warnings.warn("no cube accepted; domain may be empty at this cutoff",
                      stacklevel=2)
        z = np.zeros(0, dtype=np.int64)
        return WhitneyDecomposition(domain, min_level_cutoff, z, z, z, np.zeros(0))
    return WhitneyDecomposition(
        domain, min_level_cutoff,
        np.concatenate(acc_levels), np.concatenate(acc_ix),
        np.concatenate(acc_iy), np.concatenate(acc_dist))


def _split_cells(ix: np.ndarray, iy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    bx = ix * 2
    by = iy * 2
    ox = np.array([0, 1, 0, 1], dtype=np.int64)
    oy = np.array([0, 0, 1, 1], dtype=np.int64)
    return ((bx[:, None] + ox[None, :]).ravel(),
            (by[:, None] + oy[None, :]).ravel())


def _probe_pairs(keys: np.ndarray, levels: np.ndarray, ix: np.ndarray,
                 iy: np.ndarray, max_diff: int) -> np.ndarray:
    """All touching cube pairs with level difference up to ``max_diff``.

    ``keys`` must be the sorted packed keys of (levels, ix, iy).  Each
    undirected positive-length contact is produced exactly once: same-level
    contacts are probed in the two positive directions only, and a finer
    cube finds a coarser neighbor by walking up the neighbor cell's
    ancestors (which are unique and never probed from the coarser side).
    Corner-only contacts are never generated because only edge-shifted
    cells are probed.
    """
    n = len(keys)
    ids = np.arange(n, dtype=np.int64)
    pairs = []
    for dx, dy in ((1, 0), (0, 1), (-1, 0), (0, -1)):
        nx = ix + dx
        ny = iy + dy
        ks = range(0, max_diff + 1) if (dx > 0 or dy > 0) \
            else range(1, max_diff + 1)
        for k in ks:
            cand = _pack(levels - k, nx >> k, ny >> k)
            pos = np.searchsorted(keys, cand)
            pos_c = np.minimum(pos, n - 1)
            hit = keys[pos_c] == cand
            if np.any(hit):
                pairs.append(np.column_stack([ids[hit], pos_c[hit]]))
    if not pairs:
        return np.zeros((0, 2), dtype=np.int64)
    return np.vstack(pairs)


#: refinement target: conservative in-cube quasihyperbolic diameter bound
QH_DIAMETER_BOUND = 1.0 / 3.0


def refine_for_qh(w: WhitneyDecomposition,
                  qh_bound: float = QH_DIAMETER_BOUND) -> WhitneyDecomposition:
    """Split cubes until diag(Q) / dist(Q, boundary) <= ``qh_bound`` everywhere.

    The diagonal over the minimum boundary distance bounds the internal
    quasihyperbolic diameter of the cube from above, so the refined cubes
    satisfy the in-cube distance budget used by the graph metric.  The
    default budget is 1/3; accuracy-critical callers may pass a smaller
    value, which only strengthens the guarantee.  A 2:1 style balance pass
    keeps the neighbor side ratio within 4.  Corner distance comparability
    loosens by the number of splits taken; the resulting upper constant is
    recorded on the output.
    """
    if not 0.0 < qh_bound <= QH_DIAMETER_BOUND:
        raise ValueError("qh_bound must be in (0, 1/3]")
    levels = w.levels.copy()
    ix = w.ix.copy()
    iy = w.iy.copy()
    dist = w.dist.copy()
    max_splits = 0
    domain = w.domain
    # distances only steer threshold comparisons against small multiples of
    # the side, so the oracle may clamp beyond this cap without changing any
    # decision (polygon domains exploit it; exact oracles ignore it)
    cap = SQRT2 / qh_bound + 2.0
    while True:
        side = 2.0 ** (-levels.astype(float))
        need = side * SQRT2 / dist > qh_bound
        if not np.any(need):
            break
        max_splits += 1
        keep = ~need
        sx, sy = _split_cells(ix[need], iy[need])
        sl = np.repeat(levels[need], 4) + 1
        s = 2.0 ** (-sl.astype(float))
        sd = domain.cube_boundary_distance_capped(
            (sx + 0.5) * s, (sy + 0.5) * s, s / 2.0, cap * s)
        levels = np.concatenate([levels[keep], sl])
        ix = np.concatenate([ix[keep], sx])
        iy = np.concatenate([iy[keep], sy])
        dist = np.concatenate([dist[keep], sd])

    # balance: adjacent cubes may differ by at most 2 levels (ratio 4).  The
    # split loop adds at most a few levels per cube, so the imbalance to
    # repair is bounded; the touching-pair probe doubles as the adjacency
    # probe of the final decomposition, so its last run is reused.
    edges = np.zeros((0, 2), dtype=np.int64)
    while True:
        keys = _pack(levels, ix, iy)
        order = np.argsort(keys)
        keys = keys[order]
        levels, ix, iy, dist = levels[order], ix[order], iy[order], dist[order]
        max_diff = min(int(levels.max() - levels.min()), 8)
        edges = _probe_pairs(keys, levels, ix, iy, max_diff)
        diff = np.abs(levels[edges[:, 0]] - levels[edges[:, 1]])
        bad = edges[diff >= 3]
        if len(bad) == 0:
            break
        too_coarse = np.zeros(len(levels), dtype=bool)
        coarse_side = np.where(levels[bad[:, 0]] < levels[bad[:, 1]],
                               bad[:, 0], bad[:, 1])
        too_coarse[coarse_side] = True
        max_splits = max(max_splits, 1)
        keep = ~too_coarse
        sx, sy = _split_cells(ix[too_coarse], iy[too_coarse])
        sl = np.repeat(levels[too_coarse], 4) + 1
        s = 2.0 ** (-sl.astype(float))
        sd = domain.cube_boundary_distance_capped(
            (sx + 0.5) * s, (sy + 0.5) * s, s / 2.0, cap * s)
        levels = np.concatenate([levels[keep], sl])
        ix = np.concatenate([ix[keep], sx])
        iy = np.concatenate([iy[keep], sy])
        dist = np.concatenate([dist[keep], sd])

    corner_upper = w.corner_upper * (2.0 ** max_splits) if max_splits else w.corner_upper
    out = WhitneyDecomposition(domain, w.min_level_cutoff, levels, ix, iy,
                               dist, corner_upper=corner_upper)
    # the probe ran on canonically sorted arrays, so its positions are valid
    # for the constructed object; attach the weights and skip the rebuild
    a, b = edges[:, 0], edges[:, 1]
    d = np.hypot(out.centers[a, 0] - out.centers[b, 0],
                 out.centers[a, 1] - out.centers[b, 1])
    wts = d * 2.0 / (out.delta_center[a] + out.delta_center[b])
    out._edges = (edges, wts)
    return out


def adjacency_edges(w: WhitneyDecomposition) -> tuple[np.ndarray, np.ndarray]:
    """Edge list (m, 2) with quasihyperbolic weights; see the class method."""
    return w.adjacency_edges()
