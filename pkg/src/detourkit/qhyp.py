"""Quasihyperbolic distances and geodesics on the Whitney adjacency graph.

The continuum metric (the infimum of arc length weighted by reciprocal
boundary distance) is replaced by shortest paths on the cube adjacency
graph: an edge costs the center distance times the reciprocal of the mean
of the two center boundary distances, and a query point pays an entry leg
from itself to its cube center.  The refinement bound of 1/3 per cube keeps
the per-cube discretization error controlled.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra as _sp_dijkstra

from .errors import ResolutionError
from .whitney import WhitneyDecomposition

__all__ = [
    "HolderFit", "FitReport", "ShadowTable", "GeodesicSolver", "solver_for",
    "qh_distance", "qh_geodesic", "geodesic_to_boundary", "holder_fit",
    "geodesic_cube_sum", "shadows", "shadow_sum_check",
]


@dataclass(frozen=True)
class HolderFit:
    """Logarithmic growth certificate: k(x, x0) <= log(d0/d(x))/alpha + c."""

    basepoint: tuple[float, float]
    alpha: float
    c: float
    samples: int
    max_residual: float


@dataclass(frozen=True)
class FitReport:
    status: str  # "ok" or "not-holder"
    fit: HolderFit | None
    alpha_floor: float
    c_max: float
    worst_excess: float  # residual above c_max at the alpha floor; <= 0 when fittable


@dataclass
class ShadowTable:
    """Boundary footprint of each cube under sampled geodesics.

    ``entries`` maps cube id to the indices of the boundary samples whose
    geodesic chain passes through the cube; ``s`` of a cube is the diameter
    of those samples (0 when no or one geodesic meets it).
    """

    basepoint: tuple[float, float]
    n_samples: int
    boundary: np.ndarray
    entries: dict[int, np.ndarray]

    def s(self, cube_id: int) -> float:
        idx = self.entries.get(cube_id)
        if idx is None or len(idx) < 2:
            return 0.0
        pts = self.boundary[idx]
        d2 = (pts[:, None, 0] - pts[None, :, 0]) ** 2 \
            + (pts[:, None, 1] - pts[None, :, 1]) ** 2
        return math.sqrt(float(d2.max()))

    def s_values(self) -> dict[int, float]:
        return {k: self.s(k) for k in self.entries}


@dataclass(frozen=True)
class Geodesic:
    """Minimizing chain between two cubes with its polyline realization."""

    cubes: np.ndarray       # cube ids along the chain, source first
    polyline: np.ndarray    # (m, 2) points: endpoint, centers, endpoint
    prefix: np.ndarray      # cumulative graph value at each chain cube
    value: float            # total value including the endpoint legs


class GeodesicSolver:
    """Shortest-path engine over one refined Whitney decomposition."""

    def __init__(self, w: WhitneyDecomposition):
        self.w = w
        edges, weights = w.adjacency_edges()
        n = len(w)
        if len(edges):
            rows = np.concatenate([edges[:, 0], edges[:, 1]])
            cols = np.concatenate([edges[:, 1], edges[:, 0]])
            data = np.concatenate([weights, weights])
        else:
            rows = cols = np.zeros(0, dtype=np.int64)
            data = np.zeros(0)
        self.graph = csr_matrix((data, (rows, cols)), shape=(n, n))
        self._cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    # --- infrastructure -----------------------------------------------------

    def run_dijkstra(self, src: int,
                     limit: float = math.inf) -> tuple[np.ndarray, np.ndarray]:
        """Single-source distances and predecessors, cached per source.

        ``limit`` prunes the search radius; entries beyond it come back as
        inf.  A cached run is reused only when its radius covers the request.
        """
        hit = self._cache.get(src)
        if hit is None or hit[0] < limit:
            dist, pred = _sp_dijkstra(self.graph, indices=src,
                                      return_predecessors=True, limit=limit)
            if len(self._cache) > 128:
                self._cache.clear()
            hit = (limit, dist, pred)
            self._cache[src] = hit
        return hit[1], hit[2]

    def leg(self, point, cube: int) -> float:
        c = self.w.centers[cube]
        return math.hypot(point[0] - c[0], point[1] - c[1]) / self.w.delta_center[cube]

    def chain(self, src: int, dst: int) -> np.ndarray:
        _, pred = self.run_dijkstra(src)
        out = [dst]
        while out[-1] != src:
            p = pred[out[-1]]
            if p < 0:
                raise ResolutionError(
                    f"cube {dst} unreachable from {src}; the adjacency graph "
                    "is disconnected at this cutoff")
            out.append(int(p))
        return np.asarray(out[::-1], dtype=np.int64)

    def default_basepoint(self) -> np.ndarray:
        """Center of the cube with maximal boundary distance."""
        i = int(np.argmax(self.w.delta_center))
        return self.w.centers[i].copy()

    # --- distances and geodesics ---------------------------------------------

    def _endpoint_cubes(self, p) -> list[int]:
        cubes = self.w.find_cubes(p)
        if not cubes:
            self.w.find_cube(p)  # raises UncoveredPointError with diagnostics
        return cubes

    def _best_pair(self, pa, pb, limit: float = math.inf) -> tuple[int, int, float]:
        """Cheapest (source cube, target cube) pair for two query points.

        A point on a shared cube boundary belongs to every adjacent closed
        cube; the distance minimizes over the admissible assignments.
        """
        cas = self._endpoint_cubes(pa)
        cbs = self._endpoint_cubes(pb)
        best = None
        for ca in cas:
            dist, _ = self.run_dijkstra(ca, limit)
            la = self.leg(pa, ca)
            for cb in cbs:
                if ca == cb:
                    v = math.hypot(pa[0] - pb[0], pa[1] - pb[1]) \
                        / self.w.delta_center[ca]
                else:
                    v = la + float(dist[cb]) + self.leg(pb, cb)
                if best is None or v < best[2]:
                    best = (ca, cb, v)
        return best

    def distance(self, a, b, limit: float = math.inf) -> float:
        """Graph quasihyperbolic distance between points of the domain.

        Symmetric by construction: the arguments are put in canonical order
        first, so distance(a, b) and distance(b, a) run identically.
        ``limit`` bounds the search radius as a performance hint; when it
        turns out too small the query reruns unbounded, so the result never
        depends on it.
        """
        pa = (float(a[0]), float(a[1]))
        pb = (float(b[0]), float(b[1]))
        if pb < pa:
            pa, pb = pb, pa
        value = self._best_pair(pa, pb, limit)[2]
        if not math.isfinite(value) and math.isfinite(limit):
            value = self._best_pair(pa, pb)[2]
        return value

    def geodesic(self, a, b) -> Geodesic:
        pa = (float(a[0]), float(a[1]))
        pb = (float(b[0]), float(b[1]))
        ca, cb, value = self._best_pair(pa, pb)
        if ca == cb:
            return Geodesic(np.array([ca]), np.array([pa, pb]), np.zeros(1), value)
        chain = self.chain(ca, cb)
        dist, _ = self.run_dijkstra(ca)
        prefix = dist[chain]
        poly = np.vstack([[pa], self.w.centers[chain], [pb]])
        return Geodesic(chain, poly, prefix, value)

    def to_boundary(self, x0, b) -> Geodesic:
        """Chain from the cube of ``x0`` to the deepest accepted cube at ``b``.

        ``b`` must lie within two of the smallest cube sides of the domain
        boundary; a missing terminal cube raises :class:`ResolutionError`
        suggesting a deeper cutoff.
        """
        w = self.w
        min_side = float(w.side.min())
        if float(w.domain.boundary_distance(np.array([[b[0], b[1]]]))[0]) \
                > 2.0 * min_side:
            raise ValueError("target point is not near the domain boundary")
        # the uncovered boundary band is a few selection-scale cubes wide
        reach = 8.0 * 2.0 ** (-w.min_level_cutoff)
        term = w.nearest_cube(b)
        if w.cube_point_distance(term, b) > reach:
            raise ResolutionError(
                "no accepted cube near the boundary point; increase the cutoff")
        src = w.find_cube(x0)
        if src == term:
            return Geodesic(np.array([src]),
                            np.array([[x0[0], x0[1]], w.centers[term]]),
                            np.zeros(1), 0.0)
        chain = self.chain(src, term)
        dist, _ = self.run_dijkstra(src)
        poly = np.vstack([[np.asarray(x0, dtype=float)], w.centers[chain]])
        return Geodesic(chain, poly, dist[chain],
                        self.leg(x0, src) + float(dist[term]))

    # --- growth fit ------------------------------------------------------------

    def holder_fit(self, x0, n_samples: int, alpha_floor: float = 1e-3,
                   c_max: float = 1e3) -> FitReport:
        """Dominating pair (alpha, c): maximize alpha, then minimize c.

        Samples the graph distance at the cube centers along ``n_samples``
        boundary-directed geodesic chains and fits
        k <= log(d0/d)/alpha + c over all samples, via a coarse alpha grid
        followed by bisection; c(alpha) is the smallest dominating intercept.
        """
        if n_samples < 16:
            raise ValueError("need at least 16 boundary samples")
        w = self.w
        src = w.find_cube(x0)
        leg0 = self.leg(x0, src)
        dist, _ = self.run_dijkstra(src)
        marked = np.zeros(len(w), dtype=bool)
        for b in w.domain.boundary_points(n_samples):
            try:
                g = self.to_boundary(x0, b)
            except ResolutionError:
                continue
            marked[g.cubes] = True
        idx = np.flatnonzero(marked & np.isfinite(dist))
        khat = leg0 + dist[idx]
        delta0 = float(w.domain.boundary_distance(np.array([[x0[0], x0[1]]]))[0])
        logs = np.log(delta0 / w.delta_center[idx])

        def c_of(alpha: float) -> float:
            return float(np.max(khat - logs / alpha))

        if c_of(alpha_floor) > c_max:
            return FitReport("not-holder", None, alpha_floor, c_max,
                             c_of(alpha_floor) - c_max)
        lo = alpha_floor
        hi = None
        for alpha in np.geomspace(alpha_floor, 1.0, 64):
            if c_of(float(alpha)) <= c_max:
                lo = float(alpha)
            else:
                hi = float(alpha)
                break
        if hi is None:
            alpha = 1.0
        else:
            for _ in range(60):
                mid = math.sqrt(lo * hi)
                if c_of(mid) <= c_max:
                    lo = mid
                else:
                    hi = mid
            alpha = lo
        c = max(c_of(alpha), 0.0)
        resid = float(np.max(khat - logs / alpha - c))
        fit = HolderFit((float(x0[0]), float(x0[1])), float(alpha), c,
                        int(len(idx)), resid)
        return FitReport("ok", fit, alpha_floor, c_max, resid)

    # --- shadows -----------------------------------------------------------------

    def shadows(self, x0, n_samples: int) -> ShadowTable:
        """Mark each chain cube with the boundary samples its geodesics serve."""
        if n_samples < 64:
            raise ValueError("need at least 64 boundary samples")
        w = self.w
        pts = w.domain.boundary_points(n_samples)
        hits: dict[int, list[int]] = {}
        for i, b in enumerate(pts):
            try:
                g = self.to_boundary(x0, b)
            except ResolutionError:
                continue
            for c in g.cubes:
                hits.setdefault(int(c), []).append(i)
        entries = {k: np.asarray(v, dtype=np.int64) for k, v in hits.items()}
        return ShadowTable((float(x0[0]), float(x0[1])), n_samples, pts, entries)

    def shadow_sum_check(self, table: ShadowTable) -> tuple[float, float, float]:
        """(sum of s(Q)^2, quadrature of k(x, x0)^2 over the domain, ratio)."""
        w = self.w
        lhs = math.fsum(s * s for s in table.s_values().values())
        src = w.find_cube(table.basepoint)
        dist, _ = self.run_dijkstra(src)
        khat = self.leg(table.basepoint, src) + dist
        ok = np.isfinite(khat)
        rhs = float(np.sum((khat[ok] ** 2) * (w.side[ok] ** 2)))
        ratio = lhs / rhs if rhs > 0 else math.inf
        return lhs, rhs, ratio


def solver_for(w: WhitneyDecomposition) -> GeodesicSolver:
    """Cached solver attached to the decomposition (the graph is immutable)."""
    solver = getattr(w, "_qh_solver", None)
    if solver is None:
        solver = GeodesicSolver(w)
        w._qh_solver = solver
    return solver


# --- module-level operation wrappers ------------------------------------------

def qh_distance(w: WhitneyDecomposition, a, b) -> float:
    return solver_for(w).distance(a, b)


def qh_geodesic(w: WhitneyDecomposition, a, b) -> Geodesic:
    return solver_for(w).geodesic(a, b)


def geodesic_to_boundary(w: WhitneyDecomposition, x0, b) -> Geodesic:
    return solver_for(w).to_boundary(x0, b)


def holder_fit(w: WhitneyDecomposition, x0, n_samples: int,
               alpha_floor: float = 1e-3, c_max: float = 1e3) -> FitReport:
    return solver_for(w).holder_fit(x0, n_samples, alpha_floor, c_max)


def geodesic_cube_sum(w: WhitneyDecomposition, chain: np.ndarray, beta: float,
                      x0=None) -> dict:
    """Sum of side^beta over the chain cubes against the basepoint scale.

    Reports the sum, the reference delta(x0)^beta and their ratio; the
    basepoint defaults to the first chain cube's center.
    """
    if beta <= 0:
        raise ValueError("beta must be positive")
    sides = w.side[np.asarray(chain, dtype=np.int64)]
    total = float(np.sum(sides ** beta))
    if x0 is None:
        delta0 = float(w.delta_center[chain[0]])
    else:
        delta0 = float(w.domain.boundary_distance(np.array([[x0[0], x0[1]]]))[0])
    ref = delta0 ** beta
    return {"sum": total, "reference": ref, "ratio": total / ref, "beta": beta,
            "cubes": int(len(sides))}


def shadows(w: WhitneyDecomposition, x0, n_samples: int) -> ShadowTable:
    return solver_for(w).shadows(x0, n_samples)


def shadow_sum_check(w: WhitneyDecomposition, table: ShadowTable):
    return solver_for(w).shadow_sum_check(table)


def polyline_csv(poly: np.ndarray) -> str:
    buf = io.StringIO()
    buf.write("x,y\n")
    for x, y in np.atleast_2d(poly):
        buf.write(f"{float(x)!r},{float(y)!r}\n")
    return buf.getvalue()
