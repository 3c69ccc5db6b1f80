import math

import numpy as np
import pytest

from detourkit.domains import DiskDomain, PolygonDomain
from detourkit.errors import ResourceLimitError, UncoveredPointError
from detourkit.whitney import (CORNER_UPPER, WhitneyDecomposition, _pack,
                               refine_for_qh, whitney_decompose)

SQRT2 = math.sqrt(2.0)


def unit_square_domain():
    return PolygonDomain(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0],
                                   [0.0, 1.0]]), name="square")


@pytest.fixture(scope="module")
def disk10():
    return whitney_decompose(DiskDomain(), 10)


class TestSelection:
    def test_disk_low_cutoff_undercovers(self):
        w = whitney_decompose(DiskDomain(), 8)
        covered = math.pi - w.uncovered_area
        assert covered < 0.999 * math.pi

    def test_disk_cutoff_12_covers(self):
        w = whitney_decompose(DiskDomain(), 12)
        covered = math.pi - w.uncovered_area
        assert covered >= 0.995 * math.pi

    def test_square_largest_cube(self):
        w = whitney_decompose(unit_square_domain(), 6)
        assert w.side.max() == pytest.approx(1.0 / 8.0)

    def test_stein_rule_bounds(self, disk10):
        diam = disk10.side * SQRT2
        assert np.all(disk10.dist >= diam - 1e-12)
        assert np.all(disk10.dist <= 4.0 * diam * (1 + 1e-9))

    def test_corner_distance_comparability(self, disk10):
        corners = disk10.corner_deltas()
        lo = corners.min(axis=1)
        hi = corners.max(axis=1)
        assert np.all(lo >= disk10.side * (1.0 - 1e-12))
        assert np.all(hi <= CORNER_UPPER * disk10.side * (1 + 1e-9))

    def test_cutoff_guard(self):
        with pytest.raises(ResourceLimitError):
            whitney_decompose(DiskDomain(), 30)

    def test_empty_domain_warns(self):
        tiny = DiskDomain(radius=1e-9)
        with pytest.warns(UserWarning):
            w = whitney_decompose(tiny, 4)
        assert len(w) == 0

    def test_inconsistent_oracle_rejected(self):
        from detourkit.errors import OracleError

        class BrokenDisk(DiskDomain):
            def boundary_distance(self, pts):
                # claims boundary contact everywhere while contains() says
                # the points are inside
                return np.zeros(len(np.atleast_2d(pts)))

        with pytest.raises(OracleError):
            whitney_decompose(BrokenDisk(), 5)


class TestDisjointnessAndCoverage:
    def test_interiors_disjoint_exhaustive(self, disk10):
        # dyadic interiors intersect only through ancestor containment:
        # no accepted cube may have an accepted ancestor
        keys = set(disk10.keys.tolist())
        for lv, ix, iy in zip(disk10.levels, disk10.ix, disk10.iy):
            for k in range(1, int(lv - disk10.levels.min()) + 1):
                anc = _pack(np.array([lv - k]), np.array([ix >> k]),
                            np.array([iy >> k]))[0]
                assert anc not in keys

    def test_coverage_monotone_in_cutoff(self):
        uncovered = []
        for cutoff in (7, 8, 9):
            w = whitney_decompose(DiskDomain(), cutoff)
            uncovered.append(w.uncovered_area)
        assert uncovered[0] > uncovered[1] > uncovered[2]

    def test_uncovered_scales_with_cutoff(self):
        # uncovered area is at most a constant times 2^-cutoff times the
        # boundary length scale
        for cutoff in (8, 10):
            w = whitney_decompose(DiskDomain(), cutoff)
            assert w.uncovered_area <= 64.0 * 2.0 ** (-cutoff) * 2 * math.pi


class TestAdjacency:
    def test_neighbor_ratios(self, disk10):
        edges, _ = disk10.adjacency_edges()
        ratio = 2.0 ** np.abs(disk10.levels[edges[:, 0]].astype(float)
                              - disk10.levels[edges[:, 1]].astype(float))
        assert set(np.unique(ratio)) <= {1.0, 2.0, 4.0}

    def test_edge_weight_formula(self, disk10):
        edges, wts = disk10.adjacency_edges()
        a, b = edges[0]
        d = np.hypot(*(disk10.centers[a] - disk10.centers[b]))
        expect = d * 2.0 / (disk10.delta_center[a] + disk10.delta_center[b])
        assert wts[0] == expect

    def test_handmade_configurations(self):
        # full-edge share adjacent; corner-only contact excluded; ratio-4
        # face-contained pair adjacent
        domain = DiskDomain(radius=8.0)
        levels = np.array([3, 3, 3, 5])
        ix = np.array([0, 1, 1, 8])
        iy = np.array([0, 0, 1, 4])
        # cubes: A=[0,1/8]^2 and B=[1/8,2/8]x[0,1/8] share a full edge;
        # C=[1/8,2/8]x[1/8,2/8] touches A only at the corner (1/8,1/8);
        # D=[8/32,9/32]x[4/32,5/32] has its left face inside C's right face
        # (side ratio 4) and meets B only at the corner (1/4,1/8)
        dist = domain.cube_boundary_distance(
            (ix + 0.5) * 2.0 ** -levels.astype(float),
            (iy + 0.5) * 2.0 ** -levels.astype(float),
            2.0 ** -levels.astype(float) / 2)
        w = WhitneyDecomposition(domain, 5, levels, ix, iy, dist)
        edges, _ = w.adjacency_edges()
        pairs = {tuple(sorted([(w.cube(a).level, w.cube(a).ix, w.cube(a).iy),
                               (w.cube(b).level, w.cube(b).ix, w.cube(b).iy)]))
                 for a, b in edges}
        assert ((3, 0, 0), (3, 1, 0)) in pairs          # full edge
        assert ((3, 1, 0), (3, 1, 1)) in pairs          # full edge
        assert ((3, 0, 0), (3, 1, 1)) not in pairs      # corner only
        assert ((3, 1, 1), (5, 8, 4)) in pairs          # ratio-4 face containment
        assert ((3, 1, 0), (5, 8, 4)) not in pairs      # corner only

    def test_connectivity_below_cutoff(self, disk10):
        edges, _ = disk10.adjacency_edges()
        keep = disk10.levels <= disk10.min_level_cutoff - 2
        idx = np.flatnonzero(keep)
        remap = -np.ones(len(disk10), dtype=np.int64)
        remap[idx] = np.arange(len(idx))
        sub = [(remap[a], remap[b]) for a, b in edges
               if keep[a] and keep[b]]
        parent = list(range(len(idx)))

        def find(i):
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for a, b in sub:
            ra, rb = find(int(a)), find(int(b))
            if ra != rb:
                parent[ra] = rb
        roots = {find(i) for i in range(len(idx))}
        assert len(roots) == 1


class TestRefine:
    def test_far_cubes_unsplit(self, disk10):
        refined = refine_for_qh(disk10)
        far = disk10.dist >= 3.0 * disk10.side * SQRT2
        keys = set(refined.keys.tolist())
        original = _pack(disk10.levels[far], disk10.ix[far], disk10.iy[far])
        assert all(k in keys for k in original.tolist())

    def test_single_split_replaces_parent(self):
        w = whitney_decompose(DiskDomain(), 7)
        refined = refine_for_qh(w)
        need = w.side * SQRT2 / w.dist > 1.0 / 3.0
        assert np.any(need)
        keys = set(refined.keys.tolist())
        parents = _pack(w.levels[need], w.ix[need], w.iy[need])
        assert not any(k in keys for k in parents.tolist())
        # the four children of the first split cube are all present unless
        # they themselves split again
        i = int(np.flatnonzero(need)[0])
        child_keys = _pack(
            np.full(4, w.levels[i] + 1),
            np.array([2 * w.ix[i], 2 * w.ix[i] + 1, 2 * w.ix[i], 2 * w.ix[i] + 1]),
            np.array([2 * w.iy[i], 2 * w.iy[i], 2 * w.iy[i] + 1, 2 * w.iy[i] + 1]))
        grandchildren = refined.levels.max() >= w.levels[i] + 2
        present = sum(k in keys for k in child_keys.tolist())
        assert present == 4 or grandchildren

    def test_qh_bound_holds(self, disk10):
        refined = refine_for_qh(disk10)
        assert float((refined.side * SQRT2 / refined.dist).max()) <= 1.0 / 3.0

    def test_neighbor_ratio_preserved(self, disk10):
        refined = refine_for_qh(disk10)
        edges, _ = refined.adjacency_edges()
        diff = np.abs(refined.levels[edges[:, 0]] - refined.levels[edges[:, 1]])
        assert diff.max() <= 2

    def test_tighter_bound_allowed(self, disk10):
        refined = refine_for_qh(disk10, 1.0 / 5.0)
        assert float((refined.side * SQRT2 / refined.dist).max()) <= 1.0 / 5.0
        with pytest.raises(ValueError):
            refine_for_qh(disk10, 0.5)


class TestPointLocation:
    def test_center_found(self, disk10):
        i = disk10.find_cube((0.33, 0.21))
        cube = disk10.cube(i)
        x0, y0, x1, y1 = cube.bounds
        assert x0 <= 0.33 <= x1 and y0 <= 0.21 <= y1

    def test_origin_on_corner(self, disk10):
        cubes = disk10.find_cubes((0.0, 0.0))
        assert len(cubes) == 4

    def test_uncovered_raises_with_nearest(self, disk10):
        with pytest.raises(UncoveredPointError) as err:
            disk10.find_cube((0.9999999, 0.0))
        assert "nearest cube" in str(err.value)


class TestSerialization:
    def test_cubes_csv_columns(self):
        w = whitney_decompose(unit_square_domain(), 5)
        header, first = w.cubes_csv().splitlines()[:2]
        assert header == "level,ix,iy,side,dist_lo,dist_hi"
        parts = first.split(",")
        assert len(parts) == 6
        lo, hi = float(parts[4]), float(parts[5])
        assert lo <= hi + 1e-15

    def test_edges_csv_columns(self):
        w = whitney_decompose(unit_square_domain(), 5)
        lines = w.edges_csv().splitlines()
        assert lines[0] == "id1,id2,weight"
        a, b, wt = lines[1].split(",")
        assert int(a) != int(b)
        assert float(wt) > 0
