import math
from fractions import Fraction

import numpy as np
import pytest

from detourkit import certify as ct
from detourkit import qhyp
from detourkit.detour import FractalScene
from detourkit.domains import DiskDomain, PolygonDomain
from detourkit.errors import MissingFitError
from detourkit.fractals import carpet_levels, gasket_levels
from detourkit.geometry import Line
from detourkit.whitney import refine_for_qh, whitney_decompose


@pytest.fixture(scope="module")
def gasket8():
    return gasket_levels(8)


@pytest.fixture(scope="module")
def scene8(gasket8):
    return FractalScene(gasket8)


@pytest.fixture(scope="module")
def square_w():
    domain = PolygonDomain(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0],
                                     [0.0, 1.0]]), name="square")
    return whitney_decompose(domain, 6)


class TestMeasureZeroBound:
    def test_generic_line_passes(self, gasket8, scene8):
        rep = ct.measure_zero_bound(gasket8, Line.horizontal(0.27), 3,
                                    scene=scene8)
        assert rep.passed
        assert rep.value <= rep.bound + 1e-9
        # independent check of the sweep: the residual equals the line
        # measure inside the level-m solids
        from detourkit.detour import interval_cover

        direct = math.fsum(cv.interval.length
                           for cv in interval_cover(Line.horizontal(0.27),
                                                    gasket8, 3))
        assert rep.value == pytest.approx(direct, abs=1e-9)

    def test_missing_line_zero_zero(self, gasket8, scene8):
        rep = ct.measure_zero_bound(gasket8, Line.horizontal(-0.2), 3,
                                    scene=scene8)
        assert rep.value == 0.0
        assert rep.bound == 0.0
        assert rep.passed

    def test_exceptional_rejected(self, gasket8, scene8):
        from detourkit.errors import ExceptionalLineError

        with pytest.raises(ExceptionalLineError):
            ct.measure_zero_bound(gasket8, Line.horizontal(0.0), 3, scene=scene8)


class TestIntegratedMeasureBound:
    def test_gasket_exact_all_levels(self, gasket8):
        for m in range(0, 8):
            rep = ct.integrated_measure_bound(gasket8, "horizontal", m)
            assert rep.exact == 3 * Fraction(3, 4) ** m

    def test_gasket_m4_value(self, gasket8):
        rep = ct.integrated_measure_bound(gasket8, "horizontal", 4)
        assert rep.exact == Fraction(243, 256)
        assert rep.bound == pytest.approx(0.94921875)

    def test_gasket_m0_full_series(self, gasket8):
        rep = ct.integrated_measure_bound(gasket8, "horizontal", 0)
        assert rep.exact == 3  # the diameter-square series sums to 1

    def test_carpet_closed_form(self):
        carpet = carpet_levels(6)
        rep = ct.integrated_measure_bound(carpet, "horizontal", 2)
        assert rep.exact == 6 * Fraction(8, 9) ** 2


class TestAdjacentCubeEstimate:
    def test_constant_function(self, square_w):
        edges, _ = square_w.adjacency_edges()
        q1, q2 = map(int, edges[0])
        lhs, rhs = ct.adjacent_cube_estimate(square_w, ct.function_of("const"),
                                             q1, q2)
        assert lhs == 0.0
        assert rhs == 0.0

    def test_linear_function_exact(self, square_w):
        # two equal-size neighbors stacked in x: means of x differ by the
        # side h, and the bound is 4 (h + h) = 8h
        edges, _ = square_w.adjacency_edges()
        fn = ct.function_of("x")
        for a, b in edges:
            if square_w.levels[a] == square_w.levels[b] \
                    and square_w.iy[a] == square_w.iy[b]:
                h = square_w.side[a]
                lhs, rhs = ct.adjacent_cube_estimate(square_w, fn, int(a), int(b))
                assert lhs == pytest.approx(h, abs=1e-12)
                assert rhs == pytest.approx(8 * h, abs=1e-12)
                return
        pytest.fail("no equal-size x-stacked pair found")

    def test_smooth_function_500_pairs(self):
        w = whitney_decompose(DiskDomain(), 8)
        edges, _ = w.adjacency_edges()
        fn = ct.function_of("sinsin")
        rng = np.random.default_rng(2)
        take = rng.choice(len(edges), size=500, replace=False)
        for a, b in edges[take]:
            lhs, rhs = ct.adjacent_cube_estimate(w, fn, int(a), int(b))
            assert lhs <= rhs + 1e-12

    def test_non_adjacent_rejected(self, square_w):
        edges, _ = square_w.adjacency_edges()
        present = {(int(a), int(b)) for a, b in edges}
        q1, q2 = 0, len(square_w) - 1
        if (q1, q2) not in present:
            with pytest.raises(ValueError):
                ct.adjacent_cube_estimate(square_w, ct.function_of("x"), q1, q2)


@pytest.fixture(scope="module")
def disk_fit():
    w = refine_for_qh(whitney_decompose(DiskDomain(), 8))
    s = qhyp.solver_for(w)
    return s.holder_fit(s.default_basepoint(), 32)


class TestOscillationBound:
    def test_requires_fit(self):
        with pytest.raises(MissingFitError):
            ct.oscillation_bound(DiskDomain(), None, ct.function_of("x"))

    def test_constant_zero(self, disk_fit):
        rep = ct.oscillation_bound(DiskDomain(), disk_fit, ct.function_of("const"),
                                   p=3.0)
        assert rep.value == 0.0
        assert rep.passed

    def test_linear_on_disk(self, disk_fit):
        # antipodal boundary pair realizes |f(x) - f(y)| = 2; the mean of
        # |grad f|^p is exactly 1, so the bound core is the diameter 2
        rep = ct.oscillation_bound(DiskDomain(), disk_fit, ct.function_of("x"),
                                   n_boundary=32, p=3.0)
        assert rep.value == pytest.approx(2.0, abs=1e-9)
        assert rep.resolution["bound_core"] == pytest.approx(2.0, abs=1e-9)
        assert rep.resolution["constant"] == pytest.approx(1.0, abs=1e-9)

    def test_gasket_hole_triangle(self, gasket8, scene8):
        hole = scene8.component(2)  # a level-2 hole triangle
        domain = PolygonDomain(hole.shape.vertices, name="hole")
        w = refine_for_qh(whitney_decompose(domain, 9))
        s = qhyp.solver_for(w)
        fit = s.holder_fit(s.default_basepoint(), 32)
        fn = ct.function_of("x2+y")
        rep = ct.oscillation_bound(domain, fit, fn, n_boundary=256, p=3.0,
                                   c_rep_limit=10.0)
        assert rep.passed
        assert rep.resolution["constant"] <= 10.0


@pytest.fixture(scope="module")
def shadow_setup():
    w = refine_for_qh(whitney_decompose(DiskDomain(), 9))
    s = qhyp.solver_for(w)
    table = s.shadows(s.default_basepoint(), 128)
    return w, s, table


class TestBoundaryImageTail:
    def test_empty_below_min_side(self, shadow_setup):
        w, _, table = shadow_setup
        assert ct.boundary_image_tail(w, table, 3.0, float(w.side.min()) / 4) == 0.0

    def test_strictly_decreasing_in_eps(self, shadow_setup):
        w, _, table = shadow_setup
        vals = [ct.boundary_image_tail(w, table, 3.0, 2.0 ** -k)
                for k in range(4, 9)]
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_p2_reduces_to_shadow_squares(self, shadow_setup):
        w, _, table = shadow_setup
        eps = 2.0 ** -6
        lhs = ct.boundary_image_tail(w, table, 2.0, eps)
        direct = math.fsum(s * s for cid, s in table.s_values().items()
                           if w.side[cid] <= eps)
        assert lhs == pytest.approx(direct, rel=1e-12)


class TestRemovability:
    def test_constant_zero(self, gasket8, scene8):
        rep = ct.removability_certificate(gasket8, ct.function_of("const"),
                                          3.0, 4, scene=scene8, grid=64)
        assert rep.value == 0.0
        assert rep.passed

    def test_width_series_exact(self, gasket8, scene8):
        # f = x: the image diameter of a hole is its horizontal width, so
        # the level-j term is 3^(j-1) 4^-j and partial sums are exact
        fn = ct.function_of("x")
        for m in (3, 6):
            rep = ct.removability_certificate(gasket8, fn, 3.0, m,
                                              scene=scene8, grid=32)
            expect = float(1 - Fraction(3, 4) ** m)
            assert rep.value == pytest.approx(expect, abs=1e-12)

    def test_empirical_constant_stability(self, gasket8, scene8):
        fn = ct.function_of("x2+y")
        consts = []
        for m in (3, 4, 5, 6):
            rep = ct.removability_certificate(gasket8, fn, 3.0, m,
                                              scene=scene8, grid=64)
            assert math.isfinite(rep.value) and math.isfinite(rep.bound)
            consts.append(rep.resolution["constant"])
        assert max(consts) <= 2.0 * min(consts)

    def test_sample_doubling_reported(self, gasket8, scene8):
        rep = ct.removability_certificate(gasket8, ct.function_of("x2+y"),
                                          3.0, 3, scene=scene8, grid=32)
        assert "sample_doubling_delta" in rep.resolution


class TestCarpetCounterexample:
    def test_image_measure_converges_from_above(self):
        rep = ct.carpet_counterexample(2.0, 8, 0.5, quad_nodes=8)
        assert rep.image_measure >= 0.9
        # endpoint floats sit on Cantor points where the staircase is only
        # Holder continuous, so the bookkeeping matches the closed form to
        # a few 1e-9
        assert rep.image_measure == pytest.approx(1.0 + (2.0 / 3.0) ** 8,
                                                  abs=1e-6)
        assert all(b < a for a, b in zip(rep.image_series, rep.image_series[1:]))

    def test_energy_monotone_and_finite(self):
        rep = ct.carpet_counterexample(4.0, 6, 0.5, quad_nodes=8)
        assert all(math.isfinite(e) for e in rep.energies)
        assert all(b > a for a, b in zip(rep.energies, rep.energies[1:]))

    def test_energy_m8_close_to_m6(self):
        r8 = ct.carpet_counterexample(4.0, 8, 0.5, quad_nodes=8)
        assert abs(r8.energies[7] - r8.energies[5]) <= 0.05 * r8.energies[7]

    def test_plateau_requirement(self):
        with pytest.raises(ValueError):
            ct.carpet_counterexample(2.0, 4, 0.05)

    def test_exponent_range(self):
        with pytest.raises(ValueError):
            ct.carpet_counterexample(10.0, 4, 0.5)

    def test_psi_matches_support_conditions(self):
        ys = np.linspace(-0.5, 1.5, 2001)
        vals = ct.psi(ys)
        assert np.all(vals[(ys <= 0) | (ys >= 1)] == 0.0)
        plateau = (ys >= 1.0 / 9.0) & (ys <= 8.0 / 9.0)
        assert np.all(vals[plateau] == 1.0)
        assert np.all((vals >= 0.0) & (vals <= 1.0))

    def test_carpet_function_gradient_consistent(self):
        fn = ct.carpet_function()
        rng = np.random.default_rng(4)
        # points inside carpet holes, where the analytic gradient is valid
        pts = []
        holes = carpet_levels(3).hole_components(3)
        for comp in holes[:10]:
            v = comp.shape.vertices
            c = v.mean(axis=0)
            pts.append(c)
        pts = np.asarray(pts)
        assert fn.check_gradient(pts, h=1e-6) <= 1e-4

    def test_gasket_contrast_tail(self, gasket8):
        fn = ct.function_of("x2+y")
        series = ct.image_tail_contrast(gasket8, fn, Line.horizontal(0.3), 8)
        assert all(b <= a + 1e-12 for a, b in zip(series, series[1:]))
        assert series[-1] < 0.25 * series[0]


class TestFunctionSamples:
    def test_gradient_consistency_smooth(self):
        fn = ct.function_of("sinsin")
        rng = np.random.default_rng(8)
        pts = rng.uniform(-1, 1, size=(64, 2))
        assert fn.check_gradient(pts, h=1e-5) <= 1e-7

    def test_fd_fallback(self):
        fn = ct.PiecewiseFunctionSample(lambda q: q[:, 0] ** 2, None, p=3.0)
        g = fn.grad(np.array([[1.0, 0.0]]))
        assert g[0, 0] == pytest.approx(2.0, abs=1e-6)
        assert g[0, 1] == pytest.approx(0.0, abs=1e-9)

    def test_unknown_function_rejected(self):
        with pytest.raises(ValueError):
            ct.function_of("bogus")
