"""
Unit tests for winding numbers, first and second Chern numbers.

The 4D tests use coarse grids; the full-size runs live in the
reproduction suite (src.verify).
"""
import math
import os
import sys
import unittest

import numpy as np

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.base import ProjectorFamily, UnitaryFamily
from src.core import (EMPTY, OCCUPIED, band_projector, circle, direct_sum,
                      point, product, sphere, suspension, torus)
from src.errors import GridTooCoarseError, InvalidGridError
from src.invariants import (berry_curvature_density, chern1_curvature,
                            chern1_link, chern1_link_frames, chern2,
                            chern2_dirac_analytic, odd_chern_density,
                            projector_frames, second_chern_density,
                            winding_number)
from src.ktheory import (reflect_coordinate, star_product,
                         star_product_projectors, suspend)
from src.models import (dirac5, dirac_monopole, massive_dirac, phase_winding,
                        winding_chain)
from src.utils import random_unitary
from src.verify import DECAY_RATIO


# -----------------------------
#  Winding number
# -----------------------------

class TestWinding(unittest.TestCase):

    def test_basic_windings(self):
        """e^{ik} → +1, constant → 0, e^{−2ik} → −2."""
        self.assertEqual(winding_number(phase_winding(1, circle(16))).value, 1)
        self.assertEqual(winding_number(phase_winding(0, circle(16))).value, 0)
        report = winding_number(phase_winding(-2, circle(16)))
        self.assertEqual(report.value, -2)
        self.assertLess(report.residual, 1e-12)
        self.assertAlmostEqual(report.extra["odd_chern"], 2.0, places=12)

    def test_matches_dense_oracle(self):
        """Coarse and dense sampling agree."""
        for w in (-3, 2, 5):
            self.assertEqual(winding_number(phase_winding(w, circle(24))).value,
                             winding_number(phase_winding(w, circle(1024))).value)

    def test_additive_under_direct_sum(self):
        """w(U₁ ⊕ U₂) = w(U₁) + w(U₂)."""
        total = direct_sum(phase_winding(2, circle(32)), phase_winding(-3, circle(32)))
        self.assertEqual(winding_number(total).value, -1)

    def test_too_coarse(self):
        """Phase steps near π are a loud error."""
        with self.assertRaises(GridTooCoarseError):
            winding_number(phase_winding(4, circle(8)))
        with self.assertRaises(GridTooCoarseError):
            winding_number(phase_winding(1, circle(6)))

    def test_requires_circle(self):
        """Winding needs one periodic axis."""
        grid = suspension(circle(8), 5)
        with self.assertRaises(InvalidGridError):
            winding_number(UnitaryFamily(grid, np.ones(grid.shape + (1, 1))))


class TestOddChernDensity(unittest.TestCase):

    def test_unit_winding(self):
        """e^{ik} has constant density −1/2π."""
        density = odd_chern_density(phase_winding(1, circle(64)))
        np.testing.assert_allclose(density, -1 / (2 * math.pi), atol=1e-12)

    def test_constant(self):
        """Constant U has zero density."""
        U = UnitaryFamily(circle(16), np.ones((16, 1, 1)))
        np.testing.assert_allclose(odd_chern_density(U), 0.0, atol=1e-15)

    def test_integral_is_minus_winding(self):
        """Riemann sum of e^{3ik} is −3 at n = 256."""
        density = odd_chern_density(phase_winding(3, circle(256)))
        self.assertAlmostEqual(float(np.sum(density)) * 2 * math.pi / 256, -3.0, delta=1e-6)


# -----------------------------
#  First Chern number
# -----------------------------

class TestChern1(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.monopole = dirac_monopole(suspension(circle(24), 24))
        cls.dirac = massive_dirac(1.0, torus(48, 48))

    def test_monopole_bands(self):
        """Empty band −1, occupied band +1."""
        self.assertEqual(chern1_link(band_projector(self.monopole, EMPTY)).value, -1)
        self.assertEqual(chern1_link(band_projector(self.monopole, OCCUPIED)).value, 1)

    def test_link_is_exact(self):
        """The link sum is an integer up to rounding."""
        report = chern1_link(band_projector(self.monopole, EMPTY))
        self.assertLess(report.residual, 1e-10)
        self.assertTrue(report.converged)

    def test_massive_dirac(self):
        """M = 1 → +1, M = 3 → 0, M = −1 → −1."""
        self.assertEqual(chern1_link(band_projector(self.dirac, OCCUPIED)).value, 1)
        for M, expected in ((3.0, 0), (-1.0, -1)):
            P = band_projector(massive_dirac(M, torus(48, 48)), OCCUPIED)
            self.assertEqual(chern1_link(P).value, expected)

    def test_constant_projector(self):
        """Constant projectors are trivial for both methods."""
        grid = torus(8, 8)
        P = ProjectorFamily(grid, np.broadcast_to(np.diag([1.0, 0.0]), grid.shape + (2, 2)))
        self.assertEqual(chern1_link(P).value, 0)
        self.assertLess(abs(chern1_curvature(P)), 1e-14)

    def test_grid_doubling(self):
        """Doubling each axis keeps the integer."""
        fine = dirac_monopole(suspension(circle(48), 48))
        self.assertEqual(chern1_link(band_projector(fine, EMPTY)).value, -1)

    def test_gauge_invariance(self):
        """Rotating frames by point-dependent unitaries leaves C₁ unchanged."""
        P = band_projector(massive_dirac(1.0, torus(16, 16)), OCCUPIED)
        frames = projector_frames(P)
        rng = np.random.default_rng(3)
        phases = np.exp(2j * math.pi * rng.random(P.grid.shape))[..., None, None]
        rotated = frames * phases
        self.assertEqual(chern1_link_frames(rotated, P.grid).value, chern1_link(P).value)

    def test_gauge_invariance_rank_two(self):
        """Random U(2) rotations of a rank-2 frame."""
        P = band_projector(direct_sum(self.dirac, massive_dirac(-1.0, torus(48, 48))), OCCUPIED)
        frames = projector_frames(P)
        rng = np.random.default_rng(5)
        rotations = np.stack([random_unitary(2, rng) for _ in range(P.grid.size)]).reshape(P.grid.shape + (2, 2))
        self.assertEqual(chern1_link_frames(frames @ rotations, P.grid).value, 0)

    def test_additivity(self):
        """C₁(P₁ ⊕ P₂) = C₁(P₁) + C₁(P₂)."""
        a = band_projector(self.monopole, EMPTY)
        b = band_projector(self.monopole, OCCUPIED)
        self.assertEqual(chern1_link(direct_sum(a, a)).value, -2)
        self.assertEqual(chern1_link(direct_sum(a, b)).value, 0)

    def test_reflection(self):
        """Reflecting either axis negates C₁."""
        for axis in (0, 1):
            P = band_projector(reflect_coordinate(self.dirac, axis), OCCUPIED)
            self.assertEqual(chern1_link(P).value, -1)

    def test_dimensional_reduction(self):
        """winding(e^{iwk}) = −C₁(empty band of the suspension)."""
        for w in range(-3, 4):
            F = suspend(winding_chain(w, circle(32)), 17)
            self.assertEqual(chern1_link(band_projector(F, EMPTY)).value, -w)

    def test_open_interval_rejected(self):
        """A suspension of a point is an interval, not a closed surface."""
        grid = product(circle(8), suspension(point(), 5))
        P = ProjectorFamily(grid, np.broadcast_to(np.eye(1), grid.shape + (1, 1)))
        with self.assertRaises(InvalidGridError):
            chern1_link(P)


class TestCurvature(unittest.TestCase):

    def test_density_integrates_to_link_value(self):
        """Massive Dirac at 96²: curvature within 1e-3 of the link integer."""
        P = band_projector(massive_dirac(1.0, torus(96, 96)), OCCUPIED)
        self.assertAlmostEqual(chern1_curvature(P), chern1_link(P).value, delta=1e-3)
        self.assertEqual(berry_curvature_density(P).shape, (96, 96))

    def test_monopole_convergence(self):
        """Monopole error is small at 96² and shrinks by the required doubling ratio."""
        errors = []
        for n in (48, 96):
            P = band_projector(dirac_monopole(suspension(circle(n), n)), EMPTY)
            errors.append(abs(chern1_curvature(P) + 1))
        self.assertLess(errors[1], 1e-3)
        self.assertGreaterEqual(errors[0] / errors[1], DECAY_RATIO)


# -----------------------------
#  Second Chern number
# -----------------------------

class TestChern2(unittest.TestCase):

    def test_constant_projector(self):
        """A constant projector has C₂ = 0."""
        s2 = suspension(circle(4), 4)
        grid = product(s2, s2)
        P = ProjectorFamily(grid, np.broadcast_to(np.diag([1.0, 0.0, 0.0]), grid.shape + (3, 3)))
        report = chern2(P, threads=1)
        self.assertLess(abs(report.raw), 1e-14)
        self.assertEqual(report.value, 0)

    def test_requires_4d(self):
        """chern2 needs four axes."""
        with self.assertRaises(InvalidGridError):
            chern2(band_projector(massive_dirac(1.0, torus(8, 8)), OCCUPIED))

    def test_sphere_chart_sign(self):
        """The empty band of Σ y^i γ_i on a coarse S⁴ chart is near −1; reflection flips it."""
        H = dirac5(sphere(4, 12, 12))
        raw = chern2(band_projector(H, EMPTY), threads=2).raw
        flipped = chern2(band_projector(reflect_coordinate(H, 0), EMPTY), threads=2).raw
        self.assertAlmostEqual(raw, -1.0, delta=0.2)
        self.assertAlmostEqual(flipped, -raw, delta=1e-10)

    def test_thread_count_does_not_change_result(self):
        """Slab partial sums are reduced in a fixed order."""
        s2 = suspension(circle(8), 8)
        P = band_projector(dirac5(product(s2, s2)), EMPTY)
        self.assertEqual(chern2(P, threads=1).raw, chern2(P, threads=3).raw)

    def test_density_shape(self):
        """The per-point density covers the whole grid."""
        s2 = suspension(circle(6), 6)
        P = band_projector(dirac5(product(s2, s2)), EMPTY)
        self.assertEqual(second_chern_density(P, threads=1).shape, P.grid.shape)


class TestStableEquivalence(unittest.TestCase):
    """Second Chern numbers over S² × S² on 12⁴ grids."""

    @classmethod
    def setUpClass(cls):
        cls.s2 = suspension(circle(12), 12)
        cls.monopole = dirac_monopole(cls.s2)

    def test_star_product_of_monopoles(self):
        """The empty band of the 12×12 star product carries C₂ = +2."""
        P = band_projector(star_product(self.monopole, self.monopole), EMPTY)
        self.assertEqual((P.dim, P.rank), (12, 6))
        report = chern2(P, threads=2)
        self.assertEqual(report.value, 2)
        self.assertAlmostEqual(report.raw, 2.0, delta=0.2)

    def test_projector_product_of_occupied_bands(self):
        """The product of the two occupied monopole bands carries C₂ = +1."""
        occupied = band_projector(self.monopole, OCCUPIED)
        P = star_product_projectors(occupied, occupied)
        self.assertEqual((P.dim, P.rank), (8, 3))
        report = chern2(P, threads=2)
        self.assertEqual(report.value, 1)
        self.assertAlmostEqual(report.raw, 1.0, delta=0.2)

    def test_dirac5_product_chart(self):
        """Over the degree-two S² × S² chart the empty band of Σ y^i γ_i has C₂ = +2."""
        report = chern2(band_projector(dirac5(product(self.s2, self.s2)), EMPTY), threads=2)
        self.assertEqual(report.value, 2)
        self.assertAlmostEqual(report.raw, 2.0, delta=0.2)


class TestAnalytic(unittest.TestCase):

    def test_sphere_chart(self):
        """Degree-one chart integrates to −1."""
        self.assertAlmostEqual(chern2_dirac_analytic(64, "sphere"), -1.0, delta=1e-3)

    def test_product_chart(self):
        """The S² × S² map has degree two."""
        self.assertAlmostEqual(chern2_dirac_analytic(64, "product"), 2.0, delta=1e-3)

    def test_too_few_nodes(self):
        """At least eight nodes."""
        with self.assertRaises(GridTooCoarseError):
            chern2_dirac_analytic(4)


if __name__ == "__main__":
    unittest.main()
