"""
Unit tests for the analytic model generators in src.models.
"""
import itertools
import os
import sys
import unittest

import numpy as np

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.core import (EMPTY, band_projector, circle, constant_family, point,
                      product, sphere, spectral_flatten, suspension, torus)
from src.errors import InvalidGridError, NotFlatError, ParameterError
from src.invariants import chern1_link
from src.models import (SIGMA_X, SIGMA_Z, ModelSpec, build_model, dirac5,
                        dirac_monopole, gamma_matrices,
                        generalized_dirac_monopole, massive_dirac,
                        phase_winding, s4_chart, sphere_chart, ssh,
                        winding_chain)


class TestSSH(unittest.TestCase):

    def test_flat_point(self):
        """(v, w) = (0, 1) is already the flattened chain with blocks e^{∓ik}."""
        grid = circle(16)
        H = ssh(0.0, 1.0, grid)
        k = grid.coordinates(0)
        np.testing.assert_allclose(H.values[:, 1, 0], np.exp(1j * k), atol=1e-15)
        np.testing.assert_allclose(H.values[:, 0, 1], np.exp(-1j * k), atol=1e-15)
        np.testing.assert_allclose(spectral_flatten(H).values, H.values, atol=1e-12)

    def test_trivial_point(self):
        """(v, w) = (1, 0) is the constant σ₁."""
        H = ssh(1.0, 0.0, circle(8))
        np.testing.assert_array_equal(H.values, np.broadcast_to(SIGMA_X, (8, 2, 2)))

    def test_chiral_declaration(self):
        """SSH anticommutes with Γ = σ₃."""
        H = ssh(0.4, 1.1, circle(12))
        np.testing.assert_array_equal(H.chiral, SIGMA_Z)

    def test_winding_chain_matches_ssh(self):
        """The w = 1 chain is the flat SSH chain."""
        np.testing.assert_allclose(winding_chain(1, circle(16)).values, ssh(0, 1, circle(16)).values, atol=1e-15)

    def test_phase_winding_is_unitary_scalar(self):
        """e^{iwk} as a 1×1 family."""
        U = phase_winding(-2, circle(10))
        self.assertEqual(U.dim, 1)
        np.testing.assert_allclose(np.abs(U.values), 1.0)

    def test_wrong_grid(self):
        """SSH lives on a circle."""
        with self.assertRaises(InvalidGridError):
            ssh(0, 1, torus(4, 4))


class TestMonopole(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.grid = suspension(circle(16), 17)
        cls.H = dirac_monopole(cls.grid)

    def test_north_pole(self):
        """t = 0 gives σ₃ at every k."""
        np.testing.assert_array_equal(self.H.values[:, 0], np.broadcast_to(SIGMA_Z, (16, 2, 2)))

    def test_equator(self):
        """t = 1/2, k = 0 gives σ₁."""
        np.testing.assert_allclose(self.H.values[0, 8], SIGMA_X, atol=1e-15)

    def test_flat(self):
        """H² = I pointwise."""
        self.assertLess(self.H.flatness(), 1e-12)

    def test_chart_is_unit_sphere(self):
        """The suspension chart lands on S² and tangents are orthogonal to x."""
        x, tangents = sphere_chart(self.grid)
        np.testing.assert_allclose(np.linalg.norm(x, axis=-1), 1.0, atol=1e-14)
        for d in tangents:
            np.testing.assert_allclose(np.sum(x * d, axis=-1), 0.0, atol=1e-13)


class TestMassiveDirac(unittest.TestCase):

    def test_gapless_at_m_two(self):
        """M = 2 closes the gap at k = (0, 0)."""
        H = massive_dirac(2.0, torus(8, 8))
        np.testing.assert_allclose(H.values[0, 0], np.zeros((2, 2)), atol=1e-15)

    def test_hermitian_without_chirality(self):
        """No chiral declaration."""
        self.assertIsNone(massive_dirac(1.0, torus(6, 6)).chiral)


class TestGammaMatrices(unittest.TestCase):

    def test_clifford_relations(self):
        """γ_iγ_j + γ_jγ_i = 2δ_ij I₄."""
        gammas = gamma_matrices()
        for i, j in itertools.product(range(5), repeat=2):
            anti = gammas[i] @ gammas[j] + gammas[j] @ gammas[i]
            np.testing.assert_array_equal(anti, 2 * np.eye(4) * (i == j))

    def test_gamma5_is_product(self):
        """γ₅ = −γ₁γ₂γ₃γ₄."""
        g1, g2, g3, g4, g5 = gamma_matrices()
        np.testing.assert_array_equal(g5, -g1 @ g2 @ g3 @ g4)


class TestDirac5(unittest.TestCase):

    def test_both_charts_on_unit_sphere(self):
        """Product and iterated-suspension charts both land on S⁴."""
        for grid in (product(suspension(circle(6), 5), suspension(circle(6), 5)), sphere(4, 6, 5)):
            y, tangents = s4_chart(grid)
            self.assertEqual(y.shape, grid.shape + (5,))
            self.assertEqual(len(tangents), 4)
            np.testing.assert_allclose(np.linalg.norm(y, axis=-1), 1.0, atol=1e-14)

    def test_flat(self):
        """H(y)² = I."""
        H = dirac5(sphere(4, 6, 5))
        self.assertLess(H.flatness(), 1e-12)

    def test_rejects_non_sphere(self):
        """A torus is not an S⁴ chart."""
        with self.assertRaises(InvalidGridError):
            dirac5(torus(4, 4, 4, 4))


class TestGeneralizedMonopole(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.s2 = suspension(circle(12), 13)

    def test_reduces_to_monopole(self):
        """h = (1) over a point gives the Dirac monopole."""
        H = generalized_dirac_monopole(constant_family([[1.0]], point()), self.s2)
        np.testing.assert_allclose(H.values, dirac_monopole(self.s2).values, atol=1e-12)

    def test_negative_h_flips_charge(self):
        """h = (−1) reverses the empty-band Chern number to +1."""
        H = generalized_dirac_monopole(constant_family([[-1.0]], point()), self.s2)
        self.assertEqual(chern1_link(band_projector(H, EMPTY)).value, 1)

    def test_monopole_input_is_dirac5(self):
        """h = monopole over S² reproduces Σ y^i γ_i on the product chart."""
        H = generalized_dirac_monopole(dirac_monopole(self.s2), self.s2)
        np.testing.assert_allclose(H.values, dirac5(product(self.s2, self.s2)).values, atol=1e-12)

    def test_north_pole_constant(self):
        """At t = 0 the value is σ₃ ⊗ I everywhere."""
        H = generalized_dirac_monopole(dirac_monopole(self.s2), self.s2)
        np.testing.assert_allclose(H.values[:, 0], np.broadcast_to(np.kron(SIGMA_Z, np.eye(2)), H.values[:, 0].shape),
                                   atol=1e-15)

    def test_rejects_non_flat(self):
        """h must square to the identity."""
        with self.assertRaises(NotFlatError):
            generalized_dirac_monopole(constant_family([[2.0]], point()), self.s2)


class TestRegistry(unittest.TestCase):

    def test_build_model(self):
        """Named models get their canonical grids."""
        H = build_model(ModelSpec("monopole"), n=8, n_t=9)
        self.assertEqual(H.grid.shape, (8, 9))
        self.assertEqual(build_model(ModelSpec("massive-dirac", {"M": 1.0}), n=6).grid.shape, (6, 6))

    def test_unknown_model(self):
        """Unknown names are rejected."""
        with self.assertRaises(ParameterError):
            build_model(ModelSpec("haldane"))

    def test_non_finite_parameter(self):
        """Parameters must be finite."""
        with self.assertRaises(ParameterError):
            ModelSpec("ssh", {"v": float("nan")})

    def test_fractional_winding(self):
        """Windings must be integers; 1.5 is not silently truncated."""
        with self.assertRaises(ParameterError):
            build_model(ModelSpec("winding-chain", {"w": 1.5}))
        with self.assertRaises(ParameterError):
            phase_winding(0.5, circle(8))
        self.assertEqual(build_model(ModelSpec("phase-winding", {"w": 2.0})).values.shape, (16, 1, 1))


if __name__ == "__main__":
    unittest.main()
