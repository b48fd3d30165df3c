import unittest

import numpy as np

from delaunaylab.spectral.delaunay import solve_orbit, equilibrium_ubar
from delaunaylab.spectral.floquet import harmonic_multiplicity, sphere_mode, \
    sl_form, monodromy, bloch_phase, band_structure, cylinder_band_edge, \
    check_zero_not_in_spec, conjugation_identity, conjugation_term, \
    conjugation_closed_form, discriminant, spectrum_lower_bound
from delaunaylab.spectral.jacobi import mode_operator_residual, mode_lambda
from delaunaylab.spectral.exceptions import ParameterRangeError, \
    SpectralResolutionError


class TestFloquet(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.orbit = solve_orbit(4, 0.4)
        cls.cylinder = solve_orbit(4, equilibrium_ubar(4))

    def test_harmonic_multiplicity(self):
        for j in range(5):
            self.assertEqual(harmonic_multiplicity(3, j), 2 * j + 1)
            self.assertEqual(harmonic_multiplicity(4, j), (j + 1) ** 2)
        self.assertEqual(sphere_mode(5, 2).lam, -10.)
        with self.assertRaises(ParameterRangeError):
            sphere_mode(4, -1)

    def test_monodromy_mode0(self):
        """phi1 is periodic, so the mode-0 period map at sigma = 0 is a
        Jordan block with trace 2."""
        result = monodromy(sl_form(self.orbit, sphere_mode(4, 0)), 0.)
        self.assertAlmostEqual(result.discriminant, 2., delta=1e-7)
        self.assertAlmostEqual(result.determinant, 1., delta=1e-9)
        self.assertTrue(result.defective)

    def test_zero_in_gap_of_higher_modes(self):
        for j in (1, 2, 3):
            check = check_zero_not_in_spec(self.orbit, j)
            self.assertTrue(check.in_gap, msg=f"mode {j}")
        result = monodromy(sl_form(self.orbit, sphere_mode(4, 2)), 0.)
        self.assertIsNone(bloch_phase(result, self.orbit.T))

    def test_cylinder_band_edges(self):
        for j in (0, 1):
            edge = cylinder_band_edge(4, j)
            structure = band_structure(sl_form(self.cylinder, sphere_mode(4, j)),
                                       (edge - 0.5, edge + 0.5), 200)
            self.assertAlmostEqual(structure.lowest_edge, edge, delta=1e-6)
            self.assertEqual(structure.gaps[0], (edge - 0.5, structure.lowest_edge))
        self.assertEqual(cylinder_band_edge(4, 0), -4.)
        self.assertEqual(cylinder_band_edge(4, 1), 2.)

    def test_gap_opens_near_cylinder(self):
        """Away from the cylinder a gap of -L0 opens around -3n/4."""
        orbit = solve_orbit(4, 0.98 * equilibrium_ubar(4))
        structure = band_structure(sl_form(orbit, sphere_mode(4, 0)), (-3.5, -2.5), 200)
        gap = structure.gap_containing(-3.)
        self.assertIsNotNone(gap)
        self.assertLess(gap[0], -3.)
        self.assertGreater(gap[1], -3.)
        values = discriminant(sl_form(orbit, sphere_mode(4, 0)), [-3.])
        self.assertGreater(abs(values[0]), 2.)

    def test_sturm_liouville_form(self):
        """W^{-1} [(P psi')' + Q psi] is the mode operator applied directly."""
        orbit = solve_orbit(4, 0.5)
        sl = sl_form(orbit, sphere_mode(4, 1))
        t = np.linspace(0., orbit.T, 50)
        k = 2. * np.pi / orbit.T
        psi, dpsi, d2psi = np.sin(k * t), k * np.cos(k * t), -k ** 2 * np.sin(k * t)
        direct = mode_operator_residual(orbit, mode_lambda(4, 1), t, psi, dpsi, d2psi)
        self.assertLess(np.max(np.abs(sl.apply(t, psi, dpsi, d2psi) - direct)), 1e-9)

    def test_spectrum_bounded_below(self):
        for eps in (0.2, 0.5):
            bound = spectrum_lower_bound(solve_orbit(4, eps), j_max=1)
            self.assertTrue(np.isfinite(bound))
            self.assertGreaterEqual(bound, -4. - 1e-8)

    def test_translation_margin_grows_as_eps_shrinks(self):
        """Mode-1 multipliers are e^{+-T}, so |Delta(0)| - 2 = 2 cosh T - 2
        grows with the period as eps decreases."""
        ubar = equilibrium_ubar(4)
        orbits = [solve_orbit(4, f * ubar) for f in (0.9, 0.5, 0.2, 0.05)]
        margins = [check_zero_not_in_spec(orbit, 1).margin for orbit in orbits]
        self.assertGreater(margins[0], 0.)
        self.assertTrue(np.all(np.diff(margins) > 0.), msg=str(margins))
        np.testing.assert_allclose(margins, [2. * np.cosh(o.T) - 2. for o in orbits],
                                   rtol=1e-4)

    def test_band_scan_arguments(self):
        sl = sl_form(self.orbit, sphere_mode(4, 0))
        with self.assertRaises(ParameterRangeError):
            band_structure(sl, (1., 0.))
        with self.assertRaises(SpectralResolutionError):
            band_structure(sl, (0., 1.), resolution=4)

    def test_conjugation_identity(self):
        for n, eps in ((3, 0.1), (4, 0.4), (6, 0.6)):
            residual = conjugation_identity(solve_orbit(n, eps))
            self.assertLess(residual.rel_error, 1e-9)
            self.assertGreaterEqual(residual.abs_error, residual.rel_error)
        self.assertLess(conjugation_identity(solve_orbit(4, 0.5)).abs_error, 1e-9)
        t = np.linspace(0., self.orbit.T, 7)
        np.testing.assert_allclose(conjugation_term(self.orbit, t),
                                   conjugation_closed_form(self.orbit, t), rtol=1e-8)
        # H < 0 makes the conjugated mode-1 potential strictly negative.
        self.assertTrue(np.all(conjugation_closed_form(self.orbit, t) < 0.))


if __name__ == '__main__':
    unittest.main()
