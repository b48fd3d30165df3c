import unittest

import numpy as np

from delaunaylab.spectral.delaunay import solve_orbit, equilibrium_ubar, \
    period_T_derivative
from delaunaylab.spectral.jacobi import phi1, phi2, phi3, phi4, default_window, \
    wronskian_pairing, relative_spread, phi2_difference_quotient, \
    period_derivative_from_sensitivity, DeficiencyCoefficients, symplectic_form, \
    synthesize_end_field, extract_deficiency_coefficients, fit_window, mode_lambda
from delaunaylab.spectral.exceptions import ModeMismatchError, \
    IllConditionedFitError, OrientationError


class TestJacobiFields(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.orbit = solve_orbit(4, 0.4)

    def test_residuals(self):
        t = default_window(self.orbit)
        for field in (phi1, phi2, phi3, phi4):
            f = field(self.orbit, t)
            self.assertLess(f.residual, 1e-7, msg=f.kind)
        self.assertEqual(phi1(self.orbit, t).growth_class, 'periodic')
        self.assertEqual(phi2(self.orbit, t).growth_class, 'linear')
        self.assertEqual(phi3(self.orbit, t).mode, 1)
        self.assertEqual(mode_lambda(4, 1), -3.)

    def test_phi2_normalization(self):
        """phi2 is d u / d eps over u: compare with a difference quotient."""
        t = np.linspace(0., self.orbit.T, 9)
        exact = phi2(self.orbit, t).values
        np.testing.assert_allclose(phi2_difference_quotient(self.orbit, t), exact,
                                   rtol=1e-4, atol=1e-4)
        self.assertAlmostEqual(phi2(self.orbit, [self.orbit.T / 2.]).values[0],
                               1. / self.orbit.eps, delta=1e-6)

    def test_phi2_drift(self):
        """phi2(t + T) - phi2(t) = -T'(eps) phi1(t)."""
        slope = period_derivative_from_sensitivity(self.orbit)
        self.assertAlmostEqual(slope, period_T_derivative(4, 0.4), delta=1e-4)
        t = default_window(self.orbit, periods=1.)
        shifted = phi2(self.orbit, t + self.orbit.T).values - phi2(self.orbit, t).values
        np.testing.assert_allclose(shifted, -slope * phi1(self.orbit, t).values, atol=1e-6)

    def test_wronskian(self):
        t = default_window(self.orbit)
        pairing = wronskian_pairing(phi1(self.orbit, t), phi2(self.orbit, t))
        self.assertLess(relative_spread(pairing), 1e-8)
        self.assertGreater(abs(np.mean(pairing.values)), 0.)
        with self.assertRaises(ModeMismatchError):
            wronskian_pairing(phi1(self.orbit, t), phi3(self.orbit, t))
        with self.assertRaises(ModeMismatchError):
            wronskian_pairing(phi1(self.orbit, t), phi1(solve_orbit(4, 0.5), t))

    def test_cylinder_fields(self):
        cylinder = solve_orbit(4, equilibrium_ubar(4))
        t = default_window(cylinder)
        self.assertLess(np.max(np.abs(phi1(cylinder, t).values)), 1e-10)
        self.assertEqual(phi2(cylinder, t).growth_class, 'periodic')
        with self.assertRaises(IllConditionedFitError):
            extract_deficiency_coefficients(phi2(cylinder, t).samples, cylinder)


class TestDeficiency(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.orbit = solve_orbit(3, 0.3)

    def test_symplectic_form(self):
        c1 = DeficiencyCoefficients.from_flat([1., 0., 1., 0.])
        c2 = DeficiencyCoefficients.from_flat([0., 1., 0., 1.])
        self.assertEqual(c1.k, 2)
        self.assertAlmostEqual(symplectic_form(c1, c2), 2.)
        self.assertAlmostEqual(symplectic_form(c2, c1), -2.)
        self.assertAlmostEqual(symplectic_form(c1, c2, orientations=(1, -1)), 0.)
        with self.assertRaises(OrientationError):
            symplectic_form(c1, c2, orientations=(1, 0))
        with self.assertRaises(ModeMismatchError):
            symplectic_form(c1, DeficiencyCoefficients.from_flat([1., 2.]))

    def test_extract_coefficients(self):
        t = fit_window(self.orbit)
        for a, b in ((1.5, -0.25), (0., 2.), (-0.7, 0.)):
            w = synthesize_end_field(self.orbit, a, b, t)
            fit = extract_deficiency_coefficients(w, self.orbit)
            self.assertAlmostEqual(fit.a, a, delta=1e-10)
            self.assertAlmostEqual(fit.b, b, delta=1e-10)
            self.assertLess(fit.residual_norm, 1e-10)

    def test_short_window(self):
        t = self.orbit.sample_times(periods=1.)
        w = synthesize_end_field(self.orbit, 1., 1., t)
        with self.assertRaises(IllConditionedFitError):
            extract_deficiency_coefficients(w, self.orbit)


if __name__ == '__main__':
    unittest.main()
