import unittest

import numpy as np

from delaunaylab.spectral.delaunay import solve_orbit, equilibrium_ubar
from delaunaylab.spectral.indicial import floquet_exponents, indicial_closed_form, \
    indicial_set, sharp_decay_rate, pole_degree, pole_degree_at_zero, EndModel, \
    relative_index, fourier_laplace, inverse_fourier_laplace, holonomy_residual, \
    fit_asymptote, manufactured_end
from delaunaylab.spectral.exceptions import ParameterRangeError, \
    DivergentSeriesError, IllConditionedFitError, OrbitCorruptionError


class TestIndicialSet(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.orbit = solve_orbit(4, 0.4)

    def test_closed_form(self):
        self.assertEqual(indicial_closed_form(4, 0), 0.)
        for n in (3, 4, 7):
            self.assertAlmostEqual(indicial_closed_form(n, 1), 1.)
        self.assertAlmostEqual(indicial_closed_form(4, 2), np.sqrt(6.))

        cylinder = solve_orbit(4, equilibrium_ubar(4))
        gammas = [e.gamma for e in floquet_exponents(cylinder, 2)]
        self.assertAlmostEqual(max(gammas), np.sqrt(6.), delta=1e-7)

    def test_translation_mode(self):
        """Mode 1 carries e^{+-t} times a periodic function."""
        gammas = sorted(e.gamma for e in floquet_exponents(self.orbit, 1))
        self.assertAlmostEqual(gammas[0], -1., delta=1e-6)
        self.assertAlmostEqual(gammas[1], 1., delta=1e-6)

        zero = floquet_exponents(self.orbit, 0)
        self.assertEqual(len(zero), 1)
        self.assertEqual(zero[0].multiplicity, 2)
        self.assertTrue(zero[0].defective)

    def test_indicial_set(self):
        indicial = indicial_set(self.orbit, 6)
        self.assertTrue(indicial.is_symmetric())
        self.assertAlmostEqual(indicial.gamma1, 1., delta=1e-6)
        self.assertTrue(np.all(np.diff(indicial.positive_tail()) >= 0.))
        self.assertAlmostEqual(sharp_decay_rate(self.orbit), 1., delta=1e-6)
        self.assertEqual(pole_degree_at_zero(self.orbit), 2)
        with self.assertRaises(ParameterRangeError):
            sharp_decay_rate(self.orbit, j_max=2)
        with self.assertRaises(ParameterRangeError):
            indicial_set(self.orbit, 0)

    def test_pole_degree(self):
        """A unipotent mode-0 period map gives a pole of order 2, whether it
        is a Jordan block or the identity of the cylinder."""
        self.assertEqual(pole_degree(np.array([[1., 0.5], [0., 1.]])), 2)
        self.assertEqual(pole_degree(np.eye(2)), 2)
        self.assertEqual(pole_degree_at_zero(solve_orbit(4, equilibrium_ubar(4))), 2)
        for corrupted in (np.array([[1.2, 0.5], [0., 1.]]),
                          np.array([[1., 0.5], [0.1, 1.]]),
                          np.diag([1. + 1e-4, 1. - 1e-4])):
            with self.assertRaises(OrbitCorruptionError):
                pole_degree(corrupted)

    def test_relative_index(self):
        for k in (2, 3):
            ends = EndModel(n=4, eps=(0.4, 0.5, 0.3)[:k])
            result = relative_index(ends)
            self.assertEqual(result.rel_index, 2 * k)
            self.assertEqual(result.dim_bounded_nullspace, k)
            self.assertAlmostEqual(result.delta, 0.5, delta=1e-6)
        with self.assertRaises(ParameterRangeError):
            relative_index(EndModel(n=4, eps=(0.4,)))
        with self.assertRaises(ParameterRangeError):
            EndModel(n=4, eps=(0.4, 0.9))


class TestFourierLaplace(unittest.TestCase):

    def test_geometric_series(self):
        t = np.linspace(0., 0.9, 10)
        zeta = complex(0.4, 0.2)

        def h(s):
            return np.exp(-s)

        closed = np.exp(-t) / (1. - np.exp(-1. - 1j * zeta))
        np.testing.assert_allclose(fourier_laplace(h, zeta, t), closed, atol=1e-10)
        self.assertLess(holonomy_residual(h, zeta, t), 1e-10)

    def test_round_trip(self):
        """A compactly supported function is recovered exactly."""

        def h(s):
            return np.where(s < 3., np.sin(np.pi * s / 3.) ** 2, 0.)

        t = np.linspace(0., 2.9, 30)
        back = inverse_fourier_laplace(lambda s, z: fourier_laplace(h, z, s), t, c=0.5)
        np.testing.assert_allclose(back.real, h(t), atol=1e-10)
        self.assertLess(np.max(np.abs(back.imag)), 1e-10)

    def test_divergence(self):
        with self.assertRaises(DivergentSeriesError):
            fourier_laplace(np.exp, 0., np.array([0.5]))


class TestAsymptoteFit(unittest.TestCase):

    def test_recovers_manufactured_end(self):
        orbit = solve_orbit(4, 0.4)
        t = orbit.sample_times(periods=6.)
        w = manufactured_end(orbit, eta=0.3, c=0.5, alpha=1.3, t=t)
        fit = fit_asymptote(w, 4)
        self.assertAlmostEqual(fit.eps, 0.4, delta=1e-4)
        self.assertAlmostEqual(fit.eta, 0.3, delta=1e-4)
        self.assertAlmostEqual(fit.alpha, 1.3, delta=1e-3)
        self.assertAlmostEqual(fit.c, 0.5, delta=1e-3)

    def test_unperturbed_end(self):
        orbit = solve_orbit(4, 0.4)
        w = manufactured_end(orbit, eta=0.3, c=0., alpha=1., t=orbit.sample_times(periods=6.))
        fit = fit_asymptote(w, 4)
        self.assertAlmostEqual(fit.eps, 0.4, delta=1e-6)
        self.assertAlmostEqual(fit.eta, 0.3, delta=1e-6)
        self.assertLess(abs(fit.c), 1e-6)

    def test_decay_at_sharp_rate(self):
        """A perturbation decaying at gamma_1 is fitted back at that rate."""
        orbit = solve_orbit(4, 0.4)
        gamma1 = sharp_decay_rate(orbit)
        self.assertAlmostEqual(gamma1, 1., delta=1e-6)
        w = manufactured_end(orbit, eta=0.3, c=0.01, alpha=gamma1,
                             t=orbit.sample_times(periods=6.))
        fit = fit_asymptote(w, 4)
        self.assertAlmostEqual(fit.alpha, gamma1, delta=1e-3)
        self.assertAlmostEqual(fit.c, 0.01, delta=1e-5)
        self.assertAlmostEqual(fit.eps, 0.4, delta=1e-4)

    def test_short_window(self):
        orbit = solve_orbit(4, 0.4)
        w = manufactured_end(orbit, eta=0., c=0.1, alpha=1., t=orbit.sample_times(periods=1.))
        with self.assertRaises(IllConditionedFitError):
            fit_asymptote(w, 4)


if __name__ == '__main__':
    unittest.main()
