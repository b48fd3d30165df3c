import unittest

import numpy as np

from delaunaylab.spectral import consts
from delaunaylab.spectral.numerics import Tolerance, integrate_ivp, \
    locate_event, find_event, find_root, adaptive_quadrature, eigen_2x2, ode_residual
from delaunaylab.spectral.exceptions import ParameterRangeError, \
    EventNotFoundError


class TestNumerics(unittest.TestCase):

    def test_tolerance(self):
        with self.assertRaises(ParameterRangeError):
            Tolerance(abs_tol=0.)
        tol = Tolerance(1e-10, 1e-8).scaled(10.)
        self.assertAlmostEqual(tol.abs_tol, 1e-9)
        self.assertAlmostEqual(tol.rel_tol, 1e-7)

    def test_harmonic_oscillator(self):
        """y'' = -y from (1, 0): v = -sin t crosses zero upward at pi and
        downward at 2 pi."""

        def field(t, y):
            return np.array([y[1], -y[0]])

        trajectory = integrate_ivp(field, [1., 0.], (0., 8.), tol=Tolerance(1e-13, 1e-12))
        t = np.linspace(0., 8., 33)
        np.testing.assert_allclose(trajectory(t)[:, 0], np.cos(t), atol=1e-10)
        self.assertLess(np.max(ode_residual(trajectory, field, t[2:-2])), 1e-6)

        event = locate_event(trajectory, lambda y: y[1], direction=-1)
        self.assertAlmostEqual(event.t, 2. * np.pi, delta=1e-10)
        upward = locate_event(trajectory, lambda y: y[1], direction=1)
        self.assertAlmostEqual(upward.t, np.pi, delta=1e-10)
        with self.assertRaises(EventNotFoundError):
            locate_event(trajectory, lambda y: y[0] - 2., direction=0)

    def test_find_event(self):
        event = find_event(lambda t, y: -y, [1.], lambda y: y[0] - 0.5, direction=-1,
                           horizon=2., tol=Tolerance(1e-13, 1e-12))
        self.assertAlmostEqual(event.t, np.log(2.), delta=1e-10)
        with self.assertRaises(EventNotFoundError):
            find_event(lambda t, y: -y, [1.], lambda y: y[0] + 1., direction=0, horizon=2.)

        trajectory = integrate_ivp(lambda t, y: y, [1.], (0., 1.), tol=Tolerance(1e-13, 1e-12))
        self.assertAlmostEqual(float(trajectory(1.)[0]), np.e, delta=1e-10)

    def test_backward_integration(self):
        trajectory = integrate_ivp(lambda t, y: -y, [1.], (0., -2.))
        self.assertAlmostEqual(float(trajectory(-2.)[0]), np.exp(2.), delta=1e-8)
        with self.assertRaises(ParameterRangeError):
            integrate_ivp(lambda t, y: -y, [1.], (1., 1.))

    def test_root_and_quadrature(self):
        self.assertAlmostEqual(find_root(lambda x: x * x - 2., 0., 2.), np.sqrt(2.), places=14)
        with self.assertRaises(ParameterRangeError):
            find_root(lambda x: x * x + 1., -1., 1.)

        # int_0^1 dx / sqrt(x (1 - x)) = pi, singular at both ends.
        value = adaptive_quadrature(lambda x: 1. / np.sqrt(x * (1. - x)), 0., 1.,
                                    singular='both')
        self.assertAlmostEqual(value, np.pi, places=10)
        value = adaptive_quadrature(lambda x: 1. / np.sqrt(x), 0., 4., singular='left')
        self.assertAlmostEqual(value, 4., places=10)
        self.assertEqual(adaptive_quadrature(np.exp, 1., 1.), 0.)
        self.assertAlmostEqual(adaptive_quadrature(np.sin, 0., np.pi), 2., places=12)
        with self.assertRaises(ValueError):
            adaptive_quadrature(np.exp, 0., 1., singular='middle')

    def test_eigen_2x2(self):
        rotation = np.array([[np.cos(0.3), -np.sin(0.3)], [np.sin(0.3), np.cos(0.3)]])
        result = eigen_2x2(rotation)
        self.assertFalse(result.repeated)
        np.testing.assert_allclose(sorted(abs(p.value) for p in result.pairs), [1., 1.])

        jordan = eigen_2x2(np.array([[1., 1.], [0., 1.]]))
        self.assertTrue(jordan.repeated)
        self.assertAlmostEqual(jordan.trace, 2.)

        random = np.random.RandomState(consts.RANDOM_SEED)
        matrix = random.normal(size=(2, 2))
        for pair in eigen_2x2(matrix).pairs:
            np.testing.assert_allclose(matrix @ pair.vector, pair.value * pair.vector,
                                       atol=1e-12)


if __name__ == '__main__':
    unittest.main()
