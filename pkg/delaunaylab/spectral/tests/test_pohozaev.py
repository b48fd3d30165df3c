import unittest

import numpy as np

from delaunaylab.spectral import consts
from delaunaylab.spectral.delaunay import solve_orbit, HomoclinicSolution
from delaunaylab.spectral.pohozaev import sphere_area, tracefree_ricci, \
    cylinder_grid, verify_conformal_killing, algebra_basis, killing_form, \
    dilational_invariant, dilational_constant_closed_form, calibrate_cn, \
    pohozaev_functional, balancing_check, invariant, invariant_norm, \
    ConformalKillingField, coordinates, centered_dilation_field
from delaunaylab.spectral.exceptions import OrientationError, ParameterRangeError


class TestCurvature(unittest.TestCase):

    def test_sphere_area(self):
        self.assertAlmostEqual(sphere_area(1), 2. * np.pi)
        self.assertAlmostEqual(sphere_area(2), 4. * np.pi)
        self.assertAlmostEqual(sphere_area(3), 2. * np.pi ** 2)

    def test_constant_scalar_curvature(self):
        for n, eps in ((3, 0.2), (5, 0.5)):
            orbit = solve_orbit(n, eps)
            for t in orbit.sample_times(periods=1., per_period=8):
                section = tracefree_ricci(orbit, t)
                self.assertAlmostEqual(section.scalar_curvature / (n * (n - 1.)), 1.,
                                       delta=1e-8)
                self.assertAlmostEqual(section.trace, 0., delta=1e-10)

    def test_round_sphere_is_einstein(self):
        for t in (-1.5, 0., 2.):
            section = tracefree_ricci(HomoclinicSolution(4), t)
            self.assertAlmostEqual(section.tt, 0., delta=1e-10)
            self.assertAlmostEqual(section.angular, 0., delta=1e-10)


class TestConformalKillingFields(unittest.TestCase):

    def test_basis_fields_are_conformal(self):
        n = 3
        labels, fields = algebra_basis(n)
        self.assertEqual(len(fields), (n + 1) * (n + 2) // 2)
        self.assertEqual(len(labels), len(fields))
        grid = cylinder_grid(n, [-1., 0., 1.], directions=4, seed=consts.RANDOM_SEED)
        self.assertEqual(grid.shape, (12, n))
        for label, kf in zip(labels, fields):
            self.assertLess(verify_conformal_killing(kf, grid), 1e-9, msg=label)

        # A bump function is not conformal Killing.
        self.assertGreater(verify_conformal_killing(fields[0], grid, bump=0.5), 1e-3)

    def test_killing_form_is_diagonal(self):
        _, fields = algebra_basis(4)
        gram = np.array([[killing_form(a, b) for b in fields] for a in fields])
        np.testing.assert_allclose(gram, np.diag(np.diag(gram)), atol=1e-14)
        rotations = 5 * 4 // 2
        np.testing.assert_allclose(np.diag(gram)[:rotations], -1.)
        np.testing.assert_allclose(np.diag(gram)[rotations:], 1.)

    def test_sphere_field_in_cylinder_chart(self):
        """X^t from t_component equals <X_q, dq/dt> cosh^2 t, q = (sech t theta, tanh t)."""
        n = 3
        _, fields = algebra_basis(n)
        random = np.random.RandomState(consts.RANDOM_SEED)
        theta = random.normal(size=(4, n))
        theta /= np.linalg.norm(theta, axis=1, keepdims=True)
        for t in (-0.8, 0., 1.3):
            for direction in theta:
                q = np.append(direction / np.cosh(t), np.tanh(t))
                dq = np.append(-np.tanh(t) / np.cosh(t) * direction, 1. / np.cosh(t) ** 2)
                for kf in fields:
                    X = kf.at(q)
                    self.assertAlmostEqual(np.dot(X, q), 0., delta=1e-13)
                    self.assertAlmostEqual(np.dot(X, dq) * np.cosh(t) ** 2,
                                           float(kf.t_component(t, direction)), delta=1e-12)

        with self.assertRaises(ParameterRangeError):
            centered_dilation_field(np.ones(n + 1), np.ones(n + 1))
        q = np.eye(n + 1)[0]
        np.testing.assert_allclose(centered_dilation_field(np.eye(n + 1)[0], q), 0.)

    def test_coordinates(self):
        _, fields = algebra_basis(3)
        for i, kf in enumerate(fields):
            expected = np.zeros(len(fields))
            expected[i] = 1.
            np.testing.assert_allclose(coordinates(kf), expected)


class TestPohozaevInvariant(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.orbit = solve_orbit(4, 0.4)

    def test_section_independence(self):
        values = [dilational_invariant(self.orbit, s * self.orbit.T)
                  for s in (0., 0.25, 0.6, 1.7, -0.3)]
        np.testing.assert_allclose(values, values[0], rtol=1e-8)

    def test_calibration(self):
        for n in (3, 4):
            calibration = calibrate_cn(n, [0.1, 0.3, 0.5])
            self.assertLess(calibration.max_relative_deviation, 1e-6)
            self.assertAlmostEqual(calibration.c_n / dilational_constant_closed_form(n), 1.,
                                   delta=1e-6)
            self.assertGreater(calibration.to_dict()['closed_form'], 0.)

    def test_balancing(self):
        plus = pohozaev_functional(self.orbit, 1.2 * self.orbit.T, orientation=1, end=0)
        minus = pohozaev_functional(self.orbit, -0.4 * self.orbit.T, orientation=-1, end=1)
        _, fields = algebra_basis(4)
        for kf in fields:
            self.assertLess(balancing_check([plus, minus], kf),
                            1e-8 * max(1., abs(plus.dilational)))
        with self.assertRaises(OrientationError):
            balancing_check([plus, plus], fields[0])
        with self.assertRaises(OrientationError):
            invariant(self.orbit, fields[0], 0., orientation=0)

    def test_rotated_configuration(self):
        """The functional of a rotated end is the rotated functional."""
        theta = 0.7
        F = np.eye(5)
        F[[0, 0, 4, 4], [0, 4, 0, 4]] = [np.cos(theta), -np.sin(theta),
                                         np.sin(theta), np.cos(theta)]
        rotated = pohozaev_functional(self.orbit, 0., rotation=F)
        straight = pohozaev_functional(self.orbit, 0.)
        self.assertAlmostEqual(rotated.dilational, straight.dilational, delta=1e-10)
        self.assertAlmostEqual(invariant_norm(rotated), invariant_norm(straight), delta=1e-8)
        np.testing.assert_allclose(rotated.axis, F[:, 4])
        with self.assertRaises(AssertionError):
            pohozaev_functional(self.orbit, 0., rotation=2. * np.eye(5))

        axial = ConformalKillingField.axial_dilation(4)
        self.assertAlmostEqual(straight(axial), straight.dilational, delta=1e-10)


if __name__ == '__main__':
    unittest.main()
