import unittest

import numpy as np

from delaunaylab.spectral import consts
from delaunaylab.spectral.delaunay import solve_orbit, equilibrium_ubar, \
    hamiltonian, period_T_oracle, period_R_oracle, closed_form_n4, \
    resample_geodesic, quotient_perturbation, nonlinear_residual, to_ball, \
    from_ball, orbit_samples, projective_moduli_line, phase_portrait, \
    default_eps_grid, HomoclinicSolution
from delaunaylab.spectral.exceptions import ParameterRangeError


class TestDelaunayOrbit(unittest.TestCase):

    def test_equilibrium(self):
        """ubar is the critical point of the potential and sqrt(1/2) for n = 4."""
        self.assertAlmostEqual(equilibrium_ubar(4), np.sqrt(0.5), places=14)
        for n in (3, 5, 6):
            ubar = equilibrium_ubar(n)
            h = 1e-6
            slope = (hamiltonian(n, ubar + h, 0.) - hamiltonian(n, ubar - h, 0.)) / (2 * h)
            self.assertLess(abs(slope), 1e-8)

    def test_parameter_range(self):
        with self.assertRaises(ParameterRangeError):
            solve_orbit(2, 0.3)
        with self.assertRaises(ParameterRangeError):
            solve_orbit(4, 0.8)
        with self.assertRaises(ParameterRangeError):
            solve_orbit(4, 0.)
        with self.assertRaises(ParameterRangeError):
            solve_orbit(4, 1e-8)

    def test_periods_match_quadrature(self):
        for n, eps in ((3, 0.3), (4, 0.4), (5, 0.5)):
            orbit = solve_orbit(n, eps)
            self.assertLess(orbit.drift, consts.MAX_HAMILTONIAN_DRIFT)
            self.assertAlmostEqual(orbit.T, period_T_oracle(n, eps), delta=1e-8)
            self.assertAlmostEqual(orbit.R, period_R_oracle(n, eps), delta=1e-8)
            self.assertAlmostEqual(orbit.u(0.), orbit.u_max, delta=1e-12)
            self.assertAlmostEqual(orbit.u(orbit.T / 2.), eps, delta=1e-9)

    def test_period_limits(self):
        """T grows without bound and R tends to pi as eps -> 0."""
        self.assertGreater(period_T_oracle(4, 1e-4), 10.)
        small = solve_orbit(4, 1e-4)
        self.assertAlmostEqual(small.T / period_T_oracle(4, 1e-4), 1., delta=1e-6)
        for eps in (1e-2, 1e-3, 1e-4):
            self.assertAlmostEqual(period_R_oracle(4, eps), np.pi, delta=1e-10)
        for n in (3, 5):
            ubar = equilibrium_ubar(n)
            distance = [abs(period_R_oracle(n, f * ubar) - np.pi) for f in (0.9, 0.5, 0.2)]
            self.assertTrue(np.all(np.diff(distance) < 0.), msg=str(distance))

    def test_n4_closed_form(self):
        """For n = 4 the solution is explicit in r with period pi."""
        for eps in (0.2, 0.5):
            orbit = solve_orbit(4, eps)
            self.assertAlmostEqual(orbit.R, np.pi, delta=1e-8)
            r = np.linspace(0., 2. * orbit.R, 101)
            error = np.abs(resample_geodesic(orbit, r).values - closed_form_n4(eps, r))
            self.assertLess(np.max(error), 1e-7)

    def test_cylinder(self):
        n = 5
        orbit = solve_orbit(n, equilibrium_ubar(n))
        self.assertTrue(orbit.degenerate)
        self.assertAlmostEqual(orbit.T, 2. * np.pi / np.sqrt(n - 2.), places=12)
        self.assertAlmostEqual(orbit.R, 2. * np.pi / np.sqrt(n), delta=1e-9)

    def test_nonlinear_residual_of_exact_solution(self):
        """Another Delaunay solution, shifted, is an exact zero of N_eps."""
        orbit = solve_orbit(4, 0.4)
        other = solve_orbit(4, 0.45)
        t = orbit.sample_times(periods=2.)
        v = quotient_perturbation(orbit, other, 0.3, t)
        residual = nonlinear_residual(orbit, v)
        self.assertLess(np.max(np.abs(residual.values)), 1e-8)

        same = quotient_perturbation(orbit, orbit, 0., t)
        self.assertLess(np.max(np.abs(same.values)), 1e-12)

    def test_ball_transform(self):
        orbit = solve_orbit(3, 0.2)
        samples = orbit_samples(orbit, np.linspace(0., 3., 31))
        ball = to_ball(samples)
        self.assertEqual(ball.coordinate, 'ball')
        back = from_ball(ball)
        np.testing.assert_allclose(back.coords, samples.coords, atol=1e-12)
        np.testing.assert_allclose(back.values, samples.values, rtol=1e-12)
        with self.assertRaises(ParameterRangeError):
            to_ball(orbit, rho=[0.5, 0.])
        with self.assertRaises(ParameterRangeError):
            to_ball(orbit_samples(orbit, np.array([-1., 0., 1.])))

        # The round sphere is u~ = (2 / (1 + rho^2))^{(n-2)/2} on the ball.
        rho = np.linspace(0.1, 1., 10)
        sphere = to_ball(HomoclinicSolution(4), rho=rho)
        np.testing.assert_allclose(sphere.values, 2. / (1. + rho ** 2), rtol=1e-12)

    def test_moduli_line_and_phase_portrait(self):
        n = 4
        ubar = equilibrium_ubar(n)
        line = projective_moduli_line(n, [0.3, ubar, 0.9])
        self.assertListEqual(list(line['phase']), ['minimum', 'cylinder', 'maximum'])
        self.assertAlmostEqual(line['eps'][0], 0.3)
        # The partner turning point of 0.9 lies on the same energy level.
        self.assertAlmostEqual(hamiltonian(n, line['eps'][2], 0.), line['H'][2], places=12)

        portrait = phase_portrait(n, [-0.05, 0.], samples=51)
        self.assertTrue(np.all(portrait['u'] >= 0.))
        with self.assertRaises(ParameterRangeError):
            phase_portrait(n, [0.1])

        grid = default_eps_grid(n)
        self.assertAlmostEqual(grid[0], consts.EPS_GRID_STEP)
        self.assertLessEqual(grid[-1], consts.EPS_GRID_MAX_FRACTION * ubar)


if __name__ == '__main__':
    unittest.main()
