import unittest
import json
import os
import shutil
import tempfile

import numpy as np
import pandas as pd

from delaunaylab.base_cli import run_cli, get_populated_argparser
from delaunaylab.spectral import consts
from delaunaylab.spectral.config import RunConfig, parse_eps, parse_float_list
from delaunaylab.spectral.delaunay import equilibrium_ubar
from delaunaylab.spectral.export import read_csv_provenance


class TestConsole(unittest.TestCase):

    def setUp(self):
        self.out_dir = tempfile.mkdtemp(prefix='delaunaylab_test_')

    def tearDown(self):
        shutil.rmtree(self.out_dir, ignore_errors=True)

    def _path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def test_orbit_command(self):
        code = run_cli(['orbit', '--n', '4', '--eps', '0.4', '--out', self.out_dir,
                        '--export-phase'])
        self.assertEqual(code, consts.EXIT_OK)

        csv_path = self._path('orbit_n4_eps0.4.csv')
        frame = pd.read_csv(csv_path, comment='#')
        self.assertListEqual(list(frame.columns), ['t', 'u', 'v', 'r'])
        self.assertAlmostEqual(frame['u'].min(), 0.4, delta=1e-3)

        prov = read_csv_provenance(csv_path)
        self.assertEqual(len(prov['config_hash']), 64)
        self.assertIn('numpy', prov['versions'])

        with open(self._path('orbit_n4_eps0.4.json')) as f:
            header = json.load(f)
        self.assertAlmostEqual(header['R'], np.pi, delta=1e-8)
        self.assertEqual(header['provenance']['config_hash'], prov['config_hash'])

        self.assertTrue(os.path.exists(self._path('phase_n4_eps0.4.csv')))
        self.assertTrue(os.path.exists(self._path('orbit.log')))

    def test_invalid_input(self):
        """Bad parameters exit with the usage code before any computation."""
        for argv in (['orbit', '--n', '4', '--eps', '2.0', '--out', self.out_dir],
                     ['orbit', '--n', '2', '--eps', '0.1', '--out', self.out_dir],
                     ['orbit', '--n', '4', '--eps', 'abc', '--out', self.out_dir],
                     ['orbit', '--n', '4', '--out', self.out_dir],
                     ['relindex', '--n', '4', '--ends', '0.3', '--out', self.out_dir],
                     ['bands', '--n', '4', '--eps', '0.4', '--sigma-window', '1', '0',
                      '--out', self.out_dir],
                     ['verify', '--only', 'nonexistent', '--out', self.out_dir],
                     ['verify', '--check-tol-scale', '0', '--out', self.out_dir]):
            self.assertEqual(run_cli(argv), consts.EXIT_USAGE, msg=' '.join(argv))
        self.assertFalse(os.path.exists(self._path('orbit_n4_eps2.csv')))

        # Rejected arguments leave no output directory behind.
        fresh = self._path('rejected')
        self.assertEqual(run_cli(['orbit', '--n', '4', '--eps', '2.0', '--out', fresh]),
                         consts.EXIT_USAGE)
        self.assertFalse(os.path.exists(fresh))

    def test_relindex_command(self):
        code = run_cli(['relindex', '--n', '4', '--ends', '0.3,0.4,0.5',
                        '--out', self.out_dir])
        self.assertEqual(code, consts.EXIT_OK)
        with open(self._path('relindex_n4_k3.json')) as f:
            result = json.load(f)
        self.assertEqual(result['rel_index'], 6)
        self.assertEqual(result['dim_B'], 3)

    def test_indicial_command_with_fit(self):
        code = run_cli(['indicial', '--n', '4', '--eps', '0.4', '--jmax', '4',
                        '--fit-asymptote', '--out', self.out_dir])
        self.assertEqual(code, consts.EXIT_OK)
        with open(self._path('indicial_n4_eps0.4.json')) as f:
            indicial = json.load(f)
        self.assertEqual(indicial['pole_degree_at_zero'], 2)
        with open(self._path('asymptote_fit_n4_eps0.4.json')) as f:
            fit = json.load(f)
        self.assertAlmostEqual(fit['alpha'], indicial['gamma1'], delta=1e-3)
        self.assertAlmostEqual(fit['eps'], 0.4, delta=1e-4)
        self.assertLess(fit['alpha_error'], 1e-3)
        self.assertIn('misfit', fit)
        self.assertEqual(fit['provenance']['config_hash'], indicial['provenance']['config_hash'])

    def test_bands_command(self):
        code = run_cli(['bands', '--n', '4', '--eps', '0.4', '--mode', '1',
                        '--resolution', '60', '--out', self.out_dir])
        self.assertEqual(code, consts.EXIT_OK)
        with open(self._path('bands_n4_eps0.4_j1.json')) as f:
            result = json.load(f)
        self.assertEqual(result['mode']['j'], 1)
        self.assertIsNone(result['sigma_zero']['bloch_phase'])
        frame = pd.read_csv(self._path('bands_n4_eps0.4_j1.csv'), comment='#')
        self.assertEqual(len(frame), 60)

    def test_verify_command(self):
        code = run_cli(['verify', '--only', 'fourier_laplace', '--out', self.out_dir])
        self.assertEqual(code, consts.EXIT_OK)
        with open(self._path('verify_report.json')) as f:
            report = json.load(f)
        self.assertTrue(report['passed'])
        self.assertEqual(report['summary']['fourier_laplace']['failed'], 0)

        # Tightening every tolerance far below round-off makes the suite fail.
        code = run_cli(['verify', '--only', 'fourier_laplace', '--check-tol-scale', '1e12',
                        '--out', self.out_dir])
        self.assertEqual(code, consts.EXIT_VERIFY_FAILED)

    def test_config_hash(self):
        """The hash depends on every setting that changes a written number."""
        parser = get_populated_argparser()
        base = ['orbit', '--n', '4', '--eps', '0.4']
        first = RunConfig.from_args(parser.parse_args(base + ['--out', 'a']))
        second = RunConfig.from_args(parser.parse_args(base + ['--out', 'b', '--workers', '3']))
        third = RunConfig.from_args(parser.parse_args(base + ['--tol', '1e-10']))
        self.assertEqual(first.config_hash(), second.config_hash())
        self.assertNotEqual(first.config_hash(), third.config_hash())

    def test_parsing_helpers(self):
        self.assertEqual(parse_float_list('0.1, 0.2,0.3'), (0.1, 0.2, 0.3))
        self.assertEqual(parse_float_list(None), ())
        self.assertAlmostEqual(parse_eps('ubar', 4), equilibrium_ubar(4))
        self.assertIsNone(parse_eps(None, 4))
        with self.assertRaises(ValueError):
            parse_eps('abc', 4)


if __name__ == '__main__':
    unittest.main()
