"""Command-line tool functionality for the delaunaylab commands."""

from delaunaylab.base_cli import AbstractCLI
from delaunaylab.spectral import consts
from delaunaylab.spectral import export
from delaunaylab.spectral.config import RunConfig, parse_eps, parse_float_list, \
    validate_eps_values
from delaunaylab.spectral.delaunay import solve_orbit, equilibrium_ubar, \
    projective_moduli_line
from delaunaylab.spectral.jacobi import phi1, phi2, phi3, phi4, default_window, \
    wronskian_pairing, relative_spread, period_derivative_from_sensitivity
from delaunaylab.spectral.floquet import sl_form, sphere_mode, band_structure, \
    cylinder_band_edge, monodromy, bloch_phase, spectrum_lower_bound
from delaunaylab.spectral.indicial import indicial_set, indicial_closed_form, \
    pole_degree_at_zero, EndModel, relative_index, fit_asymptote, manufactured_end
from delaunaylab.spectral.pohozaev import calibrate_cn, pohozaev_functional, \
    invariant_norm, algebra_basis, verify_conformal_killing, cylinder_grid
from delaunaylab.spectral.sweep import moduli_table
from delaunaylab.spectral.verify import run_verification, CHECKS

import logging
import os
import sys
from datetime import datetime
from functools import partial

import numpy as np


class CLI(AbstractCLI):
    """CLI implements AbstractCLI from the delaunaylab package, one instance
    per command."""

    def __init__(self, name: str):
        self.name = name
        self.args = None

    def get_name(self) -> str:
        return self.name

    def validate_args(self, args):
        """Validate parsed arguments, converting eps strings and lists."""

        # Ensure that if there's a tilde for $HOME in the file path, it works.
        args.out_dir = os.path.expanduser(args.out_dir)

        if args.tool != 'verify' or args.n is not None:
            assert args.n is not None and args.n >= 3, "--n must be an integer >= 3."

        assert 0. < args.tol < 1., "--tol must lie in (0, 1)."
        assert args.workers >= 1, "--workers must be a positive integer."

        if getattr(args, 'eps', None) is not None:
            args.eps = parse_eps(args.eps, args.n)
            validate_eps_values(args.n, [args.eps], '--eps')

        if hasattr(args, 'eps_grid'):
            args.eps_grid = parse_float_list(args.eps_grid)
            if args.n is not None:
                validate_eps_values(args.n, args.eps_grid, '--eps-grid')
            for value in args.eps_grid:
                assert value > 0., "--eps-grid values must be positive."

        if hasattr(args, 'ends'):
            args.ends = parse_float_list(args.ends)
            assert len(args.ends) >= 2, "--ends needs at least two Delaunay parameters."
            validate_eps_values(args.n, args.ends, '--ends')

        if getattr(args, 'mode', None) is not None:
            assert args.mode >= 0, "--mode must be a nonnegative integer."

        if getattr(args, 'j_max', None) is not None:
            assert args.j_max >= 1, "--jmax must be at least 1."

        if getattr(args, 'sigma_window', None) is not None:
            assert args.sigma_window[0] < args.sigma_window[1], \
                "--sigma-window must be given as LO HI with LO < HI."

        if hasattr(args, 'resolution'):
            assert args.resolution >= 8, "--resolution must be at least 8."

        if getattr(args, 'only', None) is not None:
            for group in args.only:
                assert group in CHECKS, \
                    f"Unknown check group '{group}'; choose from {', '.join(CHECKS)}."

        if hasattr(args, 'check_tol_scale'):
            assert args.check_tol_scale > 0., "--check-tol-scale must be positive."

        # Created only once every other argument is valid.
        os.makedirs(args.out_dir, exist_ok=True)
        assert os.access(args.out_dir, os.W_OK), \
            f"Cannot write to specified output directory {args.out_dir}."

        self.args = args

        return args

    def run(self, args) -> int:
        """Run the command on parsed arguments, returning the exit code."""
        return main(args)


def setup_logging(config: RunConfig):
    """Send logging messages to stdout as well as a log file."""
    log_file = config.output_path(config.command + ".log")
    logging.basicConfig(level=logging.INFO,
                        format=f"delaunaylab:{config.command}: %(message)s",
                        filename=log_file,
                        filemode="w",
                        force=True)
    console = logging.StreamHandler()
    formatter = logging.Formatter(f"delaunaylab:{config.command}: %(message)s")
    console.setFormatter(formatter)  # Use the same format for stdout.
    logging.getLogger('').addHandler(console)  # Log to stdout and a file.


def _prov(config: RunConfig) -> dict:
    return export.provenance(config.config_hash(), config.tolerances())


def _tag(n: int, eps: float) -> str:
    return f"n{n}_eps{eps:.6g}"


def run_orbit(config: RunConfig) -> int:
    orbit = solve_orbit(config.n, config.eps, tol=config.tolerance)
    logging.info(f"T = {orbit.T:.12g}, R = {orbit.R:.12g}, H = {orbit.H:.12g}, "
                 f"u_max = {orbit.u_max:.12g}, drift = {orbit.drift:.2e}")
    prov = _prov(config)
    tag = _tag(config.n, orbit.eps)
    export.write_orbit(orbit, config.output_path(f"orbit_{tag}.csv"), prov)
    if config.export_phase:
        export.write_phase_portrait(config.n, config.output_path(f"phase_{tag}.csv"), prov,
                                    orbit=orbit)
    return consts.EXIT_OK


def run_jacobi(config: RunConfig) -> int:
    orbit = solve_orbit(config.n, config.eps, tol=config.tolerance)
    t = default_window(orbit)
    fields = [phi1(orbit, t), phi2(orbit, t), phi3(orbit, t), phi4(orbit, t)]
    for f in fields:
        logging.info(f"{f.kind}: growth {f.growth_class}, residual {f.residual:.2e}")

    pairing = wronskian_pairing(fields[0], fields[1])
    summary = {'n': orbit.n, 'eps': orbit.eps,
               'wronskian': float(np.mean(pairing.values)),
               'wronskian_relative_spread': relative_spread(pairing),
               'T_prime': None if orbit.degenerate
               else period_derivative_from_sensitivity(orbit)}
    logging.info(f"Weighted Wronskian {summary['wronskian']:.12g} "
                 f"(relative spread {summary['wronskian_relative_spread']:.2e})")

    prov = _prov(config)
    tag = _tag(config.n, orbit.eps)
    export.write_jacobi(fields, config.output_path(f"jacobi_{tag}.csv"), prov)
    export.write_json(config.output_path(f"jacobi_{tag}_pairing.json"), summary, prov)
    return consts.EXIT_OK


def run_bands(config: RunConfig) -> int:
    orbit = solve_orbit(config.n, config.eps, tol=config.tolerance)
    mode = sphere_mode(config.n, config.mode)
    if config.sigma_window:
        window = tuple(config.sigma_window)
    else:
        edge = cylinder_band_edge(config.n, config.mode)
        window = (min(edge, -config.n) - 1., edge + config.n)
    sl = sl_form(orbit, mode)
    structure = band_structure(sl, window, config.resolution)
    logging.info(f"Mode {mode.j}: lowest edge {structure.lowest_edge}, "
                 f"{len(structure.gaps)} gap(s) in [{window[0]:.6g}, {window[1]:.6g}]")

    at_zero = monodromy(sl, 0.)
    extra = {'n': orbit.n, 'eps': orbit.eps,
             'cylinder_band_edge': cylinder_band_edge(config.n, config.mode),
             'sigma_zero': {'discriminant': at_zero.discriminant,
                            'determinant': at_zero.determinant,
                            'defective': at_zero.defective,
                            'bloch_phase': bloch_phase(at_zero, orbit.T)}}
    if config.mode == 0:
        extra['spectrum_lower_bound'] = spectrum_lower_bound(orbit, j_max=config.resolved_j_max)

    tag = _tag(config.n, orbit.eps)
    export.write_bands(structure, config.output_path(f"bands_{tag}_j{mode.j}.csv"),
                       _prov(config), extra=extra)
    return consts.EXIT_OK


def run_indicial(config: RunConfig) -> int:
    orbit = solve_orbit(config.n, config.eps, tol=config.tolerance)
    j_max = config.resolved_j_max
    indicial = indicial_set(orbit, j_max)
    logging.info(f"gamma_1 = {indicial.gamma1:.12g}; symmetric: {indicial.is_symmetric()}")

    extra = {'j_max': j_max,
             'pole_degree_at_zero': pole_degree_at_zero(orbit),
             'symmetric': indicial.is_symmetric(),
             'sharp_decay_rate': indicial.gamma1 if j_max >= orbit.n else None,
             'cylinder_closed_form': {str(j): indicial_closed_form(orbit.n, j)
                                      for j in range(j_max + 1)}}
    export.write_indicial(indicial,
                          config.output_path(f"indicial_{_tag(config.n, orbit.eps)}.csv"),
                          _prov(config), extra=extra)

    if config.asymptote_fit and orbit.degenerate:
        logging.warning("The cylinder has no phase to fit; skipping the asymptote fit.")
    elif config.asymptote_fit:
        t = orbit.sample_times(periods=consts.ASYMPTOTE_FIT_PERIODS)
        w = manufactured_end(orbit, consts.ASYMPTOTE_FIT_SHIFT, consts.ASYMPTOTE_FIT_AMPLITUDE,
                             indicial.gamma1, t)
        fit = fit_asymptote(w, orbit.n)
        manufactured = {'eps': orbit.eps, 'eta': consts.ASYMPTOTE_FIT_SHIFT,
                        'c': consts.ASYMPTOTE_FIT_AMPLITUDE, 'alpha': indicial.gamma1}
        export.write_asymptote_fit(
            fit, config.output_path(f"asymptote_fit_{_tag(config.n, orbit.eps)}.json"),
            _prov(config),
            extra={'n': orbit.n, 'manufactured': manufactured,
                   'alpha_error': abs(fit.alpha - indicial.gamma1)})
    return consts.EXIT_OK


def run_pohozaev(config: RunConfig) -> int:
    prov = _prov(config)
    solver = partial(solve_orbit, tol=config.tolerance)
    calibration = calibrate_cn(config.n, config.grid(), solver=solver)
    export.write_calibration(calibration, config.output_path(f"calibration_n{config.n}.json"),
                             prov)

    if config.eps is not None:
        orbit = solver(config.n, config.eps)
        functional = pohozaev_functional(orbit, 0.)
        labels, fields = algebra_basis(config.n)
        grid = cylinder_grid(config.n, [-1., 0., 1.], directions=4, seed=config.seed)
        conformal_defect = max(verify_conformal_killing(kf, grid) for kf in fields)
        payload = {'n': orbit.n, 'eps': orbit.eps, 'H': orbit.H,
                   'values': dict(zip(labels, functional.values)),
                   'dilational': functional.dilational,
                   'c_n_times_H': calibration.c_n * orbit.H,
                   'killing_norm': invariant_norm(functional),
                   'conformal_killing_defect': conformal_defect}
        logging.info(f"D = {functional.dilational:.12g}, c_n H = {calibration.c_n * orbit.H:.12g}")
        export.write_json(config.output_path(f"pohozaev_{_tag(config.n, orbit.eps)}.json"),
                          payload, prov)
    return consts.EXIT_OK


def run_relindex(config: RunConfig) -> int:
    ends = EndModel(n=config.n, eps=tuple(config.ends))
    result = relative_index(ends, j_max=config.j_max,
                            solver=partial(solve_orbit, tol=config.tolerance))
    payload = {'n': config.n, 'ends': list(config.ends), 'k': ends.k,
               'rel_index': result.rel_index, 'dim_B': result.dim_bounded_nullspace,
               'delta': result.delta, 'gamma1': list(result.gamma1)}
    logging.info(f"rel_index = {result.rel_index}, dim B = {result.dim_bounded_nullspace}")
    export.write_json(config.output_path(f"relindex_n{config.n}_k{ends.k}.json"), payload,
                      _prov(config))
    return consts.EXIT_OK


def run_moduli_table(config: RunConfig) -> int:
    prov = _prov(config)
    frame = moduli_table(config.n, config.grid(), config.tolerance, config.workers)
    ratio = frame['D_over_H'].values
    logging.info(f"D/H = {np.mean(ratio):.12g} (relative spread "
                 f"{np.ptp(ratio) / abs(np.mean(ratio)):.2e})")
    export.write_csv(config.output_path(f"moduli_n{config.n}.csv"), frame, prov)

    ubar = equilibrium_ubar(config.n)
    points = np.sort(np.append(np.linspace(0.05, 0.95, 19), ubar))
    export.write_csv(config.output_path(f"moduli_line_n{config.n}.csv"),
                     projective_moduli_line(config.n, points), prov)
    return consts.EXIT_OK


def run_verify(config: RunConfig) -> int:
    report = run_verification(config)
    export.write_json(config.output_path("verify_report.json"), report.to_dict(),
                      _prov(config))
    if report.passed:
        logging.info(f"All {len(report.results)} acceptance checks passed.")
        return consts.EXIT_OK
    logging.info(f"{len(report.failures)} of {len(report.results)} acceptance checks failed:")
    for failure in report.failures:
        logging.info(f"  {failure.group}: {failure.name} {failure.detail}".rstrip())
    return consts.EXIT_VERIFY_FAILED


COMMANDS = {
    'orbit': run_orbit,
    'jacobi': run_jacobi,
    'bands': run_bands,
    'indicial': run_indicial,
    'pohozaev': run_pohozaev,
    'relindex': run_relindex,
    'moduli-table': run_moduli_table,
    'verify': run_verify,
}


def main(args) -> int:
    """Take validated command-line input, set up logging, and run the command."""

    config = RunConfig.from_args(args)
    setup_logging(config)

    # Log the command as typed by user.
    logging.info("Command:\n" + ' '.join(['delaunaylab', config.command] + sys.argv[2:]))

    # Log the start time.
    logging.info(datetime.now().strftime('%Y-%m-%d %H:%M:%S'))
    logging.info(f"Config hash {config.config_hash()}")

    code = COMMANDS[config.command](config)

    logging.info(f"Completed {config.command}.")
    logging.info(datetime.now().strftime('%Y-%m-%d %H:%M:%S\n'))

    return code
