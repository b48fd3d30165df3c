import argparse
from delaunaylab.spectral import consts


def _add_common_args(subparser: argparse.ArgumentParser, n_required: bool = True):
    """Flags shared by every command."""

    subparser.add_argument("--n", nargs=None, type=int,
                           default=None, required=n_required,
                           dest="n",
                           help="Dimension n >= 3 of the sphere S^n on which "
                                "the singular Yamabe metrics live.")
    subparser.add_argument("--tol", nargs=None, type=float,
                           default=consts.ORBIT_REL_TOL,
                           dest="tol",
                           help="Relative tolerance of the orbit integrator. "
                                "The absolute tolerance is scaled with it. "
                                "(default: %(default)s)")
    subparser.add_argument("--out", nargs=None, type=str,
                           default=consts.OUTPUT_DIR_DEFAULT,
                           dest="out_dir",
                           help="Output directory; created if it does not "
                                "exist. (default: %(default)s)")
    subparser.add_argument("--seed", nargs=None, type=int,
                           default=consts.RANDOM_SEED,
                           dest="seed",
                           help="Seed of every randomized step. "
                                "(default: %(default)s)")
    subparser.add_argument("--workers", nargs=None, type=int,
                           default=consts.WORKERS_DEFAULT,
                           dest="workers",
                           help="Size of the worker pool used by parameter "
                                "sweeps. (default: %(default)s)")


def _add_eps_arg(subparser: argparse.ArgumentParser, required: bool = True):
    subparser.add_argument("--eps", nargs=None, type=str,
                           default=None, required=required,
                           dest="eps",
                           help="Delaunay parameter eps in (0, ubar], the "
                                "minimum of the conformal factor. The keyword "
                                "'ubar' selects the cylinder.")


def _add_grid_arg(subparser: argparse.ArgumentParser):
    subparser.add_argument("--eps-grid", nargs=None, type=str,
                           default=None,
                           dest="eps_grid",
                           help="Comma-separated eps values. If omitted, the "
                                f"grid {consts.EPS_GRID_STEP}, "
                                f"2*{consts.EPS_GRID_STEP}, ... up to "
                                f"{consts.EPS_GRID_MAX_FRACTION}*ubar is used.")


def _add_jmax_arg(subparser: argparse.ArgumentParser):
    subparser.add_argument("--jmax", nargs=None, type=int,
                           default=None,
                           dest="j_max",
                           help="Largest spherical harmonic degree included. "
                                f"If omitted, n + {consts.J_MAX_OFFSET}.")


def add_subparser_args(subparsers: argparse) -> argparse:
    """Add the arguments of every delaunaylab command.

    Args:
        subparsers: Parser object before addition of the command parsers.

    Returns:
        subparsers: Parser object with one sub-parser per command.

    """

    subparser = subparsers.add_parser("orbit",
                                      description="Solve for one Delaunay "
                                                  "orbit and write its "
                                                  "samples.",
                                      help="Solve the Delaunay ODE for a "
                                           "given eps, writing the orbit "
                                           "(t, u, v, r) and its periods, "
                                           "energy and drift.")
    _add_common_args(subparser)
    _add_eps_arg(subparser)
    subparser.add_argument("--export-phase", action="store_true",
                           default=False,
                           dest="export_phase",
                           help="Also write the phase portrait: level sets "
                                "of the energy, the homoclinic loop H = 0 "
                                "and the orbit itself in the (u, v) plane.")

    subparser = subparsers.add_parser("jacobi",
                                      description="Sample the Jacobi fields "
                                                  "of one orbit.",
                                      help="Write phi1, phi2 (mode 0) and "
                                           "phi3, phi4 (mode 1) over two "
                                           "periods with their residuals "
                                           "and weighted Wronskian.")
    _add_common_args(subparser)
    _add_eps_arg(subparser)

    subparser = subparsers.add_parser("bands",
                                      description="Band structure of one "
                                                  "mode operator.",
                                      help="Scan the Floquet discriminant "
                                           "of -L_j and write its bands "
                                           "and gaps.")
    _add_common_args(subparser)
    _add_eps_arg(subparser)
    subparser.add_argument("--mode", nargs=None, type=int,
                           default=0,
                           dest="mode",
                           help="Spherical harmonic degree j of the mode "
                                "operator L_j. (default: %(default)s)")
    subparser.add_argument("--sigma-window", nargs=2, type=float,
                           default=None,
                           dest="sigma_window",
                           help="Spectral window (lo, hi) scanned. If "
                                "omitted, the window starts below the "
                                "cylinder band edge of the mode.")
    subparser.add_argument("--resolution", nargs=None, type=int,
                           default=consts.BAND_SCAN_RESOLUTION,
                           dest="resolution",
                           help="Number of scan points. (default: %(default)s)")

    subparser = subparsers.add_parser("indicial",
                                      description="Indicial data of one "
                                                  "Delaunay end.",
                                      help="Floquet exponents of every mode "
                                           "up to jmax, the sharp decay rate "
                                           "and the pole degree at zero.")
    _add_common_args(subparser)
    _add_eps_arg(subparser)
    _add_jmax_arg(subparser)
    subparser.add_argument("--fit-asymptote", action="store_true",
                           default=False,
                           dest="asymptote_fit",
                           help="Also fit a manufactured end, the orbit "
                                "perturbed by a term decaying at gamma_1, "
                                "back to its Delaunay asymptote and write "
                                "the fit report.")

    subparser = subparsers.add_parser("pohozaev",
                                      description="Pohozaev invariants.",
                                      help="Calibrate the dilational "
                                           "constant c_n over an eps grid "
                                           "and, for a given eps, write the "
                                           "invariant on the basis of "
                                           "o(n+1,1) and its Killing norm.")
    _add_common_args(subparser)
    _add_eps_arg(subparser, required=False)
    _add_grid_arg(subparser)

    subparser = subparsers.add_parser("relindex",
                                      description="Relative index of the "
                                                  "linearized operator.",
                                      help="Index jump across the weight 0 "
                                           "for a configuration of "
                                           "Delaunay ends.")
    _add_common_args(subparser)
    _add_jmax_arg(subparser)
    subparser.add_argument("--ends", nargs=None, type=str,
                           default=None, required=True,
                           dest="ends",
                           help="Comma-separated Delaunay parameters, one "
                                "per end (at least two).")

    subparser = subparsers.add_parser("moduli-table",
                                      description="Sweep of the Delaunay "
                                                  "family.",
                                      help="Write (eps, T, R, H, D, D/H, "
                                           "Killing norm) over an eps grid, "
                                           "and the moduli line of RP^n "
                                           "minus a point.")
    _add_common_args(subparser)
    _add_grid_arg(subparser)

    subparser = subparsers.add_parser("verify",
                                      description="Run the acceptance suite.",
                                      help="Measure every acceptance "
                                           "quantity, write a JSON report, "
                                           "and exit nonzero on failure.")
    _add_common_args(subparser, n_required=False)
    _add_grid_arg(subparser)
    subparser.add_argument("--only", nargs="+", type=str,
                           default=None,
                           dest="only",
                           help="Run only these check groups.")
    subparser.add_argument("--check-tol-scale", nargs=None, type=float,
                           default=1.,
                           dest="check_tol_scale",
                           help="Divide every acceptance tolerance by this "
                                "factor. (default: %(default)s)")

    return subparsers
