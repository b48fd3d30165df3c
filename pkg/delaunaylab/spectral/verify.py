"""Acceptance suite: every quantitative statement about the Delaunay family
and its linear analysis, measured and compared to its target.

Each check group is a function of a VerificationContext that records
CheckResult entries.  Tolerances are divided by the configured
check_tol_scale, so a scale above 1 tightens every check.  A computation
error inside a group is recorded as a failed entry of that group.

"""

import logging
from dataclasses import dataclass, asdict
from typing import Callable, Dict, List, Tuple

import numpy as np

import delaunaylab.spectral.consts as consts
from delaunaylab.spectral.config import RunConfig
from delaunaylab.spectral.delaunay import PeriodicOrbit, solve_orbit, \
    equilibrium_ubar, closed_form_n4, resample_geodesic, period_T_oracle, \
    period_R_oracle, period_T_derivative, HomoclinicSolution
from delaunaylab.spectral.jacobi import phi1, phi2, phi3, phi4, default_window, \
    wronskian_pairing, relative_spread, extract_deficiency_coefficients, \
    fit_window, DeficiencyCoefficients, symplectic_form
from delaunaylab.spectral.floquet import sl_form, sphere_mode, band_structure, \
    cylinder_band_edge, check_zero_not_in_spec, monodromy, conjugation_identity, \
    spectrum_lower_bound
from delaunaylab.spectral.indicial import floquet_exponents, indicial_set, \
    EndModel, relative_index, fourier_laplace, inverse_fourier_laplace, \
    holonomy_residual, manufactured_end, fit_asymptote
from delaunaylab.spectral.pohozaev import calibrate_cn, dilational_invariant, \
    tracefree_ricci, pohozaev_functional, balancing_check, algebra_basis
from delaunaylab.spectral.exceptions import DelaunayLabError

# How a measured value is compared with its target.
COMPARISONS = ('close', 'below', 'positive', 'equal')


@dataclass(frozen=True)
class CheckResult:
    """One measured acceptance quantity.

    Attributes:
        group: Check group name.
        name: What was measured, with its parameters.
        measured: Measured value.
        target: Target value.
        tolerance: Tolerance after scaling (0 for exact comparisons).
        comparison: 'close' |measured - target| <= tolerance,
            'below' measured <= tolerance, 'positive' measured > target,
            'equal' measured == target.
        passed: Outcome.
        detail: Error message when the measurement itself failed.

    """

    group: str
    name: str
    measured: float
    target: float
    tolerance: float
    comparison: str
    passed: bool
    detail: str = ''


class VerificationContext:
    """Shared state of one verification run: configuration and orbit cache."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.scale = float(config.check_tol_scale)
        self.dims: Tuple[int, ...] = (config.n,) if config.n else consts.VERIFY_DIMENSIONS
        self.results: List[CheckResult] = []
        self._orbits: Dict[Tuple[int, float], PeriodicOrbit] = {}

    def orbit(self, n: int, eps: float) -> PeriodicOrbit:
        key = (int(n), float(eps))
        if key not in self._orbits:
            self._orbits[key] = solve_orbit(n, eps, tol=self.config.tolerance)
        return self._orbits[key]

    def grid(self, n: int) -> np.ndarray:
        ubar = equilibrium_ubar(n)
        if self.config.eps_grid:
            return np.array(sorted(e for e in self.config.eps_grid if 0. < e < ubar))
        return ubar * np.array(consts.VERIFY_EPS_FRACTIONS)

    def record(self, group: str, name: str, measured: float, target: float = 0.,
               tolerance: float = 0., comparison: str = 'below') -> CheckResult:
        assert comparison in COMPARISONS, f"Unknown comparison '{comparison}'."
        measured = float(measured)
        tol = tolerance / self.scale
        if comparison == 'close':
            passed = abs(measured - target) <= tol
        elif comparison == 'below':
            passed = measured <= tol
        elif comparison == 'positive':
            passed = measured > target
        else:
            passed = measured == target
        result = CheckResult(group=group, name=name, measured=measured, target=float(target),
                             tolerance=tol, comparison=comparison,
                             passed=bool(passed and np.isfinite(measured)))
        self.results.append(result)
        if not result.passed:
            logging.info(f"FAILED {group}: {name} = {measured:.6e} "
                         f"(target {target:.6e}, tolerance {tol:.1e})")
        return result

    def record_error(self, group: str, error: Exception):
        message = getattr(error, 'message', str(error))
        self.results.append(CheckResult(group=group, name='computation', measured=np.nan,
                                        target=np.nan, tolerance=0., comparison='equal',
                                        passed=False, detail=message))
        logging.error(f"{group}: {type(error).__name__}: {message}")


def check_closed_form_n4(ctx: VerificationContext):
    group = 'closed_form_n4'
    ubar = equilibrium_ubar(4)
    for eps in (0.1, 0.3, 0.5, 0.7 * ubar):
        orbit = ctx.orbit(4, eps)
        r = np.linspace(0., 2. * orbit.R, 257)
        error = np.max(np.abs(resample_geodesic(orbit, r).values - closed_form_n4(eps, r)))
        ctx.record(group, f"sup|u(r) - closed form| eps={eps:.6g}", error, 0., 1e-7)
        ctx.record(group, f"R eps={eps:.6g}", orbit.R, np.pi, 1e-8, 'close')


def check_period_limits(ctx: VerificationContext):
    group = 'period_limits'
    for n in ctx.dims:
        ubar = equilibrium_ubar(n)
        near = ctx.orbit(n, 0.999 * ubar)
        ctx.record(group, f"R(0.999 ubar) n={n}", near.R, 2. * np.pi / np.sqrt(n), 1e-2, 'close')
        ctx.record(group, f"T(0.999 ubar) n={n}", near.T, 2. * np.pi / np.sqrt(n - 2.), 1e-2,
                   'close')
        small = ctx.orbit(n, 1e-3)
        ctx.record(group, f"R(1e-3) n={n}", small.R, np.pi, 5e-2, 'close')


def check_energy(ctx: VerificationContext):
    group = 'energy'
    for n in ctx.dims:
        for eps in ctx.grid(n):
            orbit = ctx.orbit(n, eps)
            label = f"n={n} eps={eps:.6g}"
            ctx.record(group, f"H drift {label}", orbit.drift, 0., consts.MAX_HAMILTONIAN_DRIFT)
            ctx.record(group, f"|T - T_oracle| {label}",
                       abs(orbit.T - period_T_oracle(n, eps)), 0., 1e-8)
            ctx.record(group, f"|R - R_oracle| {label}",
                       abs(orbit.R - period_R_oracle(n, eps)), 0., 1e-8)


def check_jacobi(ctx: VerificationContext):
    group = 'jacobi'
    for n in ctx.dims:
        for eps in ctx.grid(n):
            orbit = ctx.orbit(n, eps)
            label = f"n={n} eps={eps:.6g}"
            t = default_window(orbit)
            f1, f2 = phi1(orbit, t), phi2(orbit, t)
            ctx.record(group, f"L0 residual phi1, phi2 {label}",
                       max(f1.residual, f2.residual), 0., 1e-7)
            ctx.record(group, f"L1 residual phi3, phi4 {label}",
                       max(phi3(orbit, t).residual, phi4(orbit, t).residual), 0., 1e-7)
            # phi2(t + T) - phi2(t) = -T'(eps) phi1(t)
            shifted = phi2(orbit, t + orbit.T)
            expected = -period_T_derivative(n, eps) * f1.values
            error = np.max(np.abs(shifted.values - f2.values - expected)) \
                / np.max(np.abs(expected))
            ctx.record(group, f"phi2 drift vs finite-difference T' {label}", error, 0., 1e-3)


def check_conjugation(ctx: VerificationContext):
    group = 'conjugation'
    for n in ctx.dims:
        for eps in ctx.grid(n):
            ctx.record(group, f"conjugation identity n={n} eps={eps:.6g}",
                       conjugation_identity(ctx.orbit(n, eps)).rel_error, 0., 1e-9)


def check_bands(ctx: VerificationContext):
    group = 'bands'
    for n in ctx.dims:
        cylinder = ctx.orbit(n, equilibrium_ubar(n))
        for j in (0, 1):
            edge = cylinder_band_edge(n, j)
            structure = band_structure(sl_form(cylinder, sphere_mode(n, j)),
                                       (edge - 0.5, edge + 0.5),
                                       consts.VERIFY_BAND_RESOLUTION)
            lowest = np.nan if structure.lowest_edge is None else structure.lowest_edge
            ctx.record(group, f"lowest edge of -L{j} at ubar n={n}", lowest, edge, 1e-6,
                       'close')
    if 4 in ctx.dims:
        orbit = ctx.orbit(4, 0.98 * equilibrium_ubar(4))
        structure = band_structure(sl_form(orbit, sphere_mode(4, 0)), (-3.5, -2.5),
                                   consts.VERIFY_BAND_RESOLUTION)
        ctx.record(group, "gap of -L0 containing -3n/4 at 0.98 ubar n=4",
                   float(structure.gap_containing(-3.) is not None), 1., 0., 'equal')
    for n in ctx.dims:
        grid = ctx.grid(n)
        for eps in (grid[0], grid[-1]):
            bound = spectrum_lower_bound(ctx.orbit(n, eps), j_max=1,
                                         resolution=consts.VERIFY_BAND_RESOLUTION)
            ctx.record(group, f"spectrum below -n n={n} eps={eps:.6g}",
                       max(0., -n - bound) if np.isfinite(bound) else np.nan, 0., 1e-8)


def check_gap_membership(ctx: VerificationContext):
    group = 'gap_membership'
    for n in ctx.dims:
        for eps in ctx.grid(n):
            orbit = ctx.orbit(n, eps)
            margin = min(check_zero_not_in_spec(orbit, j).margin for j in range(1, n + 3))
            ctx.record(group, f"min_j |Delta_j(0)| - 2 n={n} eps={eps:.6g}", margin, 0., 0.,
                       'positive')
        # The mode-1 margin grows as eps decreases.
        ordered = sorted(ctx.grid(n), reverse=True)
        trend = [check_zero_not_in_spec(ctx.orbit(n, eps), 1).margin for eps in ordered]
        ctx.record(group, f"mode-1 margin increasing as eps decreases n={n}",
                   float(np.all(np.diff(trend) > 0.)), 1., 0., 'equal')


def check_indicial(ctx: VerificationContext):
    group = 'indicial'
    for n in ctx.dims:
        for eps in ctx.grid(n):
            orbit = ctx.orbit(n, eps)
            label = f"n={n} eps={eps:.6g}"
            trace = monodromy(sl_form(orbit, sphere_mode(n, 0)), 0.).discriminant
            ctx.record(group, f"mode-0 monodromy trace {label}", trace, 2., 1e-7, 'close')
            gammas = sorted(e.gamma for e in floquet_exponents(orbit, 1))
            ctx.record(group, f"mode-1 exponents +-1 {label}",
                       max(abs(gammas[0] + 1.), abs(gammas[-1] - 1.)), 0., 1e-6)
            ctx.record(group, f"exponent set symmetric {label}",
                       float(indicial_set(orbit, n + consts.J_MAX_OFFSET).is_symmetric()),
                       1., 0., 'equal')


def check_relindex(ctx: VerificationContext):
    group = 'relindex'
    n = 4 if 4 in ctx.dims else ctx.dims[0]
    grid = ctx.grid(n)
    for k in (2, 3, 4, 5):
        ends = EndModel(n=n, eps=tuple(float(grid[i % grid.size]) for i in range(k)))
        result = relative_index(ends, solver=ctx.orbit)
        ctx.record(group, f"relative index k={k}", result.rel_index, 2 * k, 0., 'equal')
        ctx.record(group, f"dim bounded nullspace k={k}", result.dim_bounded_nullspace, k,
                   0., 'equal')


def check_pohozaev(ctx: VerificationContext):
    group = 'pohozaev'
    for n in ctx.dims:
        grid = ctx.grid(n)
        calibration = calibrate_cn(n, grid, solver=ctx.orbit)
        ctx.record(group, f"D/H spread n={n}", calibration.max_relative_deviation, 0., 1e-6)

        levels = np.array([ctx.orbit(n, eps).H for eps in grid])
        ctx.record(group, f"H strictly decreasing n={n}", np.min(-np.diff(levels)), 0., 0.,
                   'positive')

        target = n * (n - 1.)
        for eps in grid:
            orbit = ctx.orbit(n, eps)
            label = f"n={n} eps={eps:.6g}"
            sections = orbit.T * np.array([0., 0.3, 0.77, 1.5, -0.45])
            values = np.array([dilational_invariant(orbit, s) for s in sections])
            ctx.record(group, f"section independence {label}",
                       np.max(np.abs(values - values[0])) / abs(values[0]), 0., 1e-8)
            scalar = [tracefree_ricci(orbit, s).scalar_curvature
                      for s in orbit.sample_times(periods=1., per_period=16)]
            ctx.record(group, f"scalar curvature {label}",
                       np.max(np.abs(np.array(scalar) - target)) / target, 0., 1e-8)

        round_sphere = [tracefree_ricci(HomoclinicSolution(n), s)
                        for s in (-2., -0.5, 0., 0.7, 3.)]
        ctx.record(group, f"round sphere trace-free Ricci n={n}",
                   max(max(abs(c.tt), abs(c.angular)) for c in round_sphere), 0., 1e-8)

        orbit = ctx.orbit(n, grid[grid.size // 2])
        plus = pohozaev_functional(orbit, 1.3 * orbit.T, orientation=1, end=0)
        minus = pohozaev_functional(orbit, -0.6 * orbit.T, orientation=-1, end=1)
        _, fields = algebra_basis(n)
        worst = max(balancing_check([plus, minus], kf) for kf in fields)
        ctx.record(group, f"balancing P1 + P2 n={n}",
                   worst / max(1., abs(plus.dilational)), 0., 1e-8)


def check_pairing(ctx: VerificationContext):
    group = 'pairing'
    for n in ctx.dims:
        for eps in ctx.grid(n):
            orbit = ctx.orbit(n, eps)
            label = f"n={n} eps={eps:.6g}"
            t = default_window(orbit)
            pairing = wronskian_pairing(phi1(orbit, t), phi2(orbit, t))
            ctx.record(group, f"weighted Wronskian spread {label}",
                       relative_spread(pairing), 0., 1e-8)
            ctx.record(group, f"|weighted Wronskian| {label}",
                       abs(float(np.mean(pairing.values))), 0., 0., 'positive')

    # The two ends of one Delaunay metric, read in the global coordinate t.
    n = ctx.dims[0]
    grid = ctx.grid(n)
    orbit = ctx.orbit(n, grid[min(1, grid.size - 1)])
    forward = fit_window(orbit)
    backward = -forward[::-1]
    coefficients = []
    for field in (phi1, phi2):
        fits = [extract_deficiency_coefficients(field(orbit, window).samples, orbit)
                for window in (forward, backward)]
        coefficients.append(DeficiencyCoefficients(a=tuple(f.a for f in fits),
                                                   b=tuple(f.b for f in fits)))
    ctx.record(group, f"isotropy of a1=a2, b1=b2 n={n}",
               abs(symplectic_form(coefficients[0], coefficients[1], orientations=(1, -1))),
               0., 1e-10)


def check_fourier_laplace(ctx: VerificationContext):
    group = 'fourier_laplace'

    def h(s):
        return np.exp(-s)

    t = np.linspace(0., 0.95, 20)
    zeta = complex(0.7, 0.3)
    ctx.record(group, "holonomy relation", holonomy_residual(h, zeta, t), 0., 1e-10)
    closed = np.exp(-t) / (1. - np.exp(-1. - 1j * zeta))
    ctx.record(group, "geometric series closed form",
               np.max(np.abs(fourier_laplace(h, zeta, t) - closed)), 0., 1e-10)
    back = inverse_fourier_laplace(lambda s, z: fourier_laplace(h, z, s), t, c=0.3)
    ctx.record(group, "transform round trip", np.max(np.abs(back - h(t))), 0., 1e-8)


def check_asymptote(ctx: VerificationContext):
    group = 'asymptote'
    n, eps, eta, c, alpha = 4, 0.4, 0.3, 0.5, 1.3
    if n not in ctx.dims:
        n = ctx.dims[0]
        eps = 0.5 * equilibrium_ubar(n)
    orbit = ctx.orbit(n, eps)
    t = orbit.sample_times(periods=6.)
    fit = fit_asymptote(manufactured_end(orbit, eta, c, alpha, t), n)
    ctx.record(group, f"recovered eps n={n}", fit.eps, eps, 1e-4, 'close')
    ctx.record(group, f"recovered eta n={n}", fit.eta, eta, 1e-4, 'close')
    ctx.record(group, f"recovered alpha n={n}", fit.alpha, alpha, 1e-3, 'close')


CHECKS: Dict[str, Callable[[VerificationContext], None]] = {
    'closed_form_n4': check_closed_form_n4,
    'period_limits': check_period_limits,
    'energy': check_energy,
    'jacobi': check_jacobi,
    'conjugation': check_conjugation,
    'bands': check_bands,
    'gap_membership': check_gap_membership,
    'indicial': check_indicial,
    'relindex': check_relindex,
    'pohozaev': check_pohozaev,
    'pairing': check_pairing,
    'fourier_laplace': check_fourier_laplace,
    'asymptote': check_asymptote,
}


@dataclass(frozen=True)
class VerificationReport:
    results: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> List[CheckResult]:
        return [r for r in self.results if not r.passed]

    def summary(self) -> Dict[str, Dict[str, int]]:
        groups: Dict[str, Dict[str, int]] = {}
        for r in self.results:
            entry = groups.setdefault(r.group, {'passed': 0, 'failed': 0})
            entry['passed' if r.passed else 'failed'] += 1
        return groups

    def to_dict(self) -> dict:
        return {'passed': self.passed, 'summary': self.summary(),
                'checks': [asdict(r) for r in self.results]}


def run_verification(config: RunConfig) -> VerificationReport:
    """Run the selected check groups (all by default)."""
    selected = list(config.only) if config.only else list(CHECKS)
    unknown = [g for g in selected if g not in CHECKS]
    assert not unknown, f"Unknown check group(s): {', '.join(unknown)}."
    assert config.check_tol_scale > 0., "check_tol_scale must be positive."

    ctx = VerificationContext(config)
    for group in selected:
        logging.info(f"Running check group '{group}'")
        try:
            CHECKS[group](ctx)
        except DelaunayLabError as error:
            ctx.record_error(group, error)

    report = VerificationReport(results=ctx.results)
    for group, counts in report.summary().items():
        logging.info(f"{group}: {counts['passed']} passed, {counts['failed']} failed")
    return report
