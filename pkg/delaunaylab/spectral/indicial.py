"""Indicial data of the linearized operator on a Delaunay end: Floquet
exponents per mode, the sharp decay rate, the pole at the origin, the
relative index across the zero weight, the discrete Fourier-Laplace
transform and the fit of a solution to its Delaunay asymptote."""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from lmfit import Minimizer, Parameters

import delaunaylab.spectral.consts as consts
from delaunaylab.spectral.delaunay import PeriodicOrbit, CylinderFunction, \
    solve_orbit, equilibrium_ubar, check_dimension, period_T_oracle
from delaunaylab.spectral.floquet import sl_form, sphere_mode, monodromy, is_defective
from delaunaylab.spectral.exceptions import ParameterRangeError, \
    OrbitCorruptionError, SpectralResolutionError, DivergentSeriesError, \
    IllConditionedFitError, FitConvergenceError


class FloquetExponent(NamedTuple):
    """Growth rate gamma = log|mu| / T of a monodromy multiplier mu."""
    mode: int
    gamma: float
    multiplicity: int
    defective: bool
    harmonic_multiplicity: int = 1


def floquet_exponents(orbit: PeriodicOrbit, j: int) -> List[FloquetExponent]:
    """Exponents of the sigma = 0 monodromy of mode j.

    Since det M = 1 the multipliers pair as mu, 1/mu.  Outside the bands the
    larger one is recovered stably as |mu| = |Delta|/2 + sqrt(Delta^2/4 - 1),
    so gamma = arccosh(|Delta|/2) / T; inside a band (or on its edge) both
    multipliers lie on the unit circle and the exponent 0 is double.

    """

    if j < 0:
        raise ParameterRangeError(f"Mode degree must be nonnegative, got {j}.")
    mode = sphere_mode(orbit.n, j)
    result = monodromy(sl_form(orbit, mode), 0.)
    trace = result.discriminant

    if abs(trace) > 2. + consts.BAND_TOUCH_TOL:
        gamma = float(np.arccosh(abs(trace) / 2.) / orbit.T)
        return [FloquetExponent(j, gamma, 1, False, mode.multiplicity),
                FloquetExponent(j, -gamma, 1, False, mode.multiplicity)]
    return [FloquetExponent(j, 0., 2, result.defective, mode.multiplicity)]


def indicial_closed_form(n: int, j: int) -> float:
    """Positive exponent of mode j at the cylinder,
    sqrt(j(j+n-2) - (n-2)), and 0 for the oscillating mode j = 0."""
    n = check_dimension(n)
    value = j * (j + n - 2.) - (n - 2.)
    return float(np.sqrt(value)) if value > 0. else 0.


@dataclass(frozen=True)
class IndicialSet:
    """Merged exponents over modes 0..j_max, sorted by |gamma|.

    Attributes:
        orbit: The model orbit.
        entries: Exponents of every mode.
        gamma1: Smallest strictly positive exponent.

    """

    orbit: PeriodicOrbit = field(repr=False)
    entries: List[FloquetExponent]
    gamma1: float

    def exponents(self, mode: int) -> List[FloquetExponent]:
        return [e for e in self.entries if e.mode == mode]

    def positive_tail(self) -> np.ndarray:
        """Positive exponents ordered by mode degree."""
        return np.array([e.gamma for e in sorted(self.entries, key=lambda e: e.mode)
                         if e.gamma > 0.])

    def is_symmetric(self, tol: float = 1e-9) -> bool:
        for e in self.entries:
            partners = [f for f in self.entries if f.mode == e.mode
                        and abs(f.gamma + e.gamma) <= tol * max(1., abs(e.gamma))
                        and f.multiplicity == e.multiplicity]
            if not partners:
                return False
        return True

    def to_dict(self) -> dict:
        return {'n': self.orbit.n, 'eps': self.orbit.eps, 'gamma1': self.gamma1,
                'entries': [e._asdict() for e in self.entries]}


def indicial_set(orbit: PeriodicOrbit, j_max: int) -> IndicialSet:
    if j_max < 1:
        raise ParameterRangeError(f"j_max must be at least 1, got {j_max}.")
    entries = []
    for j in range(j_max + 1):
        entries.extend(floquet_exponents(orbit, j))
    entries.sort(key=lambda e: (abs(e.gamma), e.gamma, e.mode))
    positive = [e.gamma for e in entries if e.gamma > 0.]
    gamma1 = float(min(positive)) if positive else 0.
    return IndicialSet(orbit=orbit, entries=entries, gamma1=gamma1)


def sharp_decay_rate(orbit: PeriodicOrbit, j_max: Optional[int] = None) -> float:
    """The first nonzero element gamma_1 of the indicial set."""
    j_max = orbit.n if j_max is None else j_max
    if j_max < orbit.n:
        raise ParameterRangeError(f"j_max must be at least n = {orbit.n}, got {j_max}.")
    return indicial_set(orbit, j_max).gamma1


def pole_degree(M: np.ndarray) -> int:
    """Pole order at zero contributed by a mode-0 period map M.

    A unipotent M, either a nontrivial Jordan block or the identity (the
    cylinder, where phi_2 and its translate span), gives a pole of order 2.

    Raises:
        OrbitCorruptionError: trace or determinant of M is not 2 or 1, or M
            has the multiplier 1 without being unipotent.

    """

    M = np.asarray(M, dtype=float)
    assert M.shape == (2, 2), "A period map is a 2x2 matrix."
    trace = M[0, 0] + M[1, 1]
    determinant = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    if abs(trace - 2.) > consts.POLE_TRACE_TOL:
        raise OrbitCorruptionError(f"Mode-0 monodromy trace {trace:.12g} is not 2.")
    if abs(determinant - 1.) > consts.POLE_TRACE_TOL:
        raise OrbitCorruptionError(f"Mode-0 monodromy determinant {determinant:.12g} "
                                   f"is not 1.")
    if is_defective(M) or np.max(np.abs(M - np.eye(2))) <= consts.DEFECTIVE_OFFDIAG_TOL:
        return 2
    raise OrbitCorruptionError("Mode-0 monodromy has trace 2 but is neither a Jordan "
                               "block nor the identity.")


def pole_degree_at_zero(orbit: PeriodicOrbit) -> int:
    """Order of the pole at the origin, read from the mode-0 monodromy.

    Raises:
        OrbitCorruptionError: the period map is not unipotent, which cannot
            happen for a genuine Delaunay orbit (phi_1 is periodic).

    """

    M = monodromy(sl_form(orbit, sphere_mode(orbit.n, 0)), 0.).M
    try:
        return pole_degree(M)
    except OrbitCorruptionError as error:
        raise OrbitCorruptionError(f"{error.message} (n={orbit.n}, eps={orbit.eps:.6g})")


@dataclass(frozen=True)
class EndModel:
    """Delaunay parameters of the asymptotic model on each end."""

    n: int
    eps: Tuple[float, ...]

    def __post_init__(self):
        check_dimension(self.n)
        ubar = equilibrium_ubar(self.n)
        for value in self.eps:
            if not (0. < value <= ubar * (1. + 1e-14)):
                raise ParameterRangeError(f"End parameter {value} is outside "
                                          f"(0, {ubar:.12g}].")

    @property
    def k(self) -> int:
        return len(self.eps)


class RelativeIndex(NamedTuple):
    rel_index: int
    dim_bounded_nullspace: int
    delta: float
    gamma1: Tuple[float, ...]


def relative_index(ends: EndModel,
                   j_max: Optional[int] = None,
                   solver: Callable[[int, float], PeriodicOrbit] = solve_orbit) -> RelativeIndex:
    """Index jump of L across the weight 0: the sum of the pole degrees at 0
    over the ends, twice the dimension of the bounded nullspace.

    The weight window (0, min gamma_1) must be nonempty; its midpoint is
    reported as delta.

    """

    if ends.k < 2:
        raise ParameterRangeError(f"Need at least two ends, got {ends.k}.")
    j_max = ends.n if j_max is None else j_max

    orbits: Dict[float, PeriodicOrbit] = {}
    degrees, rates = [], []
    for eps in ends.eps:
        if eps not in orbits:
            orbits[eps] = solver(ends.n, eps)
        orbit = orbits[eps]
        degrees.append(pole_degree_at_zero(orbit))
        rates.append(sharp_decay_rate(orbit, j_max))

    gamma_min = min(rates)
    if gamma_min <= consts.BAND_TOUCH_TOL:
        raise SpectralResolutionError(f"Weight window is empty: smallest decay "
                                      f"rate {gamma_min:.3e}.")
    rel = int(sum(degrees))
    logging.info(f"Relative index over {ends.k} ends: {rel} (delta = {gamma_min / 2:.6g})")
    return RelativeIndex(rel_index=rel, dim_bounded_nullspace=rel // 2,
                         delta=gamma_min / 2., gamma1=tuple(rates))


def fourier_laplace(h: Callable[[np.ndarray], np.ndarray],
                    zeta: complex,
                    t) -> np.ndarray:
    """h^(t, zeta) = sum_{k >= ceil(-t)} e^{-i k zeta} h(t + k) for h
    supported in t >= 0, period normalized to 1.

    The sum is truncated once a block of terms falls below
    FOURIER_TRUNCATION relative to the partial sum.

    Raises:
        DivergentSeriesError: the terms do not decay (Im zeta above the
            decay line of h).

    """

    t = np.atleast_1d(np.asarray(t, dtype=float))
    zeta = complex(zeta)
    k0 = int(np.floor(np.min(-t)))
    block = 64
    total = np.zeros(t.shape, dtype=complex)
    first_peak = None

    for start in range(k0, k0 + consts.FOURIER_MAX_TERMS, block):
        k = np.arange(start, start + block, dtype=float)
        s = t[:, None] + k[None, :]
        values = np.where(s >= 0., h(np.clip(s, 0., None)), 0.)
        terms = np.exp(-1j * k[None, :] * zeta) * values
        total += terms.sum(axis=1)
        peak = float(np.max(np.abs(terms)))
        if first_peak is None and peak > 0.:
            first_peak = peak
        if first_peak is not None and peak > 1e8 * first_peak:
            raise DivergentSeriesError(f"Fourier-Laplace series diverges at zeta = {zeta}.")
        if first_peak is not None and peak < consts.FOURIER_TRUNCATION * max(1., np.max(np.abs(total))):
            return total

    raise DivergentSeriesError(f"Fourier-Laplace series not truncated after "
                               f"{consts.FOURIER_MAX_TERMS} terms at zeta = {zeta}.")


def inverse_fourier_laplace(transform: Callable[[np.ndarray, complex], np.ndarray],
                            t,
                            c: float,
                            nodes: int = consts.FOURIER_INVERSE_NODES) -> np.ndarray:
    """h(t) = (1/2 pi) int_{-pi}^{pi} h^(t, xi + i c) d xi on the line Im zeta = c,
    by the uniform (trapezoidal) rule, exact for compactly supported h of
    support shorter than the number of nodes."""
    xi = -np.pi + 2. * np.pi * np.arange(nodes) / nodes
    acc = np.zeros(np.shape(np.atleast_1d(t)), dtype=complex)
    for x in xi:
        acc += transform(t, complex(x, c))
    return acc / nodes


def holonomy_residual(h: Callable[[np.ndarray], np.ndarray], zeta: complex, t) -> float:
    """sup |h^(t+1, zeta) - e^{i zeta} h^(t, zeta)|."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return float(np.max(np.abs(fourier_laplace(h, zeta, t + 1.)
                               - np.exp(1j * complex(zeta)) * fourier_laplace(h, zeta, t))))


@dataclass(frozen=True)
class AsymptoteFit:
    """Best fit of samples to u_eps(t + eta) (1 + c e^{-alpha t})."""

    eps: float
    eta: float
    c: float
    alpha: float
    misfit: float
    nfev: int = 0

    def to_dict(self) -> dict:
        return {'eps': self.eps, 'eta': self.eta, 'c': self.c, 'alpha': self.alpha,
                'misfit': self.misfit, 'nfev': self.nfev}


class _OrbitCache:
    """Memoizes orbits by eps during a fit."""

    def __init__(self, n: int):
        self.n = n
        self.orbits: Dict[float, PeriodicOrbit] = {}

    def __call__(self, eps: float) -> PeriodicOrbit:
        if eps not in self.orbits:
            self.orbits[eps] = solve_orbit(self.n, eps)
        return self.orbits[eps]


def _seed(w: CylinderFunction, n: int) -> Tuple[float, float, float]:
    """(eps, eta, T) from the sample minimum and the first interior maximum."""
    ubar = equilibrium_ubar(n)
    eps = float(np.clip(np.min(w.values), consts.EPS_GUARD, ubar * (1. - 1e-6)))
    period = period_T_oracle(n, eps)
    values = w.values
    interior = np.where((values[1:-1] >= values[:-2]) & (values[1:-1] >= values[2:]))[0]
    t_peak = w.coords[interior[0] + 1] if interior.size else w.coords[np.argmax(values)]
    eta = float(np.mod(-t_peak + period / 2., period) - period / 2.)
    return eps, eta, period


def _residual(params, t, data, t0, orbits):
    eps = params['eps'].value
    orbit = orbits(eps)
    model = orbit.u(t + params['eta'].value) \
        * (1. + params['c0'].value * np.exp(-params['alpha'].value * (t - t0)))
    return model - data


def fit_asymptote(w: CylinderFunction,
                  n: int,
                  alpha0: float = 1.,
                  max_nfev: int = consts.ASYMPTOTE_MAX_NFEV) -> AsymptoteFit:
    """Fit w(t) ~ u_eps(t + eta) (1 + c e^{-alpha t}) by trust-region least
    squares over (eps, eta, c, alpha).

    The exponential is parametrized from the window start t0 internally,
    c e^{-alpha t} = c0 e^{-alpha (t - t0)}, which keeps c0 of order one.

    Raises:
        IllConditionedFitError: window shorter than MIN_ASYMPTOTE_PERIODS
            periods of the seeded eps.
        FitConvergenceError: the optimizer did not converge.

    """

    n = check_dimension(n)
    assert w.coordinate == 'cylinder' and w.mode == 0, \
        "Asymptote fits take mode-0 samples in the cylinder coordinate."
    eps0, eta0, period = _seed(w, n)
    t0, t1 = w.window
    if t1 - t0 < consts.MIN_ASYMPTOTE_PERIODS * period:
        raise IllConditionedFitError(f"Fit window [{t0:.4g}, {t1:.4g}] covers fewer than "
                                     f"{consts.MIN_ASYMPTOTE_PERIODS} periods "
                                     f"(T = {period:.4g}).")

    params = Parameters()
    params.add('eps', value=eps0, min=consts.EPS_GUARD, max=equilibrium_ubar(n))
    params.add('eta', value=eta0, min=eta0 - period / 2., max=eta0 + period / 2.)
    params.add('c0', value=0.)
    params.add('alpha', value=alpha0, min=consts.ASYMPTOTE_ALPHA_BOUNDS[0],
               max=consts.ASYMPTOTE_ALPHA_BOUNDS[1])

    minner = Minimizer(_residual, params,
                       fcn_args=(w.coords, w.values, t0, _OrbitCache(n)),
                       max_nfev=max_nfev)
    result = minner.minimize(method='least_squares', xtol=1e-12, ftol=1e-12, gtol=1e-12)
    misfit = float(np.sqrt(np.mean(result.residual ** 2)))
    if not result.success:
        raise FitConvergenceError(f"Asymptote fit did not converge: {result.message}",
                                  misfit=misfit)

    best = result.params
    alpha = best['alpha'].value
    fit = AsymptoteFit(eps=best['eps'].value, eta=best['eta'].value,
                       c=best['c0'].value * np.exp(alpha * t0), alpha=alpha,
                       misfit=misfit, nfev=result.nfev)
    logging.info(f"Asymptote fit: eps={fit.eps:.8g}, eta={fit.eta:.8g}, "
                 f"c={fit.c:.3e}, alpha={fit.alpha:.6g}, misfit={misfit:.2e}")
    return fit


def manufactured_end(orbit: PeriodicOrbit,
                     eta: float,
                     c: float,
                     alpha: float,
                     t) -> CylinderFunction:
    """Samples of u_eps(t + eta) (1 + c e^{-alpha t})."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return CylinderFunction(coords=t, values=orbit.u(t + eta) * (1. + c * np.exp(-alpha * t)),
                            coordinate='cylinder', n=orbit.n)
