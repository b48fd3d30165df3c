"""Construction of the Delaunay family u_eps on the cylinder R x S^{n-1}.

The conformal factor u(t) of g = u^{4/(n-2)} (dt^2 + dtheta^2) with scalar
curvature n(n-1) solves

    u'' - (n-2)^2/4 u + n(n-2)/4 u^{(n+2)/(n-2)} = 0,

a Hamiltonian system in (u, v = u') with energy

    H(u, v) = v^2/2 + (n-2)^2/8 u^{2n/(n-2)} - (n-2)^2/8 u^2.

Positive periodic solutions are the closed level curves H < 0 around the
equilibrium (ubar, 0); they are labelled by eps, the smaller turning point.

"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd

import delaunaylab.spectral.consts as consts
from delaunaylab.spectral.numerics import Tolerance, Trajectory, \
    ORBIT_TOLERANCE, integrate_ivp, locate_event, find_root, adaptive_quadrature
from delaunaylab.spectral.exceptions import ParameterRangeError, \
    EventNotFoundError, PeriodDetectionError, OrbitCorruptionError


COORDINATE_SYSTEMS = ('cylinder', 'geodesic', 'ball')

# Tolerance of the period oracles.
ORACLE_TOLERANCE = Tolerance(abs_tol=1e-13, rel_tol=1e-12)


def check_dimension(n: int) -> int:
    if int(n) != n or n < 3:
        raise ParameterRangeError(f"Dimension n must be an integer >= 3, got {n}.")
    return int(n)


def equilibrium_ubar(n: int) -> float:
    """The cylinder equilibrium ubar = ((n-2)/n)^{(n-2)/4}."""
    n = check_dimension(n)
    return ((n - 2.) / n) ** ((n - 2.) / 4.)


def hamiltonian(n: int, u, v):
    """Hamiltonian energy H(u, v) of the Delaunay flow."""
    c = (n - 2.) ** 2 / 8.
    u = np.asarray(u, dtype=float)
    return 0.5 * np.asarray(v, dtype=float) ** 2 \
        + c * u ** (2. * n / (n - 2.)) - c * u ** 2


def potential(n: int, u):
    """U(u) = H(u, 0)."""
    return hamiltonian(n, u, 0.)


def force(n: int, u):
    """v' = (n-2)^2/4 u - n(n-2)/4 u^{(n+2)/(n-2)} = -U'(u)."""
    u = np.asarray(u, dtype=float)
    return (n - 2.) ** 2 / 4. * u - n * (n - 2.) / 4. * u ** ((n + 2.) / (n - 2.))


def force_derivative(n: int, u):
    """d(force)/du, the coefficient of the variational equation."""
    u = np.asarray(u, dtype=float)
    return (n - 2.) ** 2 / 4. - n * (n + 2.) / 4. * u ** (4. / (n - 2.))


def homoclinic_u0(n: int, t):
    """The homoclinic (round sphere) solution u_0(t) = (cosh t)^{(2-n)/2}."""
    return np.cosh(np.asarray(t, dtype=float)) ** ((2. - n) / 2.)


def homoclinic_v0(n: int, t):
    """Derivative of u_0."""
    t = np.asarray(t, dtype=float)
    return (2. - n) / 2. * np.cosh(t) ** (-n / 2.) * np.sinh(t)


class HomoclinicSolution:
    """The H = 0 orbit, exposing the cross-section interface of an orbit.

    Args:
        n: Dimension.

    """

    def __init__(self, n: int):
        self.n = check_dimension(n)
        self.eps = 0.
        self.H = 0.

    def state(self, t) -> Tuple[np.ndarray, np.ndarray]:
        return homoclinic_u0(self.n, t), homoclinic_v0(self.n, t)


def max_turning_point(n: int, eps: float) -> float:
    """The larger turning point u_max in (ubar, 1) with U(u_max) = U(eps)."""
    ubar = equilibrium_ubar(n)
    level = potential(n, eps)
    return find_root(lambda u: potential(n, u) - level, ubar, 1.)


def min_turning_point(n: int, a: float) -> float:
    """The smaller turning point in (0, ubar) on the level of U(a), a > ubar."""
    ubar = equilibrium_ubar(n)
    level = potential(n, a)
    return find_root(lambda u: potential(n, u) - level, 1e-300, ubar)


def _check_eps(n: int, eps: float, eps_guard: float = consts.EPS_GUARD) -> float:
    ubar = equilibrium_ubar(n)
    if not np.isfinite(eps) or eps <= 0. or eps > ubar * (1. + 1e-14):
        raise ParameterRangeError(f"Delaunay parameter eps must lie in "
                                  f"(0, ubar] = (0, {ubar:.12g}], got {eps}.")
    if eps < eps_guard:
        raise ParameterRangeError(f"eps = {eps:.3e} is below the guard "
                                  f"{eps_guard:.1e}; lower the guard explicitly "
                                  f"to go closer to the round limit.")
    return min(float(eps), ubar)


def is_equilibrium(n: int, eps: float) -> bool:
    return eps >= equilibrium_ubar(n) * (1. - consts.EQUILIBRIUM_REL_GAP)


@dataclass(frozen=True)
class CylinderFunction:
    """Samples of a scalar function of one coordinate.

    Attributes:
        coords: Sample locations (t, r or rho depending on coordinate).
        values: Function values at coords.
        coordinate: One of 'cylinder' (t), 'geodesic' (r), 'ball' (rho).
        n: Dimension, needed by coordinate changes.
        mode: Spherical harmonic degree the function belongs to.
        first: Optional first derivative samples (same coordinate).
        second: Optional second derivative samples.

    """

    coords: np.ndarray
    values: np.ndarray
    coordinate: str = 'cylinder'
    n: Optional[int] = None
    mode: int = 0
    first: Optional[np.ndarray] = None
    second: Optional[np.ndarray] = None

    def __post_init__(self):
        assert self.coordinate in COORDINATE_SYSTEMS, \
            f"Unknown coordinate system '{self.coordinate}'."
        assert np.shape(self.coords) == np.shape(self.values), \
            "coords and values must have the same shape."
        assert np.all(np.isfinite(self.coords)), "Window bounds must be finite."
        for d in (self.first, self.second):
            assert d is None or np.shape(d) == np.shape(self.values), \
                "Derivative samples must match the values."

    @property
    def window(self) -> Tuple[float, float]:
        return float(np.min(self.coords)), float(np.max(self.coords))

    @property
    def has_derivatives(self) -> bool:
        return self.first is not None and self.second is not None


@dataclass(frozen=True)
class PeriodicOrbit:
    """A resolved Delaunay solution on one period, phased so u(0) = u_max.

    Attributes:
        n: Dimension.
        eps: Minimum of u over the orbit.
        T: Period in the cylinder coordinate t.
        R: Period in the geodesic coordinate r, R = int_0^T u^{2/(n-2)} dt.
        H: Hamiltonian energy H(eps, 0).
        u_max: Maximum of u over the orbit.
        trajectory: Dense output of (u, v, r) on [0, T].
        tol: Integrator tolerance used.
        drift: Maximum Hamiltonian drift observed over the period.
        degenerate: True for the cylinder eps = ubar.

    """

    n: int
    eps: float
    T: float
    R: float
    H: float
    u_max: float
    trajectory: Trajectory = field(repr=False)
    tol: Tolerance = ORBIT_TOLERANCE
    drift: float = 0.
    degenerate: bool = False

    def _reduce(self, t) -> Tuple[np.ndarray, np.ndarray]:
        t = np.asarray(t, dtype=float)
        cycles = np.floor(t / self.T)
        return t - cycles * self.T, cycles

    def state(self, t) -> Tuple[np.ndarray, np.ndarray]:
        """(u(t), v(t)) for any real t, through periodicity."""
        tau, _ = self._reduce(t)
        y = self.trajectory.solution(tau)
        return y[0], y[1]

    def u(self, t):
        return self.state(t)[0]

    def v(self, t):
        return self.state(t)[1]

    def acceleration(self, t):
        """u''(t) through the ODE, never by differentiation."""
        return force(self.n, self.u(t))

    def r(self, t):
        """Geodesic coordinate r(t) with r(0) = 0."""
        tau, cycles = self._reduce(t)
        return self.trajectory.solution(tau)[2] + cycles * self.R

    def t_of_r(self, r) -> np.ndarray:
        """Inverse of the monotone reparametrization r(t)."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        knots = np.linspace(0., self.T, 64 * consts.SAMPLES_PER_PERIOD + 1)
        r_knots = self.r(knots)
        cycles = np.floor(r / self.R)
        reduced = r - cycles * self.R
        t = np.interp(reduced, r_knots, knots)
        for _ in range(6):
            t = t - (self.r(t) - reduced) / self.u(t) ** (2. / (self.n - 2.))
        return t + cycles * self.T

    def hamiltonian_drift(self, t) -> float:
        u, v = self.state(t)
        return float(np.max(np.abs(hamiltonian(self.n, u, v) - self.H)))

    def sample_times(self, periods: float = 1., per_period: int = consts.SAMPLES_PER_PERIOD,
                     start: float = 0.) -> np.ndarray:
        count = int(round(periods * per_period))
        return start + np.arange(count + 1) * (self.T / per_period)

    def header(self) -> dict:
        return {'n': self.n, 'eps': self.eps, 'T': self.T, 'R': self.R,
                'H': self.H, 'u_max': self.u_max, 'drift': self.drift,
                'degenerate': self.degenerate,
                'abs_tol': self.tol.abs_tol, 'rel_tol': self.tol.rel_tol}


def _delaunay_field(n: int):
    p = 2. / (n - 2.)

    def field(t, y):
        u, v = y[0], y[1]
        return np.array([v, force(n, u), u ** p])

    return field


def solve_orbit(n: int,
                eps: float,
                tol: Tolerance = ORBIT_TOLERANCE,
                eps_guard: float = consts.EPS_GUARD) -> PeriodicOrbit:
    """Solve for the Delaunay orbit with minimum eps over one period.

    The orbit is launched from (u_max, 0), u_max found by bracketed root
    finding on U(u) = U(eps) in (ubar, 1).  The period T is the first return
    to the section v = 0 with u > ubar.  The geodesic coordinate r is
    integrated alongside so that R = r(T).

    Args:
        n: Dimension, n >= 3.
        eps: Delaunay parameter in (0, ubar].
        tol: Integrator tolerance.
        eps_guard: Smallest eps accepted.

    Returns:
        PeriodicOrbit.

    Raises:
        ParameterRangeError: eps outside (0, ubar] or below the guard.
        PeriodDetectionError: no return to the section found.
        OrbitCorruptionError: Hamiltonian drift above MAX_HAMILTONIAN_DRIFT.

    """

    n = check_dimension(n)
    eps = _check_eps(n, eps, eps_guard)
    ubar = equilibrium_ubar(n)
    rhs = _delaunay_field(n)

    if is_equilibrium(n, eps):
        # The cylinder: periods from the linearization at (ubar, 0).
        period = 2. * np.pi / np.sqrt(n - 2.)
        trajectory = integrate_ivp(rhs, [ubar, 0., 0.], (0., period), tol=tol)
        orbit = PeriodicOrbit(n=n, eps=ubar, T=period,
                              R=float(trajectory.states[-1, 2]),
                              H=float(potential(n, ubar)), u_max=ubar,
                              trajectory=trajectory, tol=tol, degenerate=True)
        logging.debug(f"Cylinder orbit n={n}: T={orbit.T:.12g}, R={orbit.R:.12g}")
        return orbit

    u_max = max_turning_point(n, eps)
    y0 = [u_max, 0., 0.]

    horizon = 4. * np.pi / np.sqrt(n - 2.)
    event = None
    for _ in range(consts.MAX_HORIZON_DOUBLINGS):
        trajectory = integrate_ivp(rhs, y0, (0., horizon), tol=tol)
        try:
            event = locate_event(trajectory, lambda y: y[1], direction=-1)
            break
        except EventNotFoundError:
            horizon *= 2.
    if event is None:
        raise PeriodDetectionError(f"No return to the section v = 0 within "
                                   f"t = {horizon:.6g} for n={n}, eps={eps:.6g}.")
    if event.state[0] <= ubar:
        raise PeriodDetectionError(f"Section return at u = {event.state[0]:.6g} "
                                   f"is not beyond ubar for n={n}, eps={eps:.6g}.")

    period = event.t
    trajectory = integrate_ivp(rhs, y0, (0., period), tol=tol)
    level = float(potential(n, eps))

    orbit = PeriodicOrbit(n=n, eps=eps, T=period, R=float(trajectory.states[-1, 2]),
                          H=level, u_max=u_max, trajectory=trajectory, tol=tol)

    check_times = np.linspace(0., period, 8 * trajectory.times.size + 1)
    drift = orbit.hamiltonian_drift(check_times)
    if drift > consts.MAX_HAMILTONIAN_DRIFT:
        raise OrbitCorruptionError(f"Hamiltonian drift {drift:.3e} over one period "
                                   f"exceeds {consts.MAX_HAMILTONIAN_DRIFT:.1e} "
                                   f"(n={n}, eps={eps:.6g}).")
    orbit = PeriodicOrbit(n=n, eps=eps, T=period, R=orbit.R, H=level, u_max=u_max,
                          trajectory=trajectory, tol=tol, drift=drift)

    logging.debug(f"Delaunay orbit n={n}, eps={eps:.6g}: T={period:.12g}, "
                  f"R={orbit.R:.12g}, H={level:.12g}, drift={drift:.2e}")

    return orbit


def _energy_gap(n: int, eps: float):
    level = potential(n, eps)
    return lambda u: 1. / np.sqrt(2. * (level - potential(n, u)))


def period_T_oracle(n: int, eps: float, tol: Tolerance = ORACLE_TOLERANCE) -> float:
    """T(eps) = 2 int_eps^{u_max} du / sqrt(2 (H_0 - U(u))) by quadrature."""
    n = check_dimension(n)
    eps = _check_eps(n, eps, eps_guard=0.)
    if is_equilibrium(n, eps):
        return 2. * np.pi / np.sqrt(n - 2.)
    u_max = max_turning_point(n, eps)
    return 2. * adaptive_quadrature(_energy_gap(n, eps), eps, u_max,
                                    tol=tol, singular='both')


def period_R_oracle(n: int, eps: float, tol: Tolerance = ORACLE_TOLERANCE) -> float:
    """R(eps) = 2 int_eps^{u_max} u^{2/(n-2)} du / sqrt(2 (H_0 - U(u)))."""
    n = check_dimension(n)
    eps = _check_eps(n, eps, eps_guard=0.)
    if is_equilibrium(n, eps):
        return 2. * np.pi / np.sqrt(n)
    u_max = max_turning_point(n, eps)
    gap = _energy_gap(n, eps)
    p = 2. / (n - 2.)
    return 2. * adaptive_quadrature(lambda u: u ** p * gap(u), eps, u_max,
                                    tol=tol, singular='both')


def period_T_derivative(n: int, eps: float, h: float = 1e-5) -> float:
    """T'(eps) by a centered finite difference of the period oracle."""
    return (period_T_oracle(n, eps + h) - period_T_oracle(n, eps - h)) / (2. * h)


def closed_form_n4(eps: float, r):
    """Explicit n = 4 solution in the geodesic coordinate,
    u(r) = sqrt(1/2 + (1/2 - eps^2) cos 2r), minimal at r = pi/2 + l pi."""
    ubar = equilibrium_ubar(4)
    if not (0. < eps <= ubar * (1. + 1e-14)):
        raise ParameterRangeError(f"eps must lie in (0, sqrt(1/2)], got {eps}.")
    return np.sqrt(0.5 + (0.5 - eps ** 2) * np.cos(2. * np.asarray(r, dtype=float)))


def resample_geodesic(orbit: PeriodicOrbit, r) -> CylinderFunction:
    """u as a function of the geodesic coordinate r."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    t = orbit.t_of_r(r)
    return CylinderFunction(coords=r, values=orbit.u(t), coordinate='geodesic',
                            n=orbit.n)


def orbit_samples(orbit, t) -> CylinderFunction:
    """u(t) samples with exact derivatives from the ODE."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    u, v = orbit.state(t)
    return CylinderFunction(coords=t, values=u, coordinate='cylinder', n=orbit.n,
                            first=v, second=force(orbit.n, u))


def quotient_perturbation(orbit: PeriodicOrbit,
                          other,
                          shift: float,
                          t) -> CylinderFunction:
    """v = u_other(t + shift) / u(t) - 1 with exact derivatives.

    Both factors solve the Delaunay ODE, so the first and second
    derivatives are assembled from (u, u', u'') without differencing.

    """

    t = np.atleast_1d(np.asarray(t, dtype=float))
    n = orbit.n
    u, du = orbit.state(t)
    ddu = force(n, u)
    w, dw = other.state(t + shift)
    ddw = force(n, w)

    psi = w / u
    dpsi = dw / u - w * du / u ** 2
    ddpsi = ddw / u - 2. * dw * du / u ** 2 - w * ddu / u ** 2 + 2. * w * du ** 2 / u ** 3

    return CylinderFunction(coords=t, values=psi - 1., coordinate='cylinder', n=n,
                            first=dpsi, second=ddpsi)


def nonlinear_residual(orbit: PeriodicOrbit, v: CylinderFunction) -> CylinderFunction:
    """N_eps(v) = Laplacian_eps v + n v + Q(v) for a rotationally symmetric v.

    Q(v) = n(n-2)/4 ((1+v)^{(n+2)/(n-2)} - 1 - (n+2)/(n-2) v).  Only mode 0
    is accepted: Q couples spherical modes, so a single mode j >= 1 is not
    closed under N.

    Raises:
        ParameterRangeError: 1 + v is not positive.

    """

    assert v.coordinate == 'cylinder', "Residual is evaluated in the t coordinate."
    assert v.mode == 0, "The nonlinear residual is defined on mode 0 only."
    assert v.has_derivatives, "Nonlinear residual needs first and second derivatives."
    if np.any(1. + v.values <= 0.):
        raise ParameterRangeError("1 + v must be positive for the nonlinear residual.")

    n = orbit.n
    u, du = orbit.state(v.coords)
    q = (n + 2.) / (n - 2.)
    laplacian = u ** (-4. / (n - 2.)) * v.second \
        + 2. * du * u ** (-q) * v.first
    nonlinear = n * (n - 2.) / 4. * ((1. + v.values) ** q - 1. - q * v.values)
    residual = laplacian + n * v.values + nonlinear

    return CylinderFunction(coords=v.coords, values=residual, coordinate='cylinder', n=n)


def to_ball(source: Union[CylinderFunction, PeriodicOrbit, HomoclinicSolution],
            rho=None) -> CylinderFunction:
    """Transform to the punctured ball, u~(rho) = rho^{(2-n)/2} u(-log rho).

    Args:
        source: A cylinder-coordinate CylinderFunction (its samples are
            mapped point by point), or an orbit evaluated on rho.
        rho: Radii in (0, 1], required for an orbit source.

    Raises:
        ParameterRangeError: a radius is not in (0, 1], or a cylinder sample
            has t < 0.

    """

    if isinstance(source, CylinderFunction):
        assert source.coordinate == 'cylinder', "to_ball expects cylinder samples."
        assert source.n is not None, "Dimension is needed for the ball transform."
        if np.any(source.coords < 0.):
            raise ParameterRangeError("Cylinder samples with t < 0 lie outside the unit "
                                      "ball (rho = e^{-t} > 1).")
        n = source.n
        rho = np.exp(-source.coords)
        values = source.values
    else:
        assert rho is not None, "A rho grid is needed to transform an orbit."
        n = source.n
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        if np.any(rho <= 0.):
            raise ParameterRangeError("Ball radii must be positive.")
        if np.any(rho > 1.):
            raise ParameterRangeError("Ball radii must lie in (0, 1].")
        values = source.state(-np.log(rho))[0]

    return CylinderFunction(coords=rho, values=rho ** ((2. - n) / 2.) * values,
                            coordinate='ball', n=n, mode=getattr(source, 'mode', 0))


def from_ball(f: CylinderFunction) -> CylinderFunction:
    """Inverse of to_ball: u(t) = e^{-(n-2)t/2} u~(e^{-t})."""
    assert f.coordinate == 'ball', "from_ball expects ball samples."
    if np.any(f.coords <= 0.) or np.any(f.coords > 1.):
        raise ParameterRangeError("Ball radii must lie in (0, 1].")
    t = -np.log(f.coords)
    return CylinderFunction(coords=t, values=f.coords ** ((f.n - 2.) / 2.) * f.values,
                            coordinate='cylinder', n=f.n, mode=f.mode)


def default_eps_grid(n: int,
                     step: float = consts.EPS_GRID_STEP,
                     max_fraction: float = consts.EPS_GRID_MAX_FRACTION) -> np.ndarray:
    """eps = step, 2 step, ... up to max_fraction * ubar."""
    top = max_fraction * equilibrium_ubar(n)
    count = int(np.floor(top / step + 1e-9))
    return step * np.arange(1, count + 1)


def projective_moduli_line(n: int, a) -> pd.DataFrame:
    """The moduli line of RP^n minus a point.

    Each a on the u-axis with H(a, 0) < 0 is u(0) of a Delaunay solution
    with a critical point at t = 0: a < ubar is the minimum-phase solution
    with eps = a, a > ubar the maximum-phase one whose eps is the partner
    turning point, and a = ubar is the cylinder at the origin of the line.

    """

    n = check_dimension(n)
    ubar = equilibrium_ubar(n)
    rows = []
    for value in np.atleast_1d(np.asarray(a, dtype=float)):
        if not (0. < value < 1.):
            raise ParameterRangeError(f"u(0) = {value} is outside the region H < 0.")
        if np.isclose(value, ubar, rtol=consts.EQUILIBRIUM_REL_GAP, atol=0.):
            eps, phase = ubar, 'cylinder'
        elif value < ubar:
            eps, phase = value, 'minimum'
        else:
            eps, phase = min_turning_point(n, value), 'maximum'
        rows.append({'u0': value, 'signed_coordinate': value - ubar, 'eps': eps,
                     'phase': phase, 'H': float(potential(n, value))})
    return pd.DataFrame(rows)


def phase_portrait(n: int, levels, samples: int = 401) -> pd.DataFrame:
    """Points of the level sets {H = h} in the (u, v) half plane u > 0.

    Levels must lie in [H(ubar), 0]; the level 0 is the homoclinic loop.

    """

    n = check_dimension(n)
    ubar = equilibrium_ubar(n)
    floor = float(potential(n, ubar))
    frames = []
    for h in np.atleast_1d(np.asarray(levels, dtype=float)):
        if h < floor or h > 0.:
            raise ParameterRangeError(f"Level {h} is outside [{floor:.6g}, 0].")
        if h == floor:
            u_lo = u_hi = ubar
        elif h == 0.:
            u_lo, u_hi = 0., 1.
        else:
            u_lo = find_root(lambda u: potential(n, u) - h, 1e-300, ubar)
            u_hi = find_root(lambda u: potential(n, u) - h, ubar, 1.)
        phi = np.linspace(0., np.pi, samples)
        u = 0.5 * (u_lo + u_hi) - 0.5 * (u_hi - u_lo) * np.cos(phi)
        v = np.sqrt(np.clip(2. * (h - potential(n, u)), 0., None))
        frames.append(pd.DataFrame({'level': h,
                                    'u': np.concatenate([u, u[::-1]]),
                                    'v': np.concatenate([v, -v[::-1]])}))
    return pd.concat(frames, ignore_index=True)
