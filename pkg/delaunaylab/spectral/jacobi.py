"""Jacobi fields of the linearized operator L_eps = Delta_eps + n about a
Delaunay orbit, their Wronskian pairing, and the deficiency coefficients
of a solution on an end."""

import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

import delaunaylab.spectral.consts as consts
from delaunaylab.spectral.delaunay import PeriodicOrbit, CylinderFunction, \
    force, force_derivative, equilibrium_ubar, solve_orbit
from delaunaylab.spectral.numerics import integrate_ivp
from delaunaylab.spectral.exceptions import ModeMismatchError, \
    IllConditionedFitError, ParameterRangeError, OrientationError


GROWTH_CLASSES = ('periodic', 'linear', 'exp_plus', 'exp_minus')
KINDS = {'phi1': 0, 'phi2': 0, 'phi3': 1, 'phi4': 1}


@dataclass(frozen=True)
class JacobiField:
    """A sampled solution of L_j phi = 0.

    Attributes:
        orbit: The Delaunay orbit the operator is linearized about.
        kind: One of 'phi1', 'phi2', 'phi3', 'phi4'.
        mode: Spherical harmonic degree, 0 for phi1/phi2, 1 for phi3/phi4.
        samples: Values with first and second derivatives.
        growth_class: 'periodic', 'linear', 'exp_plus' or 'exp_minus'.
        residual: Sup of |L_j phi| scaled by the growth envelope.

    """

    orbit: PeriodicOrbit = field(repr=False)
    kind: str
    mode: int
    samples: CylinderFunction = field(repr=False)
    growth_class: str
    residual: float = np.nan

    def __post_init__(self):
        assert self.kind in KINDS, f"Unknown Jacobi field kind '{self.kind}'."
        assert self.growth_class in GROWTH_CLASSES, \
            f"Unknown growth class '{self.growth_class}'."
        assert KINDS[self.kind] == self.mode, \
            f"{self.kind} lives in mode {KINDS[self.kind]}, not {self.mode}."

    @property
    def t(self) -> np.ndarray:
        return self.samples.coords

    @property
    def values(self) -> np.ndarray:
        return self.samples.values

    def metadata(self) -> dict:
        return {'kind': self.kind, 'mode': self.mode,
                'growth_class': self.growth_class,
                'residual': self.residual,
                'window': list(self.samples.window),
                'n': self.orbit.n, 'eps': self.orbit.eps}


def mode_lambda(n: int, j: int) -> float:
    """Eigenvalue -j(j+n-2) of the cross-sectional Laplacian."""
    return -float(j * (j + n - 2))


def default_window(orbit: PeriodicOrbit, periods: float = 2.) -> np.ndarray:
    return orbit.sample_times(periods=periods)


def mode_operator_residual(orbit: PeriodicOrbit,
                           lam: float,
                           t,
                           psi,
                           dpsi,
                           d2psi) -> np.ndarray:
    """L_j psi = u^{-4/(n-2)} (psi'' + lam psi) + 2 u' u^{-(n+2)/(n-2)} psi' + n psi."""
    n = orbit.n
    u, du = orbit.state(t)
    return u ** (-4. / (n - 2.)) * (d2psi + lam * psi) \
        + 2. * du * u ** (-(n + 2.) / (n - 2.)) * dpsi + n * psi


def _ratio(u, du, ddu, w, dw, ddw) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """psi = w/u with its first two derivatives."""
    psi = w / u
    dpsi = dw / u - w * du / u ** 2
    ddpsi = ddw / u - 2. * dw * du / u ** 2 - w * ddu / u ** 2 \
        + 2. * w * du ** 2 / u ** 3
    return psi, dpsi, ddpsi


def _phi1_parts(orbit: PeriodicOrbit, t) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    n = orbit.n
    u, du = orbit.state(t)
    ddu = force(n, u)
    dddu = force_derivative(n, u) * du
    return _ratio(u, du, ddu, du, ddu, dddu)


def _make_field(orbit, kind, t, parts, growth_class, envelope) -> JacobiField:
    psi, dpsi, ddpsi = parts
    mode = KINDS[kind]
    residual = mode_operator_residual(orbit, mode_lambda(orbit.n, mode), t,
                                      psi, dpsi, ddpsi)
    samples = CylinderFunction(coords=t, values=psi, coordinate='cylinder', n=orbit.n,
                               mode=mode, first=dpsi, second=ddpsi)
    return JacobiField(orbit=orbit, kind=kind, mode=mode, samples=samples,
                       growth_class=growth_class,
                       residual=float(np.max(np.abs(residual * envelope))))


def phi1(orbit: PeriodicOrbit, t=None) -> JacobiField:
    """The translation field phi_1 = u'/u, periodic with period T."""
    t = default_window(orbit) if t is None else np.atleast_1d(np.asarray(t, dtype=float))
    return _make_field(orbit, 'phi1', t, _phi1_parts(orbit, t), 'periodic', 1.)


def max_turning_point_derivative(orbit: PeriodicOrbit) -> float:
    """d u_max / d eps from differentiating U(u_max) = U(eps)."""
    return float(force(orbit.n, orbit.eps) / force(orbit.n, orbit.u_max))


def _sensitivity_rhs(n: int):
    def rhs(t, y):
        return np.array([y[1], force(n, y[0]), y[3], force_derivative(n, y[0]) * y[2]])
    return rhs


def sensitivity_states(orbit: PeriodicOrbit, t) -> np.ndarray:
    """(u, v, du/deps, dv/deps) at times t, integrated from the maximum.

    Negative times are reached by a separate backward integration.

    """

    t = np.atleast_1d(np.asarray(t, dtype=float))
    y0 = [orbit.u_max, 0., max_turning_point_derivative(orbit), 0.]
    rhs = _sensitivity_rhs(orbit.n)
    out = np.empty((t.size, 4))

    forward = t >= 0.
    if np.any(forward):
        end = max(float(t[forward].max()), orbit.T)
        out[forward] = integrate_ivp(rhs, y0, (0., end), tol=orbit.tol)(t[forward])
    if np.any(~forward):
        end = min(float(t[~forward].min()), -orbit.T)
        out[~forward] = integrate_ivp(rhs, y0, (0., end), tol=orbit.tol)(t[~forward])
    return out


def period_derivative_from_sensitivity(orbit: PeriodicOrbit) -> float:
    """T'(eps) = -dv/deps(T) / u''(0), read off the sensitivity solution."""
    if orbit.degenerate:
        raise ParameterRangeError("The sensitivity period derivative is undefined "
                                  "at the cylinder.")
    y = sensitivity_states(orbit, [orbit.T])[0]
    return float(-y[3] / force(orbit.n, orbit.u_max))


def phi2(orbit: PeriodicOrbit, t=None) -> JacobiField:
    """The Delaunay-parameter field phi_2 = (d u_eps / d eps) / u_eps.

    Normalized by d eps = 1, so phi_2(0) = u_max'(eps)/u_max under the
    maximum phase and phi_2(T/2) = 1/eps at the minimum.  At the cylinder
    the constant coefficient solution -cos(sqrt(n-2) t)/ubar is used.

    """

    t = default_window(orbit) if t is None else np.atleast_1d(np.asarray(t, dtype=float))
    n = orbit.n

    if orbit.degenerate:
        ubar = equilibrium_ubar(n)
        omega = np.sqrt(n - 2.)
        parts = (-np.cos(omega * t) / ubar, omega * np.sin(omega * t) / ubar,
                 omega ** 2 * np.cos(omega * t) / ubar)
        return _make_field(orbit, 'phi2', t, parts, 'periodic', 1.)

    y = sensitivity_states(orbit, t)
    u, du, w, dw = y[:, 0], y[:, 1], y[:, 2], y[:, 3]
    parts = _ratio(u, du, force(n, u), w, dw, force_derivative(n, u) * w)

    slope = period_derivative_from_sensitivity(orbit)
    growth = 'linear' if abs(slope) > 1e-6 else 'periodic'
    envelope = 1. / (1. + np.abs(t) / orbit.T)
    return _make_field(orbit, 'phi2', t, parts, growth, envelope)


def phi2_difference_quotient(orbit: PeriodicOrbit, t, h: float = 1e-5) -> np.ndarray:
    """(u_{eps+h}(t) - u_{eps-h}(t)) / (2 h u_eps(t)), the finite-difference
    counterpart of phi_2."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    upper = solve_orbit(orbit.n, orbit.eps + h, tol=orbit.tol)
    lower = solve_orbit(orbit.n, orbit.eps - h, tol=orbit.tol)
    return (upper.u(t) - lower.u(t)) / (2. * h * orbit.u(t))


def phi3(orbit: PeriodicOrbit, t=None) -> JacobiField:
    """phi_3 = e^t (phi_1 + (n-2)/2), the growing mode-1 field."""
    t = default_window(orbit) if t is None else np.atleast_1d(np.asarray(t, dtype=float))
    c = (orbit.n - 2.) / 2.
    f, df, ddf = _phi1_parts(orbit, t)
    e = np.exp(t)
    parts = (e * (f + c), e * (f + c + df), e * (f + c + 2. * df + ddf))
    return _make_field(orbit, 'phi3', t, parts, 'exp_plus', np.exp(-t))


def phi4(orbit: PeriodicOrbit, t=None) -> JacobiField:
    """phi_4 = e^{-t} ((n-2)/2 - phi_1), the decaying mode-1 field.

    Requires the maximum phase u(0) = u_max, under which u is even and the
    reflection of phi_3 is again a solution.

    """

    t = default_window(orbit) if t is None else np.atleast_1d(np.asarray(t, dtype=float))
    c = (orbit.n - 2.) / 2.
    f, df, ddf = _phi1_parts(orbit, t)
    e = np.exp(-t)
    parts = (e * (c - f), e * (f - c - df), e * (c - f + 2. * df - ddf))
    return _make_field(orbit, 'phi4', t, parts, 'exp_minus', np.exp(t))


def _same_orbit(a: PeriodicOrbit, b: PeriodicOrbit) -> bool:
    return a is b or (a.n == b.n and a.eps == b.eps)


def wronskian_pairing(f: JacobiField, g: JacobiField) -> CylinderFunction:
    """Weighted Wronskian u^2 (f' g - f g'), constant for two solutions of
    the same mode operator.

    Raises:
        ModeMismatchError: the fields belong to different modes or orbits.

    """

    if f.mode != g.mode:
        raise ModeMismatchError(f"Cannot pair a mode-{f.mode} field with "
                                f"a mode-{g.mode} field.")
    if not _same_orbit(f.orbit, g.orbit):
        raise ModeMismatchError("Jacobi fields belong to different orbits.")
    assert np.array_equal(f.t, g.t), "Jacobi fields must share their sample times."

    u = f.orbit.u(f.t)
    values = u ** 2 * (f.samples.first * g.values - f.values * g.samples.first)
    return CylinderFunction(coords=f.t, values=values, coordinate='cylinder',
                            n=f.orbit.n, mode=f.mode)


def relative_spread(samples: CylinderFunction) -> float:
    """(max - min) / max |value|; 0 for an identically vanishing function."""
    scale = np.max(np.abs(samples.values))
    if scale == 0.:
        return 0.
    return float((np.max(samples.values) - np.min(samples.values)) / scale)


@dataclass(frozen=True)
class DeficiencyCoefficients:
    """Coefficients (a_j, b_j) of phi_1, phi_2 on each of k ends."""

    a: Tuple[float, ...]
    b: Tuple[float, ...]

    def __post_init__(self):
        assert len(self.a) == len(self.b), "Need one (a, b) pair per end."
        assert np.all(np.isfinite(self.a)) and np.all(np.isfinite(self.b)), \
            "Deficiency coefficients must be finite."

    @property
    def k(self) -> int:
        return len(self.a)

    @classmethod
    def from_flat(cls, values: Sequence[float]) -> 'DeficiencyCoefficients':
        """From (a_1, b_1, a_2, b_2, ...)."""
        values = list(values)
        assert len(values) % 2 == 0, "Flat coefficient vector has odd length."
        return cls(a=tuple(values[0::2]), b=tuple(values[1::2]))


def symplectic_form(c1: DeficiencyCoefficients,
                    c2: DeficiencyCoefficients,
                    orientations: Optional[Sequence[int]] = None) -> float:
    """omega(c1, c2) = sum_j s_j (a_j beta_j - b_j alpha_j) with c1 = (a, b)
    and c2 = (alpha, beta); the sign convention of sum_j da_j ^ db_j.

    Coefficients read in each end's outward coordinate t_j take s_j = +1
    (the default).  Coefficients read in one global cylinder coordinate take
    s_j = -1 on the ends where t_j = -t.

    """
    if c1.k != c2.k:
        raise ModeMismatchError(f"Coefficient vectors have {c1.k} and {c2.k} ends.")
    signs = np.ones(c1.k) if orientations is None else np.asarray(orientations, dtype=float)
    if signs.shape != (c1.k,) or not np.all(np.abs(signs) == 1.):
        raise OrientationError(f"Need one orientation +-1 per end, got {orientations}.")
    a, b = np.asarray(c1.a), np.asarray(c1.b)
    alpha, beta = np.asarray(c2.a), np.asarray(c2.b)
    return float(np.sum(signs * (a * beta - b * alpha)))


class DeficiencyFit(NamedTuple):
    a: float
    b: float
    residual_norm: float


def synthesize_end_field(orbit: PeriodicOrbit, a: float, b: float, t) -> CylinderFunction:
    """a phi_1 + b phi_2 sampled on t."""
    f1, f2 = phi1(orbit, t), phi2(orbit, t)
    return CylinderFunction(coords=f1.t, values=a * f1.values + b * f2.values,
                            coordinate='cylinder', n=orbit.n, mode=0,
                            first=a * f1.samples.first + b * f2.samples.first,
                            second=a * f1.samples.second + b * f2.samples.second)


def extract_deficiency_coefficients(w: CylinderFunction,
                                    orbit: PeriodicOrbit,
                                    min_periods: float = 2.) -> DeficiencyFit:
    """Least-squares coefficients of w against {phi_1, phi_2} on its window.

    Args:
        w: Mode-0 samples in the cylinder coordinate.
        orbit: The model Delaunay orbit of the end.
        min_periods: Shortest admissible window, in periods.

    Returns:
        DeficiencyFit(a, b, residual_norm) with the root mean square remainder.

    Raises:
        IllConditionedFitError: window too short, or phi_1 and phi_2 not
            separable on it (as at the cylinder, where phi_1 vanishes).

    """

    if w.mode != 0:
        raise ModeMismatchError("Deficiency coefficients are defined on mode 0.")
    assert w.coordinate == 'cylinder', "Expected samples in the cylinder coordinate."

    lo, hi = w.window
    if hi - lo < min_periods * orbit.T * (1. - 1e-12):
        raise IllConditionedFitError(f"Fit window [{lo:.4g}, {hi:.4g}] is shorter "
                                     f"than {min_periods} periods (T = {orbit.T:.4g}).")

    design = np.column_stack([phi1(orbit, w.coords).values, phi2(orbit, w.coords).values])
    condition = np.linalg.cond(design)
    if not np.isfinite(condition) or condition > consts.MAX_FIT_CONDITION:
        raise IllConditionedFitError(f"Deficiency fit is ill-conditioned "
                                     f"(condition number {condition:.3e}).")

    coef, _, _, _ = np.linalg.lstsq(design, w.values, rcond=None)
    remainder = w.values - design @ coef
    fit = DeficiencyFit(a=float(coef[0]), b=float(coef[1]),
                        residual_norm=float(np.sqrt(np.mean(remainder ** 2))))
    logging.debug(f"Deficiency fit on [{lo:.4g}, {hi:.4g}]: a={fit.a:.10g}, "
                  f"b={fit.b:.10g}, residual={fit.residual_norm:.3e}")
    return fit


def fit_window(orbit: PeriodicOrbit,
               periods: Tuple[float, float] = consts.FIT_WINDOW_PERIODS,
               per_period: int = consts.SAMPLES_PER_PERIOD) -> np.ndarray:
    """Uniform samples on [p0 T, p1 T]."""
    start, stop = periods
    return orbit.sample_times(periods=stop - start, per_period=per_period,
                              start=start * orbit.T)
