"""Shared numerical kernels: integration, events, roots, quadrature and the
2x2 eigenproblem.

Every routine is a pure function of its inputs.  Tolerances are passed
explicitly as Tolerance objects so that callers can state the accuracy they
rely on.

"""

import logging
from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy.integrate import OdeSolution, solve_ivp, quad
from scipy.optimize import brentq

import delaunaylab.spectral.consts as consts
from delaunaylab.spectral.exceptions import IntegrationError, \
    EventNotFoundError, QuadratureError, ParameterRangeError


VectorField = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Tolerance:
    """Absolute and relative error targets.

    Args:
        abs_tol: Absolute tolerance, strictly positive.
        rel_tol: Relative tolerance, strictly positive.

    """

    abs_tol: float = consts.ABS_TOL
    rel_tol: float = consts.REL_TOL

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ParameterRangeError(f"Tolerances must be strictly positive, "
                                      f"got abs_tol={self.abs_tol}, "
                                      f"rel_tol={self.rel_tol}.")

    def scaled(self, factor: float) -> 'Tolerance':
        return Tolerance(abs_tol=self.abs_tol * factor,
                         rel_tol=self.rel_tol * factor)


ORBIT_TOLERANCE = Tolerance(abs_tol=consts.ORBIT_ABS_TOL,
                            rel_tol=consts.ORBIT_REL_TOL)


@dataclass(frozen=True)
class Trajectory:
    """Result of an initial value integration with dense output.

    Attributes:
        times: Integrator knots, strictly increasing (or decreasing for a
            backward integration).
        states: Array of shape (len(times), dim) of states at the knots.
        solution: scipy OdeSolution giving the dense interpolant.

    """

    times: np.ndarray
    states: np.ndarray
    solution: OdeSolution

    @property
    def t_span(self) -> Tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def __call__(self, t) -> np.ndarray:
        """Interpolated state(s).  Returns shape (dim,) for scalar t and
        (len(t), dim) for an array."""
        values = self.solution(t)
        if np.ndim(t) == 0:
            return values
        return values.T


def integrate_ivp(field: VectorField,
                  y0,
                  t_span: Tuple[float, float],
                  tol: Tolerance = Tolerance(),
                  max_step: float = np.inf) -> Trajectory:
    """Integrate an initial value problem with an adaptive 8(5,3)
    Dormand-Prince pair and keep its dense output.

    Args:
        field: Right hand side f(t, y).
        y0: Initial state.
        t_span: (t0, t1) with t0 != t1.  Backward integration is allowed.
        tol: Error targets handed to the step size controller.
        max_step: Optional cap on the step size.

    Returns:
        Trajectory with dense output on all of t_span.

    Raises:
        IntegrationError: step size underflow, carrying the failing t.

    """

    t0, t1 = float(t_span[0]), float(t_span[1])
    if t0 == t1:
        raise ParameterRangeError("Integration interval is degenerate.")

    sol = solve_ivp(field, (t0, t1), np.atleast_1d(np.asarray(y0, dtype=float)),
                    method='DOP853', rtol=tol.rel_tol, atol=tol.abs_tol,
                    dense_output=True, max_step=max_step)

    if not sol.success:
        raise IntegrationError(f"Integrator failed: {sol.message}",
                               t=float(sol.t[-1]))

    return Trajectory(times=sol.t, states=sol.y.T, solution=sol.sol)


def ode_residual(trajectory: Trajectory,
                 field: VectorField,
                 t: np.ndarray,
                 h: float = 1e-5) -> np.ndarray:
    """Residual |y'(t) - f(t, y(t))| of the dense interpolant, the
    derivative taken by a fourth order central difference of step h."""

    t = np.atleast_1d(np.asarray(t, dtype=float))
    d = (-trajectory(t + 2 * h) + 8 * trajectory(t + h)
         - 8 * trajectory(t - h) + trajectory(t - 2 * h)) / (12 * h)
    f = np.array([field(ti, trajectory(ti)) for ti in t])
    return np.max(np.abs(d - f), axis=1)


class Event(NamedTuple):
    t: float
    state: np.ndarray


def locate_event(trajectory: Trajectory,
                 event: Callable[[np.ndarray], float],
                 direction: int = 0,
                 skip_start: bool = True) -> Event:
    """Find the first crossing of an event function along a trajectory.

    The event is scanned on the integrator knots (each step subdivided into
    EVENT_SCAN_SUBDIVISIONS pieces), and the first bracket with the
    requested direction is refined with Brent's method on the dense output.

    Args:
        trajectory: Dense-output trajectory.
        event: Scalar function of the state.
        direction: +1 for upward (negative to positive) crossings, -1 for
            downward, 0 for either.
        skip_start: Ignore a zero of the event exactly at the first knot.

    Returns:
        Event(t, state) with |event(state)| at the refinement tolerance.

    Raises:
        EventNotFoundError: no crossing on the trajectory.

    """

    knots = trajectory.times
    fractions = np.linspace(0., 1., consts.EVENT_SCAN_SUBDIVISIONS, endpoint=False)
    grid = (knots[:-1, None] + np.diff(knots)[:, None] * fractions[None, :]).ravel()
    grid = np.append(grid, knots[-1])
    values = np.array([event(s) for s in trajectory(grid)])

    start = 0
    if skip_start:
        # Step off a zero sitting on the initial point.
        while start < values.size - 1 and values[start] == 0.:
            start += 1

    for i in range(start, values.size - 1):
        g0, g1 = values[i], values[i + 1]
        up = (g0 < 0.) and (g1 >= 0.)
        down = (g0 > 0.) and (g1 <= 0.)
        if (direction > 0 and up) or (direction < 0 and down) \
                or (direction == 0 and (up or down)):
            if g1 == 0.:
                t_star = float(grid[i + 1])
            else:
                t_star = brentq(lambda s: event(trajectory(s)),
                                grid[i], grid[i + 1],
                                xtol=consts.EVENT_XTOL, maxiter=200)
            return Event(t=t_star, state=trajectory(t_star))

    raise EventNotFoundError(f"Event function has no sign change "
                             f"(direction {direction}) on "
                             f"[{knots[0]:.6g}, {knots[-1]:.6g}].")


def find_event(field: VectorField,
               y0,
               event: Callable[[np.ndarray], float],
               direction: int,
               horizon: float,
               t0: float = 0.,
               tol: Tolerance = Tolerance()) -> Event:
    """Integrate from (t0, y0) up to t0 + horizon and return the first
    crossing of the event function with the given direction.

    Raises:
        EventNotFoundError: no crossing before the horizon.

    """

    trajectory = integrate_ivp(field, y0, (t0, t0 + horizon), tol=tol)
    return locate_event(trajectory, event, direction=direction)


def find_root(f: Callable[[float], float],
              a: float,
              b: float,
              xtol: float = 1e-15) -> float:
    """Bracketed root of a scalar function by Brent's method.

    Raises:
        ParameterRangeError: f(a) and f(b) have the same sign.

    """

    fa, fb = f(a), f(b)
    if fa == 0.:
        return a
    if fb == 0.:
        return b
    if np.sign(fa) == np.sign(fb):
        raise ParameterRangeError(f"Root is not bracketed by [{a}, {b}]: "
                                  f"f(a)={fa:.3e}, f(b)={fb:.3e}.")
    return brentq(f, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=500)


def adaptive_quadrature(f: Callable[[float], float],
                        a: float,
                        b: float,
                        tol: Tolerance = Tolerance(),
                        singular: Optional[str] = None) -> float:
    """Adaptive Gauss-Kronrod quadrature of f over (a, b).

    Integrable square-root singularities are removed by substitution before
    the quadrature sees the integrand:

        'left':  x = a + (b - a) s^2
        'right': x = b - (b - a) s^2
        'both':  x = (a + b)/2 - (b - a)/2 cos(phi),  phi in (0, pi)

    Args:
        f: Integrand.
        a, b: Integration limits.
        tol: Error targets.
        singular: None, 'left', 'right' or 'both'.

    Returns:
        The integral estimate.

    Raises:
        QuadratureError: the error estimate stays above the request.

    """

    if a == b:
        return 0.
    width = b - a

    if singular is None:
        g, lo, hi = f, a, b
    elif singular == 'left':
        g, lo, hi = (lambda s: f(a + width * s * s) * 2. * width * s), 0., 1.
    elif singular == 'right':
        g, lo, hi = (lambda s: f(b - width * s * s) * 2. * width * s), 0., 1.
    elif singular == 'both':
        half = 0.5 * width
        mid = 0.5 * (a + b)
        g, lo, hi = (lambda p: f(mid - half * np.cos(p)) * half * np.sin(p)), 0., np.pi
    else:
        raise ValueError(f"Unknown singularity type '{singular}'.")

    result = quad(g, lo, hi, epsabs=tol.abs_tol, epsrel=tol.rel_tol,
                  limit=consts.QUAD_LIMIT, full_output=1)
    value, error = result[0], result[1]
    if len(result) > 3:
        budget = max(tol.abs_tol, tol.rel_tol * abs(value)) * consts.QUAD_ERROR_SLACK
        if not np.isfinite(value) or error > budget:
            raise QuadratureError(f"Quadrature did not converge on "
                                  f"[{a:.6g}, {b:.6g}]: {result[3]} "
                                  f"(error estimate {error:.3e}).")
        logging.debug(f"Quadrature warning accepted (error {error:.3e}): {result[3]}")

    return float(value)


class Eigenpair(NamedTuple):
    value: complex
    vector: np.ndarray


class EigenDecomposition2x2(NamedTuple):
    pairs: List[Eigenpair]
    trace: float
    determinant: float
    discriminant: float
    repeated: bool


def eigen_2x2(matrix: np.ndarray) -> EigenDecomposition2x2:
    """Eigenvalues and eigenvectors of a real 2x2 matrix.

    The repeated flag is set when the discriminant tr^2 - 4 det of the
    characteristic polynomial is below EIGEN_DISCRIMINANT_TOL relative to
    max(1, tr^2): the matrix is then scalar or a Jordan block, and the
    returned eigenvectors may not span the plane.

    """

    matrix = np.asarray(matrix, dtype=float)
    assert matrix.shape == (2, 2), f"Expected a 2x2 matrix, got {matrix.shape}."

    trace = float(np.trace(matrix))
    det = float(np.linalg.det(matrix))
    disc = trace * trace - 4. * det
    repeated = abs(disc) <= consts.EIGEN_DISCRIMINANT_TOL * max(1., trace * trace)

    values, vectors = np.linalg.eig(matrix)
    order = np.argsort(-np.abs(values), kind='stable')
    pairs = [Eigenpair(value=complex(values[i]), vector=vectors[:, i])
             for i in order]

    return EigenDecomposition2x2(pairs=pairs, trace=trace, determinant=det,
                                 discriminant=disc, repeated=bool(repeated))
