"""Pohozaev invariants of Delaunay metrics.

Chart.  The cylinder R x S^{n-1} is identified with S^n minus {+p_1, -p_1},
p_1 = e_n in R^{n+1}, through

    q(t, theta) = (sech t * theta, tanh t),

which is inverse stereographic projection of x = e^{-t} theta.  The end
t -> +infinity is the puncture p_1.  For a conformal Killing field
X_q = X_0 q + w - <q, w> q with X_0 = [[A, b], [-b^T, 0]], the component of X
along d/dt is

    X^t(t, theta) = w_n - sinh t (w' . theta) - cosh t (b . theta),

affine in theta.  For g = u^{4/(n-2)} (dt^2 + dtheta^2) the trace-free Ricci
tensor is diagonal in (t, theta), so on a section {t} x S^{n-1} with normal
nu = u^{-2/(n-2)} d/dt and area element u^{2(n-1)/(n-2)} dtheta

    T(X, nu) dsigma = X^t u^{2n/(n-2)} T_tt dtheta,

T_tt being the frame component.  The angular integral of an affine function of
theta reduces to a polar-angle integral about its gradient.

"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import torch
from scipy.special import gamma as gamma_function

import delaunaylab.spectral.consts as consts
from delaunaylab.spectral.delaunay import PeriodicOrbit, check_dimension, force, \
    solve_orbit, default_eps_grid
from delaunaylab.spectral.numerics import Tolerance, adaptive_quadrature
from delaunaylab.spectral.exceptions import ParameterRangeError, OrientationError, \
    DegenerateGramError, OrbitCorruptionError

# Largest relative spread of D(eps)/H(eps) accepted by the calibration.
CALIBRATION_MAX_DEVIATION = 1e-5


def sphere_area(dim: int) -> float:
    """Volume of the unit sphere S^dim."""
    return float(2. * np.pi ** ((dim + 1.) / 2.) / gamma_function((dim + 1.) / 2.))


class TraceFreeRicciSection(NamedTuple):
    """Curvature of g = u^{4/(n-2)} (dt^2 + dtheta^2) on the section {t}.

    Components are in the orthonormal frame {u^{-2/(n-2)} d/dt, angular}.
    """
    t: float
    n: int
    tt: float
    angular: float
    ricci_tt: float
    ricci_angular: float
    scalar_curvature: float

    @property
    def trace(self) -> float:
        return self.tt + (self.n - 1) * self.angular

    def matrix(self) -> np.ndarray:
        return np.diag([self.tt] + [self.angular] * (self.n - 1))


def _log_factor_derivatives(n: int, u, du):
    """f' and f'' for f = (2/(n-2)) log u, with u'' from the ODE."""
    ddu = force(n, u)
    c = 2. / (n - 2.)
    return c * du / u, c * (ddu / u - (du / u) ** 2)


def tracefree_ricci(orbit, t: float) -> TraceFreeRicciSection:
    """Trace-free Ricci tensor of the Delaunay metric on the section {t}.

    With f = (2/(n-2)) log u and the cylinder's Ricci tensor (0 along t,
    n-2 on the sphere factor), the conformal change formula gives

        Ric_tt    = -(n-1) f'' e^{-2f}
        Ric_ang   = ((n-2) - f'' - (n-2) f'^2) e^{-2f}
        R         = (n-1) e^{-2f} ((n-2) - 2 f'' - (n-2) f'^2).

    Args:
        orbit: Anything exposing n and state(t), a PeriodicOrbit or the
            HomoclinicSolution.
        t: Section coordinate.

    """

    n = orbit.n
    u, du = orbit.state(t)
    u, du = float(u), float(du)
    df, ddf = _log_factor_derivatives(n, u, du)
    scale = u ** (-4. / (n - 2.))

    ricci_tt = -(n - 1.) * ddf * scale
    ricci_angular = ((n - 2.) - ddf - (n - 2.) * df ** 2) * scale
    scalar = ricci_tt + (n - 1.) * ricci_angular
    return TraceFreeRicciSection(t=float(t), n=n,
                                 tt=ricci_tt - scalar / n,
                                 angular=ricci_angular - scalar / n,
                                 ricci_tt=ricci_tt, ricci_angular=ricci_angular,
                                 scalar_curvature=scalar)


def centered_dilation_field(v, q) -> np.ndarray:
    """X_q = v - <q, v> q, the sphere field generated by the linear function <., v>."""
    v = np.asarray(v, dtype=float)
    q = np.asarray(q, dtype=float)
    if abs(np.linalg.norm(q) - 1.) > 1e-12:
        raise ParameterRangeError(f"q must lie on the unit sphere, |q| = {np.linalg.norm(q)}.")
    return v - np.dot(q, v) * q


@dataclass(frozen=True)
class ConformalKillingField:
    """Element of o(n+1, 1): a rotation X0 of R^{n+1} plus a centered
    dilation with vector w, acting on S^n by X_q = X0 q + w - <q, w> q."""

    X0: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        X0 = np.asarray(self.X0, dtype=float)
        w = np.asarray(self.w, dtype=float)
        assert X0.shape == (w.size, w.size), "X0 must be (n+1) x (n+1)."
        assert np.allclose(X0, -X0.T, atol=1e-14), "X0 must be antisymmetric."
        object.__setattr__(self, 'X0', X0)
        object.__setattr__(self, 'w', w)

    @property
    def n(self) -> int:
        return self.w.size - 1

    @classmethod
    def centered_dilation(cls, v) -> 'ConformalKillingField':
        v = np.asarray(v, dtype=float)
        return cls(X0=np.zeros((v.size, v.size)), w=v)

    @classmethod
    def rotation(cls, X0) -> 'ConformalKillingField':
        X0 = np.asarray(X0, dtype=float)
        return cls(X0=X0, w=np.zeros(X0.shape[0]))

    @classmethod
    def axial_dilation(cls, n: int) -> 'ConformalKillingField':
        """The dilation fixing +-p_1, which is d/dt on the cylinder."""
        w = np.zeros(n + 1)
        w[n] = 1.
        return cls.centered_dilation(w)

    def __add__(self, other: 'ConformalKillingField') -> 'ConformalKillingField':
        return ConformalKillingField(X0=self.X0 + other.X0, w=self.w + other.w)

    def __mul__(self, scalar: float) -> 'ConformalKillingField':
        return ConformalKillingField(X0=scalar * self.X0, w=scalar * self.w)

    __rmul__ = __mul__

    def at(self, q) -> np.ndarray:
        return self.X0 @ q + centered_dilation_field(self.w, q)

    def adjoint(self, F: np.ndarray) -> 'ConformalKillingField':
        """Ad(F) X for F in SO(n+1)."""
        return ConformalKillingField(X0=F @ self.X0 @ F.T, w=F @ self.w)

    def t_component(self, t: float, theta) -> np.ndarray:
        """X^t on the cylinder at (t, theta); theta of shape (..., n)."""
        n = self.n
        theta = np.asarray(theta, dtype=float)
        b = self.X0[:n, n]
        return self.w[n] - np.sinh(t) * theta @ self.w[:n] - np.cosh(t) * theta @ b


def stereographic_to_sphere(x: torch.Tensor) -> torch.Tensor:
    """q(x) = (2x, 1 - |x|^2) / (1 + |x|^2); x = e^{-t} theta gives the chart above."""
    s = (x * x).sum()
    return torch.cat([2. * x, (1. - s).reshape(1)]) / (1. + s)


def _euclidean_field(kf: ConformalKillingField, bump: float = 0.):
    X0 = torch.as_tensor(kf.X0, dtype=torch.float64)
    w = torch.as_tensor(kf.w, dtype=torch.float64)
    center = torch.full((kf.n,), 0.5 / np.sqrt(kf.n), dtype=torch.float64)

    def field(x: torch.Tensor) -> torch.Tensor:
        q = stereographic_to_sphere(x)
        Xq = X0 @ q + w - (q @ w) * q
        jac = torch.autograd.functional.jacobian(stereographic_to_sphere, x,
                                                 create_graph=True)
        scale = (2. / (1. + (x * x).sum())) ** 2
        Y = jac.T @ Xq / scale
        if bump != 0.:
            Y = Y + bump * torch.exp(-((x - center) ** 2).sum()) \
                * torch.nn.functional.one_hot(torch.tensor(0), kf.n).to(torch.float64)
        return Y

    return field


def cylinder_grid(n: int, t, directions: int = 8,
                  seed: int = consts.RANDOM_SEED) -> np.ndarray:
    """Points x = e^{-t} theta of R^n for the given t and seeded random theta."""
    random = np.random.RandomState(seed)
    theta = random.normal(size=(directions, n))
    theta /= np.linalg.norm(theta, axis=1, keepdims=True)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return (np.exp(-t)[:, None, None] * theta[None, :, :]).reshape(-1, n)


def verify_conformal_killing(kf: ConformalKillingField,
                             grid: np.ndarray,
                             bump: float = 0.) -> float:
    """Sup over the grid of |sym(DY) - tr(DY)/n I|, Y the field pushed to R^n.

    The flat metric of R^n is conformal to the cylinder and to the sphere, so
    Y is conformal Killing exactly when the trace-free part of its symmetrized
    derivative vanishes.  Derivatives are taken by automatic differentiation.

    Args:
        kf: The field.
        grid: Points of R^n minus the origin, shape (m, n).
        bump: Amplitude of a Gaussian perturbation added to Y, for a negative
            control.

    """

    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    n = kf.n
    assert grid.shape[1] == n, f"Grid points must lie in R^{n}."
    field = _euclidean_field(kf, bump)
    eye = torch.eye(n, dtype=torch.float64)
    worst = 0.
    for point in grid:
        x = torch.tensor(point, dtype=torch.float64)
        D = torch.autograd.functional.jacobian(field, x)
        sym = 0.5 * (D + D.T)
        tracefree = sym - torch.trace(D) / n * eye
        worst = max(worst, float(torch.linalg.norm(tracefree)))
    return worst


def _section_density(orbit, t_section: float) -> float:
    """u^{2n/(n-2)} T_tt on the section."""
    n = orbit.n
    u = float(orbit.state(t_section)[0])
    return u ** (2. * n / (n - 2.)) * tracefree_ricci(orbit, t_section).tt


def invariant(orbit,
              kf: ConformalKillingField,
              t_section: float,
              orientation: int = 1,
              tol: Tolerance = Tolerance(abs_tol=consts.POHOZAEV_QUAD_TOL,
                                         rel_tol=consts.POHOZAEV_QUAD_TOL)) -> float:
    """P(Sigma, X; g) = int T(X, nu) dsigma over {t_section} x S^{n-1}.

    X^t is sampled at +-e_i to recover its constant part and gradient; the
    angular integral is then a polar-angle quadrature about the gradient with
    weight |S^{n-2}| sin^{n-2}(phi).

    Args:
        orbit: PeriodicOrbit or HomoclinicSolution.
        kf: Conformal Killing field.
        t_section: Section coordinate.
        orientation: +1 for nu along increasing t, -1 for decreasing t.

    """

    if orientation not in (1, -1):
        raise OrientationError(f"Orientation must be +1 or -1, got {orientation}.")
    n = orbit.n
    assert kf.n == n, f"Field on S^{kf.n} paired with a metric on S^{n}."

    basis = np.eye(n)
    plus = kf.t_component(t_section, basis)
    minus = kf.t_component(t_section, -basis)
    constant = float(0.5 * (plus[0] + minus[0]))
    slope = float(np.linalg.norm(0.5 * (plus - minus)))

    weight = sphere_area(n - 2)
    angular = adaptive_quadrature(
        lambda phi: (constant + slope * np.cos(phi)) * weight * np.sin(phi) ** (n - 2),
        0., np.pi, tol=tol)
    return orientation * _section_density(orbit, t_section) * angular


def dilational_invariant(orbit, t_section: float = 0.) -> float:
    """D = P(Sigma, d/dt), the invariant of the axial dilation."""
    return invariant(orbit, ConformalKillingField.axial_dilation(orbit.n), t_section)


def dilational_constant_closed_form(n: int) -> float:
    """c_n = 4 (n-1) |S^{n-1}| / (n-2) for the dilation normalized to d/dt."""
    n = check_dimension(n)
    return 4. * (n - 1.) * sphere_area(n - 1) / (n - 2.)


@dataclass(frozen=True)
class Calibration:
    n: int
    c_n: float
    max_relative_deviation: float
    grid: Tuple[float, ...]
    closed_form: float

    def to_dict(self) -> dict:
        return {'n': self.n, 'c_n': self.c_n,
                'max_relative_deviation': self.max_relative_deviation,
                'grid': list(self.grid), 'closed_form': self.closed_form,
                'closed_form_relative_error':
                    abs(self.c_n - self.closed_form) / abs(self.closed_form)}


def calibrate_cn(n: int,
                 eps_grid: Optional[Sequence[float]] = None,
                 solver: Callable[[int, float], PeriodicOrbit] = solve_orbit) -> Calibration:
    """c_n as the mean of D(eps)/H(eps) over an eps grid.

    Raises:
        OrbitCorruptionError: the ratio is not constant to
            CALIBRATION_MAX_DEVIATION, or vanishes.

    """

    n = check_dimension(n)
    grid = default_eps_grid(n) if eps_grid is None else np.asarray(eps_grid, dtype=float)
    ratios = []
    for eps in grid:
        orbit = solver(n, float(eps))
        ratios.append(dilational_invariant(orbit) / orbit.H)
    ratios = np.array(ratios)
    c_n = float(np.mean(ratios))
    if c_n == 0.:
        raise OrbitCorruptionError(f"Dilational constant vanishes for n={n}.")
    deviation = float(np.max(np.abs(ratios - c_n)) / abs(c_n))
    if deviation > CALIBRATION_MAX_DEVIATION:
        raise OrbitCorruptionError(f"D/H varies by {deviation:.3e} over the grid for n={n}.")
    logging.info(f"Calibrated c_{n} = {c_n:.12g} (max relative deviation {deviation:.2e})")
    return Calibration(n=n, c_n=c_n, max_relative_deviation=deviation,
                       grid=tuple(float(e) for e in grid),
                       closed_form=dilational_constant_closed_form(n))


def algebra_basis(n: int) -> Tuple[List[str], List[ConformalKillingField]]:
    """Standard basis of o(n+1, 1): rotations E_ab (a < b), then the unit
    dilations e_a."""
    size = n + 1
    labels, fields = [], []
    for a in range(size):
        for b in range(a + 1, size):
            X0 = np.zeros((size, size))
            X0[a, b], X0[b, a] = 1., -1.
            labels.append(f"rot_{a}{b}")
            fields.append(ConformalKillingField.rotation(X0))
    for a in range(size):
        labels.append(f"dil_{a}")
        fields.append(ConformalKillingField.centered_dilation(np.eye(size)[a]))
    return labels, fields


def coordinates(kf: ConformalKillingField) -> np.ndarray:
    """Coordinates of a field in algebra_basis."""
    size = kf.n + 1
    upper = np.triu_indices(size, k=1)
    return np.concatenate([kf.X0[upper], kf.w])


@dataclass(frozen=True)
class PohozaevInvariant:
    """The Pohozaev functional of one end, by its values on algebra_basis.

    Attributes:
        end: End index.
        n: Dimension.
        values: Values on the basis fields.
        dilational: D_i, the value on the dilation along the end's axis.
        orientation: Orientation of the section normal.
        t_section: Section coordinate used.
        axis: Unit vector of the Delaunay axis in R^{n+1}.

    """

    end: int
    n: int
    values: np.ndarray = field(repr=False)
    dilational: float
    orientation: int
    t_section: float
    axis: np.ndarray = field(repr=False)

    def __call__(self, kf: ConformalKillingField) -> float:
        return float(coordinates(kf) @ self.values)


def pohozaev_functional(orbit,
                        t_section: float,
                        rotation: Optional[np.ndarray] = None,
                        orientation: int = 1,
                        end: int = 0) -> PohozaevInvariant:
    """Values of the invariant on the basis of o(n+1, 1) for the Delaunay
    metric whose configuration is rotated by F in SO(n+1)."""
    n = orbit.n
    F = np.eye(n + 1) if rotation is None else np.asarray(rotation, dtype=float)
    assert np.allclose(F @ F.T, np.eye(n + 1), atol=1e-12), "rotation must be orthogonal."

    _, fields = algebra_basis(n)
    values = np.array([invariant(orbit, kf.adjoint(F.T), t_section, orientation)
                       for kf in fields])
    axis = F[:, n]
    dilational = invariant(orbit, ConformalKillingField.centered_dilation(axis).adjoint(F.T),
                           t_section, orientation)
    return PohozaevInvariant(end=end, n=n, values=values, dilational=dilational,
                             orientation=orientation, t_section=float(t_section), axis=axis)


def balancing_check(invariants: Sequence[PohozaevInvariant],
                    kf: ConformalKillingField) -> float:
    """|P_1(X) + P_2(X)| for the two ends of a Delaunay metric.

    Raises:
        OrientationError: the ends are not one +1 and one -1 section.

    """

    if len(invariants) != 2:
        raise OrientationError(f"Balancing is checked on two ends, got {len(invariants)}.")
    if sorted(p.orientation for p in invariants) != [-1, 1]:
        raise OrientationError("End sections must carry opposite orientations.")
    return float(abs(sum(p(kf) for p in invariants)))


def killing_form(X: ConformalKillingField, Y: ConformalKillingField) -> float:
    """B(X, Y) = 1/2 tr(X0 Y0) + w . w^."""
    return float(0.5 * np.trace(X.X0 @ Y.X0) + X.w @ Y.w)


def invariant_norm(P: PohozaevInvariant,
                   fields: Optional[Sequence[ConformalKillingField]] = None) -> float:
    """B(P', P') for the B-dual P' of the functional, p^T G^{-1} p.

    Raises:
        DegenerateGramError: the Gram matrix of B on the spanning set is
            numerically singular.

    """

    if fields is None:
        _, fields = algebra_basis(P.n)
        values = P.values
    else:
        values = np.array([P(kf) for kf in fields])
    gram = np.array([[killing_form(a, b) for b in fields] for a in fields])
    condition = np.linalg.cond(gram)
    if not np.isfinite(condition) or condition > consts.MAX_GRAM_CONDITION:
        raise DegenerateGramError(f"Killing form Gram matrix is singular "
                                  f"(condition number {condition:.3e}).")
    return float(values @ np.linalg.solve(gram, values))


def invariant_row(orbit) -> dict:
    """(eps, H, D, killing norm) of a Delaunay metric."""
    functional = pohozaev_functional(orbit, 0.)
    return {'eps': orbit.eps, 'H': float(orbit.H),
            'D': functional.dilational, 'killing_norm': invariant_norm(functional)}
