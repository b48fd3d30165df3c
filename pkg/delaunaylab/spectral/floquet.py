"""Floquet theory of the mode operators L_j about a Delaunay orbit.

Multiplying L_j psi = -sigma psi through by W = u^{2n/(n-2)} gives the
self-adjoint periodic problem

    (P psi')' + (Q_j + sigma W) psi = 0,
    P = u^2,  Q_j = lambda_j u^2 + n u^{2n/(n-2)},

so sigma is the spectral parameter of the positive-convention operator -L_j.
The period map of (psi, P psi') has unit determinant and the spectrum of -L_j
is the set where its trace (the discriminant) satisfies |Delta| <= 2.

"""

import logging
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import comb

import delaunaylab.spectral.consts as consts
from delaunaylab.spectral.delaunay import PeriodicOrbit, check_dimension, force
from delaunaylab.spectral.numerics import integrate_ivp, find_root, eigen_2x2
from delaunaylab.spectral.exceptions import ParameterRangeError, \
    SpectralResolutionError

# Number of sigma values integrated together in one batched solve.
SIGMA_BATCH = 128


class SphereMode(NamedTuple):
    """Spherical harmonics of degree j on S^{n-1}: eigenvalue -j(j+n-2) of
    the cross-sectional Laplacian and the dimension of the eigenspace."""
    j: int
    lam: float
    multiplicity: int


def harmonic_multiplicity(n: int, j: int) -> int:
    """Dimension of the degree-j harmonics on S^{n-1} in R^n."""
    if j == 0:
        return 1
    return int(comb(j + n - 1, n - 1, exact=True) - comb(j + n - 3, n - 1, exact=True))


def sphere_modes(n: int, j_max: int) -> List[SphereMode]:
    n = check_dimension(n)
    if j_max < 0:
        raise ParameterRangeError(f"j_max must be nonnegative, got {j_max}.")
    return [SphereMode(j=j, lam=-float(j * (j + n - 2)),
                       multiplicity=harmonic_multiplicity(n, j))
            for j in range(j_max + 1)]


def sphere_mode(n: int, j: int) -> SphereMode:
    return sphere_modes(n, j)[-1]


@dataclass(frozen=True)
class SturmLiouvilleForm:
    """Coefficients of the self-adjoint form of L_j on one orbit."""

    orbit: PeriodicOrbit = field(repr=False)
    mode: SphereMode

    @property
    def n(self) -> int:
        return self.orbit.n

    def P(self, t):
        return self.orbit.u(t) ** 2

    def W(self, t):
        return self.orbit.u(t) ** (2. * self.n / (self.n - 2.))

    def Q(self, t):
        u = self.orbit.u(t)
        return self.mode.lam * u ** 2 + self.n * u ** (2. * self.n / (self.n - 2.))

    def apply(self, t, psi, dpsi, d2psi) -> np.ndarray:
        """W^{-1} [(P psi')' + Q psi], which equals L_j psi."""
        u, du = self.orbit.state(t)
        divergence = u ** 2 * d2psi + 2. * u * du * dpsi
        return (divergence + self.Q(t) * psi) / self.W(t)


def sl_form(orbit: PeriodicOrbit, mode: SphereMode) -> SturmLiouvilleForm:
    assert mode.j >= 0, "Mode degree must be nonnegative."
    return SturmLiouvilleForm(orbit=orbit, mode=mode)


@dataclass(frozen=True)
class MonodromyResult:
    """Period map of (psi, P psi') for (P psi')' + (Q + sigma W) psi = 0.

    Attributes:
        sigma: Spectral parameter of -L_j.
        M: 2x2 period map.
        multipliers: Eigenvalues of M, largest modulus first.
        discriminant: trace of M.
        determinant: det M, equal to 1 up to integration error.
        defective: True when M is a nontrivial Jordan block at +-1.

    """

    sigma: float
    M: np.ndarray = field(repr=False)
    multipliers: Tuple[complex, complex]
    discriminant: float
    determinant: float
    defective: bool


def _batched_rhs(n: int, lam: float, sigmas: np.ndarray):
    m = sigmas.size
    q = 2. * n / (n - 2.)

    def rhs(t, y):
        u, v = y[0], y[1]
        P = u * u
        W = u ** q
        Q = lam * P + n * W + sigmas * W
        psi_a, p_a = y[2:2 + m], y[2 + m:2 + 2 * m]
        psi_b, p_b = y[2 + 2 * m:2 + 3 * m], y[2 + 3 * m:]
        return np.concatenate([[v, force(n, u)],
                               p_a / P, -Q * psi_a,
                               p_b / P, -Q * psi_b])

    return rhs


def monodromy_matrices(sl: SturmLiouvilleForm, sigmas) -> np.ndarray:
    """Period maps for several sigma, shape (len(sigmas), 2, 2).

    The orbit is integrated jointly with the fundamental solutions from
    (u_max, 0), batched over sigma.

    """

    sigmas = np.atleast_1d(np.asarray(sigmas, dtype=float))
    orbit = sl.orbit
    out = np.empty((sigmas.size, 2, 2))
    for start in range(0, sigmas.size, SIGMA_BATCH):
        chunk = sigmas[start:start + SIGMA_BATCH]
        m = chunk.size
        y0 = np.concatenate([[orbit.u_max, 0.], np.ones(m), np.zeros(m),
                             np.zeros(m), np.ones(m)])
        trajectory = integrate_ivp(_batched_rhs(orbit.n, sl.mode.lam, chunk), y0,
                                   (0., orbit.T), tol=orbit.tol)
        y = trajectory.states[-1]
        out[start:start + m, 0, 0] = y[2:2 + m]
        out[start:start + m, 1, 0] = y[2 + m:2 + 2 * m]
        out[start:start + m, 0, 1] = y[2 + 2 * m:2 + 3 * m]
        out[start:start + m, 1, 1] = y[2 + 3 * m:]
    return out


def discriminant(sl: SturmLiouvilleForm, sigmas) -> np.ndarray:
    """Floquet discriminant Delta(sigma) = trace of the period map."""
    matrices = monodromy_matrices(sl, sigmas)
    return matrices[:, 0, 0] + matrices[:, 1, 1]


def is_defective(M: np.ndarray) -> bool:
    """Nontrivial Jordan block: trace within DEFECTIVE_TRACE_TOL of +-2 and
    M -/+ I not negligible off the diagonal."""
    trace = M[0, 0] + M[1, 1]
    sign = 1. if trace >= 0. else -1.
    if abs(abs(trace) - 2.) >= consts.DEFECTIVE_TRACE_TOL:
        return False
    shifted = M - sign * np.eye(2)
    return bool(max(abs(shifted[0, 1]), abs(shifted[1, 0])) > consts.DEFECTIVE_OFFDIAG_TOL)


def monodromy(sl: SturmLiouvilleForm, sigma: float) -> MonodromyResult:
    M = monodromy_matrices(sl, [sigma])[0]
    eig = eigen_2x2(M)
    return MonodromyResult(sigma=float(sigma), M=M,
                           multipliers=(eig.pairs[0].value, eig.pairs[1].value),
                           discriminant=eig.trace, determinant=eig.determinant,
                           defective=is_defective(M))


def bloch_phase(result: MonodromyResult, T: float) -> Optional[float]:
    """Quasi-momentum arccos(Delta/2)/T inside a band, None in a gap."""
    if abs(result.discriminant) > 2. + consts.BAND_TOUCH_TOL:
        return None
    return float(np.arccos(np.clip(result.discriminant / 2., -1., 1.)) / T)


@dataclass(frozen=True)
class BandStructure:
    """Bands and gaps of -L_j within a scanned sigma window.

    Attributes:
        mode: The spherical mode.
        bands: Disjoint ordered closed intervals with |Delta| <= 2, clipped
            to the window.
        gaps: Open complementary intervals inside the window.
        window: Scanned (sigma_lo, sigma_hi).
        resolution: Number of scan points.
        sigma: Scan grid.
        values: Discriminant on the scan grid.

    """

    mode: SphereMode
    bands: List[Tuple[float, float]]
    gaps: List[Tuple[float, float]]
    window: Tuple[float, float]
    resolution: int
    sigma: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    @property
    def lowest_edge(self) -> Optional[float]:
        return self.bands[0][0] if self.bands else None

    def gap_containing(self, sigma: float) -> Optional[Tuple[float, float]]:
        for lo, hi in self.gaps:
            if lo < sigma < hi:
                return lo, hi
        return None


def _excess(sl: SturmLiouvilleForm, offset: float = 0.):
    return lambda s: abs(discriminant(sl, [s])[0]) - 2. - offset


def _refine_edge(sl: SturmLiouvilleForm, a: float, b: float) -> float:
    excess = _excess(sl)
    fa, fb = excess(a), excess(b)
    if np.sign(fa) != np.sign(fb):
        return find_root(excess, a, b, xtol=consts.BAND_EDGE_TOL)
    return find_root(_excess(sl, consts.BAND_TOUCH_TOL), a, b, xtol=consts.BAND_EDGE_TOL)


def band_structure(sl: SturmLiouvilleForm,
                   sigma_window: Tuple[float, float],
                   resolution: int = consts.BAND_SCAN_RESOLUTION) -> BandStructure:
    """Scan the discriminant over a sigma window and assemble bands and gaps.

    Sign changes of |Delta| - 2 on the grid are refined by Brent's method.
    Grid-local maxima of |Delta| close to 2 inside a band are refined by a
    bounded scalar maximization, so that gaps narrower than the grid spacing
    are still opened.

    Raises:
        SpectralResolutionError: too few scan points for the window.

    """

    lo, hi = float(sigma_window[0]), float(sigma_window[1])
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise ParameterRangeError(f"Invalid sigma window ({lo}, {hi}).")
    if resolution < 8:
        raise SpectralResolutionError(f"A band scan needs at least 8 points, "
                                      f"got {resolution}.")

    sigma = np.linspace(lo, hi, resolution)
    values = discriminant(sl, sigma)
    inside = np.abs(values) <= 2. + consts.BAND_TOUCH_TOL

    # (position, kind) with kind +1 entering a band, -1 leaving one.
    edges: List[Tuple[float, int]] = []
    for i in range(resolution - 1):
        if inside[i] != inside[i + 1]:
            edges.append((_refine_edge(sl, sigma[i], sigma[i + 1]),
                          1 if inside[i + 1] else -1))

    magnitude = np.abs(values)
    for i in range(1, resolution - 1):
        if not (inside[i - 1] and inside[i] and inside[i + 1]):
            continue
        if magnitude[i] < 1.95 or magnitude[i] < magnitude[i - 1] \
                or magnitude[i] < magnitude[i + 1]:
            continue
        peak = minimize_scalar(lambda s: -abs(discriminant(sl, [s])[0]),
                               bounds=(sigma[i - 1], sigma[i + 1]), method='bounded',
                               options={'xatol': consts.BAND_EDGE_TOL})
        if -peak.fun > 2. + consts.BAND_TOUCH_TOL:
            s_star = float(peak.x)
            edges.append((_refine_edge(sl, sigma[i - 1], s_star), -1))
            edges.append((_refine_edge(sl, s_star, sigma[i + 1]), 1))
            logging.debug(f"Narrow gap of mode {sl.mode.j} near sigma={s_star:.8g}")

    edges.sort()
    bands: List[Tuple[float, float]] = []
    current = lo if inside[0] else None
    for position, kind in edges:
        if kind > 0:
            if current is not None:
                raise SpectralResolutionError(f"Ambiguous band pattern near sigma = "
                                              f"{position:.6g}; raise the resolution.")
            current = position
        else:
            if current is None:
                raise SpectralResolutionError(f"Ambiguous band pattern near sigma = "
                                              f"{position:.6g}; raise the resolution.")
            bands.append((current, position))
            current = None
    if current is not None:
        bands.append((current, hi))

    gaps = []
    cursor = lo
    for b_lo, b_hi in bands:
        if b_lo > cursor:
            gaps.append((cursor, b_lo))
        cursor = b_hi
    if cursor < hi:
        gaps.append((cursor, hi))

    logging.debug(f"Mode {sl.mode.j}: {len(bands)} band(s), {len(gaps)} gap(s) "
                  f"in [{lo:.4g}, {hi:.4g}]")

    return BandStructure(mode=sl.mode, bands=bands, gaps=gaps, window=(lo, hi),
                         resolution=resolution, sigma=sigma, values=values)


def cylinder_band_edge(n: int, j: int) -> float:
    """Bottom of spec(-L_j) at eps = ubar, -n (1 + lambda_j/(n-2))."""
    n = check_dimension(n)
    return -n * (1. - j * (j + n - 2.) / (n - 2.))


class ZeroGapCheck(NamedTuple):
    in_gap: bool
    margin: float


def check_zero_not_in_spec(orbit: PeriodicOrbit, j: int) -> ZeroGapCheck:
    """Whether sigma = 0 lies in a gap of -L_j, with margin |Delta(0)| - 2."""
    if j < 0:
        raise ParameterRangeError(f"Mode degree must be nonnegative, got {j}.")
    value = discriminant(sl_form(orbit, sphere_mode(orbit.n, j)), [0.])[0]
    margin = float(abs(value) - 2.)
    return ZeroGapCheck(in_gap=margin > consts.BAND_TOUCH_TOL, margin=margin)


def spectrum_lower_bound(orbit: PeriodicOrbit,
                         j_max: Optional[int] = None,
                         resolution: int = 400) -> float:
    """Lowest band edge of -L over the modes 0..j_max."""
    n = orbit.n
    j_max = n + consts.J_MAX_OFFSET if j_max is None else j_max
    lowest = np.inf
    for mode in sphere_modes(n, j_max):
        hi = max(cylinder_band_edge(n, mode.j), 0.) + n + 1.
        structure = band_structure(sl_form(orbit, mode), (-n - 1., hi), resolution)
        if structure.lowest_edge is not None:
            lowest = min(lowest, structure.lowest_edge)
    return float(lowest)


def conjugation_term(orbit: PeriodicOrbit, t) -> np.ndarray:
    """Zeroth order coefficient A of u^{-p} L_1 u^p, p = 2/(n-2):

        A = u^{-2p} (p(p+1) (u'/u)^2 + p u''/u + lambda_1) + n.
    """
    n = orbit.n
    p = 2. / (n - 2.)
    u, du = orbit.state(t)
    ddu = force(n, u)
    return u ** (-2. * p) * (p * (p + 1.) * (du / u) ** 2 + p * ddu / u + (1. - n)) + n


def conjugation_closed_form(orbit: PeriodicOrbit, t) -> np.ndarray:
    """(4n/(n-2)^2) u^{-2n/(n-2)} H(eps)."""
    n = orbit.n
    u = orbit.u(t)
    return 4. * n / (n - 2.) ** 2 * u ** (-2. * n / (n - 2.)) * orbit.H


class ConjugationResidual(NamedTuple):
    """sup_t |A - closed form| over the samples, and the same divided by
    max(1, sup |closed form|)."""
    abs_error: float
    rel_error: float


def conjugation_identity(orbit: PeriodicOrbit, t=None) -> ConjugationResidual:
    """Residual of A(t) = (4n/(n-2)^2) u^{-2n/(n-2)} H(eps) over one period.

    Both sides carry the factor u^{-2n/(n-2)}, so the relative error is the
    one compared with a fixed tolerance at small eps.

    """
    t = orbit.sample_times(periods=1.) if t is None else np.asarray(t, dtype=float)
    closed = conjugation_closed_form(orbit, t)
    scale = max(1., float(np.max(np.abs(closed))))
    error = float(np.max(np.abs(conjugation_term(orbit, t) - closed)))
    return ConjugationResidual(abs_error=error, rel_error=error / scale)
