"""Constant numbers used throughout delaunaylab."""

# Default integrator / quadrature tolerances (absolute, relative).
ABS_TOL = 1e-12
REL_TOL = 1e-10

# Tolerances used for the Delaunay orbit itself.  Tighter than the defaults
# because every other quantity (periods, Jacobi fields, monodromy) is built
# on top of the orbit.
ORBIT_ABS_TOL = 1e-13
ORBIT_REL_TOL = 1e-12

# Maximum Hamiltonian drift over one period accepted for a solved orbit.
MAX_HAMILTONIAN_DRIFT = 1e-9

# Orbits with eps below this value are refused unless the caller lowers it.
# Turning-point quadrature conditioning degrades as eps -> 0.
EPS_GUARD = 1e-6

# Relative distance below ubar at which an orbit is treated as the cylinder.
EQUILIBRIUM_REL_GAP = 1e-12

# Number of refinement points inserted into each integrator step when
# scanning an event function for sign changes.
EVENT_SCAN_SUBDIVISIONS = 8

# Brent refinement tolerance on the event time.
EVENT_XTOL = 1e-14

# Maximum number of horizon doublings when searching for a section return.
MAX_HORIZON_DOUBLINGS = 12

# Subdivision limit of the adaptive quadrature, and the factor by which the
# reported error estimate may exceed the request before it is an error.
QUAD_LIMIT = 500
QUAD_ERROR_SLACK = 100.

# Relative threshold on the discriminant tr^2 - 4 det of a 2x2 matrix below
# which its eigenvalue is treated as repeated (defective or scalar).
EIGEN_DISCRIMINANT_TOL = 1e-10

# Jordan-block classification of a monodromy matrix: trace within this of 2
# and the off-diagonal part of M - I above the second threshold.
DEFECTIVE_TRACE_TOL = 1e-7
DEFECTIVE_OFFDIAG_TOL = 1e-7

# Tolerance on |trace - 2| used to decide that 0 is a band edge of L_0.
POLE_TRACE_TOL = 1e-7

# Band scan: default number of sigma samples, edge refinement tolerance, and
# slack above |Delta| = 2 still counted as inside a band (touching bands of
# the constant coefficient operator).
BAND_SCAN_RESOLUTION = 2000
BAND_EDGE_TOL = 1e-9
BAND_TOUCH_TOL = 1e-8

# Number of modes beyond n scanned by default (j_max = n + J_MAX_OFFSET).
J_MAX_OFFSET = 2

# Coefficient extraction: window in periods and sampling density.
FIT_WINDOW_PERIODS = (5, 9)
SAMPLES_PER_PERIOD = 64

# Condition number above which the (phi1, phi2) least-squares fit is refused.
MAX_FIT_CONDITION = 1e10

# Asymptote fit: minimum window length in periods, parameter bounds.
MIN_ASYMPTOTE_PERIODS = 3
ASYMPTOTE_ALPHA_BOUNDS = (1e-3, 20.)
ASYMPTOTE_MAX_NFEV = 2000

# Manufactured end fitted by the indicial command: window in periods, shift
# and amplitude of the perturbation decaying at gamma_1.
ASYMPTOTE_FIT_PERIODS = 6
ASYMPTOTE_FIT_SHIFT = 0.3
ASYMPTOTE_FIT_AMPLITUDE = 0.01

# Fourier-Laplace transform: truncation threshold and series budget.
FOURIER_TRUNCATION = 1e-14
FOURIER_MAX_TERMS = 20000
FOURIER_INVERSE_NODES = 256

# Pohozaev quadrature tolerance.
POHOZAEV_QUAD_TOL = 1e-13

# Condition number above which the Killing form Gram matrix is degenerate.
MAX_GRAM_CONDITION = 1e12

# Global seed for everything randomized (tests, random fields).
RANDOM_SEED = 1234

# Default eps grid: eps = EPS_GRID_STEP, 2*EPS_GRID_STEP, ... up to
# EPS_GRID_MAX_FRACTION * ubar.
EPS_GRID_STEP = 0.05
EPS_GRID_MAX_FRACTION = 0.95

# Dimensions exercised by the acceptance suite.
VERIFY_DIMENSIONS = (3, 4, 5, 6)

# Default output directory.
OUTPUT_DIR_DEFAULT = 'delaunaylab_out'

# Exit codes.
EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_COMPUTATION = 3

# Fractions of ubar making up the eps grid of the acceptance suite.
VERIFY_EPS_FRACTIONS = (0.1, 0.3, 0.5, 0.7, 0.9)

# Band scan resolution used by the acceptance suite.
VERIFY_BAND_RESOLUTION = 200

# Default size of the worker pool for parameter sweeps.
WORKERS_DEFAULT = 1
