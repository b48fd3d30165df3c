"""Parameter sweeps over eps grids, optionally on a process pool.

Sweep points are sorted before dispatch and results come back in that
order, so the output is independent of the number of workers.  Workers
share nothing: each one solves its own orbits.

"""

import logging
import multiprocessing as mp
from functools import partial
from typing import Callable, List, Sequence

import numpy as np
import pandas as pd

from delaunaylab.spectral.delaunay import solve_orbit
from delaunaylab.spectral.numerics import Tolerance
from delaunaylab.spectral.pohozaev import invariant_row


def run_sweep(func: Callable, points: Sequence[float], workers: int = 1) -> List:
    """func(point) for every point, in increasing order of point."""
    points = sorted(float(p) for p in points)
    assert workers >= 1, "Need at least one worker."
    if workers == 1 or len(points) < 2:
        return [func(p) for p in points]
    logging.info(f"Sweeping {len(points)} points on {workers} workers")
    with mp.Pool(processes=min(workers, len(points))) as pool:
        return pool.map(func, points)


def moduli_row(eps: float, n: int, tol: Tolerance) -> dict:
    """One row of the moduli table: periods, energy, D and ||P||^2."""
    orbit = solve_orbit(n, eps, tol=tol)
    row = invariant_row(orbit)
    row.update({'n': n, 'T': orbit.T, 'R': orbit.R, 'u_max': orbit.u_max,
                'D_over_H': row['D'] / row['H']})
    return row


def moduli_table(n: int, grid: Sequence[float], tol: Tolerance, workers: int = 1) -> pd.DataFrame:
    """The (eps, T, R, H, D, D/H, ||P||^2) sweep over an eps grid."""
    rows = run_sweep(partial(moduli_row, n=n, tol=tol), grid, workers)
    frame = pd.DataFrame(rows, columns=['n', 'eps', 'T', 'R', 'u_max', 'H', 'D',
                                        'D_over_H', 'killing_norm'])
    if len(frame) > 1 and not np.all(np.diff(frame['H'].values) < 0.):
        logging.warning(f"H is not strictly decreasing along the eps grid for n={n}.")
    return frame
