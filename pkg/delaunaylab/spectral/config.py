"""Run configuration assembled from validated command-line arguments."""

import hashlib
import json
import os
from dataclasses import dataclass, asdict, fields
from typing import Optional, Sequence, Tuple

import numpy as np

import delaunaylab.spectral.consts as consts
from delaunaylab.spectral.delaunay import equilibrium_ubar, default_eps_grid
from delaunaylab.spectral.numerics import Tolerance


def parse_float_list(text: Optional[str]) -> Tuple[float, ...]:
    """'0.1,0.2,0.3' -> (0.1, 0.2, 0.3); None or '' -> ()."""
    if text is None or text.strip() == '':
        return ()
    return tuple(float(item) for item in text.split(','))


def parse_eps(text: Optional[str], n: int) -> Optional[float]:
    """A Delaunay parameter, or the keyword 'ubar' for the cylinder."""
    if text is None:
        return None
    if text.strip().lower() == 'ubar':
        return equilibrium_ubar(n)
    return float(text)


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs, validated before any computation.

    Attributes:
        command: Sub-command name.
        n: Dimension (None only for verify, which sweeps its own dimensions).
        eps: Delaunay parameter of single-orbit commands.
        eps_grid: Explicit eps grid; empty means the default grid of n.
        mode: Spherical harmonic degree for bands.
        j_max: Largest mode degree; None means n + J_MAX_OFFSET.
        tol: Relative orbit tolerance; the absolute one scales with it.
        out_dir: Output directory.
        seed: Seed of every randomized step.
        workers: Size of the sweep worker pool.
        only: Acceptance check groups to run (verify); empty means all.
        export_phase: Also write the phase portrait (orbit).
        asymptote_fit: Also fit a manufactured end (indicial).
        ends: Delaunay parameters of the ends (relindex).
        check_tol_scale: Every acceptance tolerance is divided by this.
        sigma_window: Spectral window of the band scan; empty means automatic.
        resolution: Number of band scan points.

    """

    command: str
    n: Optional[int] = None
    eps: Optional[float] = None
    eps_grid: Tuple[float, ...] = ()
    mode: int = 0
    j_max: Optional[int] = None
    tol: float = consts.ORBIT_REL_TOL
    out_dir: str = consts.OUTPUT_DIR_DEFAULT
    seed: int = consts.RANDOM_SEED
    workers: int = consts.WORKERS_DEFAULT
    only: Tuple[str, ...] = ()
    export_phase: bool = False
    asymptote_fit: bool = False
    ends: Tuple[float, ...] = ()
    check_tol_scale: float = 1.
    sigma_window: Tuple[float, ...] = ()
    resolution: int = consts.BAND_SCAN_RESOLUTION

    # Fields that do not change any number written, left out of the hash.
    HASH_EXCLUDED = ('out_dir', 'workers')

    @classmethod
    def from_args(cls, args) -> 'RunConfig':
        names = {f.name for f in fields(cls)}
        values = {name: getattr(args, name) for name in names if hasattr(args, name)}
        values['command'] = args.tool
        for name in ('eps_grid', 'only', 'ends', 'sigma_window'):
            if values.get(name) is None:
                values[name] = ()
            values[name] = tuple(values[name])
        return cls(**values)

    @property
    def tolerance(self) -> Tolerance:
        return Tolerance(abs_tol=self.tol * consts.ORBIT_ABS_TOL / consts.ORBIT_REL_TOL,
                         rel_tol=self.tol)

    @property
    def resolved_j_max(self) -> int:
        return self.n + consts.J_MAX_OFFSET if self.j_max is None else self.j_max

    def grid(self, n: Optional[int] = None) -> np.ndarray:
        """The eps grid for dimension n (default: the configured one)."""
        n = self.n if n is None else n
        if self.eps_grid:
            return np.array(sorted(self.eps_grid))
        return default_eps_grid(n)

    def to_dict(self) -> dict:
        return asdict(self)

    def config_hash(self) -> str:
        """SHA-256 of the sorted JSON form of the configuration."""
        payload = {k: v for k, v in self.to_dict().items() if k not in self.HASH_EXCLUDED}
        text = json.dumps(payload, sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(text.encode('utf-8')).hexdigest()

    def tolerances(self) -> dict:
        tol = self.tolerance
        return {'orbit_abs_tol': tol.abs_tol, 'orbit_rel_tol': tol.rel_tol,
                'band_edge_tol': consts.BAND_EDGE_TOL,
                'pohozaev_quad_tol': consts.POHOZAEV_QUAD_TOL,
                'check_tol_scale': self.check_tol_scale}

    def output_path(self, *parts: str) -> str:
        return os.path.join(self.out_dir, *parts)


def validate_eps_values(n: int, values: Sequence[float], flag: str):
    """Assert every value is an admissible Delaunay parameter for n."""
    ubar = equilibrium_ubar(n)
    for value in values:
        assert np.isfinite(value) and 0. < value <= ubar * (1. + 1e-14), \
            f"{flag} values must lie in (0, ubar] = (0, {ubar:.12g}] for n={n}, got {value}."
