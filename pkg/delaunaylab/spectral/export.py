"""Writers for the sampled data (CSV) and scalar results (JSON) of every
command.  Each file carries a provenance block: the producing config hash,
package versions, tolerances and a timestamp."""

import json
import logging
import os
from datetime import datetime
from typing import Dict, Optional, Sequence

import lmfit
import numpy as np
import pandas as pd
import scipy
import torch

import delaunaylab
from delaunaylab.spectral.delaunay import PeriodicOrbit, phase_portrait, \
    equilibrium_ubar, potential
from delaunaylab.spectral.floquet import BandStructure
from delaunaylab.spectral.indicial import IndicialSet, AsymptoteFit
from delaunaylab.spectral.jacobi import JacobiField
from delaunaylab.spectral.pohozaev import Calibration


def package_versions() -> Dict[str, str]:
    return {'delaunaylab': delaunaylab.__version__,
            'numpy': np.__version__,
            'scipy': scipy.__version__,
            'pandas': pd.__version__,
            'torch': torch.__version__,
            'lmfit': lmfit.__version__}


def provenance(config_hash: str, tolerances: Optional[dict] = None) -> dict:
    """Provenance block embedded in every output file."""
    return {'config_hash': config_hash,
            'versions': package_versions(),
            'tolerances': tolerances or {},
            'timestamp': datetime.now().strftime('%Y-%m-%d %H:%M:%S')}


def _jsonable(value):
    """Convert numpy scalars and arrays (recursively) to plain Python."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if np.isfinite(value) else str(value)
    if isinstance(value, complex):
        return {'re': value.real, 'im': value.imag}
    return value


def _ensure_dir(path: str):
    file_dir = os.path.dirname(path)
    if file_dir:
        os.makedirs(file_dir, exist_ok=True)


def write_json(path: str, payload: dict, prov: dict) -> str:
    """Write payload with a 'provenance' entry as indented JSON."""
    _ensure_dir(path)
    document = dict(_jsonable(payload))
    document['provenance'] = _jsonable(prov)
    with open(path, 'w') as f:
        f.write(json.dumps(document, indent=2, sort_keys=True))
        f.write('\n')
    logging.info(f"Wrote {path}")
    return path


def write_csv(path: str, frame: pd.DataFrame, prov: dict) -> str:
    """Write a table preceded by '# key: value' provenance comment lines.

    The timestamp sits on its own line so two runs of the same config differ
    in that line only.  Read back with pd.read_csv(path, comment='#').

    """

    _ensure_dir(path)
    with open(path, 'w') as f:
        for key in sorted(prov):
            f.write(f"# {key}: {json.dumps(_jsonable(prov[key]), sort_keys=True)}\n")
        frame.to_csv(f, index=False, float_format='%.17g')
    logging.info(f"Wrote {path} ({len(frame)} rows)")
    return path


def read_csv_provenance(path: str) -> dict:
    """Parse the '# key: value' lines back from a written CSV."""
    prov = {}
    with open(path) as f:
        for line in f:
            if not line.startswith('# '):
                break
            key, _, value = line[2:].partition(': ')
            prov[key] = json.loads(value)
    return prov


def write_orbit(orbit: PeriodicOrbit, path: str, prov: dict,
                periods: float = 1.) -> Sequence[str]:
    """Orbit samples (t, u, v, r) as CSV plus its scalars as a JSON header."""
    t = orbit.sample_times(periods=periods)
    u, v = orbit.state(t)
    frame = pd.DataFrame({'t': t, 'u': u, 'v': v, 'r': orbit.r(t)})
    root, _ = os.path.splitext(path)
    return [write_csv(path, frame, prov),
            write_json(root + '.json', orbit.header(), prov)]


def write_phase_portrait(n: int, path: str, prov: dict,
                         orbit: Optional[PeriodicOrbit] = None,
                         levels: int = 8) -> str:
    """Level sets of H between the cylinder and the homoclinic loop, with the
    orbit's own level and its integrated (u, v) curve appended when given."""
    floor = float(potential(n, equilibrium_ubar(n)))
    grid = list(np.linspace(floor, 0., levels + 1)[1:])
    if orbit is not None and not orbit.degenerate:
        grid.append(orbit.H)
    frame = phase_portrait(n, sorted(set(grid)))
    frame['source'] = 'level_set'
    if orbit is not None:
        t = orbit.sample_times(periods=1.)
        u, v = orbit.state(t)
        frame = pd.concat([frame, pd.DataFrame({'level': orbit.H, 'u': u, 'v': v,
                                                'source': 'orbit'})],
                          ignore_index=True)
    return write_csv(path, frame, prov)


def write_jacobi(fields: Sequence[JacobiField], path: str, prov: dict) -> Sequence[str]:
    """Jacobi field samples in one CSV (one column per field) plus metadata."""
    assert fields, "Nothing to write."
    frame = pd.DataFrame({'t': fields[0].t})
    for f in fields:
        assert np.array_equal(f.t, fields[0].t), "Fields must share their sample times."
        frame[f.kind] = f.values
        frame[f.kind + '_prime'] = f.samples.first
    root, _ = os.path.splitext(path)
    return [write_csv(path, frame, prov),
            write_json(root + '.json', {'fields': [f.metadata() for f in fields]}, prov)]


def write_bands(structure: BandStructure, path: str, prov: dict,
                extra: Optional[dict] = None) -> Sequence[str]:
    """Discriminant scan as CSV, bands and gaps (and extra) as JSON."""
    frame = pd.DataFrame({'sigma': structure.sigma, 'discriminant': structure.values})
    root, _ = os.path.splitext(path)
    payload = {'mode': structure.mode._asdict(),
               'bands': structure.bands, 'gaps': structure.gaps,
               'window': structure.window, 'resolution': structure.resolution,
               'lowest_edge': structure.lowest_edge}
    payload.update(extra or {})
    return [write_csv(path, frame, prov), write_json(root + '.json', payload, prov)]


def write_indicial(indicial: IndicialSet, path: str, prov: dict,
                   extra: Optional[dict] = None) -> Sequence[str]:
    frame = pd.DataFrame([e._asdict() for e in indicial.entries])
    root, _ = os.path.splitext(path)
    payload = indicial.to_dict()
    payload.update(extra or {})
    return [write_csv(path, frame, prov), write_json(root + '.json', payload, prov)]


def write_calibration(calibration: Calibration, path: str, prov: dict) -> str:
    return write_json(path, calibration.to_dict(), prov)


def write_asymptote_fit(fit: AsymptoteFit, path: str, prov: dict,
                        extra: Optional[dict] = None) -> str:
    """Fitted (eps, eta, c, alpha) with misfit and evaluation count."""
    payload = fit.to_dict()
    payload.update(extra or {})
    return write_json(path, payload, prov)
