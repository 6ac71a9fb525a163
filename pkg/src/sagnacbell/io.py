"""CSV and JSON formats for datasets, configurations and reports.

Angles in files are degrees and are converted to radians on reading; phases
(offsets) and angular velocities stay in radians and rad/s.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .errors import DomainError, ParseError
from .geometry import SagnacGeometry
from .simulator import (
    DEFAULT_OMEGA_GRID, PAIR_CHANNELS, SINGLES_CHANNELS, ChshCountGrid, SimulationConfig,
    SweepDataset,
)

SWEEP_COLUMNS = ("omega_mean", "omega_min", "omega_max", "integration_s")


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def sweep_to_csv(dataset):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    channels = dataset.channels
    writer.writerow(SWEEP_COLUMNS + tuple(channels))
    for i in range(len(dataset)):
        row = [dataset.omega_mean[i], dataset.omega_min[i], dataset.omega_max[i],
               dataset.integration_time[i]]
        writer.writerow([_fmt(v) for v in row] + [_fmt(dataset.counts[c][i]) for c in channels])
    return buf.getvalue()


def write_sweep_csv(dataset, path):
    Path(path).write_text(sweep_to_csv(dataset))


def _parse_count(text, row, col):
    try:
        value = int(text)
    except ValueError:
        try:
            value = float(text)
        except ValueError:
            raise ParseError(f"column {col}: {text!r} is not a number", row) from None
    if not value >= 0:
        raise ParseError(f"column {col}: negative count {text}", row)
    return value


def sweep_from_csv(text):
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError("empty file") from None
    missing = [c for c in SWEEP_COLUMNS if c not in header]
    if missing:
        raise ParseError(f"missing column(s) {', '.join(missing)}")
    if all(c in header for c in PAIR_CHANNELS):
        channels = PAIR_CHANNELS
    elif all(c in header for c in SINGLES_CHANNELS):
        channels = SINGLES_CHANNELS
    else:
        raise ParseError(f"need count columns {','.join(PAIR_CHANNELS)} or {','.join(SINGLES_CHANNELS)}")
    idx = {c: header.index(c) for c in SWEEP_COLUMNS + channels}
    cols = {c: [] for c in SWEEP_COLUMNS}
    counts = {c: [] for c in channels}
    for row_no, row in enumerate(reader, start=1):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(row)}", row_no)
        for c in SWEEP_COLUMNS:
            try:
                cols[c].append(float(row[idx[c]]))
            except ValueError:
                raise ParseError(f"column {c}: {row[idx[c]]!r} is not a number", row_no) from None
        lo, mean, hi = cols["omega_min"][-1], cols["omega_mean"][-1], cols["omega_max"][-1]
        if not lo <= mean <= hi:
            raise ParseError("omega_min <= omega_mean <= omega_max violated", row_no)
        if not cols["integration_s"][-1] > 0:
            raise ParseError("integration_s must be positive", row_no)
        for c in channels:
            counts[c].append(_parse_count(row[idx[c]].strip(), row_no, c))
    if not cols["omega_mean"]:
        raise ParseError("no data rows")
    arrays = {}
    for c, values in counts.items():
        if all(isinstance(v, int) for v in values):
            arrays[c] = np.array(values, dtype=np.int64)
        else:
            arrays[c] = np.array(values, dtype=float)
    return SweepDataset(cols["omega_mean"], cols["omega_min"], cols["omega_max"],
                        cols["integration_s"], arrays)


def read_sweep_csv(path):
    return sweep_from_csv(Path(path).read_text())


def dumps(obj):
    return json.dumps(obj, indent=2) + "\n"


def write_json(obj, path):
    Path(path).write_text(dumps(obj))


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})") from None


# --- CHSH grids ---------------------------------------------------------------

def grid_to_dict(grid):
    counts = np.asarray(grid.counts)
    return {
        "target": grid.target,
        "omega_rad_s": grid.omega,
        "integration_time_s": grid.integration_time,
        "alice_angles_deg": [math.degrees(a) for a in grid.alice_angles],
        "bob_angles_deg": [math.degrees(b) for b in grid.bob_angles],
        "counts": counts.tolist(),
    }


def grid_from_dict(d):
    try:
        counts = np.array(d["counts"])
        if counts.dtype.kind not in "iuf":
            raise ParseError("counts must be numeric")
        return ChshCountGrid(
            counts=counts,
            alice_angles=[math.radians(a) for a in d["alice_angles_deg"]],
            bob_angles=[math.radians(b) for b in d["bob_angles_deg"]],
            integration_time=float(d["integration_time_s"]),
            target=d.get("target"),
            omega=d.get("omega_rad_s"),
        )
    except KeyError as exc:
        raise ParseError(f"CHSH grid is missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed CHSH grid: {exc}") from None


def read_grid(path):
    return grid_from_dict(read_json(path))


def write_grid(grid, path):
    write_json(grid_to_dict(grid), path)


# --- simulation configs -------------------------------------------------------

_CONFIG_KEYS = {
    "geometry", "rho00", "offset_rad", "pair_rate_hz", "background_rate_hz",
    "integration_time_s", "detector_efficiencies", "rng_seed", "omega_grid_rad_s",
    "omega_range", "omega_jitter", "noiseless",
}


def config_to_dict(config):
    g = config.geometry
    return {
        "geometry": {"fiber_length_m": g.fiber_length, "coil_radius_m": g.coil_radius,
                     "wavelength_m": g.wavelength},
        "rho00": config.rho00,
        "offset_rad": config.offset_o,
        "pair_rate_hz": config.pair_rate,
        "background_rate_hz": config.background_rate,
        "integration_time_s": config.integration_time,
        "detector_efficiencies": list(config.detector_efficiencies),
        "rng_seed": int(config.rng_seed),
        "omega_grid_rad_s": list(config.omega_grid),
        "omega_jitter": config.omega_jitter,
        "noiseless": config.noiseless,
    }


def config_from_dict(d):
    unknown = set(d) - _CONFIG_KEYS
    if unknown:
        raise ParseError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    kw = {}
    try:
        if "geometry" in d:
            g = d["geometry"]
            kw["geometry"] = SagnacGeometry(float(g["fiber_length_m"]), float(g["coil_radius_m"]),
                                            float(g["wavelength_m"]))
        simple = {"rho00": "rho00", "offset_rad": "offset_o", "pair_rate_hz": "pair_rate",
                  "background_rate_hz": "background_rate", "integration_time_s": "integration_time",
                  "omega_jitter": "omega_jitter"}
        for key, attr in simple.items():
            if key in d:
                kw[attr] = float(d[key])
        if "detector_efficiencies" in d:
            kw["detector_efficiencies"] = tuple(float(e) for e in d["detector_efficiencies"])
        if "rng_seed" in d:
            kw["rng_seed"] = int(d["rng_seed"])
        if "noiseless" in d:
            kw["noiseless"] = bool(d["noiseless"])
        if "omega_grid_rad_s" in d and "omega_range" in d:
            raise ParseError("give either omega_grid_rad_s or omega_range, not both")
        if "omega_grid_rad_s" in d:
            kw["omega_grid"] = tuple(float(w) for w in d["omega_grid_rad_s"])
        elif "omega_range" in d:
            r = d["omega_range"]
            kw["omega_grid"] = tuple(np.linspace(float(r["start"]), float(r["stop"]), int(r["num"])))
    except KeyError as exc:
        raise ParseError(f"config is missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise ParseError(f"malformed config: {exc}") from None
    return SimulationConfig(**kw)


def read_config(path):
    return config_from_dict(read_json(path))


def default_config_dict():
    return config_to_dict(SimulationConfig(omega_grid=DEFAULT_OMEGA_GRID))


# --- flat CSV for reports ------------------------------------------------------

def _flatten(prefix, obj, out):
    if isinstance(obj, dict):
        for k, v in obj.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        out.append((prefix, obj))


def report_to_csv(report):
    """Two-column key,value CSV of a nested report dictionary."""
    rows = []
    _flatten("", report, rows)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("key", "value"))
    for k, v in rows:
        writer.writerow((k, _fmt(v) if isinstance(v, (float, int, np.number)) and not isinstance(v, bool) else v))
    return buf.getvalue()
