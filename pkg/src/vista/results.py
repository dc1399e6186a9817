"""Run records and deterministic persistence.

``persist`` writes three files into the output directory:

* ``result.json``  : status, final estimates, full trace, config echo
* ``trace.csv``    : epoch,loss,theta_hat[,phi][,theta2_hat],grad_norm,shots,lr
* ``config.json``  : the effective config alone (loadable as a config file)

Floats in CSV carry 12 significant digits.  Wall time is kept on the
in-memory record but never persisted, so rerunning with the same seed
overwrites every file byte-identically.
"""

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np


@dataclass
class RunResult:
    config: dict
    seed: int
    status: str
    param_names: tuple = ()
    trace: dict | None = None  # epoch, loss, params (2D), grad_norm, shots, lr
    final: dict = field(default_factory=dict)
    stages: list | None = None
    series: dict | None = None  # baseline time series instead of a trace
    wall_time_s: float = 0.0


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.12g}"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def trace_header(param_names):
    cols = ["epoch", "loss"]
    cols += list(param_names)
    cols += ["grad_norm", "shots", "lr"]
    return cols


def persist(result, outdir):
    """Write result.json, trace.csv (or series.csv), and the config echo."""
    os.makedirs(outdir, exist_ok=True)

    doc = {
        "config": result.config,
        "seed": result.seed,
        "status": result.status,
        "final": _jsonable(result.final),
    }
    if result.trace is not None:
        doc["trace"] = _jsonable(
            {
                "param_names": list(result.param_names),
                "epoch": result.trace["epoch"],
                "loss": result.trace["loss"],
                "params": result.trace["params"],
                "grad_norm": result.trace["grad_norm"],
                "shots": result.trace["shots"],
                "lr": result.trace["lr"],
            }
        )
    if result.stages is not None:
        doc["stages"] = _jsonable(result.stages)
    if result.series is not None:
        doc["series"] = _jsonable(result.series)

    with open(os.path.join(outdir, "result.json"), "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")

    if result.trace is not None:
        with open(os.path.join(outdir, "trace.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(trace_header(result.param_names))
            tr = result.trace
            for i in range(len(tr["epoch"])):
                row = [int(tr["epoch"][i]), _fmt(tr["loss"][i])]
                row += [_fmt(v) for v in np.atleast_1d(tr["params"][i])]
                row += [_fmt(tr["grad_norm"][i]), int(tr["shots"][i]), _fmt(tr["lr"][i])]
                writer.writerow(row)

    if result.series is not None:
        with open(os.path.join(outdir, "series.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            keys = list(result.series)
            writer.writerow(keys)
            length = len(result.series[keys[0]])
            for i in range(length):
                writer.writerow([_fmt(result.series[k][i]) for k in keys])

    with open(os.path.join(outdir, "config.json"), "w") as fh:
        json.dump(result.config, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_summary(path, fieldnames, rows):
    """summary.csv for sweeps: one aggregated row per grid point."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        for row in rows:
            out = []
            for k in fieldnames:
                v = row.get(k, "")
                out.append(_fmt(v) if isinstance(v, float) else v)
            writer.writerow(out)
