"""Readers for the run-directory schemas written by the simulator CLI."""

from __future__ import annotations

import csv
import json
import os

import numpy as np


class SchemaError(Exception):
    """Input file missing or malformed; the message lists what is absent."""


def _read_csv(path, required):
    if not os.path.exists(path):
        raise SchemaError(f"{path}: file not found")
    with open(path, newline="") as f:
        rows = [r for r in csv.reader(f) if r and not r[0].startswith("#")]
    if not rows:
        raise SchemaError(f"{path}: empty file")
    header = rows[0]
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing} (have {header})")
    idx = [header.index(c) for c in required]
    data = []
    for r in rows[1:]:
        data.append([r[i] for i in idx])
    return data


def read_map(path, label_col, value_col):
    """Long-format map CSV -> (times, labels, values grid, stderr grid)."""
    rows = _read_csv(path, ["time", label_col, value_col, "stderr"])
    times = sorted({float(r[0]) for r in rows})
    labels = sorted({int(r[1]) for r in rows})
    t_index = {t: a for a, t in enumerate(times)}
    l_index = {l: b for b, l in enumerate(labels)}
    vals = np.full((len(times), len(labels)), np.nan)
    errs = np.zeros_like(vals)
    for t, lab, v, e in rows:
        a, b = t_index[float(t)], l_index[int(lab)]
        vals[a, b] = float(v)
        errs[a, b] = float(e) if e != "" else 0.0
    if np.any(np.isnan(vals)):
        raise SchemaError(f"{path}: incomplete time x site grid")
    return np.array(times), np.array(labels), vals, errs


def read_twobody(path):
    """Potential landscape CSV -> (l1, l2, V, resonant) arrays."""
    rows = _read_csv(path, ["l1", "l2", "V", "resonant"])
    l1 = np.array([int(r[0]) for r in rows])
    l2 = np.array([int(r[1]) for r in rows])
    V = np.array([float(r[2]) for r in rows])
    res = np.array([int(r[3]) for r in rows], dtype=bool)
    return l1, l2, V, res


def read_thermal(path):
    """Thermal baseline CSV -> (sites, eps_thermal, eps_evolved)."""
    rows = _read_csv(path, ["site", "eps_thermal", "eps_evolved"])
    sites = np.array([int(r[0]) for r in rows])
    return sites, np.array([float(r[1]) for r in rows]), \
        np.array([float(r[2]) for r in rows])


def read_manifest(run_dir):
    path = os.path.join(run_dir, "manifest.json")
    if not os.path.exists(path):
        raise SchemaError(f"{path}: file not found")
    with open(path) as f:
        manifest = json.load(f)
    if "parameters" not in manifest:
        raise SchemaError(f"{path}: missing 'parameters' block")
    return manifest


def read_fits(run_dir):
    path = os.path.join(run_dir, "fits.json")
    if not os.path.exists(path):
        return {}
    with open(path) as f:
        return json.load(f)
