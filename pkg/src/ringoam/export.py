"""Plain CSV / JSON writers with deterministic number formatting.

Every CSV starts with one ``#`` comment line holding a JSON object with the
format version and the full run parameters.  Floats are written with 17
significant digits so identical runs give byte-identical files.
"""
import csv
import io
import json
import math
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1


def fmt(value):
    """Format one CSV cell."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if obj is None or isinstance(obj, str):
        return obj
    return str(obj)


def header_line(meta):
    payload = {"format_version": FORMAT_VERSION, **_jsonable(meta)}
    return "# " + json.dumps(payload, sort_keys=True, separators=(",", ":"))


def csv_text(meta, columns, rows):
    buf = io.StringIO()
    buf.write(header_line(meta) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, meta, columns, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(meta, columns, rows), encoding="utf-8", newline="")
    return path


def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"
    path.write_text(text, encoding="utf-8", newline="")
    return path


def read_csv(path):
    """Return ``(meta, columns, rows)`` with rows as lists of strings."""
    with open(path, encoding="utf-8", newline="") as fh:
        first = fh.readline()
        if not first.startswith("# "):
            raise ValueError(f"{path}: missing header comment line")
        meta = json.loads(first[2:])
        reader = csv.reader(fh)
        columns = next(reader)
        rows = list(reader)
    return meta, columns, rows


def read_numeric_csv(path):
    """Like read_csv but converts cells to float (empty cells become NaN)."""
    meta, columns, rows = read_csv(path)
    data = np.array([[float(c) if c != "" else np.nan for c in r] for r in rows], dtype=float)
    return meta, columns, data.reshape(len(rows), len(columns))


# -- tables for each analysis ---------------------------------------------------

def trajectory_table(traj):
    """Columns ``tau, N_u[m], N_d[m]`` for m = -M..M."""
    modes = traj.modes
    cols = ["tau"]
    for m in modes:
        cols += [f"N_u[{m}]", f"N_d[{m}]"]
    pops = traj.populations
    rows = []
    for i, t in enumerate(traj.taus):
        row = [float(t)]
        # interleave up/down per mode
        row.extend(np.stack([pops[i, 0], pops[i, 1]], axis=1).ravel().tolist())
        rows.append(row)
    return cols, rows


def stability_table(smap):
    cols = ["kappa", "epsilon"]
    for m in smap.modes:
        cols += [f"omega_squared[{m}]", f"unstable[{m}]"]
    rows = []
    for k, e, per_mode in smap.rows():
        row = [float(k), float(e)]
        for w2, u in per_mode:
            row += [float(w2), bool(u)]
        rows.append(row)
    return cols, rows


def portrait_table(portrait, n_total):
    cols = ["zeta", "x_over_N", "H"]
    rows = []
    for i, z in enumerate(portrait.zeta_axis):
        for j, x in enumerate(portrait.x_axis):
            rows.append([float(z), float(x) / n_total, float(portrait.H[i, j])])
    return cols, rows


def regime_table(rmap):
    cols = ["kappa", "epsilon", "z0", "label", "decay_time", "dominant_mode"]
    rows = [[c.kappa, c.epsilon, c.z0, c.label, c.decay_time, c.dominant_mode]
            for c in rmap.flat()]
    return cols, rows


def josephson_table(jtraj):
    return ["s", "z", "dphi"], [[float(s), float(z), float(p)]
                                for s, z, p in zip(jtraj.s, jtraj.z, jtraj.dphi)]
