"""Atomic CSV and JSON emission."""

import json
import math
import os
import tempfile

import numpy as np


def format_value(x):
    """17 significant digits for reals, plain text for everything else."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    return str(x)


def render_csv(columns, rows):
    lines = [",".join(columns)]
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} fields, header has {len(columns)}")
        lines.append(",".join(format_value(x) for x in row))
    return "\n".join(lines) + "\n"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def render_json(meta):
    return json.dumps(_jsonable(meta), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def atomic_write(path, text):
    """Write ``text`` to ``path`` through a temp file in the same directory
    and an atomic rename, so readers never see a partial file."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def figure_paths(out_dir, figure):
    return os.path.join(out_dir, f"{figure}.csv"), os.path.join(out_dir, f"{figure}.json")


def write_figure(out_dir, data):
    csv_path, json_path = figure_paths(out_dir, data.figure)
    atomic_write(csv_path, render_csv(data.columns, data.rows))
    atomic_write(json_path, render_json(data.meta))
    return csv_path, json_path


def write_aborted(out_dir, figure, meta):
    """Metadata-only record of an aborted figure; any stale CSV is removed."""
    csv_path, json_path = figure_paths(out_dir, figure)
    if os.path.exists(csv_path):
        os.unlink(csv_path)
    atomic_write(json_path, render_json(meta))
    return json_path
