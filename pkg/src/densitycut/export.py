"""Plain-text writers for masks and report tables."""
from __future__ import annotations

import csv
import io
import json
import math

import numpy as np


def mask_to_pgm(mask2d):
    """ASCII P2 image of a vertex mask: 0 on the set, 255 off it.

    ``mask2d[i, j]`` is vertex ``(i, j)``; ``i`` runs left to right and the
    first image row is the largest ``j``.
    """
    mask2d = np.asarray(mask2d, dtype=bool)
    img = np.where(mask2d, 0, 255).T[::-1]
    h, w = img.shape
    rows = "\n".join(" ".join(str(int(v)) for v in row) for row in img)
    return f"P2\n{w} {h}\n255\n{rows}\n"


def read_pgm(text):
    """Inverse of :func:`mask_to_pgm`; returns the boolean ``(i, j)`` mask."""
    tokens = [t for line in text.splitlines() if not line.startswith("#") for t in line.split()]
    if tokens[0] != "P2":
        raise ValueError("not an ASCII PGM")
    w, h, _ = int(tokens[1]), int(tokens[2]), int(tokens[3])
    img = np.array(tokens[4:4 + w * h], dtype=int).reshape(h, w)
    return (img[::-1].T == 0)


def rows_to_csv(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps_report(report):
    """Deterministic JSON text: sorted keys, fixed indentation."""
    return json.dumps(_clean(report), sort_keys=True, indent=2, allow_nan=False) + "\n"
