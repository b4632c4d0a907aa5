"""File formats: binary PPM rasters, CSV tables and schema-versioned JSON."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from typing import Iterable, Sequence

import numpy as np

from asdkit.errors import ParameterError

JSON_SCHEMA = 1


def rasterize(points: np.ndarray, window: Sequence[float], size: int) -> np.ndarray:
    """Boolean (size, size) mask of pixels hit by ``points``; row 0 is the top edge.

    ``window`` is (xmin, xmax, ymin, ymax); points outside are ignored.
    """
    xmin, xmax, ymin, ymax = window
    if not (xmax > xmin and ymax > ymin):
        raise ParameterError("window must have xmax > xmin and ymax > ymin")
    if size < 1:
        raise ParameterError("image size must be positive")
    p = np.asarray(points, dtype=complex)
    col = np.floor((p.real - xmin) / (xmax - xmin) * size).astype(np.int64)
    row = np.floor((ymax - p.imag) / (ymax - ymin) * size).astype(np.int64)
    ok = (col >= 0) & (col < size) & (row >= 0) & (row < size)
    mask = np.zeros((size, size), dtype=bool)
    mask[row[ok], col[ok]] = True
    return mask


def pixel_center(row: int, col: int, window: Sequence[float], size: int) -> complex:
    xmin, xmax, ymin, ymax = window
    return complex(xmin + (col + 0.5) * (xmax - xmin) / size, ymax - (row + 0.5) * (ymax - ymin) / size)


def ppm_bytes(mask: np.ndarray) -> bytes:
    """P6 image: white points on black."""
    h, w = mask.shape
    rgb = np.zeros((h, w, 3), dtype=np.uint8)
    rgb[mask] = 255
    return f"P6\n{w} {h}\n255\n".encode("ascii") + rgb.tobytes()


def read_ppm(data: bytes) -> np.ndarray:
    """Inverse of :func:`ppm_bytes` for the files this package writes."""
    head, rest = data.split(b"\n", 1)
    if head != b"P6":
        raise ValueError("not a binary PPM")
    dims, rest = rest.split(b"\n", 1)
    w, h = (int(v) for v in dims.split())
    _, pix = rest.split(b"\n", 1)
    rgb = np.frombuffer(pix, dtype=np.uint8).reshape(h, w, 3)
    return rgb[..., 0] > 0


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def cloud_csv(points: np.ndarray, lengths: np.ndarray | None = None) -> str:
    if lengths is None:
        return csv_text(["re", "im"], ((p.real, p.imag) for p in points))
    return csv_text(["re", "im", "syllables"], ((p.real, p.imag, int(n)) for p, n in zip(points, lengths)))


def read_cloud_csv(path: str) -> np.ndarray:
    """Complex points from a CSV with a header naming ``re`` and ``im`` columns (or x, y)."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip().lower() for h in next(reader)]
        except StopIteration:
            raise ParameterError(f"{path}: empty file") from None
        for names in (("re", "im"), ("x", "y")):
            if all(n in header for n in names):
                i, j = header.index(names[0]), header.index(names[1])
                break
        else:
            raise ParameterError(f"{path}: header must name re,im or x,y columns")
        try:
            pts = [complex(float(r[i]), float(r[j])) for r in reader if r]
        except (ValueError, IndexError):
            raise ParameterError(f"{path}: malformed row") from None
    return np.array(pts, dtype=complex)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def json_text(report: dict) -> str:
    return json.dumps({"schema": JSON_SCHEMA, **_clean(report)}, indent=2, sort_keys=True,
                      ensure_ascii=False) + "\n"


def write_outputs(files: dict[str, bytes | str]) -> None:
    """Write every file or none: contents go to temporaries first, then are renamed."""
    staged = []
    umask = os.umask(0)
    os.umask(umask)
    try:
        for path, data in files.items():
            d = os.path.dirname(os.path.abspath(path))
            os.makedirs(d, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
            staged.append((tmp, path))
            with os.fdopen(fd, "wb") as fh:
                fh.write(data.encode("utf-8") if isinstance(data, str) else data)
            os.chmod(tmp, 0o666 & ~umask)
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, path in staged:
        os.replace(tmp, path)
