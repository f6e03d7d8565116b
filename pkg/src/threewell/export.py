"""Plain-text and PGM writers shared by the quantum and classical sides."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np


def fmt(x) -> str:
    return repr(float(x))


def write_matrix_csv(path, values: np.ndarray, mask: np.ndarray | None = None) -> Path:
    """Write a 2D array row by row; cells where ``mask`` is False are blank."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for i, row in enumerate(values):
            if mask is None:
                w.writerow([fmt(v) for v in row])
            else:
                w.writerow([fmt(v) if ok else "" for v, ok in zip(row, mask[i])])
    return path


def read_matrix_csv(path) -> np.ndarray:
    """Inverse of :func:`write_matrix_csv`; blank cells come back as NaN."""
    with open(path, newline="") as fh:
        rows = [[float(c) if c else np.nan for c in r] for r in csv.reader(fh)]
    return np.array(rows, dtype=np.float64)


def _cell(c) -> str:
    if isinstance(c, str):
        return c
    if isinstance(c, (int, np.integer)):
        return str(int(c))
    return fmt(c)


def write_columns_csv(path, header, columns) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*columns):
            w.writerow([_cell(c) for c in row])
    return path


def write_pgm(path, values: np.ndarray) -> Path:
    """16-bit binary PGM, linear scale normalized to the array maximum.

    NaN cells are written as 0.
    """
    a = np.nan_to_num(np.asarray(values, dtype=np.float64), nan=0.0)
    top = a.max() if a.size else 0.0
    scaled = np.zeros(a.shape) if top <= 0 else np.clip(a / top, 0.0, 1.0)
    pix = np.round(scaled * 65535).astype(">u2")
    h, w = pix.shape
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(pix.tobytes())
    return path


def read_pgm(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    parts = raw.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    dtype = ">u2" if maxval > 255 else "u1"
    data = raw[len(raw) - w * h * np.dtype(dtype).itemsize :]
    return np.frombuffer(data, dtype=dtype).reshape(h, w)
