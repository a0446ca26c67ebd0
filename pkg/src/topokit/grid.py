"""Likelihood grids, binary masks, file I/O, thresholding, and labeling.

A likelihood grid is a nonempty 2D float64 array with values in [0, 1],
where low values mark foreground (dark structures). A mask is a 2D bool
array with the same layout. Pixel identifiers used throughout the package
are row-major linear indices into the grid.

All functions here are pure: they never mutate their inputs.
"""

from __future__ import annotations

from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import ndimage

SUBLEVEL = "sublevel"
SUPERLEVEL = "superlevel"
DIRECTIONS = (SUBLEVEL, SUPERLEVEL)

_STRUCTURE = {
    4: np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool),
    8: np.ones((3, 3), dtype=bool),
}


class GridFormatError(ValueError):
    """Unparseable grid file, or a stored value outside the allowed range."""


class ComponentLabeling(NamedTuple):
    """Foreground labels (0 = background) and the number of components.

    Labels are assigned in first-encounter raster order starting at 1.
    """

    labels: np.ndarray
    count: int


def format_real(x: float) -> str:
    """Canonical 9-significant-digit rendering used by every writer."""
    return f"{float(x):.9g}"


def as_likelihood(values) -> np.ndarray:
    """Coerce to a validated 2D float64 likelihood grid.

    Raises ValueError for a bad shape and GridFormatError for values
    outside [0, 1] (reported with the offending row-major pixel index).
    """
    grid = np.asarray(values, dtype=np.float64)
    if grid.ndim != 2 or grid.size == 0:
        raise ValueError(f"likelihood grid must be a nonempty 2D array, got shape {grid.shape}")
    flat = grid.ravel()
    bad = np.flatnonzero(~np.isfinite(flat) | (flat < 0.0) | (flat > 1.0))
    if bad.size:
        i = int(bad[0])
        raise GridFormatError(f"value {flat[i]!r} at pixel {i} is outside [0, 1]")
    return grid


def as_mask(values) -> np.ndarray:
    mask = np.asarray(values)
    if mask.ndim != 2 or mask.size == 0:
        raise ValueError(f"mask must be a nonempty 2D array, got shape {mask.shape}")
    return mask.astype(bool)


def threshold(grid, c: float, direction: str = SUBLEVEL) -> np.ndarray:
    """Mask of pixels at or below c (sublevel) or at or above c (superlevel)."""
    grid = as_likelihood(grid)
    if direction not in DIRECTIONS:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
    c = float(c)
    return grid <= c if direction == SUBLEVEL else grid >= c


def label_components(mask, connectivity: int = 4) -> ComponentLabeling:
    """4- or 8-connected components of the foreground, raster-ordered labels."""
    mask = as_mask(mask)
    if connectivity not in _STRUCTURE:
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity!r}")
    raw, count = ndimage.label(mask, structure=_STRUCTURE[connectivity])
    if count == 0:
        return ComponentLabeling(raw.astype(np.int32), 0)
    # Renumber so label k is the k-th component met in a raster scan.
    flat = raw.ravel()
    ids, first = np.unique(flat, return_index=True)
    keep = ids > 0
    ids, first = ids[keep], first[keep]
    lut = np.zeros(int(ids.max()) + 1, dtype=np.int32)
    lut[ids[np.argsort(first, kind="stable")]] = np.arange(1, ids.size + 1, dtype=np.int32)
    return ComponentLabeling(lut[raw], int(count))


# ---------------------------------------------------------------------------
# file formats: PGM (P2 ascii / P5 binary) and headerless CSV
# ---------------------------------------------------------------------------

def _read_pgm_samples(path) -> tuple[np.ndarray, int]:
    """Parse a PGM file into (height x width int array, maxval)."""
    path = Path(path)
    data = path.read_bytes()
    tokens: list[bytes] = []
    pos = 0
    whitespace = b" \t\r\n\x0b\x0c"
    while len(tokens) < 4:
        if pos >= len(data):
            raise GridFormatError(f"{path}: truncated PGM header")
        ch = data[pos]
        if ch in whitespace:
            pos += 1
            continue
        if ch == ord("#"):
            nl = data.find(b"\n", pos)
            pos = len(data) if nl < 0 else nl + 1
            continue
        end = pos
        while end < len(data) and data[end] not in whitespace and data[end] != ord("#"):
            end += 1
        tokens.append(data[pos:end])
        pos = end
    magic = tokens[0]
    if magic not in (b"P2", b"P5"):
        raise GridFormatError(f"{path}: not a PGM file (magic {magic!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:4])
    except ValueError:
        raise GridFormatError(f"{path}: malformed PGM header {tokens[1:4]!r}") from None
    if width < 1 or height < 1:
        raise GridFormatError(f"{path}: bad PGM dimensions {width}x{height}")
    if not 1 <= maxval <= 65535:
        raise GridFormatError(f"{path}: PGM maxval {maxval} outside [1, 65535]")
    n = width * height
    if magic == b"P2":
        raw = data[pos:].split()
        try:
            samples = np.array([int(t) for t in raw], dtype=np.int64)
        except ValueError:
            raise GridFormatError(f"{path}: non-integer sample in P2 raster") from None
    else:
        pos += 1  # exactly one whitespace byte separates maxval from the raster
        itemsize = 2 if maxval > 255 else 1
        raster = data[pos:pos + n * itemsize]
        if len(raster) != n * itemsize:
            raise GridFormatError(f"{path}: truncated P5 raster")
        dtype = ">u2" if itemsize == 2 else "u1"
        samples = np.frombuffer(raster, dtype=dtype).astype(np.int64)
    if samples.size != n:
        raise GridFormatError(f"{path}: expected {n} samples, found {samples.size}")
    bad = np.flatnonzero((samples < 0) | (samples > maxval))
    if bad.size:
        i = int(bad[0])
        raise GridFormatError(
            f"{path}: sample {int(samples[i])} at pixel {i} exceeds maxval {maxval}"
        )
    return samples.reshape(height, width), maxval


def _read_csv_grid(path) -> np.ndarray:
    path = Path(path)
    rows: list[list[float]] = []
    for ln, line in enumerate(path.read_text().splitlines(), start=1):
        cells = line.split(",")
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            raise GridFormatError(f"{path}: line {ln}: unparseable cell") from None
    if not rows:
        raise GridFormatError(f"{path}: empty CSV grid")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise GridFormatError(f"{path}: non-rectangular CSV (row lengths differ)")
    return np.array(rows, dtype=np.float64)


def _infer_format(path, fmt: str | None) -> str:
    if fmt is not None:
        if fmt not in ("pgm", "csv"):
            raise ValueError(f"format must be 'pgm' or 'csv', got {fmt!r}")
        return fmt
    suffix = Path(path).suffix.lower()
    if suffix == ".pgm":
        return "pgm"
    if suffix == ".csv":
        return "csv"
    raise ValueError(f"cannot infer grid format from {path!r}; pass fmt='pgm' or 'csv'")


def load_grid(path, fmt: str | None = None) -> np.ndarray:
    """Load a likelihood grid from PGM (values scaled by maxval) or CSV."""
    fmt = _infer_format(path, fmt)
    if fmt == "pgm":
        samples, maxval = _read_pgm_samples(path)
        return as_likelihood(samples / float(maxval))
    return as_likelihood(_read_csv_grid(path))


def save_grid_csv(grid, path) -> None:
    grid = as_likelihood(grid)
    lines = [",".join(format_real(v) for v in row) for row in grid]
    Path(path).write_text("\n".join(lines) + "\n")


def save_grid_pgm(grid, path, maxval: int = 65535) -> None:
    """Write an ascii (P2) PGM, quantizing values to round(v * maxval)."""
    grid = as_likelihood(grid)
    if not 1 <= maxval <= 65535:
        raise ValueError(f"maxval {maxval} outside [1, 65535]")
    samples = np.rint(grid * maxval).astype(np.int64).clip(0, maxval)
    h, w = grid.shape
    out = [f"P2\n{w} {h}\n{maxval}"]
    flat = samples.ravel()
    for start in range(0, flat.size, 16):
        out.append(" ".join(str(int(v)) for v in flat[start:start + 16]))
    Path(path).write_text("\n".join(out) + "\n")


def load_mask_pgm(path) -> np.ndarray:
    """Load a binary mask from PGM; any nonzero sample is foreground."""
    samples, _ = _read_pgm_samples(path)
    return samples != 0


def save_mask_pgm(mask, path, maxval: int = 255) -> None:
    mask = as_mask(mask)
    h, w = mask.shape
    out = [f"P2\n{w} {h}\n{maxval}"]
    flat = np.where(mask.ravel(), maxval, 0)
    for start in range(0, flat.size, 16):
        out.append(" ".join(str(int(v)) for v in flat[start:start + 16]))
    Path(path).write_text("\n".join(out) + "\n")
