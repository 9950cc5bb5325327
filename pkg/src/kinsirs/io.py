"""Output writers: timeseries CSV, grid CSV, binary PPM renders.

Formats are pinned (docs/FORMATS.md) and covered by golden tests:

* timeseries: header row, then one row per output time; numbers with
  repr-shortest formatting;
* grid CSV: a '# shape nx ny' comment, then nx rows of ny values;
* PPM: binary P6, one pixel per cell, channel map I=red, R=green, S=blue,
  intensity 255 * clip(value / normalization, 0, 1) rounded; the
  normalization constant and channel map live in a '<name>.meta.txt'
  sidecar.  Row r of the raster is y index ny-1-r (y points up).
"""

import os

import numpy as np

from .grids import CLASSES

# class -> RGB channel position in the composite image
_CHANNEL_OF_CLASS = {0: 2, 1: 0, 2: 1}


def _fmt(x):
    x = float(x)
    if x.is_integer() and abs(x) < 1e16:
        return str(int(x))
    return np.format_float_positional(x, trim="0")


def write_timeseries(path, times, columns):
    """CSV with a time column plus named columns.

    columns is a sequence of (name, values) pairs; order is preserved
    exactly as given.
    """
    names = ["t"] + [name for name, _ in columns]
    arrays = [np.asarray(times)] + [np.asarray(v) for _, v in columns]
    n = len(arrays[0])
    for name, arr in zip(names, arrays):
        if len(arr) != n:
            raise ValueError(f"column {name} has {len(arr)} rows, expected {n}")
    with open(path, "w") as fh:
        fh.write(",".join(names) + "\n")
        for i in range(n):
            fh.write(",".join(_fmt(a[i]) for a in arrays) + "\n")
    return path


def write_grid_csv(path, values):
    """One 2-D field: '# shape nx ny' then nx rows of ny comma-separated values."""
    values = np.asarray(values)
    if values.ndim == 1:
        values = values[:, None]
    if values.ndim != 2:
        raise ValueError("grid CSV takes a single 2-D field")
    nx, ny = values.shape
    with open(path, "w") as fh:
        fh.write(f"# shape {nx} {ny}\n")
        for ix in range(nx):
            fh.write(",".join(_fmt(values[ix, iy]) for iy in range(ny)) + "\n")
    return path


def render_ppm(path, rho, normalization=None):
    """Binary P6 image of a (3, nx, ny) class-density array.

    Channel map: I to red, R to green, S to blue.  Pixel intensity is
    round(255 * clip(value / normalization, 0, 1)); the default
    normalization is the largest value over all classes (or 1 for an
    all-zero field).  Writes '<path>.meta.txt' with the normalization and
    the channel map, and returns (path, normalization).
    """
    rho = np.asarray(rho, dtype=float)
    if rho.ndim != 3 or rho.shape[0] != 3:
        raise ValueError("expected a (3, nx, ny) array")
    if normalization is None:
        peak = float(rho.max())
        normalization = peak if peak > 0.0 else 1.0
    if normalization <= 0.0:
        raise ValueError("normalization must be positive")
    _, nx, ny = rho.shape
    scaled = np.clip(rho / normalization, 0.0, 1.0)
    img = np.zeros((ny, nx, 3), dtype=np.uint8)
    for j in range(3):
        channel = np.rint(255.0 * scaled[j]).astype(np.uint8)
        img[:, :, _CHANNEL_OF_CLASS[j]] = channel.T[::-1, :]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{nx} {ny}\n255\n".encode("ascii"))
        fh.write(img.tobytes())
    with open(str(path) + ".meta.txt", "w") as fh:
        fh.write(f"normalization {_fmt(normalization)}\n")
        fh.write("channels I=red R=green S=blue\n")
        fh.write(f"shape {nx} {ny}\n")
    return path, normalization


def render_class_panels(path_base, rho, normalization=None):
    """One PPM per class ('<base>_S.ppm', ...), sharing one normalization.

    Returns the list of paths and the normalization used.
    """
    rho = np.asarray(rho, dtype=float)
    if normalization is None:
        peak = float(rho.max())
        normalization = peak if peak > 0.0 else 1.0
    paths = []
    for j, name in enumerate(CLASSES):
        solo = np.zeros_like(rho)
        solo[j] = rho[j]
        p = f"{path_base}_{name}.ppm"
        render_ppm(p, solo, normalization)
        paths.append(p)
    return paths, normalization


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
