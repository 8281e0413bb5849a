"""Volume file format: raw little-endian payload plus a JSON sidecar.

A volume at ``path`` consists of two files:

* ``path`` - the raw voxel payload, little-endian, linearized x-fastest
  (index = ix + nx * (iy + ny * iz)),
* ``path.json`` - a JSON sidecar with the keys ``dims`` (three ints),
  ``spacing_um`` (float), ``depth`` (int or the string "continuous"),
  ``dtype`` ("u8", "u16" or "f32") and ``order`` (always "x-fastest").

Integer payloads map linearly onto [0, 1] by value / (2^bits - 1); they are
bit-exact under store/load round trips.  f32 payloads are rounded to single
precision; grids with an integer depth are re-snapped to their color set on
load, which restores the exact gray values.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import VolumeFormatError
from .voxelgrid import VoxelGrid, color_steps

__all__ = ["load_volume", "store_volume"]

_DTYPES = {
    "u8": np.dtype("<u1"),
    "u16": np.dtype("<u2"),
    "f32": np.dtype("<f4"),
}
_SIDECAR_KEYS = {"dims", "spacing_um", "depth", "dtype", "order"}


def _sidecar_path(path) -> Path:
    return Path(str(path) + ".json")


def store_volume(grid: VoxelGrid, path, dtype: str | None = None) -> None:
    """Write a grid to ``path`` (payload) and ``path.json`` (sidecar).

    ``dtype`` defaults to "u8" for binary grids and "f32" otherwise.  Integer
    dtypes are refused unless every gray value is exactly representable, so
    that load(store(grid)) never silently loses information.
    """
    if dtype is None:
        dtype = "u8" if grid.depth == 1 else "f32"
    if dtype not in _DTYPES:
        raise VolumeFormatError(f"unknown dtype {dtype!r}, expected one of {sorted(_DTYPES)}")

    vals = grid.values
    if dtype == "f32":
        payload = vals.astype("<f4")
    else:
        top = 255 if dtype == "u8" else 65535
        scaled = vals * top
        rounded = np.rint(scaled)
        if not np.array_equal(rounded / top, vals):
            raise VolumeFormatError(
                f"gray values are not exactly representable as {dtype}; use f32"
            )
        payload = rounded.astype(_DTYPES[dtype])

    sidecar = {
        "dims": list(grid.dims),
        "spacing_um": grid.spacing,
        "depth": "continuous" if grid.depth is None else grid.depth,
        "dtype": dtype,
        "order": "x-fastest",
    }
    Path(path).write_bytes(payload.ravel(order="F").tobytes())
    _sidecar_path(path).write_text(json.dumps(sidecar, sort_keys=True) + "\n")


def load_volume(path) -> VoxelGrid:
    """Read a grid from ``path`` / ``path.json``; inverse of store_volume."""
    sidecar_file = _sidecar_path(path)
    try:
        text = sidecar_file.read_text()
    except OSError as exc:
        raise VolumeFormatError(f"cannot read sidecar {sidecar_file}: {exc}") from exc
    try:
        meta = json.loads(text)
    except json.JSONDecodeError as exc:
        raise VolumeFormatError(
            f"malformed sidecar {sidecar_file} at byte {exc.pos}: {exc.msg}"
        ) from exc

    if not isinstance(meta, dict):
        raise VolumeFormatError(f"sidecar {sidecar_file} must hold a JSON object")
    missing = _SIDECAR_KEYS - meta.keys()
    if missing:
        raise VolumeFormatError(f"sidecar is missing keys {sorted(missing)}")
    extra = meta.keys() - _SIDECAR_KEYS
    if extra:
        raise VolumeFormatError(f"sidecar has unknown keys {sorted(extra)}")
    if meta["order"] != "x-fastest":
        raise VolumeFormatError(f"unsupported order {meta['order']!r} (key 'order')")
    if meta["dtype"] not in _DTYPES:
        raise VolumeFormatError(f"unknown dtype {meta['dtype']!r} (key 'dtype')")
    dims = meta["dims"]
    if (
        not isinstance(dims, list)
        or len(dims) != 3
        or not all(isinstance(n, int) and n >= 2 for n in dims)
    ):
        raise VolumeFormatError(f"invalid dims {dims!r} (key 'dims')")
    depth = meta["depth"]
    if depth == "continuous":
        depth = None
    elif not isinstance(depth, int) or depth < 1:
        raise VolumeFormatError(f"invalid depth {depth!r} (key 'depth')")

    np_dtype = _DTYPES[meta["dtype"]]
    expected = int(np.prod(dims)) * np_dtype.itemsize
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise VolumeFormatError(f"cannot read payload {path}: {exc}") from exc
    if len(raw) != expected:
        raise VolumeFormatError(
            f"payload {path} has {len(raw)} bytes, expected {expected} "
            f"({dims[0]}x{dims[1]}x{dims[2]} of {meta['dtype']})"
        )

    flat = np.frombuffer(raw, dtype=np_dtype)
    arr = flat.reshape(dims, order="F").astype(np.float64)
    if meta["dtype"] == "u8":
        arr /= 255.0
    elif meta["dtype"] == "u16":
        arr /= 65535.0
    if depth is not None:
        # restore exact color-set members lost to f32 rounding
        m = color_steps(depth)
        arr = np.rint(arr * m) / m
    try:
        return VoxelGrid(arr, float(meta["spacing_um"]), depth=depth)
    except ValueError as exc:
        raise VolumeFormatError(f"volume {path} violates grid invariants: {exc}") from exc
