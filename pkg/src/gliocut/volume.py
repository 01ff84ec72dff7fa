"""3D scalar volumes and binary masks with anisotropic voxel spacing.

File format is a small MetaImage subset: an ASCII ``.mhd`` header next to a
little-endian raw file (x-fastest ordering), or a single ``.mha`` file with
``ElementDataFile = LOCAL`` and the payload appended after the header.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

ELEMENT_TYPES = {
    "MET_UCHAR": np.uint8,
    "MET_SHORT": np.int16,
    "MET_USHORT": np.uint16,
    "MET_FLOAT": np.float32,
}
KIND_TO_MET = {"u8": "MET_UCHAR", "i16": "MET_SHORT", "u16": "MET_USHORT", "f32": "MET_FLOAT"}
MET_TO_KIND = {v: k for k, v in KIND_TO_MET.items()}


class MetaImageError(Exception):
    """Base class for volume file errors."""


class MalformedHeaderError(MetaImageError):
    """Header is missing required keys or carries values outside the subset."""


class UnsupportedElementTypeError(MetaImageError):
    """ElementType is not one of the supported scalar kinds."""


class DataLengthError(MetaImageError):
    """Raw payload size does not match DimSize times the element size."""


@dataclass(frozen=True)
class Volume:
    """A 3D scalar grid. ``data`` is float32 with shape ``dims`` (x, y, z)."""

    dims: tuple[int, int, int]
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float]
    data: np.ndarray
    element_kind: str = "f32"

    def __post_init__(self):
        if any(d < 1 for d in self.dims):
            raise ValueError(f"dims must be >= 1, got {self.dims}")
        if any(s <= 0 for s in self.spacing):
            raise ValueError(f"spacing must be > 0, got {self.spacing}")
        if self.data.shape != tuple(self.dims):
            raise ValueError(f"data shape {self.data.shape} != dims {self.dims}")
        if self.element_kind not in KIND_TO_MET:
            raise ValueError(f"unknown element kind {self.element_kind!r}")

    @property
    def voxel_volume_mm3(self) -> float:
        sx, sy, sz = self.spacing
        return sx * sy * sz

    def value_range(self) -> tuple[float, float]:
        return float(self.data.min()), float(self.data.max())


@dataclass(frozen=True)
class Mask:
    """A binary volume; ``data`` is uint8 restricted to {0, 1}."""

    dims: tuple[int, int, int]
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float]
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.data.shape != tuple(self.dims):
            raise ValueError(f"data shape {self.data.shape} != dims {self.dims}")
        bad = (self.data != 0) & (self.data != 1)
        if bad.any():
            raise ValueError("mask data contains values other than 0 and 1")

    @property
    def voxel_volume_mm3(self) -> float:
        sx, sy, sz = self.spacing
        return sx * sy * sz


def voxel_to_world(volume, index) -> tuple[float, float, float]:
    """World position (mm) of a voxel center: origin + index * spacing."""
    idx = np.asarray(index)
    if idx.shape != (3,):
        raise ValueError("index must be a triple")
    if (idx < 0).any() or (idx >= np.asarray(volume.dims)).any():
        raise IndexError(f"index {tuple(idx)} outside dims {volume.dims}")
    p = np.asarray(volume.origin) + idx * np.asarray(volume.spacing)
    return (float(p[0]), float(p[1]), float(p[2]))


def world_to_continuous_index(volume, point_mm) -> np.ndarray:
    """Continuous voxel coordinates of a world point."""
    return (np.asarray(point_mm, dtype=float) - np.asarray(volume.origin)) / np.asarray(volume.spacing)


def containing_voxel(volume, point_mm) -> tuple[int, int, int]:
    """Index of the voxel whose center is nearest the world point."""
    idx = np.round(world_to_continuous_index(volume, point_mm)).astype(int)
    if (idx < 0).any() or (idx >= np.asarray(volume.dims)).any():
        raise IndexError(f"point {tuple(point_mm)} outside volume")
    return (int(idx[0]), int(idx[1]), int(idx[2]))


def point_inside(volume, point_mm) -> bool:
    """True when the point lies within the hull of voxel centers."""
    g = world_to_continuous_index(volume, point_mm)
    return bool((g >= 0).all() and (g <= np.asarray(volume.dims) - 1).all())


def sample_trilinear_many(volume, points_mm, background=0.0) -> np.ndarray:
    """Trilinear interpolation at N world points; outside the grid -> background.

    The grid is the hull of voxel centers. A hair of tolerance keeps points
    that land exactly on the outermost centers (up to float rounding) inside.
    """
    g = (np.asarray(points_mm, dtype=float) - np.asarray(volume.origin)) / np.asarray(volume.spacing)
    hib = np.asarray(volume.dims, dtype=float) - 1.0
    eps = 1e-9
    inside = np.all((g >= -eps) & (g <= hib + eps), axis=1)
    gc = np.clip(g, 0.0, hib)
    i0 = np.floor(gc).astype(np.int64)
    i0 = np.minimum(i0, (np.asarray(volume.dims) - 2).clip(min=0))
    f = gc - i0
    x0, y0, z0 = i0[:, 0], i0[:, 1], i0[:, 2]
    # degenerate axes (dim == 1) index the single slab twice with weight 0
    x1 = np.minimum(x0 + 1, volume.dims[0] - 1)
    y1 = np.minimum(y0 + 1, volume.dims[1] - 1)
    z1 = np.minimum(z0 + 1, volume.dims[2] - 1)
    fx, fy, fz = f[:, 0], f[:, 1], f[:, 2]
    d = volume.data
    out = (
        d[x0, y0, z0] * (1 - fx) * (1 - fy) * (1 - fz)
        + d[x1, y0, z0] * fx * (1 - fy) * (1 - fz)
        + d[x0, y1, z0] * (1 - fx) * fy * (1 - fz)
        + d[x0, y0, z1] * (1 - fx) * (1 - fy) * fz
        + d[x1, y0, z1] * fx * (1 - fy) * fz
        + d[x0, y1, z1] * (1 - fx) * fy * fz
        + d[x1, y1, z0] * fx * fy * (1 - fz)
        + d[x1, y1, z1] * fx * fy * fz
    )
    return np.where(inside, out, background)


def sample_trilinear(volume, point_mm, background=0.0) -> float:
    """Trilinear sample at one world point."""
    return float(sample_trilinear_many(volume, np.asarray(point_mm, dtype=float)[None, :], background)[0])


# ---------------------------------------------------------------------------
# MetaImage subset I/O


def _parse_header_lines(lines):
    header = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if "=" not in line:
            raise MalformedHeaderError(f"line {lineno}: expected 'Key = value', got {line!r}")
        key, _, value = line.partition("=")
        header[key.strip()] = value.strip()
    return header


def _header_floats(header, key, n):
    try:
        vals = [float(v) for v in header[key].split()]
    except ValueError as exc:
        raise MalformedHeaderError(f"{key}: {exc}") from exc
    if len(vals) != n:
        raise MalformedHeaderError(f"{key} must have {n} entries, got {len(vals)}")
    return vals


def _validate_header(header):
    for key in ("ObjectType", "NDims", "DimSize", "ElementSpacing", "ElementType", "ElementDataFile"):
        if key not in header:
            raise MalformedHeaderError(f"missing required key {key}")
    if header["ObjectType"] != "Image":
        raise MalformedHeaderError(f"ObjectType must be Image, got {header['ObjectType']!r}")
    if header["NDims"] != "3":
        raise MalformedHeaderError(f"NDims must be 3, got {header['NDims']!r}")
    for key in ("ElementByteOrderMSB", "BinaryDataByteOrderMSB"):
        if header.get(key, "False") not in ("False", "false"):
            raise MalformedHeaderError(f"{key} must be False (little-endian only)")
    if header["ElementType"] not in ELEMENT_TYPES:
        raise UnsupportedElementTypeError(
            f"ElementType {header['ElementType']!r} not in {sorted(ELEMENT_TYPES)}"
        )
    try:
        dims = [int(v) for v in header["DimSize"].split()]
    except ValueError as exc:
        raise MalformedHeaderError(f"DimSize: {exc}") from exc
    if len(dims) != 3 or any(d < 1 for d in dims):
        raise MalformedHeaderError(f"DimSize must be 3 positive integers, got {header['DimSize']!r}")
    spacing = _header_floats(header, "ElementSpacing", 3)
    if any(s <= 0 for s in spacing):
        raise MalformedHeaderError(f"ElementSpacing must be positive, got {spacing}")
    origin = _header_floats(header, "Offset", 3) if "Offset" in header else [0.0, 0.0, 0.0]
    return tuple(dims), tuple(spacing), tuple(origin)


def _volume_from_parts(header, raw: bytes) -> Volume:
    dims, spacing, origin = _validate_header(header)
    dtype = np.dtype(ELEMENT_TYPES[header["ElementType"]]).newbyteorder("<")
    expected = dims[0] * dims[1] * dims[2] * dtype.itemsize
    if len(raw) != expected:
        raise DataLengthError(f"data length mismatch: expected {expected} bytes, got {len(raw)}")
    flat = np.frombuffer(raw, dtype=dtype)
    data = flat.reshape(dims, order="F").astype(np.float32)
    return Volume(dims=dims, spacing=spacing, origin=origin,
                  data=data, element_kind=MET_TO_KIND[header["ElementType"]])


def load_volume_bytes(header_bytes: bytes, raw_bytes: bytes | None = None) -> Volume:
    """Parse a header (+ optional detached payload) already held in memory.

    When ``raw_bytes`` is None the header must use ``ElementDataFile = LOCAL``
    with the payload appended after the header text.
    """
    if raw_bytes is None:
        marker = b"ElementDataFile"
        pos = header_bytes.find(marker)
        if pos < 0:
            raise MalformedHeaderError("missing required key ElementDataFile")
        nl = header_bytes.find(b"\n", pos)
        if nl < 0:
            raise MalformedHeaderError("no payload after ElementDataFile line")
        text, raw_bytes = header_bytes[: nl + 1], header_bytes[nl + 1 :]
    else:
        text = header_bytes
    try:
        header = _parse_header_lines(text.decode("ascii").splitlines())
    except UnicodeDecodeError as exc:
        raise MalformedHeaderError(f"header is not ASCII: {exc}") from exc
    return _volume_from_parts(header, raw_bytes)


def load_volume(path) -> Volume:
    """Load a volume from a ``.mhd`` + raw pair or a local-payload ``.mha`` file."""
    path = os.fspath(path)
    with open(path, "rb") as fh:
        head = fh.read()
    # split off a binary payload if the header declares LOCAL storage
    marker = b"ElementDataFile"
    pos = head.find(marker)
    if pos >= 0:
        nl = head.find(b"\n", pos)
        line = head[pos : nl if nl >= 0 else len(head)].decode("ascii", "replace")
        value = line.partition("=")[2].strip()
        if value == "LOCAL":
            return load_volume_bytes(head)
    try:
        header = _parse_header_lines(head.decode("ascii").splitlines())
    except UnicodeDecodeError as exc:
        raise MalformedHeaderError(f"header is not ASCII: {exc}") from exc
    if "ElementDataFile" not in header:
        raise MalformedHeaderError("missing required key ElementDataFile")
    raw_path = os.path.join(os.path.dirname(path), header["ElementDataFile"])
    try:
        with open(raw_path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise DataLengthError(f"cannot read data file {raw_path}: {exc}") from exc
    return _volume_from_parts(header, raw)


def _header_text(dims, spacing, origin, met_type, data_file) -> str:
    lines = [
        "ObjectType = Image",
        "NDims = 3",
        f"DimSize = {dims[0]} {dims[1]} {dims[2]}",
        f"ElementSpacing = {spacing[0]:g} {spacing[1]:g} {spacing[2]:g}",
        f"Offset = {origin[0]:g} {origin[1]:g} {origin[2]:g}",
        f"ElementType = {met_type}",
        "ElementByteOrderMSB = False",
        f"ElementDataFile = {data_file}",
    ]
    return "\n".join(lines) + "\n"


def _payload_bytes(data: np.ndarray, met_type: str) -> bytes:
    dtype = np.dtype(ELEMENT_TYPES[met_type]).newbyteorder("<")
    return np.asarray(data, order="F").astype(dtype, copy=False).tobytes(order="F")


def _write_image(dims, spacing, origin, data, met_type, path):
    path = os.fspath(path)
    payload = _payload_bytes(data, met_type)
    if path.endswith(".mha"):
        with open(path, "wb") as fh:
            fh.write(_header_text(dims, spacing, origin, met_type, "LOCAL").encode("ascii"))
            fh.write(payload)
        return
    base, ext = os.path.splitext(path)
    if ext != ".mhd":
        raise ValueError(f"expected a .mhd or .mha path, got {path!r}")
    raw_name = os.path.basename(base) + ".raw"
    with open(os.path.join(os.path.dirname(path), raw_name), "wb") as fh:
        fh.write(payload)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(_header_text(dims, spacing, origin, met_type, raw_name))


def save_mask(mask: Mask, path) -> None:
    """Write a mask as MET_UCHAR; values are exactly 0/1."""
    bad = (mask.data != 0) & (mask.data != 1)
    if bad.any():
        raise ValueError("mask data contains values other than 0 and 1")
    _write_image(mask.dims, mask.spacing, mask.origin, mask.data, "MET_UCHAR", path)


def save_volume(volume: Volume, path) -> None:
    """Write a volume using its declared element kind."""
    _write_image(volume.dims, volume.spacing, volume.origin, volume.data,
                 KIND_TO_MET[volume.element_kind], path)


def mask_bytes(mask: Mask) -> bytes:
    """Single-file .mha rendering of a mask (header + payload)."""
    header = _header_text(mask.dims, mask.spacing, mask.origin, "MET_UCHAR", "LOCAL")
    return header.encode("ascii") + _payload_bytes(mask.data, "MET_UCHAR")


def volume_bytes(volume: Volume) -> bytes:
    """Single-file .mha rendering of a volume (header + payload)."""
    met = KIND_TO_MET[volume.element_kind]
    header = _header_text(volume.dims, volume.spacing, volume.origin, met, "LOCAL")
    return header.encode("ascii") + _payload_bytes(volume.data, met)


def mask_from_volume(volume: Volume) -> Mask:
    """Reinterpret a loaded volume as a binary mask; rejects non-binary data."""
    data = volume.data
    bad = (data != 0) & (data != 1)
    if bad.any():
        raise ValueError("volume data is not binary, cannot treat as mask")
    return Mask(dims=volume.dims, spacing=volume.spacing, origin=volume.origin,
                data=data.astype(np.uint8))
