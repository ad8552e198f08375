"""Self-describing binary field snapshots.

Layout: a fixed 64-byte little-endian header followed by nx*ny float64
values in row-major order (x index outermost).

    offset  size  field
    0       8     magic  b"TPGGRID1"
    8       4     format version (uint32, currently 1)
    12      4     nx (uint32)
    16      4     ny (uint32)
    20      4     component tag (4 ascii bytes, NUL-padded: "u", "v", "w")
    24      8     length_x (float64)
    32      8     length_y (float64)
    40      8     time (float64)
    48      16    reserved, zero

A reader recovers the grid, time, and component without the run config.
"""

import struct

import numpy as np

from .grid import Field, GridSpec

MAGIC = b"TPGGRID1"
VERSION = 1
HEADER_SIZE = 64
_HEADER = struct.Struct("<8sIII4sddd")   # 48 bytes, zero-padded to 64


def write_snapshot(path, field: Field, time, component):
    tag = component.encode("ascii")[:4].ljust(4, b"\x00")
    header = _HEADER.pack(MAGIC, VERSION, field.grid.nx, field.grid.ny, tag,
                          field.grid.length_x, field.grid.length_y,
                          float(time))
    header = header.ljust(HEADER_SIZE, b"\x00")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())


def read_snapshot(path):
    """Return (Field, meta) where meta has time and component."""
    with open(path, "rb") as fh:
        header = fh.read(HEADER_SIZE)
        if len(header) < HEADER_SIZE or header[:8] != MAGIC:
            raise ValueError(f"{path}: not a snapshot file")
        magic, version, nx, ny, tag, lx, ly, time = _HEADER.unpack(
            header[:_HEADER.size])
        if version != VERSION:
            raise ValueError(f"{path}: unsupported snapshot version {version}")
        data = np.frombuffer(fh.read(nx * ny * 8), dtype="<f8").reshape(nx, ny)
    grid = GridSpec(length_x=lx, length_y=ly, nx=nx, ny=ny)
    component = tag.rstrip(b"\x00").decode("ascii")
    return Field(grid, data.astype(np.float64)), \
        {"time": time, "component": component}
