"""Per-frame particle dumps: 16-byte header (magic "TCPART01" + u64 LE
count) followed by one f64 (x, y, vx, vy) record per particle."""

import os
import struct

import numpy as np

PARTICLE_MAGIC = b"TCPART01"
DUMP_EXTENSION = ".tcpart"


class DumpError(Exception):
    pass


def write_particle_dump(particles, path) -> None:
    n = particles.count
    rows = np.empty((n, 4))
    rows[:, 0:2] = particles.position
    rows[:, 2:4] = particles.velocity
    data = PARTICLE_MAGIC + struct.pack("<Q", n) + rows.tobytes()
    tmp = os.fspath(path) + ".tmp"
    with open(tmp, "wb") as f:
        f.write(data)
    os.replace(tmp, path)


def read_particle_dump(path):
    """Returns (position (N,2), velocity (N,2))."""
    with open(path, "rb") as f:
        data = f.read()
    if data[:8] != PARTICLE_MAGIC:
        raise DumpError(f"{path}: not a particle dump")
    (n,) = struct.unpack("<Q", data[8:16])
    body = data[16:]
    if len(body) != n * 32:
        raise DumpError(f"{path}: expected {n * 32} payload bytes, got {len(body)}")
    rows = np.frombuffer(body, dtype="<f8").reshape(n, 4)
    return rows[:, 0:2].copy(), rows[:, 2:4].copy()
