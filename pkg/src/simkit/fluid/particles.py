"""Structure-of-arrays particle state and deterministic scene seeding."""

import numpy as np


class ParticleSet:
    """Parallel arrays: position (N,2) m, velocity (N,2) m/s, and the
    per-particle affine velocity matrix C (N,2,2) 1/s."""

    def __init__(self, position, velocity=None, affine=None):
        self.position = np.ascontiguousarray(position, dtype=np.float64)
        n = self.position.shape[0]
        self.velocity = (np.zeros((n, 2)) if velocity is None
                         else np.ascontiguousarray(velocity, dtype=np.float64))
        self.affine = (np.zeros((n, 2, 2)) if affine is None
                       else np.ascontiguousarray(affine, dtype=np.float64))
        if self.velocity.shape != (n, 2) or self.affine.shape != (n, 2, 2):
            raise ValueError("particle arrays must have matching lengths")

    @property
    def count(self):
        return self.position.shape[0]

    def copy(self):
        return ParticleSet(self.position.copy(), self.velocity.copy(),
                           self.affine.copy())

    def to_record(self):
        return {
            "count": self.count,
            "position": self.position.reshape(-1),
            "velocity": self.velocity.reshape(-1),
            "affine": self.affine.reshape(-1),
        }

    @classmethod
    def from_record(cls, rec):
        n = rec["count"]
        return cls(rec["position"].reshape(n, 2),
                   rec["velocity"].reshape(n, 2),
                   rec["affine"].reshape(n, 2, 2))


def seed_block(config, region, particles_per_cell: int) -> ParticleSet:
    """Fill every cell whose center lies in `region` with jittered samples.

    region: (x0, y0, x1, y1) in meters.  Deterministic for a given
    config.seed; velocities and affine matrices start at zero.
    """
    x0, y0, x1, y1 = region
    dx = config.dx
    centers_x = (np.arange(config.nx) + 0.5) * dx
    centers_y = (np.arange(config.ny) + 0.5) * dx
    cols = np.nonzero((centers_x >= x0) & (centers_x < x1))[0]
    rows = np.nonzero((centers_y >= y0) & (centers_y < y1))[0]
    if cols.size == 0 or rows.size == 0:
        raise ValueError(f"seed region {region} covers no cell centers")
    ii, jj = np.meshgrid(cols, rows, indexing="ij")
    ii = np.repeat(ii.reshape(-1), particles_per_cell)
    jj = np.repeat(jj.reshape(-1), particles_per_cell)

    rng = np.random.default_rng(config.seed)
    jitter = rng.random((ii.size, 2))
    pos = np.empty((ii.size, 2))
    pos[:, 0] = (ii + jitter[:, 0]) * dx
    pos[:, 1] = (jj + jitter[:, 1]) * dx
    return ParticleSet(pos)
