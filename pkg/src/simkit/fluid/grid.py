"""Staggered 2D MAC grid: x-velocities on vertical faces, y-velocities on
horizontal faces, pressure and labels at cell centers.

Index conventions (grid units of dx):
    u[i, j] lives at (i,     j+0.5), shape (nx+1, ny)
    v[i, j] lives at (i+0.5, j    ), shape (nx,   ny+1)
    cell (i, j) center at (i+0.5, j+0.5)
"""

import numpy as np

EMPTY = 0
FLUID = 1
SOLID = 2


class MacGrid2:
    def __init__(self, nx: int, ny: int, dx: float):
        self.nx = nx
        self.ny = ny
        self.dx = dx
        self.u = np.zeros((nx + 1, ny))
        self.v = np.zeros((nx, ny + 1))
        self.mass_u = np.zeros((nx + 1, ny))
        self.mass_v = np.zeros((nx, ny + 1))
        self.pressure = np.zeros((nx, ny))
        self.label = np.zeros((nx, ny), dtype=np.uint8)

    def clear_transfer_buffers(self):
        self.u.fill(0.0)
        self.v.fill(0.0)
        self.mass_u.fill(0.0)
        self.mass_v.fill(0.0)

    def solid_mask(self):
        return self.label == SOLID

    def fluid_mask(self):
        return self.label == FLUID

    def copy(self):
        g = MacGrid2(self.nx, self.ny, self.dx)
        g.u = self.u.copy()
        g.v = self.v.copy()
        g.mass_u = self.mass_u.copy()
        g.mass_v = self.mass_v.copy()
        g.pressure = self.pressure.copy()
        g.label = self.label.copy()
        return g

    def to_record(self):
        return {
            "nx": self.nx,
            "ny": self.ny,
            "dx": self.dx,
            "u": self.u.reshape(-1),
            "v": self.v.reshape(-1),
            "mass_u": self.mass_u.reshape(-1),
            "mass_v": self.mass_v.reshape(-1),
            "pressure": self.pressure.reshape(-1),
            "label": self.label.tobytes(),
        }

    @classmethod
    def from_record(cls, rec):
        g = cls(rec["nx"], rec["ny"], rec["dx"])
        g.u = rec["u"].reshape(g.nx + 1, g.ny)
        g.v = rec["v"].reshape(g.nx, g.ny + 1)
        g.mass_u = rec["mass_u"].reshape(g.nx + 1, g.ny)
        g.mass_v = rec["mass_v"].reshape(g.nx, g.ny + 1)
        g.pressure = rec["pressure"].reshape(g.nx, g.ny)
        g.label = np.frombuffer(rec["label"], dtype=np.uint8).reshape(
            g.nx, g.ny).copy()
        return g


def mark_fluid_cells(particles, grid: MacGrid2) -> None:
    """Label cells: domain border solid, particle-holding cells fluid,
    everything else empty."""
    grid.label.fill(EMPTY)
    grid.label[0, :] = SOLID
    grid.label[-1, :] = SOLID
    grid.label[:, 0] = SOLID
    grid.label[:, -1] = SOLID
    if particles.count == 0:
        return
    ci = np.floor(particles.position[:, 0] / grid.dx).astype(np.int64)
    cj = np.floor(particles.position[:, 1] / grid.dx).astype(np.int64)
    if (ci < 0).any() or (ci >= grid.nx).any() or (cj < 0).any() or (cj >= grid.ny).any():
        raise ValueError("particle outside domain while labeling cells")
    inside = grid.label[ci, cj] != SOLID
    grid.label[ci[inside], cj[inside]] = FLUID


def enforce_boundaries(grid: MacGrid2) -> None:
    """Zero normal velocity on solid-adjacent faces (free slip)."""
    solid = grid.solid_mask()
    # u faces: adjacent cells (i-1, j) and (i, j); domain edges count as solid
    u_solid = np.zeros((grid.nx + 1, grid.ny), dtype=bool)
    u_solid[0, :] = True
    u_solid[-1, :] = True
    u_solid[1:, :] |= solid
    u_solid[:-1, :] |= solid
    grid.u[u_solid] = 0.0

    v_solid = np.zeros((grid.nx, grid.ny + 1), dtype=bool)
    v_solid[:, 0] = True
    v_solid[:, -1] = True
    v_solid[:, 1:] |= solid
    v_solid[:, :-1] |= solid
    grid.v[v_solid] = 0.0


def apply_body_forces(grid: MacGrid2, gravity, dt: float) -> None:
    """v_face += g*dt on faces that received particle weight."""
    gx, gy = gravity
    if gx != 0.0:
        grid.u[grid.mass_u > 0.0] += gx * dt
    if gy != 0.0:
        grid.v[grid.mass_v > 0.0] += gy * dt


def face_divergence(grid: MacGrid2) -> np.ndarray:
    """Per-cell sum of outward face velocity differences (units m/s)."""
    return (grid.u[1:, :] - grid.u[:-1, :]) + (grid.v[:, 1:] - grid.v[:, :-1])
