"""Particle-grid transfers with quadratic B-spline kernels.

Weights follow N(x) = 3/4 - x^2 for |x| < 1/2 and (1/2)(3/2 - |x|)^2 for
1/2 <= |x| < 3/2, giving a 3-node stencil per axis.  For that kernel the
second moment of the weights is dx^2/4 per axis, which fixes the APIC
affine-update coefficient at 4/dx^2.
"""

import numpy as np

from .errors import ConsistencyError
from .grid import MacGrid2

APIC = "apic"
FLIP = "flip"


def _stencil_1d(coords):
    """Base node index and the 3 quadratic B-spline weights per sample.

    `coords` are positions in lattice units (nodes at integers).  Offsets
    base+0, base+1, base+2 carry weights w[0], w[1], w[2].
    """
    base = np.floor(coords - 0.5).astype(np.int64)
    f = coords - base  # in [0.5, 1.5)
    w0 = 0.5 * (1.5 - f) ** 2
    w1 = 0.75 - (f - 1.0) ** 2
    w2 = 0.5 * (f - 0.5) ** 2
    return base, (w0, w1, w2)


def _face_coords(position, dx, axis):
    """Particle coordinates in the lattice units of one face grid."""
    cx = position[:, 0] / dx
    cy = position[:, 1] / dx
    if axis == 0:
        return cx, cy - 0.5  # u faces live at (i, j + 0.5)
    return cx - 0.5, cy      # v faces live at (i + 0.5, j)


def _check_inside(position, grid):
    lx = grid.nx * grid.dx
    ly = grid.ny * grid.dx
    x = position[:, 0]
    y = position[:, 1]
    if ((x <= 0.0) | (x >= lx) | (y <= 0.0) | (y >= ly)).any():
        raise ConsistencyError("particle outside the simulation domain")


def _scatter_axis(particles, grid, axis):
    """Accumulate momentum and weight on one face grid (unit particle mass)."""
    dx = grid.dx
    pos = particles.position
    vel = particles.velocity[:, axis]
    c_row = particles.affine[:, axis, :]  # contribution row for this axis

    target_v = grid.u if axis == 0 else grid.v
    target_m = grid.mass_u if axis == 0 else grid.mass_v
    n_i, n_j = target_v.shape

    cx, cy = _face_coords(pos, dx, axis)
    bx, wx = _stencil_1d(cx)
    by, wy = _stencil_1d(cy)

    for ki in range(3):
        gi = bx + ki
        node_x = gi * dx if axis == 0 else (gi + 0.5) * dx
        dxp = node_x - pos[:, 0]
        for kj in range(3):
            gj = by + kj
            node_y = (gj + 0.5) * dx if axis == 0 else gj * dx
            dyp = node_y - pos[:, 1]
            w = wx[ki] * wy[kj]
            ok = (gi >= 0) & (gi < n_i) & (gj >= 0) & (gj < n_j)
            affine_v = vel + c_row[:, 0] * dxp + c_row[:, 1] * dyp
            np.add.at(target_v, (gi[ok], gj[ok]), (w * affine_v)[ok])
            np.add.at(target_m, (gi[ok], gj[ok]), w[ok])


def p2g(particles, grid: MacGrid2, config) -> None:
    """Particle-to-grid momentum transfer; normalizes faces by their weight."""
    _check_inside(particles.position, grid)
    grid.clear_transfer_buffers()
    if particles.count:
        _scatter_axis(particles, grid, 0)
        _scatter_axis(particles, grid, 1)
    np.divide(grid.u, grid.mass_u, out=grid.u, where=grid.mass_u > 0.0)
    np.divide(grid.v, grid.mass_v, out=grid.v, where=grid.mass_v > 0.0)


def _gather_axis(positions, grid, axis, values):
    """Interpolate one face grid at arbitrary points; also return the
    weighted first moment for the APIC affine update."""
    dx = grid.dx
    n_i, n_j = values.shape
    cx, cy = _face_coords(positions, dx, axis)
    bx, wx = _stencil_1d(cx)
    by, wy = _stencil_1d(cy)

    out = np.zeros(positions.shape[0])
    moment = np.zeros((positions.shape[0], 2))
    for ki in range(3):
        gi = np.clip(bx + ki, 0, n_i - 1)
        node_x = (bx + ki) * dx if axis == 0 else (bx + ki + 0.5) * dx
        for kj in range(3):
            gj = np.clip(by + kj, 0, n_j - 1)
            node_y = (by + kj + 0.5) * dx if axis == 0 else (by + kj) * dx
            w = wx[ki] * wy[kj]
            in_range = ((bx + ki >= 0) & (bx + ki < n_i)
                        & (by + kj >= 0) & (by + kj < n_j))
            vals = np.where(in_range, values[gi, gj], 0.0)
            wv = w * vals
            out += wv
            moment[:, 0] += wv * (node_x - positions[:, 0])
            moment[:, 1] += wv * (node_y - positions[:, 1])
    return out, moment


def interpolate_velocity(grid: MacGrid2, positions) -> np.ndarray:
    """Quadratic B-spline interpolation of the face velocity field."""
    ux, _ = _gather_axis(positions, grid, 0, grid.u)
    vy, _ = _gather_axis(positions, grid, 1, grid.v)
    return np.stack([ux, vy], axis=1)


def g2p(particles, grid: MacGrid2, config, old_u=None, old_v=None) -> None:
    """Grid-to-particle transfer.

    APIC: velocities gathered, affine matrix rebuilt as (4/dx^2) times the
    weighted first moment of face velocities.  FLIP: velocity blended from
    the grid increment with factor `flip_blend`, affine matrix zeroed.
    """
    pos = particles.position
    new_u, mom_u = _gather_axis(pos, grid, 0, grid.u)
    new_v, mom_v = _gather_axis(pos, grid, 1, grid.v)

    if config.scheme == APIC:
        particles.velocity[:, 0] = new_u
        particles.velocity[:, 1] = new_v
        scale = 4.0 / (grid.dx * grid.dx)
        particles.affine[:, 0, :] = scale * mom_u
        particles.affine[:, 1, :] = scale * mom_v
    elif config.scheme == FLIP:
        if old_u is None or old_v is None:
            raise ValueError("FLIP transfer needs the pre-update grid velocities")
        du, _ = _gather_axis(pos, grid, 0, grid.u - old_u)
        dv, _ = _gather_axis(pos, grid, 1, grid.v - old_v)
        a = config.flip_blend
        particles.velocity[:, 0] = (a * (particles.velocity[:, 0] + du)
                                    + (1.0 - a) * new_u)
        particles.velocity[:, 1] = (a * (particles.velocity[:, 1] + dv)
                                    + (1.0 - a) * new_v)
        particles.affine.fill(0.0)
    else:
        raise ValueError(f"unknown transfer scheme {config.scheme!r}")


def advect_particles(particles, grid: MacGrid2, config) -> None:
    """Midpoint (RK2) advection through the grid velocity field, then clamp
    positions to a 1.001*dx margin inside the domain."""
    dt = config.dt
    pos = particles.position
    v1 = interpolate_velocity(grid, pos)
    mid = pos + 0.5 * dt * v1
    v2 = interpolate_velocity(grid, mid)
    pos += dt * v2

    margin = 1.001 * grid.dx
    np.clip(pos[:, 0], margin, grid.nx * grid.dx - margin, out=pos[:, 0])
    np.clip(pos[:, 1], margin, grid.ny * grid.dx - margin, out=pos[:, 1])


def max_speed(particles) -> float:
    if particles.count == 0:
        return 0.0
    return float(np.sqrt((particles.velocity ** 2).sum(axis=1)).max())
