"""5-point pressure Poisson system on labeled cells, and the projection
that makes the face velocity field discretely divergence-free.

Unknowns are fluid cells.  Empty neighbors are Dirichlet p = 0 (the
coefficient stays on the diagonal); solid neighbors are Neumann (the
coefficient is dropped).  The system is assembled as A p = -(dx/dt) * D(u)
where D(u) is the per-cell sum of face velocity differences, and the update
subtracts (dt/dx) * grad(p) from fluid-adjacent faces.
"""

from dataclasses import dataclass, field

import numpy as np

from .grid import EMPTY, FLUID, SOLID, MacGrid2, face_divergence


class ConstructionError(ValueError):
    pass


class PoissonSystem2D:
    """Descriptor of the symmetric 5-point system implied by cell labels.

    Connection coefficients are shared between both cells of an edge, so
    the operator is symmetric by construction; the constructor validates
    the label field instead.
    """

    def __init__(self, labels, outside=SOLID):
        labels = np.asarray(labels)
        if labels.ndim != 2:
            raise ConstructionError(f"labels must be 2D, got shape {labels.shape}")
        if labels.dtype != np.uint8:
            labels = labels.astype(np.uint8)
        bad = ~np.isin(labels, (EMPTY, FLUID, SOLID))
        if bad.any():
            raise ConstructionError("labels must be EMPTY, FLUID or SOLID")
        if outside not in (EMPTY, FLUID, SOLID):
            raise ConstructionError(f"invalid outside label {outside}")
        if outside == FLUID:
            raise ConstructionError("outside label cannot be FLUID")
        self.labels = labels
        self.outside = outside
        self.nx, self.ny = labels.shape

        fluid = labels == FLUID
        padded = np.pad(labels, 1, constant_values=outside)
        nonsolid = (padded != SOLID).astype(np.float64)
        diag = (nonsolid[2:, 1:-1] + nonsolid[:-2, 1:-1]
                + nonsolid[1:-1, 2:] + nonsolid[1:-1, :-2])
        diag[~fluid] = 0.0

        # cells sealed in by solids on all sides have no equation; pin p = 0
        self.mask = fluid & (diag > 0.0)
        self.diag = np.where(self.mask, diag, 0.0)
        self.conn_x = self.mask[:-1, :] & self.mask[1:, :]
        self.conn_y = self.mask[:, :-1] & self.mask[:, 1:]

    @property
    def shape(self):
        return (self.nx, self.ny)

    def unknowns(self):
        return int(self.mask.sum())

    def apply(self, p):
        """A @ p for a full-grid array; entries off the mask are ignored."""
        p = np.where(self.mask, p, 0.0)
        out = self.diag * p
        out[:-1, :] -= self.conn_x * p[1:, :]
        out[1:, :] -= self.conn_x * p[:-1, :]
        out[:, :-1] -= self.conn_y * p[:, 1:]
        out[:, 1:] -= self.conn_y * p[:, :-1]
        out[~self.mask] = 0.0
        return out

    def dense_matrix(self):
        """Dense (n_unknowns, n_unknowns) matrix, for small oracles."""
        idx = -np.ones(self.shape, dtype=np.int64)
        ii, jj = np.nonzero(self.mask)
        idx[ii, jj] = np.arange(ii.size)
        n = ii.size
        a = np.zeros((n, n))
        for k in range(n):
            i, j = ii[k], jj[k]
            a[k, k] = self.diag[i, j]
            if i + 1 < self.nx and self.conn_x[i, j]:
                a[k, idx[i + 1, j]] = -1.0
            if i > 0 and self.conn_x[i - 1, j]:
                a[k, idx[i - 1, j]] = -1.0
            if j + 1 < self.ny and self.conn_y[i, j]:
                a[k, idx[i, j + 1]] = -1.0
            if j > 0 and self.conn_y[i, j - 1]:
                a[k, idx[i, j - 1]] = -1.0
        return a


@dataclass
class SolveStats:
    iterations: int
    converged: bool
    initial_residual: float
    final_residual: float
    history: list = field(default_factory=list)


def pressure_rhs(grid: MacGrid2, dt: float) -> np.ndarray:
    """-(dx/dt) times the per-cell face velocity difference sum."""
    return -(grid.dx / dt) * face_divergence(grid)


def pressure_project(grid: MacGrid2, config) -> SolveStats:
    """Solve for pressure and subtract its gradient from fluid-adjacent
    faces; faces not adjacent to any fluid cell are zeroed (they carry no
    meaning after projection).  Solid-adjacent faces are never modified."""
    from .mgpcg import mgpcg_solve

    system = PoissonSystem2D(grid.label, outside=SOLID)
    b = np.where(system.mask, pressure_rhs(grid, config.dt), 0.0)
    p, stats = mgpcg_solve(system, b, config.solver_tol, config.max_cg_iters)
    grid.pressure = p

    scale = config.dt / grid.dx
    fluid = grid.fluid_mask()
    solid = grid.solid_mask()

    # interior u faces between cells (i-1, j) and (i, j)
    left, right = grid.label[:-1, :], grid.label[1:, :]
    upd = (((left == FLUID) | (right == FLUID))
           & (left != SOLID) & (right != SOLID))
    du = scale * (p[1:, :] - p[:-1, :])
    grid.u[1:-1, :][upd] -= du[upd]

    down, up = grid.label[:, :-1], grid.label[:, 1:]
    vpd = (((down == FLUID) | (up == FLUID))
           & (down != SOLID) & (up != SOLID))
    dv = scale * (p[:, 1:] - p[:, :-1])
    grid.v[:, 1:-1][vpd] -= dv[vpd]

    u_adj = np.zeros_like(grid.u, dtype=bool)
    u_adj[:-1, :] |= fluid
    u_adj[1:, :] |= fluid
    u_solid = np.zeros_like(grid.u, dtype=bool)
    u_solid[0, :] = u_solid[-1, :] = True
    u_solid[1:, :] |= solid
    u_solid[:-1, :] |= solid
    extend_face_field(grid.u, u_adj & ~u_solid, u_solid)

    v_adj = np.zeros_like(grid.v, dtype=bool)
    v_adj[:, :-1] |= fluid
    v_adj[:, 1:] |= fluid
    v_solid = np.zeros_like(grid.v, dtype=bool)
    v_solid[:, 0] = v_solid[:, -1] = True
    v_solid[:, 1:] |= solid
    v_solid[:, :-1] |= solid
    extend_face_field(grid.v, v_adj & ~v_solid, v_solid)
    return stats


def extend_face_field(vals, valid, solid, rings=2) -> None:
    """Extrapolate projected face velocities into the near-air band so
    particle stencils at the surface see supported values: each ring of
    invalid non-solid faces takes the average of its valid 4-neighbors;
    anything beyond the last ring is zeroed."""
    valid = valid.copy()
    vals[~valid] = 0.0
    for _ in range(rings):
        v = np.pad(np.where(valid, vals, 0.0), 1)
        c = np.pad(valid.astype(np.float64), 1)
        nbr_sum = (v[2:, 1:-1] + v[:-2, 1:-1] + v[1:-1, 2:] + v[1:-1, :-2])
        nbr_cnt = (c[2:, 1:-1] + c[:-2, 1:-1] + c[1:-1, 2:] + c[1:-1, :-2])
        newly = ~valid & ~solid & (nbr_cnt > 0)
        vals[newly] = nbr_sum[newly] / nbr_cnt[newly]
        valid |= newly
