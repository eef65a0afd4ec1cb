"""Conjugate gradient preconditioned by one geometric multigrid V-cycle.

V-cycle parameters are fixed: damped Jacobi smoother (omega = 2/3) with
2 pre- and 2 post-sweeps, full-weighting restriction (the scaled adjoint of
bilinear prolongation, so the preconditioner stays symmetric), coarsening
until min(nx, ny) <= 4, and 50 smoother sweeps on the coarsest level.
Convergence is measured as inf-norm residual relative to the inf-norm of
the right-hand side.
"""

import numpy as np

from .grid import EMPTY, FLUID, SOLID
from .poisson import PoissonSystem2D, SolveStats

OMEGA = 2.0 / 3.0
PRE_SWEEPS = 2
POST_SWEEPS = 2
COARSE_SWEEPS = 50
MIN_COARSE_DIM = 4


class NonConvergenceError(RuntimeError):
    def __init__(self, iterations, history):
        super().__init__(
            f"pressure solve did not converge in {iterations} iterations "
            f"(relative residual history: {[f'{h:.3e}' for h in history[-5:]]})")
        self.iterations = iterations
        self.history = history


def coarsen_labels(labels, outside):
    """2x2 block coarsening: any fluid -> fluid, else any empty -> empty,
    else solid.  Odd dimensions are padded with the outside label."""
    nx, ny = labels.shape
    px, py = (nx + 1) // 2 * 2, (ny + 1) // 2 * 2
    padded = np.full((px, py), outside, dtype=np.uint8)
    padded[:nx, :ny] = labels
    blocks = padded.reshape(px // 2, 2, py // 2, 2)
    any_fluid = (blocks == FLUID).any(axis=(1, 3))
    any_empty = (blocks == EMPTY).any(axis=(1, 3))
    out = np.full((px // 2, py // 2), SOLID, dtype=np.uint8)
    out[any_empty] = EMPTY
    out[any_fluid] = FLUID
    return out


def build_hierarchy(system: PoissonSystem2D):
    levels = [system]
    while min(levels[-1].nx, levels[-1].ny) > MIN_COARSE_DIM:
        labels = coarsen_labels(levels[-1].labels, levels[-1].outside)
        levels.append(PoissonSystem2D(labels, outside=levels[-1].outside))
    return levels


def jacobi(system, x, b, sweeps):
    inv_diag = np.where(system.mask, 1.0 / np.where(system.mask, system.diag, 1.0), 0.0)
    for _ in range(sweeps):
        r = b - system.apply(x)
        x = x + OMEGA * inv_diag * r
        x[~system.mask] = 0.0
    return x

def restrict(fine_sys, coarse_sys, r):
    """Full-weighting restriction: the adjoint of bilinear prolongation.

    No averaging factor: the unscaled 5-point matrix is (cell size)^2 times
    the physical operator, so the coarse right-hand side must carry 4x the
    fine residual density, which in 2D is exactly the adjoint's row weight.
    """
    nxc, nyc = coarse_sys.shape
    out = np.zeros((nxc, nyc))
    r = np.where(fine_sys.mask, r, 0.0)
    i = np.arange(fine_sys.nx)
    j = np.arange(fine_sys.ny)
    ix0, wx0, ix1, wx1 = _axis_weights(i)
    jx0, wy0, jx1, wy1 = _axis_weights(j)
    for ix, wx in ((ix0, wx0), (ix1, wx1)):
        for jx, wy in ((jx0, wy0), (jx1, wy1)):
            gi, gj = np.meshgrid(ix, jx, indexing="ij")
            w = np.outer(wx, wy)
            ok = (gi >= 0) & (gi < nxc) & (gj >= 0) & (gj < nyc)
            np.add.at(out, (gi[ok], gj[ok]), (w * r)[ok])
    out[~coarse_sys.mask] = 0.0
    return out


def prolong(coarse_sys, fine_sys, xc):
    """Bilinear interpolation of the coarse correction (zero outside)."""
    xc = np.where(coarse_sys.mask, xc, 0.0)
    nxc, nyc = coarse_sys.shape
    i = np.arange(fine_sys.nx)
    j = np.arange(fine_sys.ny)
    ix0, wx0, ix1, wx1 = _axis_weights(i)
    jx0, wy0, jx1, wy1 = _axis_weights(j)
    out = np.zeros((fine_sys.nx, fine_sys.ny))
    for ix, wx in ((ix0, wx0), (ix1, wx1)):
        for jx, wy in ((jx0, wy0), (jx1, wy1)):
            gi, gj = np.meshgrid(ix, jx, indexing="ij")
            w = np.outer(wx, wy)
            ok = (gi >= 0) & (gi < nxc) & (gj >= 0) & (gj < nyc)
            vals = np.zeros_like(out)
            vals[ok] = xc[gi[ok], gj[ok]]
            out += w * vals
    out[~fine_sys.mask] = 0.0
    return out


def _axis_weights(fine_idx):
    """Each fine cell center maps to coordinate i/2 - 1/4 on the coarse
    lattice: its two nearest coarse cells with weights 3/4 and 1/4."""
    base = fine_idx // 2
    near = base
    far = np.where(fine_idx % 2 == 0, base - 1, base + 1)
    w_near = np.full(fine_idx.shape, 0.75)
    w_far = np.full(fine_idx.shape, 0.25)
    return near, w_near, far, w_far


def v_cycle(levels, b, level=0):
    system = levels[level]
    if level == len(levels) - 1:
        return jacobi(system, np.zeros(system.shape), b, COARSE_SWEEPS)
    x = jacobi(system, np.zeros(system.shape), b, PRE_SWEEPS)
    r = b - system.apply(x)
    rc = restrict(system, levels[level + 1], r)
    xc = v_cycle(levels, rc, level + 1)
    x = x + prolong(levels[level + 1], system, xc)
    return jacobi(system, x, b, POST_SWEEPS)


def _dot(mask, a, b):
    return float((a[mask] * b[mask]).sum())


def mgpcg_solve(system: PoissonSystem2D, rhs, tol: float, max_iters: int):
    """Solve A x = rhs to a relative inf-norm residual of `tol`.

    Returns (solution, SolveStats); raises NonConvergenceError with the
    residual history if max_iters is exhausted.
    """
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.shape != system.shape:
        raise ValueError(f"rhs shape {rhs.shape} != system shape {system.shape}")
    mask = system.mask
    b = np.where(mask, rhs, 0.0)
    bnorm = float(np.abs(b).max()) if mask.any() else 0.0
    x = np.zeros(system.shape)
    if bnorm == 0.0:
        return x, SolveStats(0, True, 0.0, 0.0, [])

    levels = build_hierarchy(system)
    r = b.copy()
    z = v_cycle(levels, r)
    p = z.copy()
    rz = _dot(mask, r, z)
    history = [1.0]

    for it in range(1, max_iters + 1):
        ap = system.apply(p)
        pap = _dot(mask, p, ap)
        if pap <= 0.0 or not np.isfinite(pap):
            raise NonConvergenceError(it, history)
        alpha = rz / pap
        x += alpha * p
        r -= alpha * ap
        rel = float(np.abs(r[mask]).max()) / bnorm
        history.append(rel)
        if not np.isfinite(rel):
            raise NonConvergenceError(it, history)
        if rel <= tol:
            return x, SolveStats(it, True, 1.0, rel, history)
        z = v_cycle(levels, r)
        rz_new = _dot(mask, r, z)
        p = z + (rz_new / rz) * p
        rz = rz_new

    raise NonConvergenceError(max_iters, history)
