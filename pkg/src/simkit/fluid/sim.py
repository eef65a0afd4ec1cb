"""Simulation state, configuration, and the per-step pipeline.

The two transfer schemes ("apic", "flip") are registered as units of the
"simulation" interface; the CLI instantiates whichever the config names.
Stepping is single-threaded and a pure function of the state bits, so a
state restored from a snapshot continues bit-identically.
"""

from dataclasses import dataclass

import numpy as np

from ..diagnostics import scoped
from ..registry import ConfigError, ConfigMap, unit
from .errors import CflViolationError, ConsistencyError
from .grid import MacGrid2, apply_body_forces, enforce_boundaries, mark_fluid_cells
from .particles import ParticleSet
from .poisson import pressure_project
from .transfers import advect_particles, g2p, max_speed, p2g

SCHEMES = ("apic", "flip")


@dataclass
class SimConfig:
    nx: int = 32
    ny: int = 32
    dx: float = 1.0 / 32.0
    dt: float = 0.004
    gravity_x: float = 0.0
    gravity_y: float = -9.8
    scheme: str = "apic"
    flip_blend: float = 0.95
    cfl_max: float = 1.0
    solver_tol: float = 1e-10
    max_cg_iters: int = 200
    seed: int = 0
    particles_per_cell: int = 4

    def __post_init__(self):
        if self.dx <= 0.0:
            raise ConfigError(f"dx must be positive, got {self.dx}")
        if self.dt <= 0.0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not 0.0 <= self.flip_blend <= 1.0:
            raise ConfigError(f"flip_blend must be in [0, 1], got {self.flip_blend}")
        if self.nx < 8 or self.ny < 8:
            raise ConfigError(f"grid must be at least 8x8, got {self.nx}x{self.ny}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")

    @property
    def gravity(self):
        return (self.gravity_x, self.gravity_y)

    @property
    def domain(self):
        return (self.nx * self.dx, self.ny * self.dx)

    @classmethod
    def from_config(cls, cfg: ConfigMap) -> "SimConfig":
        d = cls()
        return cls(
            nx=cfg.get_int("nx", d.nx),
            ny=cfg.get_int("ny", d.ny),
            dx=cfg.get_float("dx", d.dx),
            dt=cfg.get_float("dt", d.dt),
            gravity_x=cfg.get_float("gravity_x", d.gravity_x),
            gravity_y=cfg.get_float("gravity_y", d.gravity_y),
            scheme=cfg.get_str("scheme", d.scheme),
            flip_blend=cfg.get_float("flip_blend", d.flip_blend),
            cfl_max=cfg.get_float("cfl_max", d.cfl_max),
            solver_tol=cfg.get_float("solver_tol", d.solver_tol),
            max_cg_iters=cfg.get_int("max_cg_iters", d.max_cg_iters),
            seed=cfg.get_int("seed", d.seed),
            particles_per_cell=cfg.get_int("particles_per_cell", d.particles_per_cell),
        )

    def to_config(self) -> ConfigMap:
        cfg = ConfigMap()
        cfg.set("nx", self.nx)
        cfg.set("ny", self.ny)
        cfg.set("dx", self.dx)
        cfg.set("dt", self.dt)
        cfg.set("gravity_x", self.gravity_x)
        cfg.set("gravity_y", self.gravity_y)
        cfg.set("scheme", self.scheme)
        cfg.set("flip_blend", self.flip_blend)
        cfg.set("cfl_max", self.cfl_max)
        cfg.set("solver_tol", self.solver_tol)
        cfg.set("max_cg_iters", self.max_cg_iters)
        cfg.set("seed", self.seed)
        cfg.set("particles_per_cell", self.particles_per_cell)
        return cfg


class SimState:
    def __init__(self, config: SimConfig, particles: ParticleSet,
                 grid: MacGrid2 = None, step_index: int = 0,
                 accumulated_time: float = 0.0):
        self.config = config
        self.particles = particles
        self.grid = grid if grid is not None else MacGrid2(config.nx, config.ny,
                                                           config.dx)
        self.step_index = step_index
        self.accumulated_time = accumulated_time

    def to_record(self) -> dict:
        return {
            "config": self.config.to_config().to_text().encode("utf-8"),
            "step_index": self.step_index,
            "accumulated_time": self.accumulated_time,
            "particles": self.particles.to_record(),
            "grid": self.grid.to_record(),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "SimState":
        cfg = SimConfig.from_config(ConfigMap.from_text(rec["config"].decode("utf-8")))
        return cls(cfg,
                   ParticleSet.from_record(rec["particles"]),
                   MacGrid2.from_record(rec["grid"]),
                   step_index=rec["step_index"],
                   accumulated_time=rec["accumulated_time"])


class Simulator:
    """One step of the particle-in-cell pipeline; subclasses pin the scheme."""

    scheme = None

    def __init__(self, config: ConfigMap):
        self.config = SimConfig.from_config(config)
        if self.scheme is not None:
            self.config.scheme = self.scheme  # the unit's name wins
        self.steps_run = 0
        self.last_stats = None

    @property
    def name(self):
        return self.scheme

    def step(self, state: SimState):
        cfg = state.config
        if cfg.scheme != self.scheme:
            raise ConsistencyError(
                f"state is configured for scheme {cfg.scheme!r} but the "
                f"{self.scheme!r} simulator is stepping it")
        with scoped("step"):
            stats = self._step_phases(state, cfg)
        state.step_index += 1
        state.accumulated_time += cfg.dt
        self.steps_run += 1
        self.last_stats = stats
        return stats

    def _step_phases(self, state, cfg):
        grid = state.grid
        particles = state.particles

        with scoped("mark_fluid_cells"):
            mark_fluid_cells(particles, grid)
        with scoped("p2g"):
            p2g(particles, grid, cfg)
        old_u = grid.u.copy() if cfg.scheme == "flip" else None
        old_v = grid.v.copy() if cfg.scheme == "flip" else None
        with scoped("apply_body_forces"):
            apply_body_forces(grid, cfg.gravity, cfg.dt)
        with scoped("enforce_boundaries"):
            enforce_boundaries(grid)
        with scoped("pressure_project"):
            stats = pressure_project(grid, cfg)
        with scoped("enforce_boundaries"):
            enforce_boundaries(grid)
        with scoped("g2p"):
            g2p(particles, grid, cfg, old_u, old_v)

        cfl = max_speed(particles) * cfg.dt / cfg.dx
        if cfl > cfg.cfl_max:
            raise CflViolationError(cfl, cfg.cfl_max, cfg.dt)
        with scoped("advect_particles"):
            advect_particles(particles, grid, cfg)
        return stats


@unit("simulation", "apic")
class ApicSimulator(Simulator):
    scheme = "apic"


@unit("simulation", "flip")
class FlipSimulator(Simulator):
    scheme = "flip"
