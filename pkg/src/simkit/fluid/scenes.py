"""Built-in demo scenes, registered as units of the "demo" interface.

Each demo unit builds a fresh initial SimState from a ConfigMap.  Demo
defaults live in DEMO_DEFAULTS so the CLI can resolve
defaults < config file < command-line overrides before instantiating.
"""

import numpy as np

from ..registry import ConfigMap, unit
from .particles import ParticleSet, seed_block
from .sim import SimConfig, SimState

DEMO_DEFAULTS = {
    "dam-break": {
        "scheme": "apic",
        "dt": 0.003,
        "gravity_y": -9.8,
    },
    "hydrostatic": {
        "scheme": "apic",
        "dt": 0.004,
        "gravity_y": -9.8,
    },
    "rotation": {
        "scheme": "apic",
        "dt": 0.01,
        "gravity_y": 0.0,
        "rotation.omega": 2.0,
    },
}


class DemoScene:
    name = None

    def __init__(self, config: ConfigMap):
        self.sim_config = SimConfig.from_config(config)
        self.state = self.build(config)

    def build(self, config: ConfigMap) -> SimState:
        raise NotImplementedError


@unit("demo", "dam-break")
class DamBreak(DemoScene):
    """Water column against the left wall, collapsing under gravity."""

    name = "dam-break"

    def build(self, config):
        cfg = self.sim_config
        lx, ly = cfg.domain
        region = (cfg.dx, cfg.dx, 0.4 * lx, 0.75 * ly)
        particles = seed_block(cfg, region, cfg.particles_per_cell)
        return SimState(cfg, particles)


@unit("demo", "hydrostatic")
class Hydrostatic(DemoScene):
    """Half-full tank at rest; pressure must balance gravity."""

    name = "hydrostatic"

    def build(self, config):
        cfg = self.sim_config
        lx, ly = cfg.domain
        region = (cfg.dx, cfg.dx, lx - cfg.dx, 0.5 * ly)
        particles = seed_block(cfg, region, cfg.particles_per_cell)
        return SimState(cfg, particles)


@unit("demo", "rotation")
class Rotation(DemoScene):
    """Rigidly rotating block; the affine transfer should preserve it."""

    name = "rotation"

    def build(self, config):
        cfg = self.sim_config
        omega = config.get_float("rotation.omega", 2.0)
        lx, ly = cfg.domain
        region = (0.3 * lx, 0.3 * ly, 0.7 * lx, 0.7 * ly)
        particles = seed_block(cfg, region, cfg.particles_per_cell)
        cx, cy = 0.5 * lx, 0.5 * ly
        rel = particles.position - np.array([cx, cy])
        particles.velocity[:, 0] = -omega * rel[:, 1]
        particles.velocity[:, 1] = omega * rel[:, 0]
        particles.affine[:, 0, 1] = -omega
        particles.affine[:, 1, 0] = omega
        return SimState(cfg, particles)
