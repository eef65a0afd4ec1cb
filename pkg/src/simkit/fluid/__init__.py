from .errors import CflViolationError, ConsistencyError, SimError
from .grid import EMPTY, FLUID, SOLID, MacGrid2
from .particles import ParticleSet, seed_block
from .sim import SimConfig, SimState, Simulator

__all__ = [
    "CflViolationError", "ConsistencyError", "SimError",
    "EMPTY", "FLUID", "SOLID", "MacGrid2",
    "ParticleSet", "seed_block",
    "SimConfig", "SimState", "Simulator",
]
