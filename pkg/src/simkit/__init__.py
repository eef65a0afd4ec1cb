"""simkit: infrastructure kernel for 2D particle-in-cell fluid simulation.

Aligned small linear algebra with a layout benchmark, a load-time unit
registry, bit-exact snapshot serialization, a scoped profiler, an APIC/FLIP
liquid simulator with MGPCG pressure projection, and a demo CLI.
"""

from .diagnostics import LOG, ProfileSession, Logger, report, scoped
from .registry import (ConfigMap, Registry, UnitDescriptor, register_all_units,
                       unit)
from .snapshot import deserialize, read_snapshot, serialize, write_snapshot
from .vecmath import AlignedVec3, Matrix3, matvec

__version__ = "0.1.0"

__all__ = [
    "LOG", "ProfileSession", "Logger", "report", "scoped",
    "ConfigMap", "Registry", "UnitDescriptor", "register_all_units", "unit",
    "deserialize", "read_snapshot", "serialize", "write_snapshot",
    "AlignedVec3", "Matrix3", "matvec",
    "__version__",
]
