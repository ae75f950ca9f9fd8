"""switchlab: analytic models, exact combinatorial algorithms and Monte
Carlo simulators for time-slotted packet switches built from crossbar
modules: contention statistics, deflection routing, nonblocking route
assignment, capacity-matrix decomposition and entropy-bounded frame
scheduling."""

from . import closmodel, contention, deflection, fixtures, graphcode, matching, pathswitch, sched
from .errors import ConvergenceError, DomainError, PreconditionError, ResourceLimitError

__version__ = "0.1.0"

__all__ = [
    "closmodel",
    "contention",
    "deflection",
    "fixtures",
    "graphcode",
    "matching",
    "pathswitch",
    "sched",
    "DomainError",
    "PreconditionError",
    "ResourceLimitError",
    "ConvergenceError",
    "__version__",
]
