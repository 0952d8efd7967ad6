"""SINR-constrained link scheduling: bridging, power control and queue simulation."""

from sinrsched.model import (
    Link,
    Node,
    PhysicalParams,
    PowerAssignment,
    Topology,
    affectance,
    check_feasible,
    path_gain,
    sinr,
)

__all__ = [
    "Link",
    "Node",
    "PhysicalParams",
    "PowerAssignment",
    "Topology",
    "affectance",
    "check_feasible",
    "path_gain",
    "sinr",
]

__version__ = "0.1.0"
