"""Pattern plug-ins for the simulator.

Each module realises one or more catalog patterns as a toggleable,
deterministic mechanism, so the decision models' benefit/tradeoff claims
become measurable. A plugin that is switched off leaves the baseline loop
bit-exactly unchanged.
"""

from . import (
    compression,
    data_handler,
    gossip,
    lifecycle,
    multitask,
    registries,
    secure,
    selection,
)

__all__ = ["compression", "data_handler", "gossip", "lifecycle", "multitask",
           "registries", "secure", "selection"]
