"""kicktable: succinct dictionary and dynamic filter on kick-tree placement."""

from .hashing import DepthCapDistribution, HashSeed, depth_cap, feistel_invert, feistel_permute, hash_point
from .kick_tree import KickTree, KickTreeConfig, MoveRecord, Placement

__all__ = [
    "DepthCapDistribution",
    "HashSeed",
    "KickTree",
    "KickTreeConfig",
    "MoveRecord",
    "Placement",
    "depth_cap",
    "feistel_invert",
    "feistel_permute",
    "hash_point",
]
