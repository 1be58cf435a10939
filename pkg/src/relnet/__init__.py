"""Unsupervised learning of invariant relations between sensory streams.

Each stream is encoded by a self-organizing map with learned Gaussian
tuning curves; pairs of maps are coupled by Hebbian cross-links whose
weight ridge traces the hidden relation. Trained networks decode, denoise
and infer missing streams by relaxation.
"""

from .decoding import DecodeResult, brent_minimize, decode, decode_scalar, decode_vector
from .graph import RelationGraph, default_schedules
from .hebbian import CrossLink, propagate, update_link
from .som import DecaySchedule, SelfOrganizingMap, activate, adapt, interaction_kernel, winner
from .synth import RelationSpec, TopologySpec, generate, preset

__version__ = "0.1.0"

__all__ = [
    "CrossLink",
    "DecaySchedule",
    "DecodeResult",
    "RelationGraph",
    "RelationSpec",
    "SelfOrganizingMap",
    "TopologySpec",
    "activate",
    "adapt",
    "brent_minimize",
    "decode",
    "decode_scalar",
    "decode_vector",
    "default_schedules",
    "generate",
    "interaction_kernel",
    "preset",
    "propagate",
    "update_link",
    "winner",
]
