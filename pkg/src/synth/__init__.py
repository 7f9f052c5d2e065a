"""Synthetic scenes and leakage measurement."""

from .scenes import MovingObject, Scene, export_scene, generate_scene, texture
from .leakage import FlowChain, leakage_rate

__all__ = [
    "MovingObject",
    "Scene",
    "export_scene",
    "generate_scene",
    "texture",
    "FlowChain",
    "leakage_rate",
]
