"""Desk-scale masked video autoencoder."""

from .cubes import Cubes, cubify, decubify, normalize_cubes, reconstruct_clip
from .model import (
    MaeOutput,
    ToyMAE,
    backward,
    config_from_params,
    forward,
    init_params,
    load_model,
    parameter_shapes,
    sinusoidal_encoding,
)
from .reference import reference_loss
from .gradcheck import gradient_check
from .trainer import MaskProvider, TrainingHistory, batch_indices, train

__all__ = [
    "Cubes",
    "cubify",
    "decubify",
    "normalize_cubes",
    "reconstruct_clip",
    "MaeOutput",
    "ToyMAE",
    "backward",
    "config_from_params",
    "forward",
    "init_params",
    "load_model",
    "parameter_shapes",
    "sinusoidal_encoding",
    "reference_loss",
    "gradient_check",
    "MaskProvider",
    "TrainingHistory",
    "batch_indices",
    "train",
]
