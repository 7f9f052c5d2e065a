"""Toy video masked autoencoder with analytic gradients.

Encoder: cube projection + fixed sinusoidal positions, pre-norm blocks over
the visible tokens only, final LayerNorm. A linear bridge maps latents to the
decoder width, [MASK] tokens fill the masked positions, positions are added to
every token, and the decoder blocks + head predict normalised cube pixels.
"""

from dataclasses import dataclass, replace
from functools import lru_cache
from pathlib import Path
from typing import Mapping, Optional, Union
import logging

import numpy as np

from src.core.rng import Rng
from src.domain.errors import InvalidInputError, NumericError, ShapeMismatchError
from src.domain.models import CUBE_DIM, FloatArray, MaeConfig, TokenMask, VideoClip
from src.formats.checkpoint import load_checkpoint
from src.mae.cubes import Cubes, cubify, normalize_cubes
from src.mae.layers import Block, LayerNorm, Linear, Params, block_parameter_shapes


logger = logging.getLogger(__name__)


@lru_cache(maxsize=32)
def _sinusoid_table(positions: int, dim: int) -> FloatArray:
    position = np.arange(positions)[:, None]
    div_term = np.exp(np.arange(0, dim, 2) * -(np.log(10000.0) / dim))
    table = np.zeros((positions, dim))
    table[:, 0::2] = np.sin(position * div_term)
    table[:, 1::2] = np.cos(position * div_term)
    table.flags.writeable = False
    return table


def sinusoidal_encoding(positions: int, dim: int) -> FloatArray:
    """Fixed 1-D sinusoidal encodings for flattened token indices."""
    return _sinusoid_table(positions, dim)


def parameter_shapes(config: MaeConfig) -> dict[str, tuple[int, ...]]:
    """Every trainable parameter's name and shape, in a fixed order."""
    d, dd = config.embed_dim, config.decoder_dim
    shapes: dict[str, tuple[int, ...]] = {
        "patch.weight": (CUBE_DIM, d),
        "patch.bias": (d,),
    }
    for i in range(config.depth):
        shapes.update(block_parameter_shapes(f"encoder.{i}", d, config.mlp_ratio))
    shapes["encoder_norm.gamma"] = (d,)
    shapes["encoder_norm.beta"] = (d,)
    shapes["bridge.weight"] = (d, dd)
    shapes["bridge.bias"] = (dd,)
    shapes["mask_token"] = (dd,)
    for i in range(config.decoder_depth):
        shapes.update(block_parameter_shapes(f"decoder.{i}", dd, config.mlp_ratio))
    shapes["decoder_norm.gamma"] = (dd,)
    shapes["decoder_norm.beta"] = (dd,)
    shapes["head.weight"] = (dd, CUBE_DIM)
    shapes["head.bias"] = (CUBE_DIM,)
    return shapes


def init_params(config: MaeConfig, rng: Rng) -> Params:
    """Gaussian weights and [MASK] token, zero biases, unit LayerNorm gains."""
    params: Params = {}
    for index, (name, shape) in enumerate(parameter_shapes(config).items()):
        if name.endswith(".gamma"):
            params[name] = np.ones(shape)
        elif name.endswith(".bias") or name.endswith(".beta"):
            params[name] = np.zeros(shape)
        else:
            params[name] = rng.split(index).normal(shape, config.init_std)
    return params


@dataclass(frozen=True)
class MaeOutput:
    """Forward result: predictions for every token position and the masked loss."""

    reconstruction: Cubes
    loss: float


class ToyMAE:
    """Parameters plus the layer graph that reads them."""

    def __init__(self, config: MaeConfig, params: Optional[Mapping[str, FloatArray]] = None) -> None:
        self.config = config
        if params is None:
            params = init_params(config, Rng(config.seed))
        self.params: Params = self._validated(params)
        eps = config.ln_eps
        self.patch = Linear(self.params, "patch")
        self.encoder = [Block(self.params, f"encoder.{i}", config.heads, eps) for i in range(config.depth)]
        self.encoder_norm = LayerNorm(self.params, "encoder_norm", eps)
        self.bridge = Linear(self.params, "bridge")
        self.decoder = [
            Block(self.params, f"decoder.{i}", config.heads, eps) for i in range(config.decoder_depth)
        ]
        self.decoder_norm = LayerNorm(self.params, "decoder_norm", eps)
        self.head = Linear(self.params, "head")
        self._cache: Optional[dict] = None

    def _validated(self, params: Mapping[str, FloatArray]) -> Params:
        expected = parameter_shapes(self.config)
        if set(params) != set(expected):
            missing = sorted(set(expected) - set(params))
            extra = sorted(set(params) - set(expected))
            raise ShapeMismatchError(f"Parameter names differ: missing {missing}, unexpected {extra}")
        out: Params = {}
        for name, shape in expected.items():
            array = np.array(params[name], dtype=np.float64, copy=True)
            if array.shape != shape:
                raise ShapeMismatchError(f"Parameter {name} is {array.shape}, expected {shape}")
            if not np.all(np.isfinite(array)):
                raise NumericError(f"Parameter {name} contains non-finite values")
            out[name] = array
        return out

    def num_parameters(self) -> int:
        return sum(p.size for p in self.params.values())

    def forward(self, clip: VideoClip, mask: TokenMask) -> MaeOutput:
        """Encode visible cubes, decode every position, score the masked ones."""
        if mask.grid != clip.token_grid:
            raise ShapeMismatchError(f"Mask grid {mask.grid} does not match clip grid {clip.token_grid}")
        visible = mask.visible_indices
        masked = mask.masked_indices
        if visible.size == 0 or masked.size == 0:
            raise InvalidInputError("Mask must have at least one visible and one masked token")
        n = mask.num_tokens
        cubes = cubify(clip)
        targets = normalize_cubes(cubes[masked], self.config.norm_eps)

        x = self.patch.forward(cubes[visible]) + sinusoidal_encoding(n, self.config.embed_dim)[visible]
        for block in self.encoder:
            x = block.forward(x)
        latent = self.encoder_norm.forward(x)

        # Decoder order: visible tokens first, then masked tokens.
        order = np.concatenate([visible, masked])
        tokens = np.concatenate(
            [
                self.bridge.forward(latent),
                np.broadcast_to(self.params["mask_token"], (masked.size, self.config.decoder_dim)),
            ]
        )
        y = tokens + sinusoidal_encoding(n, self.config.decoder_dim)[order]
        for block in self.decoder:
            y = block.forward(y)
        predictions = self.head.forward(self.decoder_norm.forward(y))

        residual = predictions[visible.size :] - targets
        loss = float(np.sum(residual**2) / residual.size)

        reconstruction = np.empty((n, CUBE_DIM))
        reconstruction[order] = predictions
        self._cache = {"visible": visible.size, "residual": residual}
        return MaeOutput(reconstruction=reconstruction, loss=loss)

    def backward(self) -> Params:
        """Gradients of the loss from the most recent forward call."""
        if self._cache is None:
            raise RuntimeError("backward() called before forward()")
        n_visible = self._cache["visible"]
        residual = self._cache["residual"]
        grads: Params = {}

        d_pred = np.zeros((n_visible + residual.shape[0], CUBE_DIM))
        d_pred[n_visible:] = 2.0 * residual / residual.size
        dy = self.decoder_norm.backward(self.head.backward(d_pred, grads), grads)
        for block in reversed(self.decoder):
            dy = block.backward(dy, grads)
        grads["mask_token"] = dy[n_visible:].sum(axis=0)

        dx = self.encoder_norm.backward(self.bridge.backward(dy[:n_visible], grads), grads)
        for block in reversed(self.encoder):
            dx = block.backward(dx, grads)
        self.patch.backward(dx, grads)
        return {name: grads[name] for name in self.params}

    def loss_and_gradients(self, clip: VideoClip, mask: TokenMask) -> tuple[float, Params]:
        loss = self.forward(clip, mask).loss
        return loss, self.backward()

    def apply_gradients(self, grads: Mapping[str, FloatArray], learning_rate: float) -> None:
        """Plain SGD step, in place."""
        for name, grad in grads.items():
            self.params[name] -= learning_rate * grad


def forward(model: ToyMAE, clip: VideoClip, mask: TokenMask) -> MaeOutput:
    return model.forward(clip, mask)


def backward(model: ToyMAE, clip: VideoClip, mask: TokenMask) -> Params:
    """Analytic gradients of the masked loss for every parameter."""
    return model.loss_and_gradients(clip, mask)[1]


def config_from_params(params: Mapping[str, FloatArray], base: MaeConfig) -> MaeConfig:
    """`base` with the widths and depths read off a set of parameters.

    Head counts leave no trace in parameter shapes and are taken from `base`.
    """
    if "patch.weight" not in params or "bridge.weight" not in params:
        raise InvalidInputError("Parameters lack patch.weight or bridge.weight")
    embed_dim, decoder_dim = params["bridge.weight"].shape

    def depth(prefix: str) -> int:
        return len({name.split(".")[1] for name in params if name.startswith(f"{prefix}.")})

    mlp_ratio = base.mlp_ratio
    if "encoder.0.mlp.fc1.weight" in params:
        mlp_ratio = params["encoder.0.mlp.fc1.weight"].shape[1] // embed_dim
    return replace(
        base,
        embed_dim=int(embed_dim),
        decoder_dim=int(decoder_dim),
        depth=depth("encoder"),
        decoder_depth=depth("decoder"),
        mlp_ratio=int(mlp_ratio),
    )


def load_model(directory: Union[str, Path], base: MaeConfig) -> ToyMAE:
    """Rebuild a ToyMAE from a checkpoint directory."""
    params = load_checkpoint(directory)
    config = config_from_params(params, base)
    logger.info(f"Loaded {len(params)} parameters from {directory} (D={config.embed_dim}, depth {config.depth})")
    return ToyMAE(config, params)
