"""Straight-line forward pass used to cross-check ToyMAE.

Written against the raw parameter dict with explicit loops over tokens' cubes,
heads and blocks; shares no code with the layer classes.
"""

import math
from typing import Mapping, Optional, Sequence

import numpy as np

from src.domain.models import MaeConfig, TokenMask, VideoClip


def _ln(x, gamma, beta, eps):
    mu = x.mean(axis=1, keepdims=True)
    var = ((x - mu) ** 2).mean(axis=1, keepdims=True)
    return (x - mu) / np.sqrt(var + eps) * gamma + beta


def _attention(x, p, prefix, heads):
    q = x @ p[prefix + ".query.weight"] + p[prefix + ".query.bias"]
    k = x @ p[prefix + ".key.weight"] + p[prefix + ".key.bias"]
    v = x @ p[prefix + ".value.weight"] + p[prefix + ".value.bias"]
    width = x.shape[1] // heads
    parts = []
    for h in range(heads):
        cols = slice(h * width, (h + 1) * width)
        scores = q[:, cols] @ k[:, cols].T / math.sqrt(width)
        scores = np.exp(scores - scores.max(axis=1, keepdims=True))
        scores = scores / scores.sum(axis=1, keepdims=True)
        parts.append(scores @ v[:, cols])
    return np.hstack(parts) @ p[prefix + ".out.weight"] + p[prefix + ".out.bias"]


def _block(x, p, prefix, heads, eps):
    x = x + _attention(_ln(x, p[prefix + ".norm1.gamma"], p[prefix + ".norm1.beta"], eps), p, prefix + ".attn", heads)
    h = _ln(x, p[prefix + ".norm2.gamma"], p[prefix + ".norm2.beta"], eps)
    h = h @ p[prefix + ".mlp.fc1.weight"] + p[prefix + ".mlp.fc1.bias"]
    h = 0.5 * h * (1.0 + np.tanh(math.sqrt(2.0 / math.pi) * (h + 0.044715 * h**3)))
    return x + h @ p[prefix + ".mlp.fc2.weight"] + p[prefix + ".mlp.fc2.bias"]


def _positions(n, dim):
    table = np.zeros((n, dim))
    for pos in range(n):
        for i in range(0, dim, 2):
            angle = pos / (10000.0 ** (i / dim))
            table[pos, i] = math.sin(angle)
            table[pos, i + 1] = math.cos(angle)
    return table


def reference_loss(
    params: Mapping[str, np.ndarray],
    config: MaeConfig,
    clip: VideoClip,
    mask: TokenMask,
    visible_order: Optional[Sequence[int]] = None,
) -> float:
    """Masked reconstruction loss computed without the layer classes.

    `visible_order` optionally permutes the visible tokens fed to the encoder.
    """
    slices, rows, cols = mask.grid
    cubes = []
    for s in range(slices):
        for r in range(rows):
            for c in range(cols):
                block = clip.frames[2 * s : 2 * s + 2, :, 16 * r : 16 * r + 16, 16 * c : 16 * c + 16]
                cubes.append(block.reshape(-1))
    cubes = np.array(cubes)
    n = len(cubes)
    flat = mask.visible.reshape(-1)
    visible = [i for i in range(n) if flat[i]]
    masked = [i for i in range(n) if not flat[i]]
    if visible_order is not None:
        visible = [visible[j] for j in visible_order]

    p = params
    eps = config.ln_eps
    x = cubes[visible] @ p["patch.weight"] + p["patch.bias"] + _positions(n, config.embed_dim)[visible]
    for i in range(config.depth):
        x = _block(x, p, f"encoder.{i}", config.heads, eps)
    x = _ln(x, p["encoder_norm.gamma"], p["encoder_norm.beta"], eps)

    latent = x @ p["bridge.weight"] + p["bridge.bias"]
    tokens = np.vstack([latent, np.tile(p["mask_token"], (len(masked), 1))])
    y = tokens + _positions(n, config.decoder_dim)[visible + masked]
    for i in range(config.decoder_depth):
        y = _block(y, p, f"decoder.{i}", config.heads, eps)
    y = _ln(y, p["decoder_norm.gamma"], p["decoder_norm.beta"], eps)
    pred = y[len(visible) :] @ p["head.weight"] + p["head.bias"]

    total = 0.0
    for row, index in enumerate(masked):
        cube = cubes[index]
        target = (cube - cube.mean()) / math.sqrt(cube.var() + config.norm_eps)
        total += float(np.sum((pred[row] - target) ** 2))
    return total / (len(masked) * cubes.shape[1])
