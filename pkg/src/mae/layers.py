"""Transformer layers with hand-written backward passes.

Layers own no arrays: they read their parameters from the model's shared
``params`` dict under a name prefix, keep the activations of the last forward
call, and add their gradients into a caller-supplied dict on backward.
"""

from typing import Optional

import numpy as np

from src.domain.models import FloatArray


Params = dict[str, FloatArray]

GELU_C = np.sqrt(2.0 / np.pi)
GELU_K = 0.044715


def _accumulate(grads: Params, name: str, value: FloatArray) -> None:
    if name in grads:
        grads[name] = grads[name] + value
    else:
        grads[name] = value


def gelu(x: FloatArray) -> FloatArray:
    """tanh form of GELU."""
    return 0.5 * x * (1.0 + np.tanh(GELU_C * (x + GELU_K * x**3)))


def gelu_grad(x: FloatArray) -> FloatArray:
    t = np.tanh(GELU_C * (x + GELU_K * x**3))
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t**2) * GELU_C * (1.0 + 3.0 * GELU_K * x**2)


def softmax(scores: FloatArray) -> FloatArray:
    shifted = np.exp(scores - scores.max(axis=-1, keepdims=True))
    return shifted / shifted.sum(axis=-1, keepdims=True)


class Linear:
    """y = x W + b."""

    def __init__(self, params: Params, prefix: str) -> None:
        self.params = params
        self.prefix = prefix
        self._x: Optional[FloatArray] = None

    def forward(self, x: FloatArray) -> FloatArray:
        self._x = x
        return x @ self.params[f"{self.prefix}.weight"] + self.params[f"{self.prefix}.bias"]

    def backward(self, dy: FloatArray, grads: Params) -> FloatArray:
        _accumulate(grads, f"{self.prefix}.weight", self._x.T @ dy)
        _accumulate(grads, f"{self.prefix}.bias", dy.sum(axis=0))
        return dy @ self.params[f"{self.prefix}.weight"].T


class LayerNorm:
    def __init__(self, params: Params, prefix: str, eps: float) -> None:
        self.params = params
        self.prefix = prefix
        self.eps = eps
        self._cache: Optional[tuple[FloatArray, FloatArray]] = None

    def forward(self, x: FloatArray) -> FloatArray:
        mean = x.mean(axis=-1, keepdims=True)
        inv_std = 1.0 / np.sqrt(x.var(axis=-1, keepdims=True) + self.eps)
        x_hat = (x - mean) * inv_std
        self._cache = (x_hat, inv_std)
        return x_hat * self.params[f"{self.prefix}.gamma"] + self.params[f"{self.prefix}.beta"]

    def backward(self, dy: FloatArray, grads: Params) -> FloatArray:
        x_hat, inv_std = self._cache
        _accumulate(grads, f"{self.prefix}.gamma", (dy * x_hat).sum(axis=0))
        _accumulate(grads, f"{self.prefix}.beta", dy.sum(axis=0))
        dx_hat = dy * self.params[f"{self.prefix}.gamma"]
        return inv_std * (
            dx_hat
            - dx_hat.mean(axis=-1, keepdims=True)
            - x_hat * (dx_hat * x_hat).mean(axis=-1, keepdims=True)
        )


class MultiHeadAttention:
    """Joint self-attention over every token in the sequence."""

    def __init__(self, params: Params, prefix: str, heads: int) -> None:
        self.heads = heads
        self.query = Linear(params, f"{prefix}.query")
        self.key = Linear(params, f"{prefix}.key")
        self.value = Linear(params, f"{prefix}.value")
        self.out = Linear(params, f"{prefix}.out")
        self._cache: Optional[tuple[FloatArray, ...]] = None

    def _split(self, x: FloatArray) -> FloatArray:
        n, d = x.shape
        return x.reshape(n, self.heads, d // self.heads).transpose(1, 0, 2)

    @staticmethod
    def _merge(x: FloatArray) -> FloatArray:
        h, n, dk = x.shape
        return x.transpose(1, 0, 2).reshape(n, h * dk)

    def forward(self, x: FloatArray) -> FloatArray:
        q = self._split(self.query.forward(x))
        k = self._split(self.key.forward(x))
        v = self._split(self.value.forward(x))
        scale = 1.0 / np.sqrt(q.shape[-1])
        weights = softmax(q @ k.transpose(0, 2, 1) * scale)
        self._cache = (q, k, v, weights, scale)
        return self.out.forward(self._merge(weights @ v))

    def backward(self, dy: FloatArray, grads: Params) -> FloatArray:
        q, k, v, weights, scale = self._cache
        d_context = self._split(self.out.backward(dy, grads))
        d_weights = d_context @ v.transpose(0, 2, 1)
        dv = weights.transpose(0, 2, 1) @ d_context
        d_scores = weights * (d_weights - (d_weights * weights).sum(axis=-1, keepdims=True)) * scale
        dq = d_scores @ k
        dk = d_scores.transpose(0, 2, 1) @ q
        return (
            self.query.backward(self._merge(dq), grads)
            + self.key.backward(self._merge(dk), grads)
            + self.value.backward(self._merge(dv), grads)
        )


class FeedForward:
    def __init__(self, params: Params, prefix: str) -> None:
        self.fc1 = Linear(params, f"{prefix}.fc1")
        self.fc2 = Linear(params, f"{prefix}.fc2")
        self._hidden: Optional[FloatArray] = None

    def forward(self, x: FloatArray) -> FloatArray:
        self._hidden = self.fc1.forward(x)
        return self.fc2.forward(gelu(self._hidden))

    def backward(self, dy: FloatArray, grads: Params) -> FloatArray:
        d_act = self.fc2.backward(dy, grads)
        return self.fc1.backward(d_act * gelu_grad(self._hidden), grads)


class Block:
    """Pre-norm transformer block: x + attn(ln(x)), then x + mlp(ln(x))."""

    def __init__(self, params: Params, prefix: str, heads: int, eps: float) -> None:
        self.norm1 = LayerNorm(params, f"{prefix}.norm1", eps)
        self.attn = MultiHeadAttention(params, f"{prefix}.attn", heads)
        self.norm2 = LayerNorm(params, f"{prefix}.norm2", eps)
        self.mlp = FeedForward(params, f"{prefix}.mlp")

    def forward(self, x: FloatArray) -> FloatArray:
        x = x + self.attn.forward(self.norm1.forward(x))
        return x + self.mlp.forward(self.norm2.forward(x))

    def backward(self, dy: FloatArray, grads: Params) -> FloatArray:
        dy = dy + self.norm2.backward(self.mlp.backward(dy, grads), grads)
        return dy + self.norm1.backward(self.attn.backward(dy, grads), grads)


def block_parameter_shapes(prefix: str, dim: int, mlp_ratio: int) -> dict[str, tuple[int, ...]]:
    """Parameter names and shapes of one Block."""
    hidden = dim * mlp_ratio
    shapes: dict[str, tuple[int, ...]] = {}
    for norm in ("norm1", "norm2"):
        shapes[f"{prefix}.{norm}.gamma"] = (dim,)
        shapes[f"{prefix}.{norm}.beta"] = (dim,)
    for proj in ("query", "key", "value", "out"):
        shapes[f"{prefix}.attn.{proj}.weight"] = (dim, dim)
        shapes[f"{prefix}.attn.{proj}.bias"] = (dim,)
    shapes[f"{prefix}.mlp.fc1.weight"] = (dim, hidden)
    shapes[f"{prefix}.mlp.fc1.bias"] = (hidden,)
    shapes[f"{prefix}.mlp.fc2.weight"] = (hidden, dim)
    shapes[f"{prefix}.mlp.fc2.bias"] = (dim,)
    return shapes
