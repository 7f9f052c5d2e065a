"""Temporal information leakage of a token mask under known motion.

A masked token leaks when its centre, carried along the flow from either
frame of its slice to either frame of a nearby slice, lands inside a token
that is visible in that slice. Points leaving the frame never leak.
"""

import itertools

import numpy as np
from scipy import ndimage

from src.domain.errors import InvalidInputError, ShapeMismatchError
from src.domain.models import TOKEN_SIZE, TUBELET, FlowSet, LeakageEntry, TokenMask


class FlowChain:
    """Moves points between frames one adjacent step at a time.

    A FlowSet stores one direction per adjacent pair; the other direction is
    taken as the negated field sampled at the moving point.
    """

    def __init__(self, flows: FlowSet) -> None:
        self.flows = flows

    def _step(self, frame: int, to: int, y: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if frame in self.flows.fields and self.flows.target(frame) == to:
            field, sign = self.flows.field_for(frame), 1.0
        else:
            field, sign = self.flows.field_for(to), -1.0
        coords = np.vstack([y, x])
        du = ndimage.map_coordinates(field.u, coords, order=1, mode="nearest")
        dv = ndimage.map_coordinates(field.v, coords, order=1, mode="nearest")
        return y + sign * dv, x + sign * du

    def propagate(self, y: np.ndarray, x: np.ndarray, source: int, target: int) -> tuple[np.ndarray, np.ndarray]:
        """Carry (y, x) points from 1-based frame `source` to frame `target`."""
        step = 1 if target > source else -1
        frame = source
        while frame != target:
            y, x = self._step(frame, frame + step, y, x)
            frame += step
        return y, x


def leakage_rate(
    mask: TokenMask,
    flows: FlowSet,
    horizon: int = 1,
    margin: int = 0,
    same_phase: bool = False,
) -> LeakageEntry:
    """Fraction of scored masked tokens that leak into a slice within `horizon`.

    Only masked tokens at least `margin` tokens away from the border are scored.
    `same_phase` pairs only frames at the same position inside their tubelets
    (first with first, second with second) instead of all four frame pairs.
    """
    if horizon < 1:
        raise InvalidInputError(f"Horizon must be >= 1, got {horizon}")
    slices, rows, cols = mask.grid
    height, width = rows * TOKEN_SIZE, cols * TOKEN_SIZE
    if flows.num_frames != slices * TUBELET or flows.shape != (height, width):
        raise ShapeMismatchError(
            f"Flows ({flows.num_frames} frames, {flows.shape}) do not match mask grid {mask.grid}"
        )
    if margin < 0 or 2 * margin >= min(rows, cols):
        raise InvalidInputError(f"Margin {margin} leaves no tokens on a {rows}x{cols} grid")

    chain = FlowChain(flows)
    scored = np.zeros((rows, cols), dtype=bool)
    scored[margin : rows - margin, margin : cols - margin] = True

    leaked_total = 0
    masked_total = 0
    per_slice = []
    for s in range(slices):
        r, c = np.nonzero(~mask.visible[s] & scored)
        leaked = np.zeros(r.size, dtype=bool)
        for other in range(max(0, s - horizon), min(slices, s + horizon + 1)):
            if other == s or r.size == 0:
                continue
            for phase, other_phase in itertools.product(range(TUBELET), repeat=2):
                if same_phase and phase != other_phase:
                    continue
                y = TOKEN_SIZE * r + 7.5
                x = TOKEN_SIZE * c + 7.5
                y, x = chain.propagate(y, x, TUBELET * s + 1 + phase, TUBELET * other + 1 + other_phase)
                inside = (y >= 0) & (y < height) & (x >= 0) & (x < width)
                tr = np.clip(np.floor(y / TOKEN_SIZE).astype(np.int64), 0, rows - 1)
                tc = np.clip(np.floor(x / TOKEN_SIZE).astype(np.int64), 0, cols - 1)
                leaked |= inside & mask.visible[other, tr, tc]
        per_slice.append(float(leaked.mean()) if r.size else 0.0)
        leaked_total += int(leaked.sum())
        masked_total += int(r.size)

    rate = leaked_total / masked_total if masked_total else 0.0
    return LeakageEntry(rate=rate, leaked=leaked_total, masked=masked_total, per_slice=per_slice)
