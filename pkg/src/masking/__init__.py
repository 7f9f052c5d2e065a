"""Motion-guided masking: initial maps, warping, hole filling, volume and sampling."""

from .init_maps import choose_base_frame, init_mask_binary, init_mask_gmm, mixture_density, token_center
from .warp import backward_warp, forward_warp
from .fill import FillContext, fill_holes
from .volume import build_mask_volume, initial_map
from .sampling import pool_tokens, sample_tokens, top_k
from .strategies import (
    MaskResult,
    generate,
    generate_with_volume,
    random_mask,
    resolve_base_frame,
    tube_mask,
)
from .overlay import render_flow, render_overlays, render_volume, write_overlays, write_visualization

__all__ = [
    "choose_base_frame",
    "init_mask_binary",
    "init_mask_gmm",
    "mixture_density",
    "token_center",
    "backward_warp",
    "forward_warp",
    "FillContext",
    "fill_holes",
    "build_mask_volume",
    "initial_map",
    "pool_tokens",
    "sample_tokens",
    "top_k",
    "MaskResult",
    "generate",
    "generate_with_volume",
    "random_mask",
    "resolve_base_frame",
    "tube_mask",
    "render_flow",
    "render_overlays",
    "render_volume",
    "write_overlays",
    "write_visualization",
]
