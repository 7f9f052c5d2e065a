"""Optical flow: estimator, flow sources and flow-set assembly."""

from .horn_schunck import HornSchunckConfig, capture_range, endpoint_error, estimate_flow, warp_image
from .sources import EstimatorFlowSource, FloDirectoryFlowSource, InMemoryFlowSource
from .flow_set import build_flow_set, write_flow_set

__all__ = [
    "HornSchunckConfig",
    "capture_range",
    "endpoint_error",
    "estimate_flow",
    "warp_image",
    "EstimatorFlowSource",
    "FloDirectoryFlowSource",
    "InMemoryFlowSource",
    "build_flow_set",
    "write_flow_set",
]
