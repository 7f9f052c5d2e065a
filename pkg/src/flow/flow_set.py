"""Assembly and export of base-directed flow sets."""

from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Union
import logging

from src.domain.errors import InvalidInputError
from src.domain.models import FlowField, FlowSet, VideoClip
from src.domain.protocols import FlowSource
from src.formats.flo import flo_filename, write_flo


logger = logging.getLogger(__name__)


def build_flow_set(
    clip: VideoClip,
    base_index: int,
    source: FlowSource,
    max_workers: int = 1,
) -> FlowSet:
    """Collect the T-1 flows pointing towards frame `base_index` (1-based).

    Pairs may be computed concurrently; the result is keyed by source frame so
    it does not depend on completion order.
    """
    if not 1 <= base_index <= clip.num_frames:
        raise InvalidInputError(f"Base index {base_index} outside [1, {clip.num_frames}]")
    pairs = FlowSet.required_pairs(clip.num_frames, base_index)

    def compute(pair: tuple[int, int]) -> FlowField:
        return source.flow(clip, *pair)

    if max_workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(compute, pairs))
    else:
        results = [compute(pair) for pair in pairs]

    logger.info(f"Built flow set with {len(pairs)} fields from '{source.name}' (base frame {base_index})")
    return FlowSet(
        base_index=base_index,
        num_frames=clip.num_frames,
        fields={i: field for (i, _), field in zip(pairs, results)},
    )


def write_flow_set(flow_set: FlowSet, directory: Union[str, Path]) -> list[Path]:
    """Write every field as ``flow_{i}_{j}.flo`` into `directory`."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for source, target in flow_set.pairs():
        path = out / flo_filename(source, target)
        write_flo(flow_set.field_for(source), path)
        written.append(path)
    return written
