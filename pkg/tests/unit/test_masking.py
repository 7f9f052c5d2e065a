"""Tests for mask maps, warping, hole filling, volumes and token sampling."""

import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.core.rng import Rng
from src.domain.errors import InvalidInputError, MissingFlowError, ShapeMismatchError
from src.domain.models import (
    EPS_MARKER,
    BaseFrameMode,
    FlowField,
    FlowSet,
    HoleFill,
    MaskConfig,
    MaskVolume,
    SamplingLevel,
    TokenMask,
    VideoClip,
    visible_count,
)
from src.masking.fill import FillContext, fill_holes
from src.masking.init_maps import (
    choose_base_frame,
    init_mask_binary,
    init_mask_gmm,
    mixture_density,
    token_center,
)
from src.masking.overlay import (
    MASKED_GAIN,
    render_flow,
    render_overlays,
    render_volume,
    write_overlays,
    write_visualization,
)
from src.masking.sampling import pool_tokens, sample_tokens, top_k
from src.masking.strategies import (
    generate,
    generate_with_volume,
    random_mask,
    resolve_base_frame,
    tube_mask,
)
from src.masking.volume import build_mask_volume
from src.masking.warp import backward_warp, forward_warp


def translating_flows(num_frames: int, base: int, height: int, width: int, speed: float) -> FlowSet:
    """Base-directed flows of content moving `speed` px/frame to the right."""
    fields = {}
    for source, target in FlowSet.required_pairs(num_frames, base):
        fields[source] = FlowField.constant(height, width, speed * (target - source), 0.0)
    return FlowSet(base_index=base, num_frames=num_frames, fields=fields)


def noise_clip(num_frames: int, height: int, width: int, seed: int = 0) -> VideoClip:
    return VideoClip(Rng(seed).uniform((num_frames, 3, height, width)))


class TestChooseBaseFrame:
    """Tests for choose_base_frame."""

    def test_first_and_middle(self):
        """Should pick frame 1 or floor(T/2)."""
        assert choose_base_frame(16, BaseFrameMode.FIRST, Rng(0)) == 1
        assert choose_base_frame(16, BaseFrameMode.MIDDLE, Rng(0)) == 8
        assert choose_base_frame(2, BaseFrameMode.MIDDLE, Rng(0)) == 1

    def test_random_in_range(self):
        """Should draw a frame in [1, T]."""
        draws = {choose_base_frame(4, BaseFrameMode.RANDOM, Rng(0).split(i)) for i in range(100)}
        assert draws == {1, 2, 3, 4}

    def test_too_few_frames(self):
        """Should require at least two frames."""
        with pytest.raises(InvalidInputError):
            choose_base_frame(1, BaseFrameMode.FIRST, Rng(0))


class TestInitialMaps:
    """Tests for the initial mask map generators."""

    def test_token_center(self):
        """Should return the pixel midpoint of a token."""
        assert token_center(5, 4) == (23.5, 23.5)
        assert token_center(9, 4) == (39.5, 23.5)

    def test_mixture_peaks_at_center(self):
        """Should evaluate to 1 at a single centre."""
        density = mixture_density(np.arange(3.0), np.arange(3.0), [(1.0, 1.0)], (2.0, 2.0))
        assert density[1, 1] == pytest.approx(1.0)
        assert density.argmax() == 4

    def test_gmm_shape_and_floor(self):
        """Should cover the frame and stay at or above the hole marker."""
        density = init_mask_gmm(64, 48, 0.9, (4.0, 4.0), Rng(0))
        assert density.shape == (64, 48)
        assert density.min() >= EPS_MARKER

    def test_gmm_explicit_centers(self):
        """Should peak inside the named token."""
        density = init_mask_gmm(64, 64, 0.9, (8.0, 8.0), Rng(0), centers=[5])
        row, col = np.unravel_index(density.argmax(), density.shape)
        assert (row // 16, col // 16) == (1, 1)

    def test_gmm_needs_a_visible_token(self):
        """Should reject ratios that leave no visible token."""
        with pytest.raises(InvalidInputError):
            init_mask_gmm(32, 32, 0.9, (4.0, 4.0), Rng(0))

    def test_binary_token_level(self):
        """Should light exactly N_v hat whole tokens."""
        mask = init_mask_binary(64, 64, 0.75, "token", Rng(1))
        assert np.count_nonzero(mask == 1.0) == 4 * 256
        assert mask.min() == EPS_MARKER

    def test_binary_pixel_level(self):
        """Should light floor((1 - ratio) * H * W) pixels."""
        mask = init_mask_binary(32, 32, 0.75, "pixel", Rng(1))
        assert np.count_nonzero(mask == 1.0) == 256

    def test_binary_bad_level(self):
        """Should reject unknown granularities."""
        with pytest.raises(InvalidInputError):
            init_mask_binary(32, 32, 0.75, "frame", Rng(1))


    @pytest.mark.parametrize("seed", range(10))
    def test_gmm_top_k_recovers_separated_centers(self, seed):
        """Should make the centre tokens the top scorers when centres are 3 sigma apart."""
        rng = Rng(seed)
        centers = []
        for t in rng.uniform_indices(64, 64):
            r, c = divmod(int(t), 8)
            if all(max(abs(r - rr), abs(c - cc)) >= 2 for rr, cc in centers):
                centers.append((r, c))
            if len(centers) == 4:
                break
        ratio = 1 - 4 / 64
        density = init_mask_gmm(128, 128, ratio, (8.0, 8.0), rng, centers=[8 * r + c for r, c in centers])
        volume = MaskVolume(np.stack([density, density]), base_index=1)
        assert sample_tokens(volume, ratio, SamplingLevel.FRAME_LEVEL).slice_set(0) == set(centers)


class TestWarp:
    """Tests for backward and forward warping."""

    def test_backward_zero_flow_is_identity(self):
        """Should return the map unchanged without holes."""
        mask = Rng(0).uniform((32, 32)) + EPS_MARKER
        warped, holes = backward_warp(mask, FlowField.zeros(32, 32))
        assert np.array_equal(warped, mask)
        assert not holes.any()

    def test_backward_integer_shift(self):
        """Should sample at p + flow and mark out-of-bounds samples as holes."""
        mask = Rng(0).uniform((32, 64)) + EPS_MARKER
        warped, holes = backward_warp(mask, FlowField.constant(32, 64, 16.0, 0.0))
        assert np.array_equal(warped[:, :48], mask[:, 16:])
        assert holes[:, 48:].all()
        assert not holes[:, :48].any()

    def test_backward_half_pixel(self):
        """Should interpolate bilinearly."""
        mask = np.tile(np.arange(16.0) + 1.0, (16, 1))
        warped, _ = backward_warp(mask, FlowField.constant(16, 16, 0.5, 0.0))
        assert warped[3, 2] == pytest.approx(3.5)

    def test_forward_integer_shift(self):
        """Should splat p to p + flow and leave uncovered pixels as holes."""
        mask = Rng(0).uniform((32, 64)) + EPS_MARKER
        warped, holes = forward_warp(mask, FlowField.constant(32, 64, 16.0, 0.0))
        assert np.allclose(warped[:, 16:], mask[:, :48])
        assert holes[:, :16].all()
        assert not holes[:, 16:].any()

    def test_forward_collision_averages(self):
        """Should average values landing on the same pixel."""
        mask = np.full((16, 16), EPS_MARKER)
        mask[0, 0], mask[0, 1] = 1.0, 3.0
        data = np.zeros((2, 16, 16))
        data[0, 0, 0] = 1.0
        warped, _ = forward_warp(mask, FlowField(data))
        assert warped[0, 1] == pytest.approx(2.0)

    def test_forward_converging_flow_leaves_edge_holes(self):
        """Should leave uncovered edges and no interior holes when halves collide."""
        data = np.zeros((2, 16, 32))
        data[0, :, :16] = 4.0
        data[0, :, 16:] = -4.0
        warped, holes = forward_warp(np.ones((16, 32)), FlowField(data))
        assert holes[:, :4].all() and holes[:, -4:].all()
        assert not holes[:, 4:-4].any()
        assert np.allclose(warped[:, 4:-4], 1.0)

    def test_shape_mismatch(self):
        """Should reject a flow of another size."""
        with pytest.raises(ShapeMismatchError):
            backward_warp(np.ones((16, 16)), FlowField.zeros(16, 32))


class TestFillHoles:
    """Tests for fill_holes."""

    @pytest.fixture
    def setup(self):
        base = np.full((16, 16), 0.7)
        warped = np.full((16, 16), 0.2)
        holes = np.zeros((16, 16), dtype=bool)
        holes[:, :4] = True
        warped[holes] = 0.0
        return base, warped, holes

    @pytest.mark.parametrize(
        "strategy,expected",
        [(HoleFill.TUBE, 0.7), (HoleFill.VISIBLE, 1.0), (HoleFill.INVISIBLE, EPS_MARKER)],
    )
    def test_constant_fills(self, setup, strategy, expected):
        """Should write the strategy's value into holes only."""
        base, warped, holes = setup
        out = fill_holes(warped, holes, strategy, FillContext(base, 0.9, Rng(0)))
        assert np.all(out[holes] == expected)
        assert np.all(out[~holes] == 0.2)

    def test_random_fill_values(self, setup):
        """Should fill holes with 1 or the marker."""
        base, warped, holes = setup
        out = fill_holes(warped, holes, HoleFill.RANDOM, FillContext(base, 0.5, Rng(3)))
        assert set(np.unique(out[holes])) <= {1.0, EPS_MARKER}

    def test_previous_map_fill(self, setup):
        """Should copy the previous map's values into holes."""
        base, warped, holes = setup
        previous = np.full((16, 16), 0.4)
        out = fill_holes(warped, holes, HoleFill.PREVIOUS_MAP, FillContext(base, 0.9, Rng(0), previous))
        assert np.all(out[holes] == 0.4)

    def test_previous_map_falls_back_to_tube(self, setup, caplog):
        """Should use the base map and warn when there is no previous map."""
        base, warped, holes = setup
        with caplog.at_level(logging.WARNING):
            out = fill_holes(warped, holes, HoleFill.PREVIOUS_MAP, FillContext(base, 0.9, Rng(0)))
        assert np.all(out[holes] == 0.7)
        assert "tube" in caplog.text

    def test_does_not_modify_input(self, setup):
        """Should return a new array."""
        base, warped, holes = setup
        before = warped.copy()
        fill_holes(warped, holes, HoleFill.VISIBLE, FillContext(base, 0.9, Rng(0)))
        assert np.array_equal(warped, before)


class TestBuildMaskVolume:
    """Tests for build_mask_volume."""

    def test_zero_flow_replicates_base(self):
        """Should copy the base map into every frame when nothing moves."""
        flows = FlowSet.zeros(6, 3, 32, 32)
        volume = build_mask_volume(6, 32, 32, flows, MaskConfig(ratio=0.75, sigma=(8, 8)), Rng(0))
        for frame in range(6):
            assert np.array_equal(volume.data[frame], volume.base_map)

    def test_translation_backward(self):
        """Should shift maps with the content and fill the trailing edge from the base."""
        flows = translating_flows(8, 4, 64, 64, 8.0)
        cfg = MaskConfig(ratio=0.75, sigma=(8, 8))
        volume = build_mask_volume(8, 64, 64, flows, cfg, Rng(0))
        base = volume.base_map
        assert volume.base_index == 4
        assert np.array_equal(volume.data[2][:, :56], base[:, 8:])
        assert np.array_equal(volume.data[2][:, 56:], base[:, 56:])
        assert np.array_equal(volume.data[4][:, 8:], base[:, :56])

    def test_translation_forward_matches_backward(self):
        """Should agree with backward warping for a pure integer translation."""
        flows = translating_flows(4, 2, 32, 32, 4.0)
        back = build_mask_volume(4, 32, 32, flows, MaskConfig(ratio=0.75, sigma=(8, 8)), Rng(0))
        fwd = build_mask_volume(
            4, 32, 32, flows, MaskConfig(ratio=0.75, sigma=(8, 8), warp="forward"), Rng(0)
        )
        assert np.allclose(back.data, fwd.data)

    def test_explicit_initial_map(self):
        """Should seed the base frame with the given map."""
        initial = np.full((32, 32), 0.5)
        volume = build_mask_volume(4, 32, 32, FlowSet.zeros(4, 2, 32, 32), MaskConfig(), Rng(0), initial)
        assert np.array_equal(volume.base_map, initial)

    def test_rejects_unfloored_initial_map(self):
        """Should require initial values at or above the marker."""
        with pytest.raises(InvalidInputError):
            build_mask_volume(4, 32, 32, FlowSet.zeros(4, 2, 32, 32), MaskConfig(), Rng(0), np.zeros((32, 32)))

    def test_rejects_mismatched_flows(self):
        """Should reject flows for another clip length or size."""
        with pytest.raises(InvalidInputError):
            build_mask_volume(6, 32, 32, FlowSet.zeros(4, 2, 32, 32), MaskConfig(), Rng(0))
        with pytest.raises(ShapeMismatchError):
            build_mask_volume(4, 32, 48, FlowSet.zeros(4, 2, 32, 32), MaskConfig(), Rng(0))

    def test_noise_perturbs_one_non_base_frame(self):
        """Should add noise to exactly one frame other than the base."""
        flows = FlowSet.zeros(6, 3, 32, 32)
        cfg = MaskConfig(ratio=0.75, sigma=(8, 8))
        clean = build_mask_volume(6, 32, 32, flows, cfg, Rng(0))
        noisy = build_mask_volume(6, 32, 32, flows, MaskConfig(ratio=0.75, sigma=(8, 8), noise_std=0.1), Rng(0))
        changed = [f for f in range(6) if not np.array_equal(clean.data[f], noisy.data[f])]
        assert len(changed) == 1
        assert changed[0] != 2
        assert noisy.data.min() >= EPS_MARKER

    def test_deterministic(self):
        """Should reproduce the volume for the same stream."""
        flows = translating_flows(4, 2, 32, 32, 3.0)
        cfg = MaskConfig(ratio=0.75, sigma=(8, 8), fill="random")
        assert build_mask_volume(4, 32, 32, flows, cfg, Rng(4)) == build_mask_volume(4, 32, 32, flows, cfg, Rng(4))


class TestSampling:
    """Tests for token pooling and top-k selection."""

    def test_pool_constant_volume(self):
        """Should average each 2x16x16 block."""
        scores = pool_tokens(MaskVolume(np.full((4, 32, 48), 0.25), base_index=1))
        assert scores.shape == (2, 2, 3)
        assert np.all(scores == 0.25)

    def test_pool_block_average(self):
        """Should pool each token independently."""
        data = np.zeros((2, 32, 32))
        data[1, :16, 16:] = 1.0
        scores = pool_tokens(MaskVolume(data, base_index=1))
        assert scores[0, 0, 1] == pytest.approx(0.5)
        assert scores[0, 1, 0] == 0.0

    def test_pool_rejects_unaligned(self):
        """Should reject volumes that do not tile into tokens."""
        with pytest.raises(ShapeMismatchError):
            pool_tokens(MaskVolume(np.zeros((3, 32, 32)), base_index=1))

    def test_top_k_ties_prefer_lower_index(self):
        """Should break ties by flat index."""
        assert list(top_k(np.array([0.5, 0.9, 0.5, 0.9, 0.1]), 3)) == [1, 3, 0]

    def test_frame_level_counts(self):
        """Should select N_v hat tokens in every slice."""
        volume = MaskVolume(Rng(0).uniform((8, 64, 64)), base_index=4)
        mask = sample_tokens(volume, 0.75, SamplingLevel.FRAME_LEVEL)
        assert mask.per_slice_counts() == [4, 4, 4, 4]

    def test_clip_level_total(self):
        """Should select (T/2) * N_v hat tokens over the whole clip."""
        data = np.full((4, 64, 64), EPS_MARKER)
        data[:2] = 1.0
        mask = sample_tokens(MaskVolume(data, base_index=1), 0.75, SamplingLevel.CLIP_LEVEL)
        assert mask.num_visible == 8
        assert mask.per_slice_counts() == [8, 0]


class TestStrategies:
    """Tests for strategy dispatch."""

    @pytest.mark.parametrize("ratio", [0.75, 0.8, 0.85, 0.9, 0.95])
    @pytest.mark.parametrize("strategy", ["motion_guided", "tube", "random"])
    def test_frame_level_cardinality(self, ratio, strategy):
        """Should keep exactly N_v hat visible tokens per slice for every strategy."""
        clip = noise_clip(4, 128, 128)
        flows = translating_flows(4, 2, 128, 128, 4.0)
        cfg = MaskConfig(ratio=ratio, strategy=strategy)
        mask = generate(clip, flows, cfg, Rng(1))
        expected = visible_count(ratio, 64)
        assert expected > 0
        assert mask.grid == (2, 8, 8)
        assert mask.per_slice_counts() == [expected, expected]

    @given(
        slices=st.integers(min_value=1, max_value=4),
        rows=st.integers(min_value=1, max_value=6),
        cols=st.integers(min_value=1, max_value=6),
        ratio=st.floats(min_value=0.01, max_value=0.99),
        seed=st.integers(min_value=0, max_value=2**32),
    )
    @settings(max_examples=1000, deadline=None)
    def test_cardinality_property(self, slices, rows, cols, ratio, seed):
        """Should keep floor((1 - ratio) * N) visible tokens in every slice."""
        expected = visible_count(ratio, rows * cols)
        grid = (slices, rows, cols)
        tube = tube_mask(grid, ratio, Rng(seed))
        random = random_mask(grid, ratio, SamplingLevel.FRAME_LEVEL, Rng(seed))
        assert tube.per_slice_counts() == [expected] * slices
        assert random.per_slice_counts() == [expected] * slices
        assert random_mask(grid, ratio, SamplingLevel.CLIP_LEVEL, Rng(seed)).num_visible == expected * slices

    def test_tube_repeats_pattern(self):
        """Should replicate one pattern across slices."""
        mask = tube_mask((4, 4, 4), 0.75, Rng(2))
        for s in range(1, 4):
            assert mask.slice_set(s) == mask.slice_set(0)

    def test_random_clip_level_total(self):
        """Should draw (T/2) * N_v hat tokens over the clip."""
        mask = random_mask((4, 4, 4), 0.75, SamplingLevel.CLIP_LEVEL, Rng(2))
        assert mask.num_visible == 16

    def test_random_slices_differ(self):
        """Should draw each slice independently."""
        mask = random_mask((4, 8, 8), 0.75, SamplingLevel.FRAME_LEVEL, Rng(2))
        assert len({frozenset(mask.slice_set(s)) for s in range(4)}) > 1

    def test_zero_flow_collapses_to_tube(self):
        """Should pick the same tokens in every slice when nothing moves."""
        clip = noise_clip(8, 64, 64)
        flows = FlowSet.zeros(8, 4, 64, 64)
        mask = generate(clip, flows, MaskConfig(ratio=0.9, sigma=(8, 8)), Rng(5))
        for s in range(1, 4):
            assert mask.slice_set(s) == mask.slice_set(0)

    def test_visible_tokens_follow_motion(self):
        """Should shift the visible set one token per slice at 16 px per slice."""
        height = width = 128
        flows = translating_flows(8, 4, height, width, 8.0)
        cfg = MaskConfig(ratio=0.96875, sigma=(16, 16))
        initial = init_mask_gmm(height, width, cfg.ratio, cfg.sigma, Rng(0), centers=[18, 44])
        volume = build_mask_volume(8, height, width, flows, cfg, Rng(0), initial)
        mask = sample_tokens(volume, cfg.ratio, cfg.sample)
        base_set = {(2, 2), (5, 4)}
        assert mask.slice_set(1) == base_set
        for s in range(4):
            assert mask.slice_set(s) == {(r, c + s - 1) for r, c in base_set}

    def test_zero_flow_collapse_at_full_size(self):
        """Should repeat the base slice on 224x224x16 for every seed."""
        clip = noise_clip(16, 224, 224)
        flows = FlowSet.zeros(16, 8, 224, 224)
        for seed in range(100):
            mask = generate(clip, flows, MaskConfig(ratio=0.9), Rng(seed))
            base = mask.slice_set(0)
            assert all(mask.slice_set(s) == base for s in range(1, 8)), seed

    @pytest.mark.parametrize("seed", range(20))
    def test_translation_equivariance_at_full_size(self, seed):
        """Should move interior visible tokens one token per slice at 8 px per frame."""
        height = width = 224
        flows = translating_flows(16, 8, height, width, 8.0)
        cfg = MaskConfig(ratio=1 - 3 / 196, sigma=(8, 8))
        rng = Rng(seed)
        # Columns 5..8 stay at least one token from the border over shifts -3..+4.
        rows = [1 + 4 * i + rng.integers(0, 3) for i in range(3)]
        cols = [rng.integers(5, 9) for _ in range(3)]
        centers = [14 * r + c for r, c in zip(rows, cols)]
        initial = init_mask_gmm(height, width, cfg.ratio, cfg.sigma, rng, centers=centers)
        volume = build_mask_volume(16, height, width, flows, cfg, rng, initial)
        mask = sample_tokens(volume, cfg.ratio, cfg.sample)
        base_slice = (8 - 1) // 2
        base_set = set(zip(rows, cols))
        for s in range(8):
            assert mask.slice_set(s) == {(r, c + s - base_slice) for r, c in base_set}

    def test_motion_guided_needs_flows(self):
        """Should raise MissingFlowError without flows."""
        with pytest.raises(MissingFlowError):
            generate(noise_clip(4, 32, 32), None, MaskConfig(), Rng(0))

    def test_base_frame_mismatch(self):
        """Should reject flows built around another frame."""
        with pytest.raises(InvalidInputError):
            generate(noise_clip(4, 64, 64), FlowSet.zeros(4, 1, 64, 64), MaskConfig(ratio=0.75), Rng(0))

    def test_resolve_base_frame_matches_volume(self):
        """Should agree with the base the volume is built around."""
        cfg = MaskConfig(ratio=0.75, base_frame="random", sigma=(8, 8))
        rng = Rng(11)
        base = resolve_base_frame(8, cfg, rng)
        result = generate_with_volume(noise_clip(8, 64, 64), FlowSet.zeros(8, base, 64, 64), cfg, rng)
        assert result.base_index == base
        assert result.volume.data.shape == (8, 64, 64)

    def test_deterministic(self):
        """Should reproduce masks for identical inputs and seeds."""
        clip = noise_clip(4, 64, 64)
        flows = translating_flows(4, 2, 64, 64, 4.0)
        cfg = MaskConfig(ratio=0.75, fill="random", sigma=(8, 8))
        assert generate(clip, flows, cfg, Rng(3)) == generate(clip, flows, cfg, Rng(3))

    def test_tube_result_has_no_volume(self):
        """Should leave volume and base unset for tube masking."""
        result = generate_with_volume(noise_clip(4, 32, 32), None, MaskConfig(strategy="tube", ratio=0.5), Rng(0))
        assert result.volume is None
        assert result.base_index is None


class TestOverlay:
    """Tests for mask overlays."""

    def test_darkens_masked_tokens(self):
        """Should keep visible tokens and dim masked ones."""
        clip = VideoClip(np.full((2, 3, 16, 32), 1.0))
        mask = TokenMask(np.array([[[True, False]]]))
        images = render_overlays(clip, mask)
        assert len(images) == 2
        assert images[0].shape == (16, 32, 3)
        assert images[0][0, 0, 0] == 255
        assert images[0][0, 20, 0] == np.rint(MASKED_GAIN * 255.0)

    def test_grid_mismatch(self):
        """Should reject a mask for another clip size."""
        clip = VideoClip(np.zeros((2, 3, 16, 16)))
        with pytest.raises(ShapeMismatchError):
            render_overlays(clip, TokenMask(np.ones((1, 2, 2), dtype=bool)))

    def test_writes_ppm_files(self, tmp_path):
        """Should write one overlay per frame."""
        clip = VideoClip(np.full((2, 3, 16, 16), 0.5))
        paths = write_overlays(clip, TokenMask(np.ones((1, 1, 1), dtype=bool)), tmp_path)
        assert [p.name for p in paths] == ["overlay_0001.ppm", "overlay_0002.ppm"]

    def test_volume_frames_scaled_by_peak(self):
        """Should draw each frame's strongest score white."""
        data = np.zeros((2, 16, 16))
        data[0, 3, 4] = 0.2
        images = render_volume(MaskVolume(data, base_index=1))
        assert len(images) == 2
        assert images[0][3, 4, 0] == 255
        assert images[1].max() == 0

    def test_flow_zero_is_mid_gray(self):
        """Should map zero motion to 128 and saturate large motion."""
        u_image, v_image = render_flow(FlowField.constant(8, 8, 100.0, 0.0))
        assert u_image.shape == (8, 8, 3)
        assert u_image[0, 0, 0] == 255
        assert v_image[0, 0, 0] == 128

    def test_visualization_writes_every_rendering(self, tmp_path):
        """Should write overlays, volume, flows and reconstruction side by side."""
        clip = noise_clip(4, 32, 32)
        flows = translating_flows(4, 2, 32, 32, 2.0)
        result = generate_with_volume(clip, flows, MaskConfig(ratio=0.5, sigma=(8, 8)), Rng(0))
        paths = write_visualization(
            tmp_path, clip, result.mask, volume=result.volume, flows=result.flows, reconstruction=clip
        )
        names = {p.name for p in paths}
        assert {"overlay_0004.ppm", "volume_0004.ppm", "recon_0001.ppm"} <= names
        assert {"flow_u_0001.ppm", "flow_v_0003.ppm"} <= names
        assert "flow_u_0002.ppm" not in names
        assert all(p.exists() for p in paths)

    def test_visualization_rejects_mismatched_reconstruction(self, tmp_path):
        """Should refuse a reconstruction of another size."""
        clip = noise_clip(2, 16, 16)
        mask = TokenMask(np.ones((1, 1, 1), dtype=bool))
        with pytest.raises(ShapeMismatchError):
            write_visualization(tmp_path, clip, mask, reconstruction=noise_clip(2, 32, 32))
