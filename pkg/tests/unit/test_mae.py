"""Tests for the toy masked autoencoder."""

import numpy as np
import pytest

from src.core.rng import Rng
from src.domain.errors import (
    FormatError,
    InvalidInputError,
    NumericError,
    ShapeMismatchError,
    TrainingDivergedError,
)
from src.domain.models import CUBE_DIM, MaeConfig, TokenMask, VideoClip
from src.formats.checkpoint import MANIFEST, load_checkpoint, save_checkpoint
from src.mae.cubes import cubify, decubify, normalize_cubes, reconstruct_clip
from src.mae.gradcheck import gradient_check
from src.mae.model import (
    ToyMAE,
    backward,
    config_from_params,
    forward,
    init_params,
    load_model,
    parameter_shapes,
    sinusoidal_encoding,
)
from src.mae.reference import reference_loss
from src.mae.trainer import TrainingHistory, batch_indices, train


def tiny_config(**overrides) -> MaeConfig:
    values = dict(
        embed_dim=8,
        depth=1,
        heads=2,
        decoder_dim=8,
        decoder_depth=1,
        init_std=0.2,
        ratio=0.5,
        steps=5,
        batch_size=1,
        learning_rate=0.01,
    )
    values.update(overrides)
    return MaeConfig(**values)


def tiny_clip(seed: int = 0) -> VideoClip:
    """4 frames of 32x32: a 2x2x2 token grid, N = 8."""
    return VideoClip(Rng(seed).uniform((4, 3, 32, 32)))


def tiny_mask(seed: int = 0) -> TokenMask:
    visible = np.zeros(8, dtype=bool)
    visible[Rng(seed).uniform_indices(8, 3)] = True
    return TokenMask(visible.reshape(2, 2, 2))


class TestCubes:
    """Tests for cube partitioning."""

    def test_cube_count_and_width(self):
        """Should produce N x 1536 cubes."""
        cubes = cubify(tiny_clip())
        assert cubes.shape == (8, CUBE_DIM)

    def test_cube_layout(self):
        """Should order cubes by (slice, row, col) and values by (frame, channel, y, x)."""
        clip = tiny_clip()
        cubes = cubify(clip)
        # slice 1, row 0, col 1 -> index 5
        block = clip.frames[2:4, :, 0:16, 16:32]
        assert np.array_equal(cubes[5], block.reshape(-1))

    def test_decubify_inverts(self):
        """Should reassemble the original clip."""
        clip = tiny_clip()
        assert np.array_equal(decubify(cubify(clip), (4, 32, 32)).frames, clip.frames)

    def test_decubify_rejects_wrong_count(self):
        """Should check the cube count against the dims."""
        with pytest.raises(ShapeMismatchError):
            decubify(np.zeros((7, CUBE_DIM)), (4, 32, 32))

    def test_normalize_constant_cube_is_zero(self):
        """Should map a constant cube to zeros."""
        out = normalize_cubes(np.full((1, CUBE_DIM), 0.3), 1e-6)
        assert np.allclose(out, 0.0)

    def test_normalize_moments(self):
        """Should give each cube zero mean and near-unit variance."""
        out = normalize_cubes(cubify(tiny_clip()), 1e-6)
        assert np.allclose(out.mean(axis=1), 0.0, atol=1e-12)
        assert np.allclose(out.var(axis=1), 1.0, atol=1e-3)


    def test_reconstruct_keeps_visible_cubes(self):
        """Should copy visible cubes and fill masked ones from the predictions."""
        clip = tiny_clip()
        mask = tiny_mask()
        out = reconstruct_clip(clip, mask, np.zeros((8, CUBE_DIM)), 1e-6)
        original = cubify(clip)
        rebuilt = cubify(out)
        assert np.array_equal(rebuilt[mask.visible_indices], original[mask.visible_indices])
        # Zero predictions decode to each masked cube's own mean.
        means = original[mask.masked_indices].mean(axis=1)
        assert np.allclose(rebuilt[mask.masked_indices], means[:, None])

    def test_reconstruct_clips_to_unit_range(self):
        """Should clip decoded values into [0, 1]."""
        out = reconstruct_clip(tiny_clip(), tiny_mask(), np.full((8, CUBE_DIM), 50.0), 1e-6)
        assert out.frames.min() >= 0.0 and out.frames.max() <= 1.0

    def test_reconstruct_rejects_wrong_shape(self):
        """Should require one prediction per token."""
        with pytest.raises(ShapeMismatchError):
            reconstruct_clip(tiny_clip(), tiny_mask(), np.zeros((3, CUBE_DIM)), 1e-6)


class TestParameters:
    """Tests for parameter construction."""

    def test_shapes_cover_every_layer(self):
        """Should name every block parameter."""
        shapes = parameter_shapes(tiny_config())
        assert shapes["patch.weight"] == (CUBE_DIM, 8)
        assert shapes["head.weight"] == (8, CUBE_DIM)
        assert shapes["mask_token"] == (8,)
        assert "encoder.0.attn.query.weight" in shapes
        assert "decoder.0.mlp.fc1.weight" in shapes

    def test_init_is_deterministic(self):
        """Should draw identical parameters for the same seed."""
        a = init_params(tiny_config(), Rng(3))
        b = init_params(tiny_config(), Rng(3))
        assert all(np.array_equal(a[k], b[k]) for k in a)

    def test_gains_and_biases(self):
        """Should start gains at one and biases at zero."""
        params = init_params(tiny_config(), Rng(0))
        assert np.all(params["encoder_norm.gamma"] == 1.0)
        assert np.all(params["head.bias"] == 0.0)

    def test_rejects_wrong_shape(self):
        """Should validate supplied parameters."""
        params = init_params(tiny_config(), Rng(0))
        params["head.bias"] = np.zeros(3)
        with pytest.raises(ShapeMismatchError):
            ToyMAE(tiny_config(), params)

    def test_rejects_non_finite(self):
        """Should reject NaN parameters."""
        params = init_params(tiny_config(), Rng(0))
        params["mask_token"] = np.full(8, np.nan)
        with pytest.raises(NumericError):
            ToyMAE(tiny_config(), params)

    def test_sinusoidal_encoding(self):
        """Should interleave sin and cos of position / 10000^(i/d)."""
        table = sinusoidal_encoding(4, 8)
        assert table.shape == (4, 8)
        assert table[0, 0] == 0.0 and table[0, 1] == 1.0
        assert table[3, 2] == pytest.approx(np.sin(3 / 10000 ** (2 / 8)))


class TestForward:
    """Tests for the forward pass."""

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_reference(self, seed):
        """Should agree with the straight-line implementation."""
        config = tiny_config(seed=seed)
        model = ToyMAE(config)
        clip, mask = tiny_clip(seed), tiny_mask(seed)
        loss = forward(model, clip, mask).loss
        expected = reference_loss(model.params, config, clip, mask)
        assert loss == pytest.approx(expected, rel=1e-10)

    def test_visible_order_does_not_matter(self):
        """Should give the same loss for any encoder input order."""
        config = tiny_config()
        model = ToyMAE(config)
        clip, mask = tiny_clip(), tiny_mask()
        loss = model.forward(clip, mask).loss
        for order in ([2, 0, 1], [1, 2, 0]):
            permuted = reference_loss(model.params, config, clip, mask, visible_order=order)
            assert permuted == pytest.approx(loss, rel=1e-10)

    def test_zero_head_on_constant_cubes(self):
        """Should reach zero loss when targets and predictions are both zero."""
        config = tiny_config()
        params = init_params(config, Rng(0))
        params["head.weight"] = np.zeros_like(params["head.weight"])
        params["head.bias"] = np.zeros_like(params["head.bias"])
        model = ToyMAE(config, params)
        clip = VideoClip(np.full((4, 3, 32, 32), 0.5))
        loss, grads = model.loss_and_gradients(clip, tiny_mask())
        assert loss == 0.0
        assert all(np.all(g == 0.0) for g in grads.values())

    def test_reconstruction_covers_every_token(self):
        """Should return a prediction for every cube position."""
        output = ToyMAE(tiny_config()).forward(tiny_clip(), tiny_mask())
        assert output.reconstruction.shape == (8, CUBE_DIM)
        assert np.all(np.isfinite(output.reconstruction))

    def test_rejects_all_visible(self):
        """Should need at least one masked token."""
        with pytest.raises(InvalidInputError):
            ToyMAE(tiny_config()).forward(tiny_clip(), TokenMask(np.ones((2, 2, 2), dtype=bool)))

    def test_rejects_grid_mismatch(self):
        """Should check the mask grid against the clip."""
        with pytest.raises(ShapeMismatchError):
            ToyMAE(tiny_config()).forward(tiny_clip(), TokenMask(np.ones((1, 2, 2), dtype=bool)))

    def test_backward_before_forward(self):
        """Should refuse to backpropagate without a cached forward."""
        with pytest.raises(RuntimeError):
            ToyMAE(tiny_config()).backward()


class TestGradients:
    """Tests for analytic gradients."""

    def test_matches_finite_differences(self):
        """Should agree with central differences for every parameter."""
        model = ToyMAE(tiny_config(seed=1))
        errors = gradient_check(model, tiny_clip(1), tiny_mask(1), step=1e-5, max_entries=16)
        assert set(errors) == set(model.params)
        worst = max(errors, key=errors.get)
        assert errors[worst] < 1e-4, f"{worst}: {errors[worst]}"

    def test_gradient_names_and_shapes(self):
        """Should return one gradient per parameter with its shape."""
        model = ToyMAE(tiny_config())
        grads = backward(model, tiny_clip(), tiny_mask())
        for name, value in model.params.items():
            assert grads[name].shape == value.shape

    def test_flags_a_wrong_gradient(self):
        """Should score each entry against its own magnitude."""

        class SkewedMAE(ToyMAE):
            def loss_and_gradients(self, clip, mask):
                loss, grads = super().loss_and_gradients(clip, mask)
                grads["patch.bias"] = grads["patch.bias"] * 1.5
                return loss, grads

        model = SkewedMAE(tiny_config(seed=1))
        errors = gradient_check(model, tiny_clip(1), tiny_mask(1), max_entries=4)
        assert errors["patch.bias"] > 0.1
        assert errors["head.bias"] < 1e-4

    def test_check_restores_parameters(self):
        """Should leave the parameters as it found them."""
        model = ToyMAE(tiny_config())
        before = {k: v.copy() for k, v in model.params.items()}
        gradient_check(model, tiny_clip(), tiny_mask(), max_entries=2)
        assert all(np.array_equal(before[k], model.params[k]) for k in before)


class TestTrainer:
    """Tests for the SGD loop."""

    def test_batch_indices_cycle(self):
        """Should walk the dataset in order and wrap around."""
        assert batch_indices(0, 2, 3) == [0, 1]
        assert batch_indices(1, 2, 3) == [2, 0]

    def test_records_one_loss_per_step(self):
        """Should log the mean batch loss for every step."""
        model = ToyMAE(tiny_config())
        history = train(model, [tiny_clip(0), tiny_clip(1)], lambda i, s: tiny_mask(s), steps=4, batch_size=2)
        assert len(history.losses) == 4
        assert all(np.isfinite(history.losses))

    def test_loss_decreases_on_fixed_mask(self):
        """Should fit a single clip with a fixed mask."""
        model = ToyMAE(tiny_config(learning_rate=0.05))
        history = train(model, [tiny_clip()], lambda i, s: tiny_mask(), steps=30)
        assert history.losses[-1] < history.losses[0]

    def test_divergence_is_reported(self):
        """Should raise TrainingDivergedError with the last finite step."""
        model = ToyMAE(tiny_config(learning_rate=1e200))
        with pytest.raises(TrainingDivergedError) as exc:
            train(model, [tiny_clip()], lambda i, s: tiny_mask(), steps=5)
        assert exc.value.step >= 1
        assert str(exc.value.step - 1) in str(exc.value)

    def test_needs_clips(self):
        """Should reject an empty dataset."""
        with pytest.raises(InvalidInputError):
            train(ToyMAE(tiny_config()), [], lambda i, s: tiny_mask())

    def test_history_tail_mean(self):
        """Should average the final fraction of losses."""
        history = TrainingHistory([5.0, 4.0, 3.0, 2.0, 1.0])
        assert history.tail_mean(0.4) == 1.5
        assert history.final_loss == 1.0
        with pytest.raises(InvalidInputError):
            TrainingHistory().tail_mean()


class TestCheckpoint:
    """Tests for parameter checkpoints."""

    def test_save_and_load(self, tmp_path):
        """Should restore every parameter at 32-bit precision."""
        model = ToyMAE(tiny_config())
        save_checkpoint(model.params, tmp_path)
        loaded = load_checkpoint(tmp_path)
        assert set(loaded) == set(model.params)
        for name, value in model.params.items():
            assert np.allclose(loaded[name], value, rtol=1e-6, atol=1e-7)
        ToyMAE(tiny_config(), loaded)

    def test_manifest_lines(self, tmp_path):
        """Should list name, dims and file per parameter."""
        save_checkpoint({"w": np.zeros((2, 3))}, tmp_path)
        assert (tmp_path / MANIFEST).read_text() == "w\t2,3\tw.vten\n"

    def test_dims_mismatch(self, tmp_path):
        """Should reject a manifest that disagrees with the file."""
        save_checkpoint({"w": np.zeros((2, 3))}, tmp_path)
        (tmp_path / MANIFEST).write_text("w\t3,2\tw.vten\n")
        with pytest.raises(FormatError):
            load_checkpoint(tmp_path)

    def test_malformed_manifest(self, tmp_path):
        """Should reject lines without three fields."""
        save_checkpoint({"w": np.zeros(2)}, tmp_path)
        (tmp_path / MANIFEST).write_text("w\t2\n")
        with pytest.raises(FormatError):
            load_checkpoint(tmp_path)

    def test_config_from_params(self):
        """Should read widths and depths off the parameter shapes."""
        config = tiny_config(embed_dim=16, depth=2, decoder_dim=8, decoder_depth=1)
        params = init_params(config, Rng(0))
        read = config_from_params(params, MaeConfig(heads=2))
        assert (read.embed_dim, read.depth, read.decoder_dim, read.decoder_depth) == (16, 2, 8, 1)
        assert read.mlp_ratio == config.mlp_ratio
        assert read.heads == 2

    def test_config_from_params_needs_core_layers(self):
        """Should reject parameter sets without the embedding and bridge."""
        with pytest.raises(InvalidInputError):
            config_from_params({"w": np.zeros(2)}, MaeConfig())

    def test_load_model_round_trip(self, tmp_path):
        """Should rebuild a model that scores a clip like the one saved."""
        model = ToyMAE(tiny_config(seed=4))
        save_checkpoint(model.params, tmp_path)
        loaded = load_model(tmp_path, MaeConfig(heads=2))
        assert loaded.config.embed_dim == 8
        expected = model.forward(tiny_clip(), tiny_mask()).loss
        assert loaded.forward(tiny_clip(), tiny_mask()).loss == pytest.approx(expected, rel=1e-4)
