"""CLI commands for flow estimation, masking, toy pre-training and benchmarking."""

from functools import wraps
from pathlib import Path
from typing import Optional
import json
import logging
import sys

import click

from src.container import get_container
from src.domain.errors import InvalidInputError, MgmaskError
from src.domain.models import VideoClip


IO_EXIT_CODE = 2


def setup_container(jobs: Optional[int] = None) -> None:
    """Set up container with default configuration."""
    from src.flow.sources import EstimatorFlowSource

    container = get_container()
    settings = container.settings
    container.configure_jobs(jobs if jobs is not None else settings.jobs)
    container.configure_estimator(lambda: EstimatorFlowSource(settings.flow.to_config()))


def usage_exit_code(error: click.UsageError) -> int:
    """Exit code for a command line click rejected before any command ran."""
    if (
        isinstance(error, click.BadParameter)
        and not isinstance(error, click.MissingParameter)
        and error.param is not None
        and isinstance(error.param.type, click.Path)
    ):
        # Paths that fail their existence checks are I/O failures.
        return IO_EXIT_CODE
    return InvalidInputError.exit_code


class MgmaskGroup(click.Group):
    """Click group whose usage errors exit with the invalid-input code."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        if not standalone_mode:
            return super().main(args, prog_name, complete_var, standalone_mode, **extra)
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.UsageError as e:
            e.show()
            sys.exit(usage_exit_code(e))
        except click.ClickException as e:
            e.show()
            sys.exit(e.exit_code)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(1)
        sys.exit(rv if isinstance(rv, int) else 0)


def exit_on_error(func):
    """Report library errors on stderr and exit with their code."""

    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except MgmaskError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(e.exit_code)
        except OSError as e:
            click.echo(f"Error: {e}", err=True)
            sys.exit(IO_EXIT_CODE)

    return wrapper


def load_clip(path: Path) -> VideoClip:
    """Read a clip from a VTEN file or a directory of PPM frames."""
    from src.formats.ppm import read_frame_dir
    from src.formats.vten import read_vten

    if path.is_dir():
        return read_frame_dir(path)
    if path.suffix.lower() == ".vten":
        return VideoClip.from_tensor(read_vten(path))
    raise InvalidInputError(f"Unsupported clip input {path}: expected a .vten file or a frame directory")


def mask_options(func):
    """Flags shared by every command that builds a MaskConfig."""
    options = [
        click.option("--strategy", type=click.Choice(["motion_guided", "tube", "random"]), default=None),
        click.option("--ratio", type=float, default=None, help="Masking ratio in (0, 1)"),
        click.option("--base-frame", type=click.Choice(["first", "middle", "random"]), default=None),
        click.option("--init", "init_mode", type=click.Choice(["gmm", "token_random", "pixel_random"]), default=None),
        click.option("--sigma", type=float, default=None, help="Gaussian std in pixels (both axes)"),
        click.option("--warp", type=click.Choice(["backward", "forward"]), default=None),
        click.option(
            "--fill",
            type=click.Choice(["tube", "random", "visible", "invisible", "previous_map"]),
            default=None,
        ),
        click.option("--sample", type=click.Choice(["frame_level", "clip_level"]), default=None),
        click.option("--noise-std", type=float, default=None, help="Noise added to one frame's map"),
        click.option("--seed", type=int, default=None, help="Seed (falls back to MGMASK_SEED)"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def build_mask_config(**flags):
    """MaskConfig from flags over environment over defaults."""
    settings = get_container().settings
    sigma = flags.pop("sigma", None)
    seed = settings.resolve_seed(flags.pop("seed", None))
    return settings.mask.to_config(
        seed=seed,
        strategy=flags.get("strategy"),
        ratio=flags.get("ratio"),
        base_frame=flags.get("base_frame"),
        init=flags.get("init_mode"),
        sigma=(sigma, sigma) if sigma is not None else None,
        warp=flags.get("warp"),
        fill=flags.get("fill"),
        sample=flags.get("sample"),
        noise_std=flags.get("noise_std"),
    )


def estimator_source(levels, iterations, alpha, warps):
    """Horn-Schunck flow source from flags over settings."""
    from dataclasses import replace

    from src.flow.sources import EstimatorFlowSource

    container = get_container()
    overrides = {"levels": levels, "iterations": iterations, "alpha": alpha, "warps": warps}
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if not overrides:
        return container.estimator
    return EstimatorFlowSource(replace(container.settings.flow.to_config(), **overrides))


@click.group(cls=MgmaskGroup)
@click.version_option(version="0.1.0")
@click.option("--log-level", default=None, help="Logging level (default: MGMASK_LOG_LEVEL or WARNING)")
@click.option("--jobs", type=int, default=None, help="Worker count (default: MGMASK_JOBS or 1)")
def cli(log_level: Optional[str], jobs: Optional[int]):
    """Motion guided masking for video masked autoencoding."""
    setup_container(jobs)
    level = (log_level or get_container().settings.log_level).upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


@cli.command("synth")
@click.option(
    "--pattern",
    type=click.Choice(["translating_texture", "translating_square", "two_objects", "static"]),
    default="translating_texture",
)
@click.option("--vx", type=int, default=4, help="Horizontal velocity (px/frame)")
@click.option("--vy", type=int, default=0, help="Vertical velocity (px/frame)")
@click.option("--frames", type=int, default=16)
@click.option("--height", type=int, default=128)
@click.option("--width", type=int, default=128)
@click.option("--object-size", type=int, default=24)
@click.option("--background", type=click.Choice(["constant", "noise"]), default="constant")
@click.option("--texture-seed", type=int, default=None, help="Texture seed (falls back to MGMASK_SEED)")
@click.option("--base-index", type=int, default=None, help="1-based base frame of the exported flows")
@click.option("--frames-dir", is_flag=True, help="Also write the frames as PPM files")
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), required=True)
@exit_on_error
def synth(pattern, vx, vy, frames, height, width, object_size, background, texture_seed, base_index, frames_dir, out_dir):
    """Export a synthetic scene: clip.vten plus ground-truth flows."""
    from src.domain.models import ScenePattern, SceneSpec
    from src.flow.horn_schunck import capture_range
    from src.formats.ppm import write_frame_dir
    from src.synth.scenes import export_scene, generate_scene

    seed = get_container().settings.resolve_seed(texture_seed)
    spec = SceneSpec(
        pattern=pattern,
        velocity=(vx, vy),
        texture_seed=seed,
        frames=frames,
        height=height,
        width=width,
        background=background,
        object_size=object_size,
    )
    clip, flows = generate_scene(spec, base_index=base_index)
    export_scene(clip, flows, out_dir)
    reach = capture_range(height, width)
    if spec.pattern is not ScenePattern.STATIC and max(abs(vx), abs(vy)) > reach:
        click.echo(
            f"Warning: {max(abs(vx), abs(vy))} px/frame exceeds the {reach:g} px the estimator recovers "
            f"on {height}x{width}; use ground-truth flows or a larger canvas",
            err=True,
        )
    if frames_dir:
        write_frame_dir(clip, out_dir / "frames")
    click.echo(f"Wrote {spec.pattern.value} scene ({frames}x{height}x{width}) to {out_dir}")


@cli.command("flow")
@click.argument("clip_path", type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), required=True)
@click.option("--method", type=click.Choice(["estimate", "load"]), default="estimate")
@click.option("--flow-dir", type=click.Path(path_type=Path), default=None, help="Precomputed .flo files for --method load")
@click.option("--base-frame", type=click.Choice(["first", "middle", "random"]), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--levels", type=int, default=None)
@click.option("--iterations", type=int, default=None)
@click.option("--alpha", type=float, default=None)
@click.option("--warps", type=int, default=None)
@exit_on_error
def flow(clip_path, out_dir, method, flow_dir, base_frame, seed, levels, iterations, alpha, warps):
    """Compute (or validate) the flow set around the base frame."""
    from src.flow.flow_set import build_flow_set, write_flow_set
    from src.masking.strategies import resolve_base_frame
    from src.services.mask_service import MaskService

    container = get_container()
    clip = load_clip(clip_path)
    cfg = build_mask_config(base_frame=base_frame, seed=seed)
    base = resolve_base_frame(clip.num_frames, cfg, MaskService.clip_rng(cfg))

    if method == "load":
        if flow_dir is None:
            raise InvalidInputError("--method load needs --flow-dir")
        source = container.flow_source_for(flow_dir)
    else:
        source = estimator_source(levels, iterations, alpha, warps)

    flows = build_flow_set(clip, base, source, container.jobs)
    write_flow_set(flows, out_dir)
    for source_frame, target_frame in flows.pairs():
        magnitude = flows.field_for(source_frame).mean_magnitude()
        click.echo(f"flow_{source_frame}_{target_frame}: mean |flow| {magnitude:.4f}")


@cli.command("mask")
@click.argument("clip_path", type=click.Path(exists=True, path_type=Path))
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path), required=True)
@click.option("--flow-dir", type=click.Path(exists=True, file_okay=False, path_type=Path), default=None)
@click.option("--estimate", is_flag=True, help="Estimate flows when no --flow-dir is given")
@click.option("--volume", "volume_path", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--render", "render_dir", type=click.Path(file_okay=False, path_type=Path), default=None)
@click.option(
    "--checkpoint",
    "checkpoint_dir",
    type=click.Path(exists=True, file_okay=False, path_type=Path),
    default=None,
    help="Toy MAE checkpoint whose reconstruction is added to --render",
)
@click.option("--heads", type=int, default=None, help="Attention heads of the checkpoint (default: MGMASK_MAE_HEADS)")
@mask_options
@exit_on_error
def mask(clip_path, out_path, flow_dir, estimate, volume_path, render_dir, checkpoint_dir, heads, **flags):
    """Generate a token mask (VTEN), optionally with its volume and renderings."""
    from src.domain.models import MaskStrategy
    from src.formats.vten import write_vten
    from src.mae.cubes import reconstruct_clip
    from src.mae.model import load_model
    from src.masking.overlay import write_visualization

    container = get_container()
    clip = load_clip(clip_path)
    cfg = build_mask_config(**flags)
    if checkpoint_dir is not None and render_dir is None:
        raise InvalidInputError("--checkpoint needs --render")

    source = container.flow_source_for(flow_dir, estimate)

    result = container.mask_service.generate_result(clip, cfg, flow_source=source)
    write_vten(result.mask.to_tensor(), out_path)
    if volume_path is not None:
        if result.volume is None:
            raise InvalidInputError(f"--volume needs motion_guided masking, not {cfg.strategy.value}")
        write_vten(result.volume.to_tensor(), volume_path)
    if render_dir is not None:
        reconstruction = None
        if checkpoint_dir is not None:
            base = container.settings.mae.to_config(seed=cfg.seed, ratio=cfg.ratio, heads=heads)
            model = load_model(checkpoint_dir, base)
            output = model.forward(clip, result.mask)
            reconstruction = reconstruct_clip(clip, result.mask, output.reconstruction, model.config.norm_eps)
            click.echo(f"Reconstruction loss on masked cubes: {output.loss:.6f}")
        write_visualization(
            render_dir,
            clip,
            result.mask,
            volume=result.volume,
            flows=result.flows,
            reconstruction=reconstruction,
        )

    counts = ",".join(str(c) for c in result.mask.per_slice_counts())
    click.echo(
        f"{cfg.strategy.value}: {result.mask.num_visible}/{result.mask.num_tokens} visible "
        f"(per slice: {counts})"
    )
    if cfg.strategy is MaskStrategy.MOTION_GUIDED:
        click.echo(f"Base frame: {result.base_index}")


@cli.command("pretrain")
@click.option("--data", "data_dir", type=click.Path(exists=True, file_okay=False, path_type=Path), required=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), required=True)
@click.option("--loss-csv", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--estimate", is_flag=True, help="Estimate flows for clips without a flows/ directory")
@click.option("--steps", type=int, default=None)
@click.option("--lr", "learning_rate", type=float, default=None)
@click.option("--batch-size", type=int, default=None)
@click.option("--embed-dim", type=int, default=None)
@click.option("--depth", type=int, default=None)
@click.option("--heads", type=int, default=None)
@click.option("--decoder-dim", type=int, default=None)
@click.option("--decoder-depth", type=int, default=None)
@mask_options
@exit_on_error
def pretrain(data_dir, out_dir, loss_csv, estimate, steps, learning_rate, batch_size,
             embed_dim, depth, heads, decoder_dim, decoder_depth, **flags):
    """Train the toy MAE on every .vten clip under --data."""
    from src.formats.checkpoint import save_checkpoint
    from src.formats.reports import write_loss_csv

    container = get_container()
    cfg = build_mask_config(**flags)
    mae_cfg = container.settings.mae.to_config(
        seed=cfg.seed,
        ratio=cfg.ratio,
        steps=steps,
        learning_rate=learning_rate,
        batch_size=batch_size,
        embed_dim=embed_dim,
        depth=depth,
        heads=heads,
        decoder_dim=decoder_dim,
        decoder_depth=decoder_depth,
    )

    paths = sorted(data_dir.rglob("*.vten"))
    if not paths:
        raise InvalidInputError(f"No .vten clips found under {data_dir}")
    clips = [load_clip(p) for p in paths]
    sources = []
    for path in paths:
        flows_dir = path.parent / "flows"
        sources.append(container.flow_source_for(flows_dir if flows_dir.is_dir() else None, estimate))

    result = container.pretrain_service.pretrain(clips, cfg, mae_cfg, flow_sources=sources)
    save_checkpoint(result.model.params, out_dir)
    write_loss_csv(result.history.losses, loss_csv or out_dir / "loss.csv")
    final = result.history.final_loss
    click.echo(f"Trained {len(result.history.losses)} steps on {len(clips)} clips; final loss {final}")


@cli.command("bench")
@click.option(
    "--pattern",
    "patterns",
    multiple=True,
    type=click.Choice(["translating_texture", "translating_square", "two_objects", "static"]),
)
@click.option("--speed", "speeds", multiple=True, type=int, help="Horizontal speed in px/frame")
@click.option("--seeds", type=int, default=None, help="Number of seeds (0..N-1)")
@click.option("--strategies", default=None, help="Comma-separated strategies")
@click.option("--train-steps", type=int, default=0, help="Toy MAE steps per run (0 = leakage only)")
@click.option("--horizon", type=int, default=None)
@click.option("--margin", type=int, default=None)
@click.option("--jobs", type=int, default=None, help="Worker processes")
@click.option("--out", "out_path", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False, path_type=Path), default=None)
@click.option("--schema", is_flag=True, help="Print the report JSON schema and exit")
@mask_options
@exit_on_error
def bench(patterns, speeds, seeds, strategies, train_steps, horizon, margin, jobs, out_path, csv_path, schema, **flags):
    """Compare leakage of masking strategies on synthetic scenes."""
    from src.domain.models import ScenePattern
    from src.formats.reports import report_schema, write_report_json, write_runs_csv
    from src.services.bench_service import BenchService, default_suite, strategy_configs

    if schema:
        click.echo(json.dumps(report_schema(), indent=2))
        return

    container = get_container()
    settings = container.settings.bench
    flags.pop("strategy", None)
    base_cfg = build_mask_config(**flags)
    names = (
        [s.strip() for s in strategies.split(",") if s.strip()]
        if strategies
        else settings.get_strategies()
    )
    configs = strategy_configs(base_cfg, names)
    specs = default_suite(
        speeds=list(speeds) or settings.get_speeds(),
        patterns=[ScenePattern(p) for p in patterns] or settings.get_patterns(),
        frames=settings.frames,
        height=settings.height,
        width=settings.width,
        object_size=settings.object_size,
        texture_seed=base_cfg.seed,
    )
    service = BenchService(jobs=jobs) if jobs is not None else container.bench_service
    mae_cfg = container.settings.mae.to_config(seed=base_cfg.seed, ratio=base_cfg.ratio) if train_steps else None
    reports = service.run_suite(
        specs,
        configs,
        list(range(seeds if seeds is not None else settings.seeds)),
        horizon=horizon if horizon is not None else settings.horizon,
        margin=margin if margin is not None else settings.margin,
        train_steps=train_steps,
        mae_config=mae_cfg,
    )

    for report in reports:
        click.echo(f"{report.spec.pattern.value} @ {report.spec.speed:g} px/frame")
        for s in report.summaries:
            loss = f"  loss {s.median_loss:.6f}" if s.median_loss is not None else ""
            click.echo(f"  {s.strategy:<14} median {s.median_rate:.4f}  IQR {s.iqr:.4f}{loss}")
    if out_path is not None:
        write_report_json(reports, out_path)
    if csv_path is not None:
        write_runs_csv(reports, csv_path)


def main():
    """Entry point for CLI."""
    cli()


if __name__ == "__main__":
    main()
