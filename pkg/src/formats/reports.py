"""JSON report documents and CSV tables."""

import csv
import json
from pathlib import Path
from typing import Optional, Sequence, Union

from pydantic import BaseModel, Field

from src.domain.models import LeakageReport, SceneSpec


PathLike = Union[str, Path]


class SceneSpecDocument(BaseModel):
    """Scene configuration echoed into a report."""

    pattern: str
    velocity: tuple[int, int]
    texture_seed: int
    frames: int
    height: int
    width: int
    background: str
    object_size: int


class StrategySummaryDocument(BaseModel):
    """One strategy's leakage and loss statistics over all seeds."""

    strategy: str
    median_rate: float = Field(ge=0.0, le=1.0)
    iqr: float = Field(ge=0.0, le=1.0)
    n_seeds: int = Field(ge=1)
    masked_count: int = Field(ge=0)
    rates: list[float] = Field(default_factory=list)
    median_loss: Optional[float] = None
    loss_iqr: Optional[float] = None


class LeakageReportDocument(BaseModel):
    """Leakage benchmark result for one scene spec."""

    spec: SceneSpecDocument
    strategies: list[StrategySummaryDocument]


def spec_to_document(spec: SceneSpec) -> SceneSpecDocument:
    return SceneSpecDocument(
        pattern=spec.pattern.value,
        velocity=spec.velocity,
        texture_seed=spec.texture_seed,
        frames=spec.frames,
        height=spec.height,
        width=spec.width,
        background=spec.background.value,
        object_size=spec.object_size,
    )


def report_to_document(report: LeakageReport) -> LeakageReportDocument:
    """Convert a LeakageReport into its JSON document model."""
    return LeakageReportDocument(
        spec=spec_to_document(report.spec),
        strategies=[
            StrategySummaryDocument(
                strategy=s.strategy,
                median_rate=s.median_rate,
                iqr=s.iqr,
                n_seeds=s.n_seeds,
                masked_count=s.masked_count,
                rates=list(s.rates),
                median_loss=s.median_loss,
                loss_iqr=s.loss_iqr,
            )
            for s in report.summaries
        ],
    )


def report_schema() -> dict:
    """JSON schema of a single report document."""
    return LeakageReportDocument.model_json_schema()


def write_report_json(reports: Sequence[LeakageReport], path: PathLike) -> None:
    """Write a JSON array of report documents."""
    documents = [report_to_document(r).model_dump(mode="json") for r in reports]
    Path(path).write_text(json.dumps(documents, indent=2) + "\n")


def write_loss_csv(losses: Sequence[float], path: PathLike) -> None:
    """``step,loss`` rows with round-trippable float formatting."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["step", "loss"])
        for step, loss in enumerate(losses):
            writer.writerow([step, repr(float(loss))])


def write_runs_csv(reports: Sequence[LeakageReport], path: PathLike) -> None:
    """One row per (scene, strategy, seed) run."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["pattern", "speed", "strategy", "seed", "leakage_rate", "final_loss"])
        for report in reports:
            for run in report.runs:
                writer.writerow(
                    [
                        report.spec.pattern.value,
                        repr(report.spec.speed),
                        run.strategy,
                        run.seed,
                        repr(run.leakage.rate),
                        "" if run.final_loss is None else repr(run.final_loss),
                    ]
                )
