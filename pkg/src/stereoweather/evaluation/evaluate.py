"""Dataset-level evaluation and subset aggregation (zero-shot harness)."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from ..core.manifest import load_sample
from ..core.pfm import read_pfm
from ..core.types import DatasetManifest, StereoSample
from ..errors import EvaluationError
from .metrics import d1, epe

PredictionSource = (
    "Path | Mapping[str, np.ndarray] | Callable[[StereoSample], np.ndarray]"
)


@dataclass(frozen=True)
class MetricRecord:
    id: str
    subset: str
    epe: float
    d1: float
    valid_count: int

    def __post_init__(self) -> None:
        if self.valid_count < 1:
            raise ValueError("included frames must have at least one valid pixel")
        if not (np.isfinite(self.epe) and np.isfinite(self.d1)):
            raise ValueError("metrics must be finite")


@dataclass(frozen=True)
class EvaluationResult:
    records: tuple[MetricRecord, ...]
    failures: tuple[dict, ...] = ()


def _resolve_prediction(source, entry, sample: StereoSample) -> np.ndarray:
    if isinstance(source, (str, Path)):
        path = Path(source) / f"{entry.id}.pfm"
        if not path.exists():
            raise FileNotFoundError(f"no prediction file {path}")
        return read_pfm(path).data
    if isinstance(source, Mapping):
        if entry.id not in source:
            raise KeyError(f"no prediction for id {entry.id!r}")
        return np.asarray(source[entry.id], dtype=np.float32)
    return np.asarray(source(sample), dtype=np.float32)


def evaluate(
    source,
    manifest: DatasetManifest,
    d1_mode: str = "and",
) -> EvaluationResult:
    """One MetricRecord per frame, ordered by id.

    ``source`` is a prediction directory of ``<id>.pfm`` files, a mapping
    id -> disparity array, or a callable running a model on each sample.
    Frames with a missing prediction or an empty valid mask are reported in
    ``failures`` and excluded from the records.
    """
    records: list[MetricRecord] = []
    failures: list[dict] = []
    for entry in sorted(manifest, key=lambda e: e.id):
        sample = load_sample(entry)
        try:
            pred = _resolve_prediction(source, entry, sample)
            if pred.shape != sample.disparity.shape:
                raise EvaluationError(
                    f"prediction shape {pred.shape} != gt shape {sample.disparity.shape}"
                )
            frame_epe = epe(pred, sample.disparity, sample.valid_mask)
            frame_d1 = d1(pred, sample.disparity, sample.valid_mask, mode=d1_mode)
        except (FileNotFoundError, KeyError, EvaluationError) as exc:
            failures.append({"id": entry.id, "reason": f"{type(exc).__name__}: {exc}"})
            continue
        records.append(
            MetricRecord(
                id=entry.id,
                subset=entry.subset_label,
                epe=frame_epe,
                d1=frame_d1,
                valid_count=int(sample.valid_mask.sum()),
            )
        )
    return EvaluationResult(records=tuple(records), failures=tuple(failures))


@dataclass(frozen=True)
class SubsetReport:
    """Pixel-weighted (or frame-weighted) per-subset aggregates plus overall."""

    subsets: dict[str, dict] = field(default_factory=dict)
    overall: dict = field(default_factory=dict)
    frame_weighted: bool = False

    def to_dict(self) -> dict:
        return {
            "subsets": self.subsets,
            "overall": self.overall,
            "frame_weighted": self.frame_weighted,
        }

    def to_text(self) -> str:
        names = sorted(self.subsets) + ["Overall"]
        rows = {
            "EPE": [self.subsets[s]["epe"] for s in sorted(self.subsets)] + [self.overall["epe"]],
            "D1": [self.subsets[s]["d1"] for s in sorted(self.subsets)] + [self.overall["d1"]],
        }
        width = max(9, *(len(n) + 2 for n in names))
        lines = ["".join(["metric".ljust(8)] + [n.rjust(width) for n in names])]
        for metric, values in rows.items():
            lines.append(
                "".join([metric.ljust(8)] + [f"{v:.3f}".rjust(width) for v in values])
            )
        return "\n".join(lines)


def _weighted(records: Sequence[MetricRecord], frame_weighted: bool) -> dict:
    if frame_weighted:
        weights = np.ones(len(records), dtype=np.float64)
    else:
        weights = np.array([r.valid_count for r in records], dtype=np.float64)
    total = weights.sum()
    return {
        "epe": float(np.dot(weights, [r.epe for r in records]) / total),
        "d1": float(np.dot(weights, [r.d1 for r in records]) / total),
        "valid_count": int(sum(r.valid_count for r in records)),
        "frames": len(records),
    }


def aggregate(records: Sequence[MetricRecord], frame_weighted: bool = False) -> SubsetReport:
    """Aggregate per-frame records into per-subset and overall rows.

    Pixel weighting makes the overall row equal the metrics of all valid
    pixels pooled together (up to float rounding).
    """
    if not records:
        raise EvaluationError("cannot aggregate zero records")
    by_subset: dict[str, list[MetricRecord]] = {}
    for rec in records:
        by_subset.setdefault(rec.subset, []).append(rec)
    subsets = {name: _weighted(recs, frame_weighted) for name, recs in by_subset.items()}
    overall = _weighted(list(records), frame_weighted)
    return SubsetReport(subsets=subsets, overall=overall, frame_weighted=frame_weighted)
