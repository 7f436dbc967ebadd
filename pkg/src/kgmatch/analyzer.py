"""Phase 3 (integrate) numerics over model prediction logs.

Accuracy, CS-X coverage tables, the distribution-change statistic
(delta p: how much probability the knowledge-surrounded model gained on
its own selected answer relative to the baseline), and learning-curve
metrics (max and WS) for probe fine-tuning.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

PROB_SUM_TOL = 1e-6

CHANGE_KINDS = ("became_correct", "became_incorrect",
                "unchanged_correct", "unchanged_incorrect")


class LogError(ValueError):
    pass


@dataclass(frozen=True)
class PredictionRecord:
    instance_id: str
    model_tag: str
    probabilities: tuple[float, ...]
    predicted_index: int

    def __post_init__(self):
        probs = self.probabilities
        if len(probs) not in (2, 3):
            raise LogError(f"{self.instance_id}: expected 2 or 3 probabilities")
        if any(p < 0 for p in probs):
            raise LogError(f"{self.instance_id}: negative probability")
        if abs(sum(probs) - 1.0) > PROB_SUM_TOL:
            raise LogError(f"{self.instance_id}: probabilities sum to {sum(probs)}")
        argmax = max(range(len(probs)), key=lambda i: (probs[i], -i))
        if self.predicted_index != argmax:
            raise LogError(f"{self.instance_id}: predicted_index is not the argmax")


@dataclass(frozen=True)
class DistributionDelta:
    instance_id: str
    delta: float
    change_kind: str


@dataclass(frozen=True)
class LearningCurve:
    points: tuple[tuple[float, float], ...]  # (train fraction or step, accuracy)

    def __post_init__(self):
        if not self.points:
            raise ValueError("a learning curve needs at least one point")


def load_prediction_log(path: str | Path) -> list[PredictionRecord]:
    records = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            records.append(PredictionRecord(
                instance_id=str(rec["instance_id"]),
                model_tag=rec.get("model_tag", ""),
                probabilities=tuple(float(p) for p in rec["probabilities"]),
                predicted_index=int(rec["predicted_index"]),
            ))
    return records


def accuracy(log: list[PredictionRecord], gold: dict[str, int]) -> float:
    """Fraction of records whose prediction equals the gold index."""
    if not log:
        return 0.0
    correct = 0
    for rec in log:
        if rec.instance_id not in gold:
            raise LogError(f"no gold answer for {rec.instance_id}")
        correct += rec.predicted_index == gold[rec.instance_id]
    return correct / len(log)


def delta_analysis(
    base_log: list[PredictionRecord],
    ks_log: list[PredictionRecord],
    gold: dict[str, int],
) -> tuple[list[DistributionDelta], dict[str, float | None]]:
    """Per-record delta p plus mean delta per change kind.

    delta = p_ks(selected) - p_base(selected), where "selected" is the KS
    model's predicted index.  A record's kind is became_correct /
    became_incorrect when the prediction changed, unchanged_* otherwise.
    Means are None for kinds with no records.
    """
    base_by_id = {r.instance_id: r for r in base_log}
    ks_by_id = {r.instance_id: r for r in ks_log}
    if set(base_by_id) != set(ks_by_id):
        raise LogError("baseline and KS logs cover different instance id sets")

    deltas = []
    for rec in ks_log:
        base = base_by_id[rec.instance_id]
        if rec.instance_id not in gold:
            raise LogError(f"no gold answer for {rec.instance_id}")
        sel = rec.predicted_index
        delta = rec.probabilities[sel] - base.probabilities[sel]
        correct = sel == gold[rec.instance_id]
        if sel != base.predicted_index:
            kind = "became_correct" if correct else "became_incorrect"
        else:
            kind = "unchanged_correct" if correct else "unchanged_incorrect"
        deltas.append(DistributionDelta(rec.instance_id, delta, kind))

    means: dict[str, float | None] = {}
    for kind in CHANGE_KINDS:
        values = [d.delta for d in deltas if d.change_kind == kind]
        means[kind] = sum(values) / len(values) if values else None
    return deltas, means


def format_delta_table(means: dict[str, float | None]) -> str:
    """Two-cell table: mean delta p for switches that became correct vs
    incorrect, as percentages."""

    def cell(kind):
        value = means.get(kind)
        return "-" if value is None else f"{value * 100:.1f}%"

    return (
        "Correct  Incorrect\n"
        f"{cell('became_correct'):<8} {cell('became_incorrect')}"
    )


def coverage_report(subsets: dict[str, list[str]], dataset_size: int) -> dict[str, int]:
    """Integer percentages of the original dataset per CS-m (m >= 1) plus
    the combined "CS" total."""
    if dataset_size <= 0:
        raise ValueError("dataset_size must be positive")
    max_m = max((int(tag.split("-")[1]) for tag in subsets), default=0)
    report: dict[str, int] = {}
    covered = 0
    for m in range(1, max_m + 1):
        count = len(subsets.get(f"CS-{m}", ()))
        covered += count
        report[f"CS-{m}"] = round(100 * count / dataset_size)
    report["CS"] = round(100 * covered / dataset_size)
    return report


def format_coverage_table(reports: dict[str, dict[str, int]]) -> str:
    """Aligned table of coverage percentages, one column per config."""
    configs = list(reports)
    rows: list[str] = []
    all_tags: list[str] = []
    for report in reports.values():
        for tag in report:
            if tag not in all_tags:
                all_tags.append(tag)
    header = f"{'Variation':<12}" + "".join(f"{c:>14}" for c in configs)
    rows.append(header)
    for tag in all_tags:
        cells = "".join(
            f"{reports[c].get(tag, 0):>13}%" for c in configs
        )
        rows.append(f"{tag:<12}{cells}")
    return "\n".join(rows)


def curve_metrics(curve: LearningCurve) -> tuple[float, float]:
    """(max, WS) for a learning curve.

    max is the peak accuracy; WS is the weighted average with harmonic
    weights 1/i over curve points in order, weighting earlier points more.
    """
    accs = [acc for _, acc in curve.points]
    weights = [1.0 / i for i in range(1, len(accs) + 1)]
    ws = sum(w * a for w, a in zip(weights, accs)) / sum(weights)
    return max(accs), ws
