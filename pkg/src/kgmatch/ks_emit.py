"""Phase 2 (align), data side: emit knowledge-surrounded (KS) datasets.

Each candidate answer is followed by its rendered knowledge text
("candidate knowledge", single space join); the baseline files hold the
same instance sequence without knowledge so comparisons stay paired.
KS+ keeps knowledge in the eval file, KS- strips it at eval time only.
Model special tokens are never written; the harness inserts them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .extractor import ExtractionResult, TaskInstance
from .manifest import write_manifest


@dataclass(frozen=True)
class AugmentedInstance:
    instance_id: str
    question: str
    candidates: tuple[str, ...]
    knowledge: tuple[str | None, ...]  # one slot per candidate
    gold_index: int
    subset_tag: str

    def __post_init__(self):
        if len(self.knowledge) != len(self.candidates):
            raise ValueError("knowledge slots must match candidate count")

    @property
    def knowledge_present(self) -> tuple[bool, ...]:
        return tuple(k is not None for k in self.knowledge)

    @property
    def candidates_with_knowledge(self) -> tuple[str, ...]:
        return tuple(
            c if k is None else f"{c} {k}"
            for c, k in zip(self.candidates, self.knowledge)
        )

    @classmethod
    def from_record(cls, record: dict) -> "AugmentedInstance":
        return cls(
            instance_id=record["instance_id"],
            question=record["question"],
            candidates=tuple(record["candidates"]),
            knowledge=tuple(record["knowledge"]),
            gold_index=record["gold_index"],
            subset_tag=record["subset_tag"],
        )


@dataclass(frozen=True)
class EmissionPlan:
    subset: str  # CS-1 | CS-2 | CS-3
    eval_variant: str = "KS+"  # KS+ | KS-
    baseline: bool = False

    def __post_init__(self):
        if self.eval_variant not in ("KS+", "KS-"):
            raise ValueError(f"bad eval variant: {self.eval_variant}")


class EmissionError(ValueError):
    pass


def augment(instance: TaskInstance, result: ExtractionResult,
            with_knowledge: bool) -> dict:
    """One output record; knowledge slots are null when absent or disabled."""
    if result.instance_id != instance.instance_id:
        raise EmissionError(
            f"extraction/instance id mismatch: {result.instance_id} vs {instance.instance_id}"
        )
    knowledge = [
        item.rendered if (with_knowledge and item is not None) else None
        for item in result.per_candidate
    ]
    return {
        "instance_id": instance.instance_id,
        "question": instance.question,
        "candidates": list(instance.candidates),
        "gold_index": instance.gold_index,
        "subset_tag": result.subset_tag,
        "knowledge": knowledge,
    }


def surround(record: dict) -> list[str]:
    """Candidate texts with knowledge appended ("c k"), bare when absent."""
    return [
        c if k is None else f"{c} {k}"
        for c, k in zip(record["candidates"], record["knowledge"])
    ]


def emit_dataset(
    train_instances: list[TaskInstance],
    train_results: list[ExtractionResult],
    eval_instances: list[TaskInstance],
    eval_results: list[ExtractionResult],
    plan: EmissionPlan,
    out_dir: str | Path,
    seed: int = 0,
    force: bool = False,
) -> dict[str, Path]:
    """Write train/dev files restricted to the plan's subset plus a manifest.

    KS train always carries knowledge; the eval file carries knowledge iff
    the variant is KS+; a baseline plan writes both files bare.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def select(instances, results, with_knowledge):
        by_id = {r.instance_id: r for r in results}
        rows = []
        for inst in instances:
            result = by_id.get(inst.instance_id)
            if result is None:
                raise EmissionError(f"no extraction result for {inst.instance_id}")
            if result.subset_tag != plan.subset:
                continue
            rows.append(augment(inst, result, with_knowledge))
        return rows

    train_rows = select(train_instances, train_results, not plan.baseline)
    eval_rows = select(
        eval_instances, eval_results,
        (not plan.baseline) and plan.eval_variant == "KS+",
    )
    if not train_rows and not eval_rows:
        raise EmissionError(f"subset {plan.subset} is empty")

    tag = "baseline" if plan.baseline else "ks"
    paths = {
        "train": out_dir / f"{tag}.train.jsonl",
        "eval": out_dir / f"{tag}.eval.jsonl",
    }
    for split, rows in (("train", train_rows), ("eval", eval_rows)):
        with paths[split].open("w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")

    write_manifest(
        out_dir,
        stage="emit-ks",
        config={
            "subset": plan.subset,
            "eval_variant": plan.eval_variant,
            "baseline": plan.baseline,
        },
        outputs=list(paths.values()),
        seed=seed,
        extra={"counts": {"train": len(train_rows), "eval": len(eval_rows)}},
        force=force,
    )
    return paths


def load_emitted(path: str | Path) -> list[dict]:
    with Path(path).open(encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
