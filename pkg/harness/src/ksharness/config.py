"""Run configuration, serialized beside every output for reproducibility."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path


@dataclass
class HarnessConfig:
    """Hyperparameters and paths for one fine-tuning or evaluation run.

    The defaults are sized for quick CPU runs; real experiments override
    them (BERT-base dimensions, task-appropriate hyperparameters).
    """

    model_name: str = "tiny-bert"
    max_seq_len: int = 64
    epochs: int = 1
    learning_rate: float = 5e-4
    batch_size: int = 8
    seed: int = 0
    train_path: str | None = None
    eval_path: str | None = None
    log_path: str | None = None
    # tiny-model dimensions, ignored when loading a saved checkpoint
    hidden_size: int = 64
    num_layers: int = 2
    num_heads: int = 2
    device: str = "cpu"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.max_seq_len < 8:
            raise ValueError("max_seq_len must be at least 8")
        if self.epochs < 0 or self.batch_size < 1:
            raise ValueError("bad epochs/batch_size")

    def save(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: str | Path) -> "HarnessConfig":
        return cls(**json.loads(Path(path).read_text(encoding="utf-8")))


def save_config_beside(config: HarnessConfig, output: str | Path) -> Path:
    """Write ``<output>.config.json`` next to an output file."""
    output = Path(output)
    return config.save(output.with_name(output.name + ".config.json"))
