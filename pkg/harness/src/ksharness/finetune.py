"""Fine-tune a multiple-choice model on knowledge-surrounded datasets.

Input records carry question, candidates, per-candidate knowledge (null
when absent) and the gold index.  Each candidate is encoded as
``[CLS] question [SEP] candidate knowledge [SEP]``; when the sequence
overflows, the knowledge span is tail-truncated first, then the question.
The eval pass writes one prediction record per instance with the full
(renormalized) softmax distribution.
"""

from __future__ import annotations

import json
import random
from pathlib import Path

import torch
from torch.utils.data import DataLoader, Dataset

from .config import HarnessConfig, save_config_beside
from .modeling import (
    build_vocab,
    load_tokenizer,
    new_mc_model,
    save_checkpoint,
    tiny_bert_config,
)


def read_dataset(path: str | Path) -> list[dict]:
    records = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            for key in ("instance_id", "question", "candidates", "knowledge", "gold_index"):
                if key not in rec:
                    raise ValueError(f"{path}: record missing {key!r}")
            if len(rec["candidates"]) != len(rec["knowledge"]):
                raise ValueError(f"{path}: {rec['instance_id']}: slot count mismatch")
            records.append(rec)
    if not records:
        raise ValueError(f"{path}: empty dataset")
    return records


def encode_choice(tokenizer, question: str, candidate: str, knowledge: str | None,
                  max_seq_len: int) -> dict:
    q = tokenizer.tokenize(question)
    c = tokenizer.tokenize(candidate)
    k = tokenizer.tokenize(knowledge) if knowledge else []
    budget = max_seq_len - 3  # [CLS] ... [SEP] ... [SEP]
    overflow = len(q) + len(c) + len(k) - budget
    if overflow > 0:  # drop knowledge tail first
        drop = min(overflow, len(k))
        k = k[:len(k) - drop]
        overflow -= drop
    if overflow > 0:  # then the question tail
        drop = min(overflow, len(q))
        q = q[:len(q) - drop]
        overflow -= drop
    if overflow > 0:  # pathological candidate; keep its head
        c = c[:len(c) - overflow]

    tokens = ["[CLS]"] + q + ["[SEP]"] + c + k + ["[SEP]"]
    ids = tokenizer.convert_tokens_to_ids(tokens)
    type_ids = [0] * (len(q) + 2) + [1] * (len(c) + len(k) + 1)
    mask = [1] * len(ids)
    pad = max_seq_len - len(ids)
    pad_id = tokenizer.pad_token_id
    return {
        "input_ids": ids + [pad_id] * pad,
        "token_type_ids": type_ids + [0] * pad,
        "attention_mask": mask + [0] * pad,
    }


class _McDataset(Dataset):
    def __init__(self, records, tokenizer, max_seq_len):
        self.records = records
        self.tokenizer = tokenizer
        self.max_seq_len = max_seq_len

    def __len__(self):
        return len(self.records)

    def __getitem__(self, idx):
        rec = self.records[idx]
        encoded = [
            encode_choice(self.tokenizer, rec["question"], cand, know, self.max_seq_len)
            for cand, know in zip(rec["candidates"], rec["knowledge"])
        ]
        return {
            "input_ids": torch.tensor([e["input_ids"] for e in encoded]),
            "token_type_ids": torch.tensor([e["token_type_ids"] for e in encoded]),
            "attention_mask": torch.tensor([e["attention_mask"] for e in encoded]),
            "label": torch.tensor(rec["gold_index"]),
            "idx": idx,
        }


def _loaders_by_choice_count(records, tokenizer, config, shuffle):
    """One loader per candidate count so batches stack cleanly."""
    groups: dict[int, list[dict]] = {}
    for rec in records:
        groups.setdefault(len(rec["candidates"]), []).append(rec)
    generator = torch.Generator().manual_seed(config.seed)
    loaders = []
    for count in sorted(groups):
        ds = _McDataset(groups[count], tokenizer, config.max_seq_len)
        loaders.append(DataLoader(ds, batch_size=config.batch_size,
                                  shuffle=shuffle, generator=generator))
    return loaders


def finetune_mc(config: HarnessConfig, checkpoint_dir: str | Path | None = None,
                model_tag: str = "mc") -> Path:
    """Train on config.train_path, predict config.eval_path, write the log.

    Returns the log path.  The run config is serialized beside the log and
    the trained model is saved when checkpoint_dir is given.
    """
    if not (config.train_path and config.eval_path and config.log_path):
        raise ValueError("train_path, eval_path and log_path are all required")
    torch.manual_seed(config.seed)
    random.seed(config.seed)

    train = read_dataset(config.train_path)
    eval_records = read_dataset(config.eval_path)

    log_path = Path(config.log_path)
    log_path.parent.mkdir(parents=True, exist_ok=True)
    vocab_texts = []
    for rec in train + eval_records:
        vocab_texts.append(rec["question"])
        vocab_texts.extend(rec["candidates"])
        vocab_texts.extend(k for k in rec["knowledge"] if k)
    vocab_path = build_vocab(vocab_texts, log_path.with_name("vocab.txt"))
    tokenizer = load_tokenizer(vocab_path)

    model = new_mc_model(
        tiny_bert_config(len(tokenizer), config.hidden_size, config.num_layers,
                         config.num_heads, config.max_seq_len),
        config.seed,
    ).to(config.device)

    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)
    model.train()
    for _ in range(config.epochs):
        for loader in _loaders_by_choice_count(train, tokenizer, config, shuffle=True):
            for batch in loader:
                outputs = model(
                    input_ids=batch["input_ids"].to(config.device),
                    token_type_ids=batch["token_type_ids"].to(config.device),
                    attention_mask=batch["attention_mask"].to(config.device),
                    labels=batch["label"].to(config.device),
                )
                outputs.loss.backward()
                optimizer.step()
                optimizer.zero_grad()

    model.eval()
    predictions: dict[str, dict] = {}
    with torch.no_grad():
        for loader in _loaders_by_choice_count(eval_records, tokenizer, config,
                                               shuffle=False):
            group = loader.dataset.records
            for batch in loader:
                logits = model(
                    input_ids=batch["input_ids"].to(config.device),
                    token_type_ids=batch["token_type_ids"].to(config.device),
                    attention_mask=batch["attention_mask"].to(config.device),
                ).logits
                probs = torch.softmax(logits.double(), dim=-1)
                for row, idx in zip(probs, batch["idx"]):
                    rec = group[idx]
                    p = [float(x) for x in row]
                    total = sum(p)
                    p = [x / total for x in p]
                    predicted = max(range(len(p)), key=lambda i: (p[i], -i))
                    predictions[rec["instance_id"]] = {
                        "instance_id": rec["instance_id"],
                        "model_tag": model_tag,
                        "probabilities": p,
                        "predicted_index": predicted,
                    }

    with log_path.open("w", encoding="utf-8") as fh:
        for rec in eval_records:  # eval-file order
            fh.write(json.dumps(predictions[rec["instance_id"]], sort_keys=True) + "\n")
    save_config_beside(config, log_path)
    if checkpoint_dir is not None:
        save_checkpoint(model, tokenizer, checkpoint_dir)
    return log_path
