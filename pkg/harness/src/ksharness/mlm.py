"""Masked-LM probe evaluation: zero-shot scoring and fine-tune curves.

A probe is a two-candidate record whose prompt contains one literal
``[MASK]`` placeholder.  Multi-token candidates are scored by the mean
token log-likelihood over an equally long run of mask positions, and the
two candidate scores are renormalized into a probability pair.
"""

from __future__ import annotations

import json
import math
import random
from pathlib import Path

import torch

from .config import HarnessConfig, save_config_beside
from .modeling import build_vocab, load_tokenizer, new_mlm_model, tiny_bert_config

MASK = "[MASK]"


def read_probes(path: str | Path) -> list[dict]:
    probes = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec.get("format") != "MLM":
                raise ValueError(f"{path}: {rec.get('probe_id')}: not an MLM probe")
            if rec["prompt"].count(MASK) != 1:
                raise ValueError(f"{path}: {rec['probe_id']}: need exactly one {MASK}")
            if len(rec["candidates"]) != 2:
                raise ValueError(f"{path}: {rec['probe_id']}: need two candidates")
            probes.append(rec)
    if not probes:
        raise ValueError(f"{path}: no probes")
    return probes


def _masked_input(tokenizer, prompt: str, n_mask: int, max_seq_len: int):
    """Token ids with the placeholder expanded to n_mask mask tokens,
    plus the mask position indices."""
    before, after = prompt.split(MASK)
    tokens = (tokenizer.tokenize(before) + [MASK] * n_mask + tokenizer.tokenize(after))
    tokens = ["[CLS]"] + tokens[:max_seq_len - 2] + ["[SEP]"]
    ids = tokenizer.convert_tokens_to_ids(tokens)
    positions = [i for i, t in enumerate(tokens) if t == MASK]
    if len(positions) != n_mask:
        raise ValueError(f"prompt too long for a {n_mask}-token candidate")
    return ids, positions


def _candidate_scores(model, tokenizer, probe: dict, max_seq_len: int,
                      device: str) -> list[float]:
    """Mean token log-likelihood for each candidate."""
    scores = []
    for candidate in probe["candidates"]:
        cand_tokens = tokenizer.tokenize(candidate)
        if not cand_tokens:
            scores.append(-math.inf)
            continue
        cand_ids = tokenizer.convert_tokens_to_ids(cand_tokens)
        ids, positions = _masked_input(tokenizer, probe["prompt"],
                                       len(cand_tokens), max_seq_len)
        input_ids = torch.tensor([ids], device=device)
        with torch.no_grad():
            logits = model(input_ids=input_ids).logits[0]
        log_probs = torch.log_softmax(logits.double(), dim=-1)
        total = sum(float(log_probs[pos, tid]) for pos, tid in zip(positions, cand_ids))
        scores.append(total / len(cand_ids))
    return scores


def _renormalize(scores: list[float]) -> list[float]:
    peak = max(scores)
    exps = [math.exp(s - peak) if s > -math.inf else 0.0 for s in scores]
    total = sum(exps)
    return [e / total for e in exps]


def _predict(model, tokenizer, probes, config, model_tag) -> tuple[float, list[dict]]:
    model.eval()
    log = []
    correct = 0
    for probe in probes:
        scores = _candidate_scores(model, tokenizer, probe,
                                   config.max_seq_len, config.device)
        probs = _renormalize(scores)
        predicted = max(range(len(probs)), key=lambda i: (probs[i], -i))
        correct += predicted == probe["gold_index"]
        log.append({
            "instance_id": probe["probe_id"],
            "model_tag": model_tag,
            "probabilities": probs,
            "predicted_index": predicted,
        })
    return correct / len(probes), log


def _train_mlm(model, tokenizer, probes, config):
    """One pass of mask-fill training on the probes' gold candidates."""
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)
    model.train()
    rng = random.Random(config.seed)
    order = list(range(len(probes)))
    for _ in range(max(config.epochs, 1)):
        rng.shuffle(order)
        for idx in order:
            probe = probes[idx]
            gold = probe["candidates"][probe["gold_index"]]
            cand_ids = tokenizer.convert_tokens_to_ids(tokenizer.tokenize(gold))
            if not cand_ids:
                continue
            ids, positions = _masked_input(tokenizer, probe["prompt"],
                                           len(cand_ids), config.max_seq_len)
            labels = [-100] * len(ids)
            for pos, tid in zip(positions, cand_ids):
                labels[pos] = tid
            outputs = model(
                input_ids=torch.tensor([ids], device=config.device),
                labels=torch.tensor([labels], device=config.device),
            )
            outputs.loss.backward()
            optimizer.step()
            optimizer.zero_grad()
    return model


def _setup_tokenizer(config: HarnessConfig, probes):
    texts = [p["prompt"].replace(MASK, " ") for p in probes]
    texts += [c for p in probes for c in p["candidates"]]
    out_dir = Path(config.log_path).parent if config.log_path else Path(".")
    out_dir.mkdir(parents=True, exist_ok=True)
    vocab_path = build_vocab(texts, out_dir / "vocab.txt")
    return load_tokenizer(vocab_path)


def _fresh_model(config: HarnessConfig, tokenizer):
    return new_mlm_model(
        tiny_bert_config(len(tokenizer), config.hidden_size, config.num_layers,
                         config.num_heads, config.max_seq_len),
        config.seed,
    ).to(config.device)


def eval_mlm_probe(config: HarnessConfig, mode: str = "zero-shot",
                   fractions: tuple[float, ...] = (0.01, 0.1, 1.0),
                   model_tag: str = "mlm"):
    """Zero-shot: returns (accuracy, log records).  Fine-tune-curve:
    returns a list of (fraction, accuracy) points, one model per fraction
    trained on that prefix of the (seed-shuffled) probes.

    Logs and the curve JSON are written next to config.log_path.
    """
    if not (config.eval_path and config.log_path):
        raise ValueError("eval_path and log_path are required")
    probes = read_probes(config.eval_path)
    tokenizer = _setup_tokenizer(config, probes)
    log_path = Path(config.log_path)

    if mode == "zero-shot":
        model = _fresh_model(config, tokenizer)
        accuracy, log = _predict(model, tokenizer, probes, config, model_tag)
        with log_path.open("w", encoding="utf-8") as fh:
            for rec in log:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
        save_config_beside(config, log_path)
        return accuracy, log

    if mode != "fine-tune-curve":
        raise ValueError(f"unknown mode: {mode!r}")

    order = list(range(len(probes)))
    random.Random(config.seed).shuffle(order)
    points = []
    for fraction in fractions:
        if not 0.0 < fraction <= 1.0:
            raise ValueError(f"bad train fraction: {fraction}")
        n = max(1, math.ceil(fraction * len(probes)))
        subset = [probes[i] for i in order[:n]]
        model = _fresh_model(config, tokenizer)  # fresh weights per point
        _train_mlm(model, tokenizer, subset, config)
        accuracy, _ = _predict(model, tokenizer, probes, config, model_tag)
        points.append((fraction, accuracy))
    curve_path = log_path.with_name(log_path.stem + ".curve.json")
    curve_path.write_text(
        json.dumps([[f, a] for f, a in points], indent=2) + "\n", encoding="utf-8")
    save_config_beside(config, log_path)
    return points
