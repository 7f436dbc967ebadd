"""Tiny, locally-initialized BERT models and a corpus-built tokenizer.

Nothing is downloaded: the vocabulary is built from the run's own input
files and the model weights are randomly initialized (or loaded from a
local checkpoint directory).  This keeps fixture-scale runs fast and
hermetic while exercising exactly the code paths a BERT-base run uses.
"""

from __future__ import annotations

import re
from pathlib import Path

import torch
from transformers import (
    BertConfig,
    BertForMaskedLM,
    BertForMultipleChoice,
    BertTokenizer,
)

SPECIAL_TOKENS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]

_WORD_RE = re.compile(r"[a-z0-9]+|[^\sa-z0-9]")


def build_vocab(texts, vocab_path: str | Path) -> Path:
    """Write a word-level vocab.txt covering every token in texts.

    BERT's WordPiece then resolves each word exactly (or to [UNK] for
    genuinely unseen eval words).
    """
    words: set[str] = set()
    for text in texts:
        words.update(_WORD_RE.findall(text.lower()))
    vocab_path = Path(vocab_path)
    with vocab_path.open("w", encoding="utf-8") as fh:
        for token in SPECIAL_TOKENS + sorted(words):
            fh.write(token + "\n")
    return vocab_path


def load_tokenizer(vocab_path: str | Path) -> BertTokenizer:
    return BertTokenizer(str(vocab_path), do_lower_case=True)


def tiny_bert_config(vocab_size: int, hidden_size: int, num_layers: int,
                     num_heads: int, max_seq_len: int) -> BertConfig:
    return BertConfig(
        vocab_size=vocab_size,
        hidden_size=hidden_size,
        num_hidden_layers=num_layers,
        num_attention_heads=num_heads,
        intermediate_size=hidden_size * 4,
        max_position_embeddings=max(max_seq_len, 64),
    )


def new_mc_model(config: BertConfig, seed: int) -> BertForMultipleChoice:
    torch.manual_seed(seed)
    return BertForMultipleChoice(config)


def new_mlm_model(config: BertConfig, seed: int) -> BertForMaskedLM:
    torch.manual_seed(seed)
    return BertForMaskedLM(config)


def save_checkpoint(model, tokenizer, out_dir: str | Path) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    model.save_pretrained(out_dir)
    vocab = sorted(tokenizer.get_vocab().items(), key=lambda kv: kv[1])
    with (out_dir / "vocab.txt").open("w", encoding="utf-8") as fh:
        for token, _ in vocab:
            fh.write(token + "\n")
    return out_dir
