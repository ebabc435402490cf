"""Build a tiny BERT-class checkpoint on disk, from scratch.

The encoder is architecturally a standard bidirectional transformer with
a sequence-start classification token, just small enough (2 layers,
hidden size 32) that fine-tuning runs in seconds on a CPU. Nothing is
fetched from a model hub; the checkpoint directory is self-contained and
its path is the opaque encoder identifier used in configuration.
"""

from __future__ import annotations

from pathlib import Path

import torch
from transformers import BertConfig, BertForSequenceClassification, BertTokenizer

from .vocab import build_vocab, write_vocab

MAX_SEQ_LEN = 512


def build_checkpoint(out_dir: str | Path, seed: int = 0) -> Path:
    """Create vocab, config, and randomly initialized weights under out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    vocab_size = write_vocab(out / "vocab.txt")

    config = BertConfig(
        vocab_size=vocab_size,
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=MAX_SEQ_LEN,
        type_vocab_size=2,
        pad_token_id=0,
        num_labels=3,
    )
    torch.manual_seed(seed)
    model = BertForSequenceClassification(config)
    model.save_pretrained(out)

    vocab_map = {token: i for i, token in enumerate(build_vocab())}
    tokenizer = BertTokenizer(vocab=vocab_map, do_lower_case=True)
    tokenizer.model_max_length = MAX_SEQ_LEN
    tokenizer.save_pretrained(out)
    return out


def load_tokenizer(checkpoint_dir: str | Path) -> BertTokenizer:
    tokenizer = BertTokenizer.from_pretrained(str(checkpoint_dir))
    tokenizer.model_max_length = MAX_SEQ_LEN
    return tokenizer


def load_model(checkpoint_dir: str | Path, num_labels: int = 3) -> BertForSequenceClassification:
    """Load encoder weights; a head of a different arity is re-initialized."""
    return BertForSequenceClassification.from_pretrained(
        str(checkpoint_dir), num_labels=num_labels, ignore_mismatched_sizes=True
    )
