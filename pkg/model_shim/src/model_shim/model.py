"""Classification and fine-tuning over the tiny encoder checkpoint."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import torch
from torch.utils.data import DataLoader, TensorDataset

from .checkpoint import load_model, load_tokenizer

THREE_CLASS = ("Mandatory", "Voluntary", "NotNotice")
BINARY = ("Notice", "NotNotice")

DEFAULT_MAX_EPOCHS = 20
DEFAULT_PATIENCE = 3


def infer_label_order(labels: list[str]) -> tuple[str, ...] | None:
    """Pick the task taxonomy covering every label; None when outside both.

    Labels drawn only from {NotNotice} are ambiguous; they resolve to the
    three-class order, the live pipeline's arity.
    """
    seen = set(labels)
    if seen <= set(THREE_CLASS):
        return THREE_CLASS
    if seen <= set(BINARY):
        return BINARY
    return None


@dataclass
class TrainSettings:
    """Validated /train config plus shim-side caps the protocol leaves open."""

    max_seq_len: int
    batch_size: int
    learning_rate: float
    early_stopping: bool
    max_epochs: int = DEFAULT_MAX_EPOCHS
    patience: int = DEFAULT_PATIENCE
    seed: int = 0


@dataclass
class ShimModel:
    """A loaded encoder + head bound to a fixed label order."""

    model: torch.nn.Module
    tokenizer: object
    labels: tuple[str, ...]
    train_losses: list[float] = field(default_factory=list)
    val_losses: list[float] = field(default_factory=list)

    def classify(self, texts: list[str], max_seq_len: int | None = None) -> list[list[float]]:
        """Order-preserving softmax distributions, one row per text."""
        if not texts:
            return []
        enc = self.tokenizer(
            list(texts),
            truncation=True,
            max_length=max_seq_len or self.tokenizer.model_max_length,
            padding=True,
            return_tensors="pt",
        )
        self.model.eval()
        with torch.no_grad():
            logits = self.model(**enc).logits
        probs = torch.softmax(logits.double(), dim=-1)
        return [[float(v) for v in row] for row in probs.tolist()]


def load_base(checkpoint_dir) -> ShimModel:
    return ShimModel(
        model=load_model(checkpoint_dir, num_labels=len(THREE_CLASS)),
        tokenizer=load_tokenizer(checkpoint_dir),
        labels=THREE_CLASS,
    )


def _encode(tokenizer, texts, labels, label_order, max_seq_len):
    enc = tokenizer(
        list(texts),
        truncation=True,
        max_length=min(max_seq_len, tokenizer.model_max_length),
        padding=True,
        return_tensors="pt",
    )
    ids = torch.tensor([label_order.index(l) for l in labels], dtype=torch.long)
    return TensorDataset(enc["input_ids"], enc["attention_mask"], ids)


def _epoch_loss(model, loader, optimizer=None) -> float:
    training = optimizer is not None
    model.train(training)
    total, count = 0.0, 0
    with torch.set_grad_enabled(training):
        for input_ids, attention_mask, labels in loader:
            out = model(input_ids=input_ids, attention_mask=attention_mask, labels=labels)
            if training:
                optimizer.zero_grad()
                out.loss.backward()
                optimizer.step()
            total += float(out.loss.detach()) * len(labels)
            count += len(labels)
    return total / count


def fine_tune(
    checkpoint_dir,
    settings: TrainSettings,
    train_texts: list[str],
    train_labels: list[str],
    val_texts: list[str],
    val_labels: list[str],
    label_order: tuple[str, ...],
) -> ShimModel:
    """Cross-entropy fine-tune with early stopping on validation loss.

    The best-validation weights are restored at the end, so a run that
    overfits late still returns its best checkpoint.
    """
    torch.manual_seed(settings.seed)
    model = load_model(checkpoint_dir, num_labels=len(label_order))
    tokenizer = load_tokenizer(checkpoint_dir)
    optimizer = torch.optim.AdamW(model.parameters(), lr=settings.learning_rate)

    train_loader = DataLoader(
        _encode(tokenizer, train_texts, train_labels, label_order, settings.max_seq_len),
        batch_size=settings.batch_size,
        shuffle=True,
        generator=torch.Generator().manual_seed(settings.seed),
    )
    val_loader = DataLoader(
        _encode(tokenizer, val_texts, val_labels, label_order, settings.max_seq_len),
        batch_size=settings.batch_size,
    )

    result = ShimModel(model=model, tokenizer=tokenizer, labels=label_order)
    best_val = float("inf")
    best_state = copy.deepcopy(model.state_dict())
    stale = 0
    for _ in range(settings.max_epochs):
        result.train_losses.append(_epoch_loss(model, train_loader, optimizer))
        val = _epoch_loss(model, val_loader)
        result.val_losses.append(val)
        if val < best_val:
            best_val, stale = val, 0
            best_state = copy.deepcopy(model.state_dict())
        else:
            stale += 1
            if settings.early_stopping and stale >= settings.patience:
                break
    if settings.early_stopping:
        model.load_state_dict(best_state)
    return result
