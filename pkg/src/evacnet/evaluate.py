"""Cross-validation harness: stratified k-fold splits, confusion matrices,
precision/recall/F1 reports, and mean(std) aggregation across folds.

Protocol: k runs; run i tests on fold i, validates on fold (i+1) mod k, and
trains on the remaining k-2 folds. The lexical backend needs no training but
the same folds are carved out so trained backends see an identical protocol.
"""

from __future__ import annotations

import random
import statistics
from dataclasses import dataclass, field, asdict
from datetime import datetime
from enum import Enum
from typing import Callable, Protocol, Sequence

from .classify import (
    BinaryLabel,
    NoticeLabel,
    RemoteRef,
    collapse_label,
    decide,
    decide_binary,
    lexical_classify,
    remote_classify,
    to_binary,
)


class Origin(str, Enum):
    SOCIAL_MEDIA = "SocialMedia"
    WEBSITE = "Website"
    NEWS_OUTLET = "NewsOutlet"


MIN_EXAMPLE_YEAR = 2001


@dataclass(frozen=True)
class LabeledExample:
    text: str
    gold: NoticeLabel
    origin: Origin
    year: int
    fips: str

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("labeled example text must be non-empty")
        current_year = datetime.now().year
        if not (MIN_EXAMPLE_YEAR <= self.year <= current_year):
            raise ValueError(f"year {self.year} outside [{MIN_EXAMPLE_YEAR}, {current_year}]")


@dataclass(frozen=True)
class TrainingConfig:
    max_seq_len: int = 512
    batch_size: int = 4
    learning_rate: float = 5.0e-6
    optimizer_name: str = "AdamW"
    loss_name: str = "CrossEntropy"
    early_stopping: bool = True

    def __post_init__(self) -> None:
        if self.max_seq_len <= 0 or self.batch_size <= 0 or self.learning_rate <= 0:
            raise ValueError("training config numerics must be positive")

    def to_payload(self) -> dict:
        return asdict(self)


class Task(str, Enum):
    BINARY = "binary"
    THREE_CLASS = "three"


THREE_CLASS_ORDER: tuple[str, ...] = tuple(l.value for l in NoticeLabel)
BINARY_ORDER: tuple[str, ...] = tuple(l.value for l in BinaryLabel)


class ClassTooSmall(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


class EmptyMatrix(ValueError):
    pass


class TooFewValues(ValueError):
    pass


@dataclass(frozen=True)
class FoldSplit:
    """Fold indices for one cross-validation run."""

    test: tuple[int, ...]
    validation: tuple[int, ...]
    train: tuple[int, ...]


def stratified_kfold(
    examples: Sequence[LabeledExample],
    k: int = 10,
    seed: int = 0,
    stratify: bool = True,
) -> tuple[list[list[int]], list[FoldSplit]]:
    """Partition example indices into k folds plus per-run role assignments.

    Stratified dealing keeps per-class counts across folds within 1 of each
    other while overall fold sizes also differ by at most 1: classes are
    shuffled independently, then dealt round-robin with a fold pointer that
    carries over between classes.
    """
    n = len(examples)
    if k < 2:
        raise ValueError("k must be at least 2")
    if n < k:
        raise ClassTooSmall(f"{n} examples cannot fill {k} folds")
    rng = random.Random(seed)
    folds: list[list[int]] = [[] for _ in range(k)]

    if stratify:
        by_class: dict[str, list[int]] = {}
        for i, ex in enumerate(examples):
            by_class.setdefault(ex.gold.value, []).append(i)
        for label, members in sorted(by_class.items()):
            if len(members) < k:
                raise ClassTooSmall(
                    f"class {label} has {len(members)} examples, need at least {k}"
                )
        cursor = 0
        for label in sorted(by_class):
            members = by_class[label]
            rng.shuffle(members)
            for idx in members:
                folds[cursor % k].append(idx)
                cursor += 1
    else:
        order = list(range(n))
        rng.shuffle(order)
        for cursor, idx in enumerate(order):
            folds[cursor % k].append(idx)

    splits = []
    for i in range(k):
        val = (i + 1) % k
        train = tuple(
            idx for j in range(k) if j not in (i, val) for idx in folds[j]
        )
        splits.append(FoldSplit(test=tuple(folds[i]), validation=tuple(folds[val]), train=train))
    return folds, splits


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows = gold, cols = predicted, in fixed label order."""

    labels: tuple[str, ...]
    counts: tuple[tuple[int, ...], ...]

    def total(self) -> int:
        return sum(sum(row) for row in self.counts)


def confusion(
    gold: Sequence, pred: Sequence, labels: Sequence[str] = THREE_CLASS_ORDER
) -> ConfusionMatrix:
    if len(gold) != len(pred):
        raise LengthMismatch(f"{len(gold)} gold labels vs {len(pred)} predictions")
    index = {label: i for i, label in enumerate(labels)}
    counts = [[0] * len(labels) for _ in labels]
    for g, p in zip(gold, pred):
        g_val = g.value if isinstance(g, Enum) else g
        p_val = p.value if isinstance(p, Enum) else p
        if g_val not in index or p_val not in index:
            raise ValueError(f"label outside class order: gold={g_val!r} pred={p_val!r}")
        counts[index[g_val]][index[p_val]] += 1
    return ConfusionMatrix(labels=tuple(labels), counts=tuple(tuple(r) for r in counts))


def collapse_matrix(cm: ConfusionMatrix) -> ConfusionMatrix:
    """Collapse a 3-class matrix to Notice-vs-NotNotice."""
    if cm.labels != THREE_CLASS_ORDER:
        raise ValueError("collapse_matrix expects the 3-class label order")
    groups = {0: 0, 1: 0, 2: 1}  # Mandatory, Voluntary -> Notice
    counts = [[0, 0], [0, 0]]
    for gi, row in enumerate(cm.counts):
        for pi, n in enumerate(row):
            counts[groups[gi]][groups[pi]] += n
    return ConfusionMatrix(labels=BINARY_ORDER, counts=tuple(tuple(r) for r in counts))


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class AggregateMetrics:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class MetricsReport:
    per_class: dict[str, ClassMetrics]
    macro_avg: AggregateMetrics
    weighted_avg: AggregateMetrics
    accuracy: float
    total: int


def _safe_div(num: float, den: float) -> float:
    # Any 0/0 metric is defined as 0.
    return num / den if den else 0.0


def metrics(cm: ConfusionMatrix) -> MetricsReport:
    """Per-class precision/recall/F1 plus macro, weighted, and accuracy."""
    total = cm.total()
    if total == 0:
        raise EmptyMatrix("confusion matrix has no observations")

    per_class: dict[str, ClassMetrics] = {}
    for i, label in enumerate(cm.labels):
        tp = cm.counts[i][i]
        support = sum(cm.counts[i])
        predicted = sum(row[i] for row in cm.counts)
        precision = _safe_div(tp, predicted)
        recall = _safe_div(tp, support)
        f1 = _safe_div(2 * precision * recall, precision + recall)
        per_class[label] = ClassMetrics(precision, recall, f1, support)

    k = len(cm.labels)
    macro = AggregateMetrics(
        precision=sum(m.precision for m in per_class.values()) / k,
        recall=sum(m.recall for m in per_class.values()) / k,
        f1=sum(m.f1 for m in per_class.values()) / k,
    )
    weighted = AggregateMetrics(
        precision=sum(m.precision * m.support for m in per_class.values()) / total,
        recall=sum(m.recall * m.support for m in per_class.values()) / total,
        f1=sum(m.f1 * m.support for m in per_class.values()) / total,
    )
    accuracy = sum(cm.counts[i][i] for i in range(k)) / total
    return MetricsReport(
        per_class=per_class,
        macro_avg=macro,
        weighted_avg=weighted,
        accuracy=accuracy,
        total=total,
    )


def fold_stats(values: Sequence[float]) -> tuple[float, float]:
    """Mean and sample standard deviation (n-1 divisor) across folds."""
    if len(values) < 2:
        raise TooFewValues(f"need at least 2 values, got {len(values)}")
    return statistics.mean(values), statistics.stdev(values)


class ClassifierSource(Protocol):
    """Yields one trained classifier per cross-validation run."""

    def fit(
        self,
        train: Sequence[LabeledExample],
        validation: Sequence[LabeledExample],
        task: Task,
    ) -> Callable[[Sequence[str]], list[str]]: ...


class LexicalSource:
    """Deterministic baseline; ignores the train and validation folds."""

    def fit(self, train, validation, task):
        from .harvest import normalize

        def predict(texts: Sequence[str]) -> list[str]:
            out = []
            for t in texts:
                dist = lexical_classify(normalize(t))
                if task is Task.BINARY:
                    out.append(decide_binary(to_binary(dist)).value)
                else:
                    out.append(decide(dist).value)
            return out

        return predict


class RemoteSource:
    """Trains via POST /train, then classifies through the returned model_id."""

    def __init__(self, endpoint: str, config: TrainingConfig | None = None, timeout: float = 600.0):
        self.endpoint = endpoint.rstrip("/")
        self.config = config or TrainingConfig()
        self.timeout = timeout

    def fit(self, train, validation, task):
        import requests

        def label_of(ex: LabeledExample) -> str:
            return collapse_label(ex.gold).value if task is Task.BINARY else ex.gold.value

        body = {
            "config": self.config.to_payload(),
            "train_texts": [ex.text for ex in train],
            "train_labels": [label_of(ex) for ex in train],
            "val_texts": [ex.text for ex in validation],
            "val_labels": [label_of(ex) for ex in validation],
        }
        resp = requests.post(f"{self.endpoint}/train", json=body, timeout=self.timeout)
        resp.raise_for_status()
        model_id = resp.json()["model_id"]
        ref = RemoteRef(endpoint=self.endpoint, model_id=model_id)
        arity = 2 if task is Task.BINARY else 3

        def predict(texts: Sequence[str]) -> list[str]:
            dists = remote_classify(texts, ref, arity=arity, timeout=self.timeout)
            if task is Task.BINARY:
                return [decide_binary(d).value for d in dists]
            return [decide(d).value for d in dists]

        return predict


@dataclass
class FoldReport:
    """Mean (std) per metric over k folds, in report-table shape."""

    task: Task
    k: int
    seed: int
    rows: dict[str, dict[str, tuple[float, float]]]
    accuracy: tuple[float, float]
    fold_metrics: list[MetricsReport] = field(default_factory=list)


class CvAborted(RuntimeError):
    """A backend failed mid-protocol; carries the partial results."""

    def __init__(self, message: str, partial: FoldReport):
        super().__init__(message)
        self.partial = partial


_METRIC_COLUMNS = ("precision", "recall", "f1")


def _aggregate(task: Task, k: int, seed: int, fold_metrics: list[MetricsReport]) -> FoldReport:
    labels = BINARY_ORDER if task is Task.BINARY else THREE_CLASS_ORDER
    rows: dict[str, dict[str, tuple[float, float]]] = {}
    for label in labels:
        rows[label] = {
            m: fold_stats([getattr(fm.per_class[label], m) for fm in fold_metrics])
            for m in _METRIC_COLUMNS
        }
    rows["Macro Avg"] = {
        m: fold_stats([getattr(fm.macro_avg, m) for fm in fold_metrics])
        for m in _METRIC_COLUMNS
    }
    rows["Weighted Avg"] = {
        m: fold_stats([getattr(fm.weighted_avg, m) for fm in fold_metrics])
        for m in _METRIC_COLUMNS
    }
    accuracy = fold_stats([fm.accuracy for fm in fold_metrics])
    return FoldReport(
        task=task, k=k, seed=seed, rows=rows, accuracy=accuracy, fold_metrics=fold_metrics
    )


def run_cv(
    examples: Sequence[LabeledExample],
    source: ClassifierSource,
    task: Task = Task.THREE_CLASS,
    k: int = 10,
    seed: int = 0,
    stratify: bool = True,
) -> FoldReport:
    """Run the full k-fold protocol and aggregate per-fold metrics.

    Backend failures abort the run with CvAborted carrying the folds that
    completed.
    """
    folds, splits = stratified_kfold(examples, k=k, seed=seed, stratify=stratify)
    labels = BINARY_ORDER if task is Task.BINARY else THREE_CLASS_ORDER
    fold_metrics: list[MetricsReport] = []
    for run_index, split in enumerate(splits):
        train = [examples[i] for i in split.train]
        validation = [examples[i] for i in split.validation]
        test = [examples[i] for i in split.test]
        try:
            predict = source.fit(train, validation, task)
            predictions = predict([ex.text for ex in test])
        except Exception as exc:
            partial = (
                _aggregate(task, k, seed, fold_metrics)
                if len(fold_metrics) >= 2
                else FoldReport(task, k, seed, {}, (0.0, 0.0), fold_metrics)
            )
            raise CvAborted(f"backend failed on run {run_index}: {exc}", partial) from exc
        gold = [
            collapse_label(ex.gold).value if task is Task.BINARY else ex.gold.value
            for ex in test
        ]
        fold_metrics.append(metrics(confusion(gold, predictions, labels)))
    return _aggregate(task, k, seed, fold_metrics)


def _cell(mean: float, std: float) -> str:
    return f"{mean:.3f} ({std:.3f})"


def format_fold_report(report: FoldReport) -> str:
    """Aligned text table: one row per class plus macro/weighted/accuracy."""
    header = f"{'':<28}{'Precision':<18}{'Recall':<18}{'F1':<18}"
    lines = [header]
    for label, cells in report.rows.items():
        lines.append(
            f"{label:<28}"
            f"{_cell(*cells['precision']):<18}"
            f"{_cell(*cells['recall']):<18}"
            f"{_cell(*cells['f1']):<18}"
        )
    lines.append(f"{'Accuracy':<28}{'':<18}{'':<18}{_cell(*report.accuracy):<18}")
    return "\n".join(line.rstrip() for line in lines)


def fold_report_to_json(report: FoldReport) -> dict:
    """Machine-readable mirror of the fold report."""
    return {
        "task": report.task.value,
        "k": report.k,
        "seed": report.seed,
        "rows": {
            label: {m: {"mean": mean, "std": std} for m, (mean, std) in cells.items()}
            for label, cells in report.rows.items()
        },
        "accuracy": {"mean": report.accuracy[0], "std": report.accuracy[1]},
        "folds": [
            {
                "per_class": {
                    label: asdict(cm) for label, cm in fm.per_class.items()
                },
                "macro_avg": asdict(fm.macro_avg),
                "weighted_avg": asdict(fm.weighted_avg),
                "accuracy": fm.accuracy,
                "total": fm.total,
            }
            for fm in report.fold_metrics
        ],
    }


def load_labeled_csv(path) -> list[LabeledExample]:
    """Load labeled examples from CSV columns text,gold,origin,year,fips."""
    import csv

    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"text", "gold", "origin", "year", "fips"}
        missing = required - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"labeled CSV missing columns: {', '.join(sorted(missing))}")
        for row in reader:
            out.append(
                LabeledExample(
                    text=row["text"],
                    gold=NoticeLabel(row["gold"]),
                    origin=Origin(row["origin"]),
                    year=int(row["year"]),
                    fips=row["fips"],
                )
            )
    return out
