# -*- coding: utf-8 -*-
"""Parsing of completions and scoring.

Sequential labeling is scored with token-level macro-F1 over the tag classes
(O included); classification with accuracy. Classification outputs that name
no label are 'unparsed' (None) and count as wrong.
"""
from collections import Counter
from dataclasses import dataclass, field
import re
from typing import Any, Dict, List, Mapping, NamedTuple, Optional, Sequence, Union
from xlit.types import (
    LanguageTag,
    PromptMode,
    PromptModeArg,
    TagLabel,
    TaskKind,
    TaskKindArg,
    enum_value,
)


TAG_ALTERNATION = "|".join(
    re.escape(tag.value) for tag in sorted(TagLabel, key=lambda t: -len(t.value))
)
LABELED_TAG_RE = re.compile(rf":\s*({TAG_ALTERNATION})(?![\w-])")
"""A tag after a colon, e.g. 'Moskva: B-LOC'."""
TAG_VALUES = frozenset(tag.value for tag in TagLabel)

TagSequence = Sequence[Union[str, TagLabel]]
Prediction = Optional[str]
"""A predicted class label; None if the output could not be parsed."""


class MetricError(ValueError):
    """Raised when metric inputs do not line up.

    Args:
        msg: The message.
        index: Index of the offending example, if any.
    """

    def __init__(self, msg: str, index: Optional[int] = None) -> None:
        super().__init__(msg)
        self.index = index


def find_tags(raw: str) -> List[TagLabel]:
    """All tags in `raw`, in order: first any ``...: TAG`` occurrences; if
    there are none, any whitespace-separated words that are tags.
    """
    tags = [TagLabel(value) for value in LABELED_TAG_RE.findall(raw)]
    if not tags:
        tags = [TagLabel(word) for word in raw.split() if word in TAG_VALUES]
    return tags


def parse_seqlab_output(raw: str, token_count: int) -> List[TagLabel]:
    """Extract exactly `token_count` tags from a completion.

    Args:
        raw: The completion text.
        token_count: Number of tokens in the query.

    Returns:
        The tags found (see :func:`find_tags`), padded with O or truncated to
        `token_count`.

    Raises:
        ValueError if `token_count` < 1.
    """
    if token_count < 1:
        raise ValueError(f"token_count must be positive: {token_count}")
    tags = find_tags(raw)[:token_count]
    return tags + [TagLabel.O] * (token_count - len(tags))


def parse_cls_output(
    raw: str,
    label_set: Sequence[str],
    verbalizers: Optional[Mapping[str, str]] = None,
) -> Prediction:
    """Find the label whose verbalizer occurs first in a completion,
    ignoring case. If two verbalizers start at the same position the longer
    one wins.

    Args:
        raw: The completion text.
        label_set: The labels.
        verbalizers: Surface string per label (default: the label).

    Returns:
        The label, or None if no verbalizer occurs.

    Raises:
        ValueError if `label_set` is empty.
    """
    if not label_set:
        raise ValueError("Label set is empty")
    verbalizers = verbalizers or {}
    haystack = raw.lower()
    best = None
    for label in label_set:
        surface = verbalizers.get(label, label).lower()
        pos = haystack.find(surface) if surface else -1
        if pos >= 0:
            key = (pos, -len(surface))
            if best is None or key < best[0]:
                best = (key, label)
    return best[1] if best else None


class ClassScore(NamedTuple):
    """Precision, recall and F1 of one class, and its gold count."""

    precision: float
    recall: float
    f1: float
    support: int


def _as_tags(seq: TagSequence) -> List[TagLabel]:
    return [tag if isinstance(tag, TagLabel) else TagLabel(tag) for tag in seq]


def _check_lengths(gold: Sequence, pred: Sequence) -> None:
    if len(gold) != len(pred):
        raise MetricError(f"{len(gold)} gold items but {len(pred)} predictions")


def per_class_scores(
    gold: Sequence[TagSequence], pred: Sequence[TagSequence]
) -> Dict[str, ClassScore]:
    """Token-level scores of each tag class that occurs in `gold` or `pred`.
    Undefined precision or recall is 0.

    Args:
        gold: Gold tag sequences.
        pred: Predicted tag sequences, each as long as its gold sequence.

    Returns:
        Dict of tag value to ClassScore, in tag declaration order.

    Raises:
        MetricError if the numbers of sequences or the lengths of a pair of
        sequences differ.
    """
    _check_lengths(gold, pred)
    support: Counter = Counter()
    predicted: Counter = Counter()
    correct: Counter = Counter()
    for index, (gold_seq, pred_seq) in enumerate(zip(gold, pred)):
        if len(gold_seq) != len(pred_seq):
            raise MetricError(
                f"Example {index}: {len(gold_seq)} gold tags but {len(pred_seq)} predicted",
                index,
            )
        for g, p in zip(_as_tags(gold_seq), _as_tags(pred_seq)):
            support[g] += 1
            predicted[p] += 1
            if g is p:
                correct[g] += 1
    scores = {}
    for tag in TagLabel:
        if not (support[tag] or predicted[tag]):
            continue
        precision = correct[tag] / predicted[tag] if predicted[tag] else 0.0
        recall = correct[tag] / support[tag] if support[tag] else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        scores[tag.value] = ClassScore(precision, recall, f1, support[tag])
    return scores


def macro_f1(gold: Sequence[TagSequence], pred: Sequence[TagSequence]) -> float:
    """Unweighted mean F1 over the tag classes present in gold or
    predictions. 0.0 if there are none (empty input).

    Raises:
        MetricError on length mismatches (see :func:`per_class_scores`).
    """
    scores = per_class_scores(gold, pred)
    if not scores:
        return 0.0
    return sum(score.f1 for score in scores.values()) / len(scores)


def accuracy(gold: Sequence[str], pred: Sequence[Prediction]) -> float:
    """Fraction of predictions equal to the gold label; None is wrong.
    0.0 for empty input.

    Raises:
        MetricError if the lengths differ.
    """
    _check_lengths(gold, pred)
    if not gold:
        return 0.0
    return sum(1 for g, p in zip(gold, pred) if p is not None and g == p) / len(gold)


@dataclass(frozen=True)
class MetricReport:
    """Score of one (task, language, mode) evaluation.

    `score` is 100 x macro-F1 for sequential labeling and 100 x accuracy for
    classification. `per_class` is empty for classification. `n_examples` is
    0 for reports read from a score table, where it is unknown.
    """

    task: TaskKind
    language: LanguageTag
    mode: PromptMode
    score: float
    n_examples: int = 0
    n_unparsed: int = 0
    per_class: Dict[str, ClassScore] = field(default_factory=dict)
    model: Optional[str] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "task", enum_value(TaskKind, self.task))
        object.__setattr__(self, "mode", enum_value(PromptMode, self.mode))
        if not isinstance(self.language, LanguageTag):
            object.__setattr__(self, "language", LanguageTag.parse(str(self.language)))
        if not 0.0 <= self.score <= 100.0:
            raise ValueError(f"Score must be in [0, 100]: {self.score}")
        if (
            self.n_examples < 0
            or self.n_unparsed < 0
            or (self.n_examples and self.n_unparsed > self.n_examples)
        ):
            raise ValueError(
                f"Invalid counts: n_examples={self.n_examples}, n_unparsed={self.n_unparsed}"
            )
        if self.task is TaskKind.CLS and self.per_class:
            raise ValueError("Classification reports have no per-class scores")

    def to_dict(self) -> Dict[str, Any]:
        return dict(
            task=self.task.value,
            language=str(self.language),
            mode=self.mode.value,
            score=self.score,
            n_examples=self.n_examples,
            n_unparsed=self.n_unparsed,
            per_class={label: score._asdict() for label, score in self.per_class.items()},
            model=self.model,
            metadata=dict(self.metadata),
        )

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "MetricReport":
        """Inverse of :meth:`to_dict`.

        Raises:
            ValueError if a field is missing or invalid.
        """
        try:
            return cls(
                task=TaskKind(data["task"]),
                language=LanguageTag.parse(data["language"]),
                mode=PromptMode(data["mode"]),
                score=float(data["score"]),
                n_examples=int(data.get("n_examples", 0)),
                n_unparsed=int(data.get("n_unparsed", 0)),
                per_class={
                    label: ClassScore(
                        float(s["precision"]), float(s["recall"]), float(s["f1"]), int(s["support"])
                    )
                    for label, s in (data.get("per_class") or {}).items()
                },
                model=data.get("model"),
                metadata=dict(data.get("metadata") or {}),
            )
        except (KeyError, TypeError) as err:
            raise ValueError(f"Invalid metric report: {err!r}") from err


def score_predictions(
    task: TaskKindArg,
    language: Union[str, LanguageTag],
    mode: PromptModeArg,
    gold: Sequence,
    pred: Sequence,
    n_unparsed: Optional[int] = None,
    model: Optional[str] = None,
    metadata: Optional[Mapping[str, Any]] = None,
) -> MetricReport:
    """Score predictions and build a MetricReport.

    Args:
        task: The task kind.
        language: The language tag.
        mode: The prompt mode.
        gold: Gold tag sequences or labels.
        pred: Predicted tag sequences or labels (None for unparsed).
        n_unparsed: Number of unparsable completions. Counted from `pred`
            for classification when not given.
        model: Model name.
        metadata: Extra information to record.

    Raises:
        MetricError if gold and predictions do not line up.
    """
    task = enum_value(TaskKind, task)
    if task is TaskKind.SEQLAB:
        per_class = per_class_scores(gold, pred)
        value = sum(s.f1 for s in per_class.values()) / len(per_class) if per_class else 0.0
    else:
        per_class = {}
        value = accuracy(gold, pred)
        if n_unparsed is None:
            n_unparsed = sum(1 for p in pred if p is None)
    return MetricReport(
        task,
        language if isinstance(language, LanguageTag) else LanguageTag.parse(language),
        enum_value(PromptMode, mode),
        100.0 * value,
        len(gold),
        n_unparsed or 0,
        per_class,
        model,
        dict(metadata or {}),
    )
