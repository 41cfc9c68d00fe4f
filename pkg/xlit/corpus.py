# -*- coding: utf-8 -*-
"""Loading and writing of evaluation datasets and precomputed embeddings.

Three on-disk formats are supported, all UTF-8:

* Sequential labeling: one ``token<TAB>tag`` per line, sentences separated
  by blank lines. A line ``# id: <id>`` before a sentence sets its id;
  other ``#`` lines without a tab are comments.
* Classification: ``id<TAB>label<TAB>text`` rows. An empty id field gets a
  generated id.
* Embeddings: ``id<TAB>v1,v2,...,vd`` rows of decimal floats.

Blank lines and lines starting with ``#`` are skipped in the last two formats.
Examples without an explicit id are given ``<file stem>:<record index>``.
"""
import logging
from pathlib import Path
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union
import numpy as np
from xlit.types import PathLike, TagLabel, TaskKind
from xlit.utils import read_delimited, read_lines, write_lines


LOG = logging.getLogger(__name__)


SIB200_LABELS: Tuple[str, ...] = (
    "science/technology",
    "travel",
    "politics",
    "sports",
    "health",
    "entertainment",
    "geography",
)
"""Topic labels of the SIB-200 topic classification benchmark."""

TAXI1500_LABELS: Tuple[str, ...] = (
    "Recommendation",
    "Faith",
    "Description",
    "Sin",
    "Grace",
    "Violence",
)
"""Labels of the Taxi1500 Bible-verse classification benchmark."""

LABEL_SETS: Dict[str, Tuple[str, ...]] = {
    "sib200": SIB200_LABELS,
    "taxi1500": TAXI1500_LABELS,
}

ID_PREFIX = "# id:"

EmbeddingVector = np.ndarray
"""A read-only 1-d float64 array."""


class CorpusFormatError(ValueError):
    """Raised when a dataset or embedding file is malformed."""


class SeqLab(NamedTuple):
    """A tagged sentence."""

    tokens: Tuple[str, ...]
    tags: Tuple[TagLabel, ...]

    @property
    def text(self) -> str:
        return " ".join(self.tokens)


class Cls(NamedTuple):
    """A labeled text."""

    text: str
    label: str


Payload = Union[SeqLab, Cls]


class Example(NamedTuple):
    """One dataset item."""

    id: str
    payload: Payload

    @property
    def task(self) -> TaskKind:
        return TaskKind.SEQLAB if isinstance(self.payload, SeqLab) else TaskKind.CLS

    @property
    def text(self) -> str:
        """The example text; tokens are joined by single spaces."""
        return self.payload.text

    @property
    def gold(self) -> Union[Tuple[TagLabel, ...], str]:
        """The gold tags or label."""
        if isinstance(self.payload, SeqLab):
            return self.payload.tags
        return self.payload.label


def seqlab_example(example_id: str, tokens: Sequence[str], tags: Sequence[Union[str, TagLabel]]) -> Example:
    """Convenience constructor for sequential-labeling examples.

    Raises:
        ValueError if the lengths differ, the sentence is empty or a tag is
        unknown.
    """
    if len(tokens) != len(tags):
        raise ValueError(
            f"Example {example_id}: {len(tokens)} tokens but {len(tags)} tags"
        )
    if not tokens:
        raise ValueError(f"Example {example_id}: empty sentence")
    return Example(example_id, SeqLab(tuple(tokens), tuple(TagLabel(tag) for tag in tags)))


def cls_example(example_id: str, text: str, label: str) -> Example:
    """Convenience constructor for classification examples."""
    if not text:
        raise ValueError(f"Example {example_id}: empty text")
    return Example(example_id, Cls(text, label))


def resolve_label_set(value: Union[str, Sequence[str]]) -> Tuple[str, ...]:
    """Resolve a label set given by name ('sib200', 'taxi1500') or as a
    comma-separated list or sequence of labels.

    Raises:
        ValueError if the set is empty or has duplicates.
    """
    if isinstance(value, str):
        if value.lower() in LABEL_SETS:
            return LABEL_SETS[value.lower()]
        labels = tuple(label.strip() for label in value.split(",") if label.strip())
    else:
        labels = tuple(value)
    if not labels:
        raise ValueError("Label set is empty")
    if len(set(labels)) != len(labels):
        raise ValueError(f"Label set has duplicates: {', '.join(labels)}")
    return labels


def _default_id(path: Path, index: int) -> str:
    return f"{path.stem}:{index}"


def load_seqlab(file: PathLike) -> List[Example]:
    """Load a sequential-labeling file.

    Args:
        file: Path to the file ('-' for stdin).

    Returns:
        A list of examples in file order.

    Raises:
        CorpusFormatError if a line is not token<TAB>tag, a tag is unknown,
        an id is repeated or an id line is misplaced. The message names the
        file, the sentence index and the line number.
    """
    path = Path(str(file))
    examples: List[Example] = []
    seen_ids = set()
    tokens: List[str] = []
    tags: List[TagLabel] = []
    explicit_id: Optional[str] = None

    def error(lineno, msg):
        return CorpusFormatError(f"{file}, sentence {len(examples)} (line {lineno}): {msg}")

    def finish(lineno):
        nonlocal tokens, tags, explicit_id
        if tokens:
            example_id = explicit_id if explicit_id is not None else _default_id(path, len(examples))
            if example_id in seen_ids:
                raise error(lineno, f"duplicate id {example_id!r}")
            seen_ids.add(example_id)
            examples.append(Example(example_id, SeqLab(tuple(tokens), tuple(tags))))
        elif explicit_id is not None:
            raise error(lineno, f"id {explicit_id!r} is not followed by a sentence")
        tokens, tags, explicit_id = [], [], None

    lineno = 0
    for lineno, line in enumerate(read_lines(file), 1):
        if not line.strip():
            finish(lineno)
            continue
        if line.startswith("#") and "\t" not in line:
            if line.startswith(ID_PREFIX):
                if tokens:
                    raise error(lineno, "id line inside a sentence")
                if explicit_id is not None:
                    raise error(lineno, "two id lines for one sentence")
                explicit_id = line[len(ID_PREFIX):].strip()
                if not explicit_id:
                    raise error(lineno, "empty id")
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise error(
                lineno,
                f"token/tag length mismatch: expected token<TAB>tag, got {len(fields)} field(s)"
            )
        token, tag = fields
        if not token:
            raise error(lineno, "empty token")
        try:
            tags.append(TagLabel(tag.strip()))
        except ValueError:
            raise error(lineno, f"unknown tag {tag!r}") from None
        tokens.append(token)
    finish(lineno + 1)
    LOG.debug("Loaded %d sentences from %s", len(examples), file)
    return examples


def load_cls(file: PathLike, label_set: Sequence[str]) -> List[Example]:
    """Load a classification file.

    Args:
        file: Path to the file ('-' for stdin).
        label_set: The allowed labels.

    Returns:
        A list of examples in file order.

    Raises:
        CorpusFormatError if a row does not have 3 fields, the text is
        empty, the label is not in `label_set` or an id is repeated.
    """
    path = Path(str(file))
    labels = set(resolve_label_set(label_set))
    examples: List[Example] = []
    seen_ids = set()
    for lineno, fields in read_delimited(file, maxsplit=2):
        index = len(examples)

        def error(msg):
            return CorpusFormatError(f"{file}, record {index} (line {lineno}): {msg}")

        if len(fields) != 3:
            raise error(f"expected id<TAB>label<TAB>text, got {len(fields)} field(s)")
        example_id, label, text = fields
        example_id = example_id.strip() or _default_id(path, index)
        if label not in labels:
            raise error(f"label {label!r} is not in the label set")
        if not text.strip():
            raise error("empty text")
        if example_id in seen_ids:
            raise error(f"duplicate id {example_id!r}")
        seen_ids.add(example_id)
        examples.append(Example(example_id, Cls(text, label)))
    LOG.debug("Loaded %d records from %s", len(examples), file)
    return examples


def load_examples(task: TaskKind, file: PathLike, label_set: Optional[Sequence[str]] = None) -> List[Example]:
    """Load a file of the given task kind."""
    if task is TaskKind.SEQLAB:
        return load_seqlab(file)
    if label_set is None:
        raise ValueError("A label set is required for classification data")
    return load_cls(file, label_set)


def load_embeddings(file: PathLike) -> Dict[str, EmbeddingVector]:
    """Load precomputed sentence embeddings.

    Args:
        file: Path to an ``id<TAB>v1,...,vd`` file.

    Returns:
        Dict mapping example id to a read-only vector. Ids are not checked
        against any corpus here.

    Raises:
        CorpusFormatError if a row is malformed, values are not finite
        floats, dimensions differ, a vector is all zero or an id repeats.
    """
    vectors: Dict[str, EmbeddingVector] = {}
    dimension = None
    for lineno, fields in read_delimited(file):
        index = len(vectors)

        def error(msg):
            return CorpusFormatError(f"{file}, record {index} (line {lineno}): {msg}")

        if len(fields) != 2 or not fields[0]:
            raise error("expected id<TAB>v1,v2,...,vd")
        example_id, values = fields
        try:
            vector = np.array([float(v) for v in values.split(",")], dtype=np.float64)
        except ValueError as err:
            raise error(f"invalid vector: {err}") from None
        if not np.all(np.isfinite(vector)):
            raise error("vector has non-finite values")
        if dimension is None:
            dimension = vector.shape[0]
        elif vector.shape[0] != dimension:
            raise error(f"dimension {vector.shape[0]} differs from {dimension}")
        if not np.any(vector):
            raise error(f"all-zero vector for {example_id!r}")
        if example_id in vectors:
            raise error(f"duplicate id {example_id!r}")
        vector.flags.writeable = False
        vectors[example_id] = vector
    LOG.debug("Loaded %d embeddings from %s", len(vectors), file)
    return vectors


def write_seqlab(examples: Iterable[Example], file: PathLike) -> int:
    """Write sequential-labeling examples, each preceded by its id line.

    Raises:
        ValueError if a token contains a tab or line break.
    """

    def lines():
        for i, example in enumerate(examples):
            if i > 0:
                yield ""
            yield f"{ID_PREFIX} {example.id}"
            for token, tag in zip(example.payload.tokens, example.payload.tags):
                if "\t" in token or "\n" in token:
                    raise ValueError(f"Example {example.id}: token {token!r} has a tab or newline")
                yield f"{token}\t{tag.value}"

    return write_lines(lines(), file, trailing_linesep=True)


def write_cls(examples: Iterable[Example], file: PathLike) -> int:
    """Write classification examples as id<TAB>label<TAB>text rows."""

    def rows():
        for example in examples:
            if "\n" in example.payload.text:
                raise ValueError(f"Example {example.id}: text has a line break")
            yield f"{example.id}\t{example.payload.label}\t{example.payload.text}"

    return write_lines(rows(), file, trailing_linesep=True)


def write_embeddings(vectors: Dict[str, EmbeddingVector], file: PathLike) -> int:
    """Write vectors so that loading them back gives identical floats."""
    return write_lines(
        (
            f"{example_id}\t{','.join(repr(float(v)) for v in vector)}"
            for example_id, vector in vectors.items()
        ),
        file,
        trailing_linesep=True,
    )
