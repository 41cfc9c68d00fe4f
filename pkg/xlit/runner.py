# -*- coding: utf-8 -*-
"""Run configuration and the evaluation pipeline.

A run evaluates one task in one language and prompt mode: it selects
demonstrations for every query, renders prompts, obtains completions from a
backend, parses them and scores the predictions. The results directory holds
three files:

* ``records.jsonl``: one record per query, sorted by id.
* ``metrics.json``: the MetricReport.
* ``config.snapshot``: the effective run config, with absolute paths.
"""
from concurrent.futures import ThreadPoolExecutor
import logging
import os
from pathlib import Path, PurePath
from typing import Any, Callable, Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple
from xlit.corpus import EmbeddingVector, Example, SeqLab, load_embeddings, load_examples, resolve_label_set
from xlit.demos import Fixed, SelectionError, SelectionPolicy, make_policy, select_all
from xlit.llm import CONCURRENCY, Backend, CompletionRequest, make_request, open_backend
from xlit.metrics import MetricReport, find_tags, parse_cls_output, parse_seqlab_output, score_predictions
from xlit.paths import check_writable_dir
from xlit.progress import ITERABLE_PROGRESS
from xlit.prompts import RenderedPrompt, TemplateSet, build_prompt, load_templates
from xlit.romanizer import RomanizerConfig, load_bundled_tables, load_tables, script_of_texts
from xlit.types import (
    COMMON,
    MAX_SEED,
    FallbackPolicy,
    LanguageTag,
    PathLike,
    PromptMode,
    TaskKind,
    enum_value,
)
from xlit.utils import read_dict, sha256_file, to_json, write_dict, write_jsonl, write_lines


LOG = logging.getLogger(__name__)


RECORDS_FILE = "records.jsonl"
METRICS_FILE = "metrics.json"
SNAPSHOT_FILE = "config.snapshot"
PROMPTS_FILE = "prompts.jsonl"

PATH_KEYS = ("eval", "demos", "embeddings", "cassette", "tables", "templates")
REPLAY_PREFIX = "replay:"
TRUE_VALUES = frozenset(("1", "true", "yes", "on"))
FALSE_VALUES = frozenset(("0", "false", "no", "off"))
DEFAULT_SHOTS = 3
SIB200_SHOTS = 7
"""Topic classification on SIB-200 uses 7 demonstrations by default."""


class ConfigError(ValueError):
    """Raised when a run config is invalid.

    Args:
        errors: One 'field: problem' message per violated field.
    """

    def __init__(self, errors: Sequence[str]) -> None:
        self.errors = list(errors)
        super().__init__("Invalid run config: " + "; ".join(self.errors))


def _parse_bool(value: str) -> bool:
    lowered = value.strip().lower()
    if lowered in TRUE_VALUES:
        return True
    if lowered in FALSE_VALUES:
        return False
    raise ValueError(f"expected true or false, got {value!r}")


def _parse_positive(value: str) -> int:
    number = int(value)
    if number < 1:
        raise ValueError(f"must be a positive integer, got {number}")
    return number


def _parse_seed(value: str) -> int:
    seed = int(value)
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"must be in [0, 2**64), got {seed}")
    return seed


def _parse_ids(value: str) -> Tuple[str, ...]:
    return tuple(i.strip() for i in value.split(",") if i.strip())


def resolve_values(values: Mapping[str, str], base_dir: PathLike) -> Dict[str, str]:
    """Make the path-valued entries of `values` absolute, relative to
    `base_dir`. A ``replay:`` backend spec counts as a path.
    """
    base = Path(base_dir)
    resolved = dict(values)
    for key in PATH_KEYS:
        if resolved.get(key):
            resolved[key] = str((base / Path(resolved[key]).expanduser()).absolute())
    backend = resolved.get("backend")
    if backend and backend.startswith(REPLAY_PREFIX):
        target = backend[len(REPLAY_PREFIX):]
        resolved["backend"] = REPLAY_PREFIX + str((base / Path(target).expanduser()).absolute())
    return resolved


class RunConfig:
    """Settings of one run. Use :meth:`from_dict` or :meth:`from_file` to
    build one from key=value strings; every invalid field is reported at
    once.

    Path attributes are absolute.
    """

    FIELDS = (
        "task", "language", "mode", "policy", "shots", "attempts", "pool",
        "fixed_ids", "seed", "eval", "demos", "labels", "embeddings", "backend",
        "cassette", "model", "tables", "templates", "fallback", "lowercase",
        "concurrency", "max_new_tokens", "max_prompt_chars",
    )
    REQUIRED = ("task", "language", "mode", "eval", "demos")

    def __init__(self) -> None:
        self.task: TaskKind = TaskKind.SEQLAB
        self.language: Optional[LanguageTag] = None
        self.mode: PromptMode = PromptMode.ORIG
        self.policy_name = "random"
        self.shots: Optional[int] = None
        self.attempts = 8
        self.pool = 10
        self.fixed_ids: Tuple[str, ...] = ()
        self.seed = 0
        self.eval: Optional[Path] = None
        self.demos: Optional[Path] = None
        self.labels: Optional[Tuple[str, ...]] = None
        self.label_set_name: Optional[str] = None
        self.embeddings: Optional[Path] = None
        self.backend: Optional[str] = None
        self.cassette: Optional[Path] = None
        self.model: Optional[str] = None
        self.tables: Optional[Path] = None
        self.templates: Optional[Path] = None
        self.fallback = FallbackPolicy.DECOMPOSE_STRIP
        self.lowercase = False
        self.concurrency = CONCURRENCY.concurrency
        self.max_new_tokens: Optional[int] = None
        self.max_prompt_chars: Optional[int] = None
        self.policy: Optional[SelectionPolicy] = None

    @classmethod
    def from_dict(cls, values: Mapping[str, str]) -> "RunConfig":
        """Build a config from string values. Paths must already be
        resolved (see :func:`resolve_values`).

        Raises:
            ConfigError listing every invalid, missing or unknown field.
        """
        config = cls()
        errors: List[str] = []
        values = {k: v for k, v in values.items() if v is not None and str(v).strip() != ""}

        for key in sorted(set(values) - set(cls.FIELDS)):
            errors.append(f"{key}: unknown key")
        for key in cls.REQUIRED:
            if key not in values:
                errors.append(f"{key}: required")

        parsers: Dict[str, Tuple[str, Callable[[str], Any]]] = dict(
            task=("task", lambda v: enum_value(TaskKind, v)),
            language=("language", LanguageTag.parse),
            mode=("mode", lambda v: enum_value(PromptMode, v)),
            policy=("policy_name", str),
            shots=("shots", _parse_positive),
            attempts=("attempts", _parse_positive),
            pool=("pool", _parse_positive),
            fixed_ids=("fixed_ids", _parse_ids),
            seed=("seed", _parse_seed),
            eval=("eval", Path),
            demos=("demos", Path),
            embeddings=("embeddings", Path),
            backend=("backend", str),
            cassette=("cassette", Path),
            model=("model", str),
            tables=("tables", Path),
            templates=("templates", Path),
            fallback=("fallback", lambda v: enum_value(FallbackPolicy, v)),
            lowercase=("lowercase", _parse_bool),
            concurrency=("concurrency", _parse_positive),
            max_new_tokens=("max_new_tokens", _parse_positive),
            max_prompt_chars=("max_prompt_chars", _parse_positive),
        )
        invalid = set()
        for key, (attr, parse) in parsers.items():
            if key in values:
                try:
                    setattr(config, attr, parse(str(values[key]).strip()))
                except ValueError as err:
                    invalid.add(key)
                    errors.append(f"{key}: {err}")
        if "labels" in values:
            try:
                config.labels = resolve_label_set(values["labels"])
                if values["labels"].lower() in ("sib200", "taxi1500"):
                    config.label_set_name = values["labels"].lower()
            except ValueError as err:
                errors.append(f"labels: {err}")

        errors.extend(config._check(values, task_known="task" in values and "task" not in invalid))
        if errors:
            raise ConfigError(errors)
        return config

    def _check(self, values: Mapping[str, str], task_known: bool = True) -> List[str]:
        errors = []
        # label checks depend on the task kind
        if task_known and self.task is TaskKind.CLS and "labels" not in values:
            errors.append("labels: required for classification")
        if task_known and self.task is TaskKind.SEQLAB and "labels" in values:
            errors.append("labels: not used for sequential labeling")
        for key in ("eval", "demos", "embeddings"):
            path = getattr(self, key)
            if path is not None and not Path(path).is_file():
                errors.append(f"{key}: {path} does not exist")
        for key in ("tables", "templates"):
            path = getattr(self, key)
            if path is not None and not Path(path).is_dir():
                errors.append(f"{key}: {path} is not a directory")
        if self.shots is None:
            self.shots = SIB200_SHOTS if self.label_set_name == "sib200" else DEFAULT_SHOTS
        if self.policy_name == "retrieve" and self.embeddings is None:
            errors.append("embeddings: required by the retrieve policy")
        if self.policy_name == "fixed" and not self.fixed_ids:
            errors.append("fixed_ids: required by the fixed policy")
        if self.backend is not None:
            kind, sep, target = self.backend.partition(":")
            if not sep or not target or kind not in ("live", "replay"):
                errors.append(f"backend: expected live:<url> or replay:<file>, got {self.backend!r}")
        try:
            self.policy = make_policy(
                self.policy_name, self.shots, self.attempts, self.pool, self.fixed_ids
            )
        except ValueError as err:
            errors.append(f"policy: {err}")
        return errors

    @classmethod
    def from_file(
        cls, path: PathLike, overrides: Optional[Mapping[str, Optional[str]]] = None
    ) -> "RunConfig":
        """Read a key=value config file. Relative paths in the file are
        resolved against its directory; relative paths in `overrides`
        against the working directory.

        Raises:
            IOError if the file cannot be read.
            ConfigError if the config is invalid.
        """
        path = Path(path)
        try:
            values = read_dict(path)
        except ValueError as err:
            raise ConfigError([f"{path}: {err}"]) from None
        values = resolve_values(values, path.absolute().parent)
        if overrides:
            values.update(
                resolve_values(
                    {k: str(v) for k, v in overrides.items() if v is not None}, os.getcwd()
                )
            )
        return cls.from_dict(values)

    def to_dict(self) -> Dict[str, str]:
        """The config as key=value strings; unset fields are omitted."""
        values: Dict[str, Any] = dict(
            task=self.task.value,
            language=str(self.language),
            mode=self.mode.value,
            policy=self.policy_name,
            shots=self.shots,
            attempts=self.attempts,
            pool=self.pool,
            fixed_ids=",".join(self.fixed_ids) or None,
            seed=self.seed,
            eval=self.eval,
            demos=self.demos,
            labels=self.label_set_name or (",".join(self.labels) if self.labels else None),
            embeddings=self.embeddings,
            backend=self.backend,
            cassette=self.cassette,
            model=self.model,
            tables=self.tables,
            templates=self.templates,
            fallback=self.fallback.value,
            lowercase="true" if self.lowercase else "false",
            concurrency=self.concurrency,
            max_new_tokens=self.max_new_tokens,
            max_prompt_chars=self.max_prompt_chars,
        )
        return {key: str(value) for key, value in values.items() if value is not None}

    def snapshot(self, path: PathLike) -> None:
        """Write the config so that :meth:`from_file` reproduces it."""
        write_dict(self.to_dict(), path)

    def __repr__(self) -> str:
        return f"RunConfig({self.task.value}, {self.language}, {self.mode.value}, {self.policy})"


class RunInputs(NamedTuple):
    """Everything a run reads from disk."""

    romanizer: RomanizerConfig
    templates: TemplateSet
    queries: List[Example]
    demos: List[Example]
    embeddings: Optional[Dict[str, EmbeddingVector]]


class PlannedQuery(NamedTuple):
    query: Example
    prompt: RenderedPrompt
    request: CompletionRequest


def load_inputs(config: RunConfig) -> RunInputs:
    """Load tables, templates, datasets and embeddings, and check that the
    evaluation data is written in the language tag's script.

    Raises:
        ConfigError if fixed demonstration ids are not in the demo pool.
    """
    if config.tables is not None:
        romanizer = load_tables(config.tables, config.fallback, config.lowercase)
    else:
        romanizer = load_bundled_tables(config.fallback, config.lowercase)
    templates = load_templates(config.templates, config.task, config.labels)
    queries = load_examples(config.task, config.eval, config.labels)
    demos = load_examples(config.task, config.demos, config.labels)
    embeddings = load_embeddings(config.embeddings) if config.embeddings else None

    detected = script_of_texts(example.text for example in queries)
    if detected not in (COMMON, config.language.script):
        LOG.warning(
            "Evaluation data for %s is mostly written in %s, not %s",
            config.language, detected, config.language.script
        )
    if isinstance(config.policy, Fixed):
        try:
            config.policy.check(demos)
        except SelectionError as err:
            raise ConfigError([f"fixed_ids: {err}"]) from None
    return RunInputs(romanizer, templates, queries, demos, embeddings)


def plan(config: RunConfig, inputs: RunInputs) -> List[PlannedQuery]:
    """Select demonstrations and render the prompt and request of every
    query, in id order.
    """
    selections = select_all(config.policy, inputs.queries, inputs.demos, inputs.embeddings, config.seed)
    by_id = {query.id: query for query in inputs.queries}
    planned = []
    for query_id, demos in selections.items():
        query = by_id[query_id]
        prompt = build_prompt(inputs.templates, config.mode, demos, query, inputs.romanizer)
        request = make_request(
            prompt.text, config.task, prompt.query_token_count, config.max_new_tokens
        )
        planned.append(PlannedQuery(query, prompt, request))
    return planned


def prompts(config: RunConfig, output_dir: PathLike) -> Path:
    """Render every query prompt to ``prompts.jsonl`` without calling a
    backend.

    Returns:
        Path of the prompts file.
    """
    inputs = load_inputs(config)
    output = Path(check_writable_dir(output_dir)) / PROMPTS_FILE
    write_jsonl(
        (
            dict(
                id=item.query.id,
                mode=config.mode.value,
                demo_ids=list(item.prompt.demo_ids),
                request_hash=item.request.hash,
                prompt=item.prompt.text,
            )
            for item in plan(config, inputs)
        ),
        output,
    )
    return output


def complete_all(
    backend: Backend, requests: Sequence[CompletionRequest], concurrency: int
) -> List[str]:
    """Complete `requests` with up to `concurrency` in flight.

    Returns:
        The completion texts, in request order.

    Raises:
        BackendError from the first failed request, in request order.
    """
    with ThreadPoolExecutor(max_workers=concurrency) as executor:
        futures = [executor.submit(backend.complete, request) for request in requests]
        try:
            return [result.text for result in ITERABLE_PROGRESS.results(futures)]
        except BaseException:
            for future in futures:
                future.cancel()
            raise


def _parse_completion(inputs: RunInputs, query: Example, text: str) -> Tuple[Any, bool]:
    if isinstance(query.payload, SeqLab):
        tags = parse_seqlab_output(text, len(query.payload.tokens))
        return tags, not find_tags(text)
    label = parse_cls_output(text, inputs.templates.labels, inputs.templates.verbalizers)
    return label, label is None


def _serialize(value: Any) -> Any:
    if isinstance(value, (tuple, list)):
        return [str(v) for v in value]
    return value


def run_metadata(config: RunConfig) -> Dict[str, Any]:
    metadata: Dict[str, Any] = dict(policy=config.policy.describe(), seed=config.seed)
    if config.embeddings is not None:
        metadata["embeddings"] = dict(
            name=PurePath(config.embeddings).name, sha256=sha256_file(config.embeddings)
        )
    return metadata


def run(
    config: RunConfig, output_dir: PathLike, backend: Optional[Backend] = None
) -> MetricReport:
    """Run an evaluation and write the results directory.

    Args:
        config: The run config.
        output_dir: The results directory; created if necessary.
        backend: The completion backend. Defaults to the one named by
            ``config.backend``.

    Returns:
        The MetricReport.

    Raises:
        ConfigError if no backend is configured.
        BackendError if a completion cannot be obtained.
    """
    if backend is None and config.backend is None:
        raise ConfigError(["backend: required to run"])
    inputs = load_inputs(config)
    planned = plan(config, inputs)
    output = Path(check_writable_dir(output_dir))

    owns_backend = backend is None
    if owns_backend:
        backend = open_backend(
            config.backend,
            config.cassette,
            model=config.model,
            concurrency=config.concurrency,
            max_prompt_chars=config.max_prompt_chars,
        )
    try:
        texts = complete_all(backend, [item.request for item in planned], config.concurrency)
    finally:
        if owns_backend:
            backend.close()

    records = []
    gold = []
    predictions = []
    n_unparsed = 0
    for item, text in zip(planned, texts):
        prediction, unparsed = _parse_completion(inputs, item.query, text)
        n_unparsed += unparsed
        gold.append(item.query.gold)
        predictions.append(prediction)
        records.append(
            dict(
                id=item.query.id,
                demo_ids=list(item.prompt.demo_ids),
                request_hash=item.request.hash,
                completion=text,
                prediction=_serialize(prediction),
                gold=_serialize(item.query.gold),
            )
        )

    report = score_predictions(
        config.task,
        config.language,
        config.mode,
        gold,
        predictions,
        n_unparsed,
        config.model,
        run_metadata(config),
    )
    write_jsonl(records, output / RECORDS_FILE)
    write_lines([to_json(report.to_dict())], output / METRICS_FILE, trailing_linesep=True)
    config.snapshot(output / SNAPSHOT_FILE)
    LOG.info(
        "%s %s (%s, %s): score %.1f over %d examples, %d unparsed",
        config.task.value, config.language, config.mode.label, config.policy,
        report.score, report.n_examples, report.n_unparsed
    )
    return report
