# -*- coding: utf-8 -*-
"""Aggregation of per-language scores into per-mode averages, overall or per
script, and rendering of the results as TSV, JSON lines or Markdown.

Averages are unweighted means over languages. Values are kept at full
precision; only Markdown output is rounded (to one decimal).
"""
from collections import defaultdict
import json
import math
from pathlib import Path
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union
from xlit.metrics import MetricReport
from xlit.paths import check_path
from xlit.types import (
    Grouping,
    GroupingArg,
    LanguageTag,
    PathLike,
    PromptMode,
    ReportFormat,
    ReportFormatArg,
    TaskKind,
    enum_value,
)
from xlit.utils import read_delimited, read_jsonl, to_json


ALL_LANGUAGES = "all"
"""Group name of the row averaging over every language."""
METRICS_FILE = "metrics.json"
TSV_HEADER = ("grouping", "mode", "mean_score", "n_languages")
SCORE_TABLE_HEADER = ("language",) + tuple(mode.label for mode in PromptMode.ordered())
MISSING = ("", "-")


class ReportError(ValueError):
    """Raised for invalid aggregation input or output formats."""


class AggregateRow(NamedTuple):
    """Mean score of one group of languages in one mode."""

    grouping: str
    """'all' or a script code."""
    mode: PromptMode
    mean_score: float
    n_languages: int

    def to_dict(self) -> Dict[str, Union[str, float, int]]:
        return dict(
            grouping=self.grouping,
            mode=self.mode.label,
            mean_score=self.mean_score,
            n_languages=self.n_languages,
        )

    @classmethod
    def from_dict(cls, data: Dict) -> "AggregateRow":
        return cls(
            str(data["grouping"]),
            enum_value(PromptMode, data["mode"]),
            float(data["mean_score"]),
            int(data["n_languages"]),
        )


def _check_reports(reports: Sequence[MetricReport]) -> TaskKind:
    if not reports:
        raise ReportError("No reports to aggregate")
    tasks = {report.task for report in reports}
    if len(tasks) > 1:
        raise ReportError(
            f"Reports mix task kinds: {', '.join(sorted(t.value for t in tasks))}"
        )
    seen = set()
    for report in reports:
        key = (report.language, report.mode)
        if key in seen:
            raise ReportError(f"Duplicate report for {report.language} in {report.mode.label} mode")
        seen.add(key)
    return tasks.pop()


def aggregate(reports: Sequence[MetricReport], grouping: GroupingArg = Grouping.ALL) -> List[AggregateRow]:
    """Average scores per (group, mode).

    Args:
        reports: Per-language reports of one task kind; at most one per
            (language, mode).
        grouping: 'all' for one group, 'script' for one group per script.

    Returns:
        Rows ordered by group (script code ascending) then mode (Orig, Latn,
        Combined).

    Raises:
        ReportError if `reports` is empty, mixes task kinds or has
        duplicates.
    """
    grouping = enum_value(Grouping, grouping)
    reports = list(reports)
    _check_reports(reports)
    scores: Dict[Tuple[str, PromptMode], List[float]] = defaultdict(list)
    for report in reports:
        group = ALL_LANGUAGES if grouping is Grouping.ALL else str(report.language.script)
        scores[(group, report.mode)].append(report.score)
    order = {mode: i for i, mode in enumerate(PromptMode.ordered())}
    return [
        AggregateRow(group, mode, math.fsum(values) / len(values), len(values))
        for (group, mode), values in sorted(scores.items(), key=lambda kv: (kv[0][0], order[kv[0][1]]))
    ]


def _best(values: Dict[PromptMode, float]) -> Optional[PromptMode]:
    best = None
    for mode in PromptMode.ordered():
        if mode in values and (best is None or values[mode] > values[best]):
            best = mode
    return best


def _markdown_table(header: Sequence[str], lines: Iterable[Sequence[str]]) -> List[str]:
    out = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    out.extend("| " + " | ".join(line) + " |" for line in lines)
    return out


def _mode_cells(values: Dict[PromptMode, float]) -> List[str]:
    best = _best(values)
    cells = []
    for mode in PromptMode.ordered():
        if mode not in values:
            cells.append("-")
        elif mode is best:
            cells.append(f"**{values[mode]:.1f}**")
        else:
            cells.append(f"{values[mode]:.1f}")
    return cells


def _render_markdown(rows: Sequence[AggregateRow], per_language: Sequence[MetricReport]) -> str:
    groups: Dict[str, Dict[PromptMode, float]] = {}
    counts: Dict[str, int] = defaultdict(int)
    for row in rows:
        groups.setdefault(row.grouping, {})[row.mode] = row.mean_score
        counts[row.grouping] = max(counts[row.grouping], row.n_languages)
    header = ("group",) + SCORE_TABLE_HEADER[1:] + ("languages",)
    lines = _markdown_table(
        header,
        ([group] + _mode_cells(values) + [str(counts[group])] for group, values in groups.items()),
    )
    if per_language:
        languages: Dict[str, Dict[PromptMode, float]] = defaultdict(dict)
        for report in per_language:
            languages[str(report.language)][report.mode] = report.score
        lines.append("")
        lines.extend(
            _markdown_table(
                SCORE_TABLE_HEADER,
                ([language] + _mode_cells(languages[language]) for language in sorted(languages)),
            )
        )
    return "\n".join(lines) + "\n"


def render_report(
    rows: Sequence[AggregateRow],
    per_language: Sequence[MetricReport] = (),
    format: ReportFormatArg = ReportFormat.TSV,
) -> str:
    """Render aggregate rows.

    Args:
        rows: Rows from :func:`aggregate`.
        per_language: The reports the rows came from; shown as a second
            table in Markdown output.
        format: 'tsv', 'jsonl' or 'md'. TSV and JSON lines keep full
            precision and can be read back with :func:`parse_rows`. Markdown
            rounds to one decimal and bolds the best mode of each group
            (the earlier mode on ties).

    Returns:
        The document, ending with a newline.

    Raises:
        ReportError if `rows` is empty or the format is unknown.
    """
    try:
        format = enum_value(ReportFormat, format)
    except ValueError as err:
        raise ReportError(str(err)) from None
    if not rows:
        raise ReportError("No rows to render")
    if format is ReportFormat.TSV:
        lines = ["\t".join(TSV_HEADER)]
        lines.extend(
            f"{row.grouping}\t{row.mode.label}\t{row.mean_score!r}\t{row.n_languages}"
            for row in rows
        )
        return "\n".join(lines) + "\n"
    if format is ReportFormat.JSONL:
        return "".join(to_json(row.to_dict()) + "\n" for row in rows)
    return _render_markdown(rows, per_language)


def parse_rows(document: str, format: ReportFormatArg = ReportFormat.TSV) -> List[AggregateRow]:
    """Read rows back from a TSV or JSON-lines document.

    Raises:
        ReportError if the document is malformed or the format is not
        tsv/jsonl.
    """
    try:
        format = enum_value(ReportFormat, format)
        if format is ReportFormat.TSV:
            lines = [line for line in document.splitlines() if line]
            if not lines or tuple(lines[0].split("\t")) != TSV_HEADER:
                raise ReportError("Missing TSV header")
            rows = []
            for line in lines[1:]:
                fields = line.split("\t")
                if len(fields) != len(TSV_HEADER):
                    raise ReportError(f"Expected {len(TSV_HEADER)} fields: {line!r}")
                rows.append(AggregateRow.from_dict(dict(zip(TSV_HEADER, fields))))
            return rows
        if format is ReportFormat.JSONL:
            return [
                AggregateRow.from_dict(json.loads(line))
                for line in document.splitlines()
                if line.strip()
            ]
    except (KeyError, TypeError, ValueError) as err:
        if isinstance(err, ReportError):
            raise
        raise ReportError(f"Cannot parse rows: {err}") from err
    raise ReportError(f"Rows cannot be parsed from {format.value} documents")


def read_score_table(path: PathLike) -> List[MetricReport]:
    """Read a score table: optional ``# task: <kind>`` and ``# model:
    <name>`` lines, a ``language<TAB>Orig<TAB>Latn<TAB>Combined`` header and
    one row per language. Empty or '-' cells are missing scores.

    Raises:
        ReportError if the table is malformed.
    """
    task = TaskKind.SEQLAB
    model = None
    header = None
    reports = []
    for lineno, fields in read_delimited(path, skip_comments=False):
        if fields[0].startswith("#"):
            key, _, value = "\t".join(fields)[1:].partition(":")
            key = key.strip().lower()
            if key == "task":
                try:
                    task = TaskKind(value.strip())
                except ValueError:
                    raise ReportError(f"{path}, line {lineno}: unknown task {value.strip()!r}") from None
            elif key == "model":
                model = value.strip() or None
            continue
        if header is None:
            if fields[0] != "language":
                raise ReportError(f"{path}, line {lineno}: expected a 'language' header")
            try:
                header = [enum_value(PromptMode, name) for name in fields[1:]]
            except ValueError as err:
                raise ReportError(f"{path}, line {lineno}: {err}") from None
            continue
        if len(fields) != len(header) + 1:
            raise ReportError(f"{path}, line {lineno}: expected {len(header) + 1} fields")
        try:
            language = LanguageTag.parse(fields[0])
            for mode, cell in zip(header, fields[1:]):
                if cell.strip() in MISSING:
                    continue
                reports.append(
                    MetricReport(task, language, mode, float(cell), model=model)
                )
        except ValueError as err:
            raise ReportError(f"{path}, line {lineno}: {err}") from None
    if header is None:
        raise ReportError(f"{path}: no header line")
    return reports


def read_metric_reports(path: PathLike) -> List[MetricReport]:
    """Read metric reports from a run directory (its ``metrics.json``), a
    ``.json`` file (one report or a list), a ``.jsonl`` file or a ``.tsv``
    score table.

    Raises:
        IOError if the path does not exist.
        ReportError if the contents are invalid or the kind is unknown.
    """
    path = Path(check_path(path))
    if path.is_dir():
        path = Path(check_path(path / METRICS_FILE, "f"))
    suffix = path.suffix.lower()
    try:
        if suffix == ".json":
            data = json.loads(path.read_text(encoding="utf-8"))
            items = data if isinstance(data, list) else [data]
            return [MetricReport.from_dict(item) for item in items]
        if suffix == ".jsonl":
            return [MetricReport.from_dict(item) for item in read_jsonl(path)]
    except ValueError as err:
        raise ReportError(f"{path}: {err}") from None
    if suffix == ".tsv":
        return read_score_table(path)
    raise ReportError(f"{path}: expected a run directory or a .json, .jsonl or .tsv file")


def collect_reports(paths: Iterable[PathLike]) -> List[MetricReport]:
    """Read and concatenate the reports of several paths.

    Raises:
        ReportError if no paths are given.
    """
    paths = list(paths)
    if not paths:
        raise ReportError("No report paths given")
    reports: List[MetricReport] = []
    for path in paths:
        reports.extend(read_metric_reports(path))
    return reports
