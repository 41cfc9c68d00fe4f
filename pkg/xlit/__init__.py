# -*- coding: utf-8 -*-
"""Evaluation of language models on romanized (Latin-script) prompts.

The main entry points are re-exported here:

* romanization: :class:`RomanizerConfig`, :func:`load_tables`,
  :func:`load_bundled_tables`;
* data: :func:`load_seqlab`, :func:`load_cls`, :func:`load_embeddings`;
* demonstrations: :class:`RandomCoverage`, :class:`Fixed`, :class:`Retrieve`;
* prompts: :func:`load_templates`, :func:`build_prompt`;
* completions: :func:`open_backend`;
* scoring and reports: :func:`macro_f1`, :func:`accuracy`,
  :func:`aggregate`, :func:`render_report`;
* runs: :class:`RunConfig`, :func:`run`.
"""
from typing import Any, Callable, Dict, Iterable, Optional
import pkg_resources
from xlit.corpus import load_cls, load_embeddings, load_seqlab
from xlit.demos import Fixed, RandomCoverage, Retrieve, select
from xlit.llm import CONCURRENCY, open_backend
from xlit.metrics import MetricReport, accuracy, macro_f1
from xlit.progress import ITERABLE_PROGRESS
from xlit.prompts import build_prompt, load_templates
from xlit.report import aggregate, render_report
from xlit.romanizer import RomanizerConfig, load_bundled_tables, load_tables
from xlit.runner import RunConfig, run
from xlit.types import LanguageTag, PromptMode, ScriptTag, TaskKind


try:
    __version__ = pkg_resources.get_distribution(__name__).version
except pkg_resources.DistributionNotFound:
    __version__ = "Unknown"


DEFAULTS: Dict[str, Any] = dict(progress=False, concurrency=CONCURRENCY.default_value)


def configure(
    progress: Optional[bool] = None,
    progress_wrapper: Optional[Callable[..., Iterable]] = None,
    concurrency: Optional[int] = None,
) -> None:
    """Configure xlit.

    Args:
        progress: Whether to show a progress bar while completing prompts.
        progress_wrapper: Specify a non-default progress wrapper.
        concurrency: Default number of completion requests in flight. A
            number < 1 means one at a time.
    """
    if progress is not None:
        ITERABLE_PROGRESS.update(progress, progress_wrapper)
        DEFAULTS.update(progress=progress)
    if concurrency is not None:
        CONCURRENCY.update(concurrency)
        DEFAULTS.update(concurrency=CONCURRENCY.concurrency)


__all__ = [
    "DEFAULTS",
    "Fixed",
    "LanguageTag",
    "MetricReport",
    "PromptMode",
    "RandomCoverage",
    "Retrieve",
    "RomanizerConfig",
    "RunConfig",
    "ScriptTag",
    "TaskKind",
    "accuracy",
    "aggregate",
    "build_prompt",
    "configure",
    "load_bundled_tables",
    "load_cls",
    "load_embeddings",
    "load_seqlab",
    "load_tables",
    "load_templates",
    "macro_f1",
    "open_backend",
    "render_report",
    "run",
    "select",
]
