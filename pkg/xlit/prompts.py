# -*- coding: utf-8 -*-
"""Prompt templates and rendering.

A template file holds three sections separated by a line containing only
``---``: the instruction, the block used for each demonstration and the
block used for the query. One file exists per task kind and prompt mode,
named ``<task>.<mode>.txt`` (e.g. ``cls.combined.txt``).

Slots use ``{name}`` syntax. The instruction may use ``{labels}``; blocks
may use ``{text_orig}`` and ``{text_latn}``; only the demonstration block
may (and must) use ``{answer}``. Literal braces are written ``{{`` and
``}}``.

A prompt is the instruction, the demonstration blocks and the query block,
separated by blank lines.
"""
import logging
from pathlib import Path
from string import Formatter
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple
from xlit.corpus import Cls, Example, SeqLab
from xlit.paths import check_readable_dir
from xlit.romanizer import RomanizerConfig
from xlit.types import (
    PathLike,
    PromptMode,
    PromptModeArg,
    TaskKind,
    TaskKindArg,
    enum_value,
    iter_tag_values,
)
from xlit.utils import read_lines


LOG = logging.getLogger(__name__)


BUNDLED_TEMPLATES = Path(__file__).parent / "templates"
SECTION_SEPARATOR = "\n---\n"
BLOCK_SEPARATOR = "\n\n"

INSTRUCTION_SLOTS = frozenset(("labels",))
DEMO_SLOTS = frozenset(("text_orig", "text_latn", "answer"))
QUERY_SLOTS = frozenset(("text_orig", "text_latn"))


class TemplateError(ValueError):
    """Raised for invalid templates and slots that cannot be filled."""


def template_name(task: TaskKindArg, mode: PromptModeArg) -> str:
    """File name of the template for a task kind and mode."""
    return f"{enum_value(TaskKind, task).value}.{enum_value(PromptMode, mode).value}.txt"


def slot_names(template: str) -> List[str]:
    """Names of the slots in `template`, in order of appearance.

    Raises:
        TemplateError for positional slots or malformed braces.
    """
    try:
        fields = [field for _, field, _, _ in Formatter().parse(template) if field is not None]
    except ValueError as err:
        raise TemplateError(f"Malformed template: {err}") from None
    for field in fields:
        if not field.isidentifier():
            raise TemplateError(f"Invalid slot {{{field}}}: slots must be named")
    return fields


def fill(template: str, values: Mapping[str, str]) -> str:
    """Fill the slots of `template`.

    Raises:
        TemplateError naming the first slot without a value.
    """
    for name in slot_names(template):
        if values.get(name) is None:
            raise TemplateError(f"Unfilled slot {{{name}}}")
    return template.format_map(values)


class ModeTemplate(NamedTuple):
    """The three sections of one template file."""

    instruction: str
    demo_block: str
    query_block: str

    @classmethod
    def parse(cls, text: str, name: str = "<template>") -> "ModeTemplate":
        """Split template file contents into sections. One trailing newline
        is ignored.

        Raises:
            TemplateError if there are not exactly three sections or the
            instruction is empty.
        """
        if text.endswith("\n"):
            text = text[:-1]
        sections = text.split(SECTION_SEPARATOR)
        if len(sections) != 3:
            raise TemplateError(
                f"{name}: expected 3 sections separated by '---' lines, found {len(sections)}"
            )
        if not sections[0].strip():
            raise TemplateError(f"{name}: empty instruction")
        return cls(*sections)

    @classmethod
    def from_file(cls, path: PathLike) -> "ModeTemplate":
        return cls.parse("\n".join(read_lines(path)), str(path))

    def validate(self, mode: PromptMode, name: str = "<template>") -> None:
        """Check that each section only uses its allowed slots, and that the
        blocks show exactly the texts `mode` calls for.

        Raises:
            TemplateError naming the offending slot.
        """
        required = set()
        if mode.uses_original:
            required.add("text_orig")
        if mode.uses_latin:
            required.add("text_latn")
        forbidden = {"text_orig", "text_latn"} - required

        for section, allowed, text in (
            ("instruction", INSTRUCTION_SLOTS, self.instruction),
            ("demonstration block", DEMO_SLOTS, self.demo_block),
            ("query block", QUERY_SLOTS, self.query_block),
        ):
            slots = set(slot_names(text))
            unknown = sorted(slots - allowed)
            if unknown:
                raise TemplateError(
                    f"{name}: slot {{{unknown[0]}}} is not allowed in the {section}"
                )
            if section == "instruction":
                continue
            wrong = sorted(forbidden & slots)
            if wrong:
                raise TemplateError(
                    f"{name}: slot {{{wrong[0]}}} is not allowed in {mode.label} mode"
                )
            absent = sorted(required - slots)
            if absent:
                raise TemplateError(
                    f"{name}: {mode.label} mode requires slot {{{absent[0]}}} in the {section}"
                )
        if "answer" not in slot_names(self.demo_block):
            raise TemplateError(f"{name}: the demonstration block must contain {{answer}}")


class TemplateSet:
    """Templates for all three prompt modes of one task kind.

    Args:
        task_kind: The task kind.
        templates: A template per mode.
        labels: The label set, in the order shown in the instruction.
            Defaults to the tag set for sequential labeling.
        verbalizers: Surface string per label. Defaults to the label itself.

    Raises:
        TemplateError if a mode is missing, the instructions differ between
        modes, a template is invalid or verbalizers are missing or not
        distinct.
    """

    def __init__(
        self,
        task_kind: TaskKindArg,
        templates: Mapping[PromptMode, ModeTemplate],
        labels: Optional[Sequence[str]] = None,
        verbalizers: Optional[Mapping[str, str]] = None,
    ) -> None:
        self.task_kind = enum_value(TaskKind, task_kind)
        missing = [mode.label for mode in PromptMode.ordered() if mode not in templates]
        if missing:
            raise TemplateError(f"Missing templates for mode(s): {', '.join(missing)}")
        for mode, template in templates.items():
            template.validate(mode, template_name(self.task_kind, mode))
        instructions = {template.instruction for template in templates.values()}
        if len(instructions) != 1:
            raise TemplateError("The instruction must be identical across prompt modes")
        self.templates: Dict[PromptMode, ModeTemplate] = dict(templates)

        if labels is None:
            if self.task_kind is not TaskKind.SEQLAB:
                raise TemplateError("Classification templates need a label set")
            labels = tuple(iter_tag_values())
        self.labels: Tuple[str, ...] = tuple(labels)
        verbalizers = dict(verbalizers or {})
        self.verbalizers: Dict[str, str] = {
            label: verbalizers.get(label, label) for label in self.labels
        }
        unknown = set(verbalizers) - set(self.labels)
        if unknown:
            raise TemplateError(f"Verbalizers for unknown labels: {', '.join(sorted(unknown))}")
        surfaces = [s.lower() for s in self.verbalizers.values()]
        if len(set(surfaces)) != len(surfaces) or not all(s.strip() for s in surfaces):
            raise TemplateError("Verbalizers must be non-empty and distinct (ignoring case)")

    @property
    def instruction(self) -> str:
        return self.templates[PromptMode.ORIG].instruction

    def __getitem__(self, mode: PromptModeArg) -> ModeTemplate:
        return self.templates[enum_value(PromptMode, mode)]

    def verbalize(self, label: str) -> str:
        return self.verbalizers[label]


def load_templates(
    directory: Optional[PathLike],
    task_kind: TaskKindArg,
    labels: Optional[Sequence[str]] = None,
    verbalizers: Optional[Mapping[str, str]] = None,
) -> TemplateSet:
    """Load templates from `directory`. Modes without a file there fall back
    to the bundled template.

    Args:
        directory: Template directory, or None for the bundled templates.
        task_kind: The task kind.
        labels: See :class:`TemplateSet`.
        verbalizers: See :class:`TemplateSet`.

    Returns:
        A TemplateSet.
    """
    task_kind = enum_value(TaskKind, task_kind)
    override = Path(check_readable_dir(directory)) if directory is not None else None
    templates = {}
    for mode in PromptMode.ordered():
        name = template_name(task_kind, mode)
        path = BUNDLED_TEMPLATES / name
        if override is not None and (override / name).exists():
            path = override / name
            LOG.debug("Using template override %s", path)
        templates[mode] = ModeTemplate.from_file(path)
    return TemplateSet(task_kind, templates, labels, verbalizers)


def default_templates(
    task_kind: TaskKindArg,
    labels: Optional[Sequence[str]] = None,
    verbalizers: Optional[Mapping[str, str]] = None,
) -> TemplateSet:
    """The bundled templates for `task_kind`."""
    return load_templates(None, task_kind, labels, verbalizers)


class RenderedPrompt(NamedTuple):
    """A rendered prompt and what is needed to interpret its completion."""

    text: str
    mode: PromptMode
    query_id: str
    demo_ids: Tuple[str, ...] = ()
    query_token_count: Optional[int] = None


def transliterate_example(config: RomanizerConfig, ex: Example) -> Example:
    """Romanize an example: token by token for tagged sentences, as a whole
    for classification texts. Tags and labels are unchanged.
    """
    if isinstance(ex.payload, SeqLab):
        return Example(ex.id, SeqLab(tuple(config.romanize_tokens(ex.payload.tokens)), ex.payload.tags))
    return Example(ex.id, Cls(config.romanize_text(ex.payload.text), ex.payload.label))


def _slot_values(
    templates: TemplateSet, mode: PromptMode, ex: Example, config: RomanizerConfig
) -> Dict[str, str]:
    values = {"text_orig": ex.text}
    latn = transliterate_example(config, ex) if mode.uses_latin else None
    if latn is not None:
        values["text_latn"] = latn.text
    if isinstance(ex.payload, SeqLab):
        if mode is PromptMode.ORIG:
            shown: Iterable[str] = ex.payload.tokens
        elif mode is PromptMode.LATN:
            shown = latn.payload.tokens
        else:
            shown = (
                f"{orig} ({rom})" for orig, rom in zip(ex.payload.tokens, latn.payload.tokens)
            )
        values["answer"] = "\n".join(
            f"{token}: {templates.verbalize(tag.value)}"
            for token, tag in zip(shown, ex.payload.tags)
        )
    else:
        values["answer"] = templates.verbalize(ex.payload.label)
    return values


def build_prompt(
    templates: TemplateSet,
    mode: PromptModeArg,
    demos: Sequence[Example],
    query: Example,
    config: RomanizerConfig,
) -> RenderedPrompt:
    """Render a prompt.

    Args:
        templates: The template set.
        mode: The prompt mode.
        demos: Demonstrations, in prompt order.
        query: The query; its answer is left open.
        config: The romanizer used for the Latn and Combined modes.

    Returns:
        A RenderedPrompt.

    Raises:
        TemplateError if an example does not match the template task kind or
        a slot cannot be filled.
    """
    mode = enum_value(PromptMode, mode)
    template = templates[mode]
    for ex in list(demos) + [query]:
        if ex.task is not templates.task_kind:
            raise TemplateError(
                f"Example {ex.id} is a {ex.task.value} example; templates are for "
                f"{templates.task_kind.value}"
            )
    labels = ", ".join(templates.verbalize(label) for label in templates.labels)
    parts = [fill(template.instruction, {"labels": labels})]
    for demo in demos:
        parts.append(fill(template.demo_block, _slot_values(templates, mode, demo, config)))
    query_values = _slot_values(templates, mode, query, config)
    del query_values["answer"]
    parts.append(fill(template.query_block, query_values))
    token_count = len(query.payload.tokens) if isinstance(query.payload, SeqLab) else None
    return RenderedPrompt(
        BLOCK_SEPARATOR.join(parts),
        mode,
        query.id,
        tuple(demo.id for demo in demos),
        token_count,
    )
