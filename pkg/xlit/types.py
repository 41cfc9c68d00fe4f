# -*- coding: utf-8 -*-
"""Type checking support. Defines the value types and enumerations shared by
all xlit modules.
"""
from enum import Enum
import os
from pathlib import PurePath
import re
from typing import Iterator, Tuple, Union


class TaskKind(Enum):
    """Enumeration of the two task shapes."""

    SEQLAB = "seqlab"
    """Sequential labeling: one tag per token."""
    CLS = "cls"
    """Single-label classification of a text."""


TaskKindArg = Union[str, TaskKind]


class PromptMode(Enum):
    """Enumeration of the script representations a prompt can carry."""

    ORIG = "orig"
    """Text in its original script."""
    LATN = "latn"
    """Only the Latin-script transliteration."""
    COMBINED = "combined"
    """The original text followed by its transliteration."""

    @property
    def label(self) -> str:
        """Display name (Orig, Latn, Combined)."""
        return "Latn" if self is PromptMode.LATN else self.value.capitalize()

    @property
    def uses_original(self) -> bool:
        """Whether prompts in this mode show original-script text."""
        return self is not PromptMode.LATN

    @property
    def uses_latin(self) -> bool:
        """Whether prompts in this mode show the transliteration."""
        return self is not PromptMode.ORIG

    @classmethod
    def ordered(cls) -> Tuple["PromptMode", ...]:
        """Modes in report order."""
        return cls.ORIG, cls.LATN, cls.COMBINED


PromptModeArg = Union[str, PromptMode]


class TagLabel(Enum):
    """The closed set of named-entity tags."""

    O = "O"
    B_PER = "B-PER"
    I_PER = "I-PER"
    B_ORG = "B-ORG"
    I_ORG = "I-ORG"
    B_LOC = "B-LOC"
    I_LOC = "I-LOC"

    @property
    def is_entity(self) -> bool:
        return self is not TagLabel.O

    def __str__(self) -> str:
        return self.value


class FallbackPolicy(Enum):
    """What the romanizer does with a non-ASCII character no rule covers."""

    DECOMPOSE_STRIP = "decompose-strip"
    """Compatibility-decompose, keep ASCII pieces, drop the rest."""
    PASSTHROUGH = "passthrough"
    """Leave the character unchanged."""
    DROP = "drop"
    """Remove the character."""


FallbackPolicyArg = Union[str, FallbackPolicy]


class RuleContext(Enum):
    """Positional constraint on a mapping rule."""

    ANY = "any"
    INITIAL = "initial"
    """Match only at the start of a word."""
    FINAL = "final"
    """Match only at the end of a word."""


class Grouping(Enum):
    """How per-language reports are grouped for aggregation."""

    ALL = "all"
    """One group containing every language."""
    SCRIPT = "script"
    """One group per script code."""


GroupingArg = Union[str, Grouping]


class ReportFormat(Enum):
    """Output formats for aggregated reports."""

    TSV = "tsv"
    JSONL = "jsonl"
    MARKDOWN = "md"


ReportFormatArg = Union[str, ReportFormat]


SCRIPT_RE = re.compile(r"[A-Z][a-z]{3}")
LANGUAGE_RE = re.compile(r"[a-z]{3}")


class ScriptTag(str):
    """A 4-letter ISO 15924 script code, e.g. 'Cyrl'.

    Args:
        code: The script code; must be exactly 4 ASCII letters, first
            uppercase, the rest lowercase.

    Raises:
        ValueError if `code` is not a valid script code.
    """

    def __new__(cls, code: str) -> "ScriptTag":
        if not (isinstance(code, str) and SCRIPT_RE.fullmatch(code)):
            raise ValueError(f"Invalid script code: {code!r}")
        return super().__new__(cls, code)

    @property
    def code(self) -> str:
        return str(self)


COMMON = ScriptTag("Zyyy")
"""Script of characters shared by many scripts, and of text without letters."""
INHERITED = ScriptTag("Zinh")
"""Script of combining marks that take the script of their base."""


class LanguageTag(Tuple[str, ScriptTag]):
    """A language/script pair serialized as ``lll_Ssss`` (e.g. 'ben_Beng').
    """

    def __new__(cls, language: str, script: Union[str, ScriptTag]) -> "LanguageTag":
        if not (isinstance(language, str) and LANGUAGE_RE.fullmatch(language)):
            raise ValueError(f"Invalid ISO 639-3 language code: {language!r}")
        return super().__new__(cls, (language, ScriptTag(script)))

    @classmethod
    def parse(cls, value: str) -> "LanguageTag":
        """Parse a ``lll_Ssss`` string.

        Raises:
            ValueError if the string is not a valid language tag.
        """
        language, sep, script = value.partition("_")
        if not sep:
            raise ValueError(f"Invalid language tag: {value!r}")
        return cls(language, script)

    @property
    def language(self) -> str:
        return self[0]

    @property
    def script(self) -> ScriptTag:
        return self[1]

    def __str__(self) -> str:
        return f"{self[0]}_{self[1]}"

    def __repr__(self) -> str:
        return f"LanguageTag({str(self)!r})"


PathLike = Union[os.PathLike, PurePath, str]
"""A path given as a string or path object."""


Seed = int
"""A 64-bit unsigned seed."""


MAX_SEED = 2 ** 64 - 1


def enum_value(enum_type, value):
    """Coerce a string or enum member to a member of `enum_type`.

    Args:
        enum_type: The Enum class.
        value: A member of `enum_type`, or the value or name of one.

    Returns:
        The enum member.

    Raises:
        ValueError if `value` does not name a member.
    """
    if isinstance(value, enum_type):
        return value
    try:
        return enum_type(value)
    except ValueError:
        try:
            return enum_type[str(value).upper().replace("-", "_")]
        except KeyError:
            choices = ", ".join(m.value for m in enum_type)
            raise ValueError(
                f"Invalid {enum_type.__name__}: {value!r} (expected one of {choices})"
            ) from None


def iter_tag_values() -> Iterator[str]:
    """Iterate over tag values in declaration order."""
    for tag in TagLabel:
        yield tag.value
