# -*- coding: utf-8 -*-
"""Table-driven romanization of non-Latin text.

Each script has a mapping table of ``source -> target`` rules. Text is
scanned left to right; at each non-ASCII position the longest matching rule
wins. ASCII characters are never rewritten. Characters no rule covers are
handled according to a :class:`FallbackPolicy`.

Table files are named ``<Script>.tsv`` and contain lines of the form
``source<TAB>target[<TAB>context]``, where context is one of ``any``
(the default), ``initial`` or ``final``.
"""
from collections import Counter
import logging
from pathlib import Path
import re
import unicodedata
from typing import (
    Dict,
    Iterable,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
)
from fontTools import unicodedata as ftunicodedata
from xlit.paths import check_readable_dir, check_readable_file
from xlit.types import (
    COMMON,
    INHERITED,
    FallbackPolicy,
    FallbackPolicyArg,
    PathLike,
    RuleContext,
    ScriptTag,
    enum_value,
)
from xlit.utils import read_lines


LOG = logging.getLogger(__name__)


TABLE_SUFFIX = ".tsv"
BUNDLED_TABLES = Path(__file__).parent / "tables"
"""Directory of the tables shipped with xlit."""
TARGET_RE = re.compile(r"[A-Za-z0-9' -]*")
WHITESPACE_RE = re.compile(r"\s+")


class TableLoadError(ValueError):
    """Raised when a mapping table cannot be loaded."""


class Rule(NamedTuple):
    """A single mapping rule."""

    source: str
    target: str
    context: RuleContext = RuleContext.ANY

    @property
    def is_contextual(self) -> bool:
        return self.context is not RuleContext.ANY


def _rule_order(rule: Rule) -> Tuple[int, int]:
    return -len(rule.source), 0 if rule.is_contextual else 1


class MappingTable:
    """Ordered rules for one script.

    Args:
        script: The script the table romanizes.
        rules: The rules, in any order. They are sorted longest source first;
            for identical sources, context-restricted rules come before
            ``any`` rules. Otherwise input order is kept.
        name: Where the table came from (for error messages).

    Raises:
        TableLoadError if a rule has an empty or ASCII-initial source, a
        non-ASCII target, or duplicates the (source, context) of another rule.
    """

    def __init__(
        self, script: Union[str, ScriptTag], rules: Iterable[Rule], name: Optional[str] = None
    ) -> None:
        self.script = ScriptTag(script)
        self.name = name or str(self.script)
        seen = set()
        checked = []
        for rule in rules:
            _validate_rule(rule, self.name)
            key = (rule.source, rule.context)
            if key in seen:
                raise TableLoadError(
                    f"{self.name}: duplicate rule for {rule.source!r} "
                    f"(context {rule.context.value})"
                )
            seen.add(key)
            checked.append(rule)
        self.rules: Tuple[Rule, ...] = tuple(sorted(checked, key=_rule_order))

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def __repr__(self) -> str:
        return f"MappingTable({self.script}, {len(self)} rules)"

    @classmethod
    def parse(
        cls, lines: Iterable[str], script: Union[str, ScriptTag], name: Optional[str] = None
    ) -> "MappingTable":
        """Parse table lines.

        Args:
            lines: Lines of a table file, without line separators.
            script: The script code.
            name: Name used in error messages (usually the file path).

        Returns:
            A MappingTable.

        Raises:
            TableLoadError naming the file and line of the first bad line.
        """
        name = name or str(script)
        rules = []
        seen: Dict[Tuple[str, RuleContext], int] = {}
        for lineno, line in enumerate(lines, 1):
            if not line.strip() or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) not in (2, 3):
                raise TableLoadError(
                    f"{name}, line {lineno}: expected source<TAB>target[<TAB>context], "
                    f"got {len(fields)} field(s)"
                )
            context = RuleContext.ANY
            if len(fields) == 3:
                try:
                    context = RuleContext(fields[2].strip())
                except ValueError:
                    raise TableLoadError(
                        f"{name}, line {lineno}: invalid context {fields[2]!r}"
                    ) from None
            rule = Rule(fields[0], fields[1], context)
            _validate_rule(rule, f"{name}, line {lineno}")
            key = (rule.source, rule.context)
            if key in seen:
                raise TableLoadError(
                    f"{name}, line {lineno}: duplicate rule for {rule.source!r} "
                    f"(context {context.value}; first defined on line {seen[key]})"
                )
            seen[key] = lineno
            rules.append(rule)
        return cls(script, rules, name)

    @classmethod
    def from_file(cls, path: PathLike) -> "MappingTable":
        """Load a table from ``<Script>.tsv``.

        Raises:
            TableLoadError if the file name is not a script code or the file
            is malformed.
        """
        path = Path(check_readable_file(path))
        try:
            script = ScriptTag(path.stem)
        except ValueError:
            raise TableLoadError(f"{path}: file name is not a script code") from None
        return cls.parse(read_lines(path), script, str(path))


def _validate_rule(rule: Rule, name: str) -> None:
    if not rule.source:
        raise TableLoadError(f"{name}: empty source")
    if ord(rule.source[0]) < 128:
        raise TableLoadError(f"{name}: source {rule.source!r} starts with an ASCII character")
    if not TARGET_RE.fullmatch(rule.target):
        raise TableLoadError(
            f"{name}: target {rule.target!r} for {rule.source!r} contains characters "
            f"outside [A-Za-z0-9' -]"
        )


def is_word_char(char: str) -> bool:
    """Whether `char` continues a word: letters and combining marks do."""
    return unicodedata.category(char)[0] in "LM"


class RomanizerConfig:
    """A loaded, immutable set of mapping tables plus romanization options.
    Instances are safe to share between threads.

    Args:
        tables: The tables; at most one per script.
        fallback_policy: What to do with non-ASCII characters no rule covers.
        lowercase_output: Whether to lowercase all output.

    Raises:
        TableLoadError if `tables` is empty or two tables share a script.
    """

    def __init__(
        self,
        tables: Iterable[MappingTable],
        fallback_policy: FallbackPolicyArg = FallbackPolicy.DECOMPOSE_STRIP,
        lowercase_output: bool = False,
    ) -> None:
        by_script: Dict[ScriptTag, MappingTable] = {}
        for table in tables:
            if table.script in by_script:
                raise TableLoadError(f"More than one table for script {table.script}")
            by_script[table.script] = table
        if not by_script:
            raise TableLoadError("At least one mapping table is required")
        self._tables = dict(sorted(by_script.items()))
        self.fallback_policy = enum_value(FallbackPolicy, fallback_policy)
        self.lowercase_output = bool(lowercase_output)

        # First character -> candidate rules in precedence order. Scripts are
        # ranked in ascending code order; sorting is stable.
        index: Dict[str, List[Tuple[Tuple[int, int, int], Rule]]] = {}
        single: Dict[str, str] = {}
        for rank, table in enumerate(self._tables.values()):
            for rule in table.rules:
                index.setdefault(rule.source[0], []).append(
                    (_rule_order(rule) + (rank,), rule)
                )
                if len(rule.source) == 1 and not rule.is_contextual:
                    single.setdefault(rule.source, rule.target)
        self._index: Dict[str, Tuple[Rule, ...]] = {
            char: tuple(rule for _, rule in sorted(candidates, key=lambda c: c[0]))
            for char, candidates in index.items()
        }
        self._single = single

    @property
    def tables(self) -> Mapping[ScriptTag, MappingTable]:
        return dict(self._tables)

    @property
    def scripts(self) -> Tuple[ScriptTag, ...]:
        return tuple(self._tables)

    def __repr__(self) -> str:
        return (
            f"RomanizerConfig(scripts={','.join(self.scripts)}, "
            f"fallback={self.fallback_policy.value}, lowercase={self.lowercase_output})"
        )

    def replace(
        self,
        fallback_policy: Optional[FallbackPolicyArg] = None,
        lowercase_output: Optional[bool] = None,
    ) -> "RomanizerConfig":
        """Copy of this config with different options."""
        return RomanizerConfig(
            self._tables.values(),
            self.fallback_policy if fallback_policy is None else fallback_policy,
            self.lowercase_output if lowercase_output is None else lowercase_output,
        )

    def _match(self, text: str, pos: int) -> Optional[Rule]:
        for rule in self._index.get(text[pos], ()):
            end = pos + len(rule.source)
            if not text.startswith(rule.source, pos):
                continue
            if rule.context is RuleContext.INITIAL:
                if pos > 0 and is_word_char(text[pos - 1]):
                    continue
            elif rule.context is RuleContext.FINAL:
                if end < len(text) and is_word_char(text[end]):
                    continue
            return rule
        return None

    def _fallback(self, char: str) -> str:
        if self.fallback_policy is FallbackPolicy.PASSTHROUGH:
            return char
        if self.fallback_policy is FallbackPolicy.DROP:
            return ""
        pieces = []
        for piece in unicodedata.normalize("NFKD", char):
            if ord(piece) < 128:
                pieces.append(piece)
            elif piece in self._single:
                pieces.append(self._single[piece])
        return "".join(pieces)

    def romanize_text(self, text: str) -> str:
        """Romanize a string.

        Args:
            text: Any Unicode string.

        Returns:
            The romanized string. It is pure ASCII unless the fallback
            policy is passthrough.
        """
        out = []
        pos = 0
        size = len(text)
        while pos < size:
            char = text[pos]
            if ord(char) < 128:
                out.append(char)
                pos += 1
                continue
            rule = self._match(text, pos)
            if rule is None:
                out.append(self._fallback(char))
                pos += 1
            else:
                out.append(rule.target)
                pos += len(rule.source)
        result = "".join(out)
        return result.lower() if self.lowercase_output else result

    def romanize_tokens(self, tokens: Sequence[str]) -> List[str]:
        """Romanize each token separately. The output has the same length as
        the input; whitespace a mapping introduces inside a token is replaced
        by '-'.
        """
        return [
            WHITESPACE_RE.sub("-", self.romanize_text(token).strip()) for token in tokens
        ]


def load_tables(
    directory_path: PathLike,
    fallback_policy: FallbackPolicyArg = FallbackPolicy.DECOMPOSE_STRIP,
    lowercase_output: bool = False,
) -> RomanizerConfig:
    """Load every ``<Script>.tsv`` table in a directory.

    Args:
        directory_path: The table directory.
        fallback_policy: Fallback for unmapped characters.
        lowercase_output: Whether to lowercase output.

    Returns:
        A RomanizerConfig.

    Raises:
        IOError if the directory does not exist.
        TableLoadError if there are no tables or one is malformed.
    """
    directory = Path(check_readable_dir(directory_path))
    paths = sorted(directory.glob(f"*{TABLE_SUFFIX}"))
    if not paths:
        raise TableLoadError(f"{directory}: no tables found")
    tables = [MappingTable.from_file(path) for path in paths]
    LOG.info(
        "Loaded %d mapping tables from %s: %s",
        len(tables), directory, ", ".join(t.script for t in tables)
    )
    return RomanizerConfig(tables, fallback_policy, lowercase_output)


def load_bundled_tables(
    fallback_policy: FallbackPolicyArg = FallbackPolicy.DECOMPOSE_STRIP,
    lowercase_output: bool = False,
) -> RomanizerConfig:
    """Load the tables shipped with xlit."""
    return load_tables(BUNDLED_TABLES, fallback_policy, lowercase_output)


def romanize_text(config: RomanizerConfig, text: str) -> str:
    """Romanize `text` with `config`. See :meth:`RomanizerConfig.romanize_text`.
    """
    return config.romanize_text(text)


def romanize_tokens(config: RomanizerConfig, tokens: Sequence[str]) -> List[str]:
    """Romanize `tokens` with `config`. See
    :meth:`RomanizerConfig.romanize_tokens`.
    """
    return config.romanize_tokens(tokens)


def detect_script(text: str) -> ScriptTag:
    """Detect the script of the majority of the letters in `text`.

    Args:
        text: Any string.

    Returns:
        The ISO 15924 code of the most frequent letter script; ties go to the
        script seen first. Letters of the Common and Inherited scripts (such
        as the kana length mark) are not counted. 'Zyyy' if no other
        letters are left.
    """
    counts: Counter = Counter()
    for char in text:
        if unicodedata.category(char).startswith("L"):
            script = ftunicodedata.script(char)
            if script not in (COMMON, INHERITED):
                counts[script] += 1
    if not counts:
        return COMMON
    # Counter preserves first-seen order, and max keeps the first maximum
    return ScriptTag(max(counts, key=counts.__getitem__))


def script_of_texts(texts: Iterable[str]) -> ScriptTag:
    """Detect the majority script over several texts."""
    return detect_script("".join(texts))
