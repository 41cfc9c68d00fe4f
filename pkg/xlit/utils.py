# -*- coding: utf-8 -*-
"""A collection of convenience methods for reading and writing the text
files xlit works with: plain lines, delimited rows, key=value property files
and JSON lines. All files are UTF-8 and use '\\n' line endings.
"""
from contextlib import contextmanager
import hashlib
import json
from pathlib import PurePath
import sys
from typing import (
    Any,
    Callable,
    Dict,
    Generator,
    Iterable,
    List,
    Optional,
    TextIO,
    Tuple,
    Union,
)
from xlit.paths import STDIN, STDOUT, as_path, check_readable_file, check_writable_file


PathOrFile = Union[str, PurePath, TextIO]
FromStrFunc = Callable[[str], Any]
ToStrFunc = Callable[[Any], str]


@contextmanager
def open_(
    path_or_file: PathOrFile, mode: str = "rt"
) -> Generator[TextIO, None, None]:
    """Context manager that opens a text file, or passes through an already
    open file-like object (which is not closed on exit).

    Args:
        path_or_file: A path, the '-' placeholder for stdin/stdout, or a
            file-like object.
        mode: 'rt' (default), 'wt' or 'at'.

    Yields:
        A text file object.

    Raises:
        IOError if the path cannot be read/written.
    """
    if not isinstance(path_or_file, (str, PurePath)):
        yield path_or_file
        return

    readable = "r" in mode
    path = as_path(path_or_file, readable=readable)
    if path == STDIN:
        yield sys.stdin
    elif path == STDOUT:
        yield sys.stdout
    else:
        if readable:
            path = check_readable_file(path)
        else:
            path = check_writable_file(path)
        newline = None if readable else "\n"
        with open(str(path), mode, encoding="utf-8", newline=newline) as fileobj:
            yield fileobj


def read_lines(
    path_or_file: PathOrFile,
    convert: Optional[FromStrFunc] = None,
    strip_linesep: bool = True,
) -> Generator[Any, None, None]:
    """Iterate over lines in a file.

    Args:
        path_or_file: Path to the file, or a file-like object.
        convert: Function to call on each line in the file.
        strip_linesep: Whether to strip off trailing line separators. Other
            trailing whitespace is kept.

    Yields:
        Lines of a file.
    """
    with open_(path_or_file) as fileobj:
        itr: Iterable[Any] = fileobj
        if strip_linesep:
            itr = (line.rstrip("\r\n") for line in itr)
        if convert:
            itr = (convert(line) for line in itr)
        yield from itr


def write_lines(
    iterable: Iterable[Any],
    path_or_file: PathOrFile,
    linesep: str = "\n",
    convert: ToStrFunc = str,
    trailing_linesep: bool = False,
    mode: str = "wt",
) -> int:
    """Write delimiter-separated strings to a file.

    Args:
        iterable: An iterable.
        path_or_file: Path to the file, or a file-like object.
        linesep: The delimiter to use to separate the strings.
        convert: Function that converts a value to a string.
        trailing_linesep: Whether to also write `linesep` after the last
            string.
        mode: The file mode ('wt' or 'at').

    Returns:
        Total number of characters written.
    """
    written = 0
    with open_(path_or_file, mode) as fileobj:
        for line in iterable:
            if written > 0 and not trailing_linesep:
                written += fileobj.write(linesep)
            written += fileobj.write(convert(line))
            if trailing_linesep:
                written += fileobj.write(linesep)
    return written


def read_dict(
    path_or_file: PathOrFile,
    sep: str = "=",
    convert: Optional[FromStrFunc] = None,
) -> Dict[str, Any]:
    """Read lines from simple property file (key=value). Comment lines
    (starting with '#') and blank lines are ignored. Only the first `sep`
    splits a line, so values may contain it.

    Args:
        path_or_file: Property file, or a list of properties.
        sep: Key-value delimiter (defaults to '=').
        convert: Function to call on each value.

    Returns:
        A dict, in file order.

    Raises:
        ValueError if a non-comment line lacks the delimiter.
    """
    result: Dict[str, Any] = {}
    for lineno, line in enumerate(read_lines(path_or_file), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, found, value = line.partition(sep)
        if not found:
            raise ValueError(f"Line {lineno} is not a {sep!r}-delimited property: {line!r}")
        value = value.strip()
        result[key.strip()] = convert(value) if convert else value
    return result


def write_dict(
    dictobj: Dict[str, Any],
    path_or_file: PathOrFile,
    sep: str = "=",
    convert: ToStrFunc = str,
) -> int:
    """Write a dict to a file as name=value lines.

    Args:
        dictobj: The dict (or dict-like object).
        path_or_file: Path to the file, or a file-like object.
        sep: The delimiter between key and value (defaults to '=').
        convert: Function that converts a value to a string.

    Returns:
        Total number of characters written.
    """
    lines = (f"{key}{sep}{convert(val)}" for key, val in dictobj.items())
    return write_lines(lines, path_or_file, trailing_linesep=True)


def read_delimited(
    path_or_file: PathOrFile,
    sep: str = "\t",
    maxsplit: int = -1,
    skip_comments: bool = True,
) -> Generator[Tuple[int, List[str]], None, None]:
    """Iterate over rows in a delimited file. Fields are never quoted.

    Args:
        path_or_file: Path to the file, or a file-like object.
        sep: The field delimiter.
        maxsplit: Split each line at most this many times; the last field
            keeps any further delimiters. -1 splits at every delimiter.
        skip_comments: Whether to skip lines that start with '#'.

    Yields:
        (line number, fields) tuples. Line numbers start at 1 and count
        skipped lines. Blank lines are skipped.
    """
    for lineno, line in enumerate(read_lines(path_or_file), 1):
        if not line.strip() or (skip_comments and line.startswith("#")):
            continue
        yield lineno, line.split(sep, maxsplit)


def to_json(obj: Any) -> str:
    """Serialize `obj` as a single line of canonical JSON: sorted keys,
    non-ASCII characters kept as-is.
    """
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def read_jsonl(path_or_file: PathOrFile) -> Generator[Any, None, None]:
    """Iterate over the JSON records of a JSON-lines file. Blank lines are
    skipped.

    Raises:
        ValueError if a line is not valid JSON; the message gives the line
        number.
    """
    for lineno, line in enumerate(read_lines(path_or_file), 1):
        if not line.strip():
            continue
        try:
            yield json.loads(line)
        except json.JSONDecodeError as err:
            raise ValueError(f"Invalid JSON on line {lineno}: {err}") from err


def write_jsonl(
    records: Iterable[Any], path_or_file: PathOrFile, mode: str = "wt"
) -> int:
    """Write records as canonical JSON lines, each terminated by '\\n'.

    Returns:
        Total number of characters written.
    """
    return write_lines(records, path_or_file, convert=to_json, trailing_linesep=True, mode=mode)


def sha256_file(path: Union[str, PurePath], chunksize: int = 1 << 16) -> str:
    """Hex SHA-256 digest of a file's bytes."""
    digest = hashlib.sha256()
    with open(str(check_readable_file(path)), "rb") as fileobj:
        for chunk in iter(lambda: fileobj.read(chunksize), b""):
            digest.update(chunk)
    return digest.hexdigest()
