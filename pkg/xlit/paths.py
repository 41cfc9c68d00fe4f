# -*- coding: utf-8 -*-
"""Convenience functions for working with file paths.

Stdin and stdout are treated as acceptable paths wherever a dataset, input
file or report is read or written, using the '-' placeholder.
"""
import errno
import os
from pathlib import Path, PurePath
import shutil
import tempfile
from typing import Optional, Union
from urllib.parse import ParseResult, urlparse


STDIN_OR_STDOUT_STR = "-"
"""String placeholder for stdin/stdout."""
STDIN_OR_STDOUT = PurePath(STDIN_OR_STDOUT_STR)
"""Placeholder for stdin or stdout, when the access mode is not known."""
STDIN = PurePath("/dev/stdin")
"""Placeholder for `sys.stdin`."""
STDOUT = PurePath("/dev/stdout")
"""Placeholder for `sys.stdout`."""


def parse_url(url_string: str) -> Optional[ParseResult]:
    """Attempts to parse a URL.

    Args:
        url_string: String to test.

    Returns:
        A 6-tuple, as described in ``urlparse``, or None if the URL cannot be
        parsed, or if it lacks a scheme and a host.
    """
    url = urlparse(url_string)
    if not (url.scheme and url.netloc):
        return None
    return url


def as_path(path: Union[str, PurePath], readable: Optional[bool] = None) -> PurePath:
    """Converts a string to a path, mapping the '-' placeholder.

    Args:
        path: String or path to convert.
        readable: Whether the path is going to be read (True), written
            (False) or either (None). Determines which std stream '-' maps to.

    Returns:
        A PurePath. Std streams are returned as the placeholder constants;
        everything else is a concrete Path.
    """
    if isinstance(path, str) and path == STDIN_OR_STDOUT_STR:
        path = STDIN_OR_STDOUT
    if path == STDIN_OR_STDOUT:
        if readable is None:
            return STDIN_OR_STDOUT
        return STDIN if readable else STDOUT
    if path in (STDIN, STDOUT):
        return path
    return Path(path)


def check_std(path: Union[str, PurePath]) -> bool:
    """Checks whether the path is '-' or one of the std stream placeholders.
    """
    return as_path(path) in {STDIN_OR_STDOUT, STDIN, STDOUT}


def resolve_path(path: Union[str, PurePath], parent: Optional[PurePath] = None) -> PurePath:
    """Resolves the absolute path of the specified file and ensures that the
    file/directory exists.

    Args:
        path: Path to resolve.
        parent: The directory containing `path` if `path` is relative.

    Returns:
        The absolute path.

    Raises:
        IOError: if the path does not exist.
    """
    if check_std(path):
        return as_path(path)

    path = Path(path).expanduser()
    if parent and not path.is_absolute():
        path = Path(parent) / path
    path = path.absolute()

    if not path.exists():
        raise IOError(errno.ENOENT, f"{path} does not exist", str(path))

    return path


def check_path(
    path: Union[str, PurePath], path_type: Optional[str] = None, mode: int = os.R_OK
) -> PurePath:
    """Resolves the path (using `resolve_path`) and checks that the path is of
    the specified type and allows the specified access.

    Args:
        path: The path to check.
        path_type: 'f' for a file, 'd' for a directory, or None for either.
        mode: An access mode for `os.access` (e.g. `os.R_OK`).

    Returns:
        The fully resolved path.

    Raises:
        IOError if the path does not exist, is not of the specified type,
        or doesn't allow the specified access.
    """
    path = resolve_path(path)

    if check_std(path):
        if path_type == "d":
            raise IOError(errno.ENOTDIR, f"{path} not a directory", str(path))
        return path

    is_dir = Path(path).is_dir()
    if path_type == "f" and is_dir:
        raise IOError(errno.EISDIR, f"{path} not a file", str(path))
    elif path_type == "d" and not is_dir:
        raise IOError(errno.ENOTDIR, f"{path} not a directory", str(path))

    if not os.access(str(path), mode):
        raise IOError(errno.EACCES, f"{path} is not accessible", str(path))

    return path


def check_readable_file(path: Union[str, PurePath]) -> PurePath:
    """Checks that `path` exists and is a readable file.

    Args:
        path: The path to check

    Returns:
        The fully resolved path of `path`
    """
    return check_path(path, "f", os.R_OK)


def check_readable_dir(path: Union[str, PurePath]) -> PurePath:
    """Checks that `path` exists and is a readable directory."""
    return check_path(path, "d", os.R_OK | os.X_OK)


def check_writable_file(path: Union[str, PurePath], mkdirs: bool = True) -> PurePath:
    """If `path` exists, check that it is writable, otherwise check that its
    parent directory exists and is writable.

    Args:
        path: The path to check.
        mkdirs: Whether to create any missing directories (True).

    Returns:
        The fully resolved path.
    """
    if check_std(path):
        return as_path(path, readable=False)

    path = Path(path).expanduser().absolute()

    if path.exists():
        return check_path(path, "f", os.W_OK)

    dirpath = path.parent
    if dirpath.exists():
        check_path(dirpath, "d", os.W_OK)
    elif mkdirs:
        dirpath.mkdir(parents=True)
    else:
        raise IOError(errno.ENOENT, f"{dirpath} does not exist", str(dirpath))

    return path


def check_writable_dir(path: Union[str, PurePath], mkdirs: bool = True) -> Path:
    """Checks that `path` is a writable directory, creating it (and any
    missing parents) if `mkdirs` is True.

    Raises:
        IOError if the directory is missing and `mkdirs` is False, or if it
        is not writable.
    """
    path = Path(path).expanduser().absolute()
    if not path.exists():
        if not mkdirs:
            raise IOError(errno.ENOENT, f"{path} does not exist", str(path))
        path.mkdir(parents=True)
    return Path(check_path(path, "d", os.W_OK))


class TempDir:
    """Context manager that creates a temporary directory and cleans it up
    upon exit.

    Args:
        kwargs: Additional arguments passed to tempfile.mkdtemp.
    """

    def __init__(self, **kwargs) -> None:
        self.absolute_path = Path(tempfile.mkdtemp(**kwargs)).absolute()

    def __enter__(self) -> "TempDir":
        return self

    def __exit__(self, exception_type, exception_value, traceback) -> None:
        self.close()

    @property
    def exists(self) -> bool:
        return self.absolute_path.exists()

    def close(self) -> None:
        """Delete the temporary directory and all files/subdirectories within.
        """
        if self.exists:
            shutil.rmtree(str(self.absolute_path))

    def make_file(
        self,
        name: Optional[str] = None,
        contents: Optional[str] = None,
        parent: Optional[PurePath] = None,
        suffix: str = "",
    ) -> Path:
        """Create a file within the TempDir.

        Args:
            name: The file name; a random name is generated if None.
            contents: Text to write to the file (UTF-8).
            parent: Subdirectory (relative or absolute) in which to create
                the file.
            suffix: Suffix for randomly-named files.

        Returns:
            The absolute path to the new file.
        """
        parent_path = self._resolve_parent(parent)
        if name:
            path = parent_path / name
            path.touch()
        else:
            fd, name = tempfile.mkstemp(suffix=suffix, dir=str(parent_path))
            os.close(fd)
            path = Path(name)
        if contents is not None:
            path.write_text(contents, encoding="utf-8")
        return path

    def make_directory(
        self, name: Optional[str] = None, parent: Optional[PurePath] = None
    ) -> Path:
        """Create a subdirectory within the TempDir.
        """
        parent_path = self._resolve_parent(parent)
        if name:
            path = parent_path / name
            path.mkdir(parents=True, exist_ok=True)
            return path
        return Path(tempfile.mkdtemp(dir=str(parent_path)))

    def _resolve_parent(self, parent: Optional[PurePath]) -> Path:
        if parent is None:
            return self.absolute_path
        parent = Path(parent)
        if not parent.is_absolute():
            parent = self.absolute_path / parent
        parent.mkdir(parents=True, exist_ok=True)
        return parent
