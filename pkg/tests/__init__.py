from contextlib import contextmanager
from io import BytesIO, TextIOWrapper
from pathlib import Path
import random
from unittest.mock import patch


DATA_DIR = Path(__file__).parent / "data"
SCORES_DIR = DATA_DIR / "scores"
GOLDEN_DIR = DATA_DIR / "golden"
RUN_DIR = DATA_DIR / "run"


class MockStream:
    """A UTF-8 text stream whose written contents can be read back."""

    def __init__(self, name):
        self.buffer = BytesIO()
        object.__setattr__(self.buffer, "name", name)
        self.wrapper = TextIOWrapper(self.buffer, encoding="utf-8")

    def getvalue(self):
        self.wrapper.flush()
        return self.buffer.getvalue().decode("utf-8")


@contextmanager
def intercept_stdout():
    stream = MockStream("<stdout>")
    with patch("sys.stdout", stream.wrapper):
        yield stream


@contextmanager
def intercept_stderr():
    stream = MockStream("<stderr>")
    with patch("sys.stderr", stream.wrapper):
        yield stream


@contextmanager
def intercept_stdin(content):
    buffer = BytesIO(content.encode("utf-8"))
    object.__setattr__(buffer, "name", "<stdin>")
    with patch("sys.stdin", TextIOWrapper(buffer, encoding="utf-8")):
        yield
