"""Self-contained performance tests. These are slow; run them with
``pytest -m perf``.
"""
import random
import time
from xlit.report import aggregate, read_score_table
from xlit.romanizer import RomanizerConfig, load_bundled_tables
import pytest
from . import SCORES_DIR


STRINGS_PER_TABLE = 10000
ASCII_CHARS = "abcXYZ019 .,-'"


class TimeKeeper:
    def __init__(self, msg, **kwargs):
        self.msg = msg
        self.msg_args = kwargs
        self.duration = 0

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exception_type, exception_value, traceback):
        self.stop = time.perf_counter()
        self.duration = self.stop - self.start
        print(self.msg.format(
            duration=self.duration,
            **self.msg_args))


def table_alphabet(table):
    chars = sorted({char for rule in table for char in rule.source})
    return chars + list(ASCII_CHARS)


def simple_rules(table):
    """Single-codepoint rules that no longer rule starts with and that have
    no contextual variant.
    """
    longer_prefixes = {rule.source[0] for rule in table if len(rule.source) > 1}
    contextual = {rule.source for rule in table if rule.is_contextual}
    return {
        rule.source: rule.target
        for rule in table
        if len(rule.source) == 1
        and not rule.is_contextual
        and rule.source not in longer_prefixes
        and rule.source not in contextual
    }


def random_string(rng, alphabet, max_tokens=5, max_token_length=6):
    return " ".join(
        "".join(rng.choice(alphabet) for _ in range(rng.randint(1, max_token_length)))
        for _ in range(rng.randint(1, max_tokens))
    )


@pytest.mark.perf
def test_romanizer_invariants():
    config = load_bundled_tables()
    msg = "Romanized {n:,d} {script} strings in {duration:0.2f} sec"
    for script, table in config.tables.items():
        rng = random.Random(f"invariants-{script}")
        alphabet = table_alphabet(table)
        texts = [random_string(rng, alphabet) for _ in range(STRINGS_PER_TABLE)]
        with TimeKeeper(msg, n=len(texts), script=script) as timer:
            for text in texts:
                romanized = config.romanize_text(text)
                assert romanized.isascii(), (text, romanized)
                assert romanized == config.romanize_text(romanized), text
                tokens = text.split()
                assert len(tokens) == len(config.romanize_tokens(tokens)), text
        assert timer.duration < 30


@pytest.mark.perf
def test_table_oracle():
    config = load_bundled_tables()
    assert {"Hang", "Hani"} <= set(config.tables)
    for script, table in config.tables.items():
        simple = simple_rules(table)
        assert simple, script
        single = RomanizerConfig([table])
        alphabet = sorted(simple) + list(ASCII_CHARS)
        rng = random.Random(f"oracle-{script}")
        for _ in range(STRINGS_PER_TABLE):
            text = random_string(rng, alphabet)
            expected = "".join(simple.get(char, char) for char in text)
            assert expected == single.romanize_text(text), text


@pytest.mark.perf
def test_report_aggregation():
    paths = sorted(SCORES_DIR.glob("*.tsv"))
    msg = "Aggregated {n} score tables in {duration:0.3f} sec"
    with TimeKeeper(msg, n=len(paths)) as timer:
        for path in paths:
            aggregate(read_score_table(path), "script")
    assert timer.duration < 1
