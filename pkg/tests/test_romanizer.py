from unittest import TestCase
from . import *
from concurrent.futures import ThreadPoolExecutor
from xlit.paths import TempDir
from xlit.romanizer import *
from xlit.types import FallbackPolicy, RuleContext, ScriptTag


ASCII_CHARS = "abcXYZ019 .,-'"


def table_alphabet(table):
    chars = sorted({char for rule in table for char in rule.source})
    return chars + list(ASCII_CHARS)


def random_string(rng, alphabet, max_tokens=5, max_token_length=6):
    tokens = [
        "".join(rng.choice(alphabet) for _ in range(rng.randint(1, max_token_length)))
        for _ in range(rng.randint(1, max_tokens))
    ]
    return " ".join(tokens)


class MappingTableTests(TestCase):
    def test_parse(self):
        table = MappingTable.parse(
            ["# comment", "", "б\tb", "бб\tbb", "е\tye\tinitial", "е\te"], "Cyrl")
        assert 4 == len(table)
        self.assertListEqual(
            ["бб", "е", "б", "е"], [rule.source for rule in table])
        assert RuleContext.INITIAL == table.rules[1].context
        assert "Cyrl" == table.script

    def test_parse_errors(self):
        for lines, message in (
            (["б"], "line 1: expected"),
            (["б\tb\tany\textra"], "line 1: expected"),
            (["# c", "б\tb\tmiddle"], "line 2: invalid context"),
            (["b\tb"], "line 1: .*ASCII"),
            (["б\tб"], "line 1: .*outside"),
            (["б\tb.", ], "line 1: .*outside"),
            (["\tb"], "line 1: empty source"),
            (["б\tb", "в\tv", "б\tbe"], "line 3: duplicate rule.*line 1"),
        ):
            with self.assertRaisesRegex(TableLoadError, message):
                MappingTable.parse(lines, "Cyrl", "test.tsv")

    def test_same_source_different_context(self):
        table = MappingTable.parse(["е\tye\tinitial", "е\te", "е\teh\tfinal"], "Cyrl")
        assert 3 == len(table)

    def test_constructor(self):
        with self.assertRaises(TableLoadError):
            MappingTable("Cyrl", [Rule("б", "b"), Rule("б", "p")])
        with self.assertRaises(ValueError):
            MappingTable("cyrillic", [])

    def test_from_file(self):
        with TempDir() as temp:
            path = temp.make_file(name="Cyrl.tsv", contents="б\tb\n")
            table = MappingTable.from_file(path)
            assert ScriptTag("Cyrl") == table.script
            bad = temp.make_file(name="cyrillic.tsv", contents="б\tb\n")
            with self.assertRaisesRegex(TableLoadError, "not a script code"):
                MappingTable.from_file(bad)
            malformed = temp.make_file(name="Grek.tsv", contents="α\ta\nβ\n")
            with self.assertRaisesRegex(TableLoadError, "Grek.tsv, line 2"):
                MappingTable.from_file(malformed)


class LoadTablesTests(TestCase):
    def test_bundled(self):
        config = load_bundled_tables()
        self.assertListEqual(
            [
                "Arab", "Armn", "Beng", "Cyrl", "Deva", "Geor", "Grek",
                "Hang", "Hani", "Hebr", "Hira", "Kana",
            ],
            list(config.scripts))

    def test_directory(self):
        with TempDir() as temp:
            temp.make_file(name="Cyrl.tsv", contents="б\tb\n")
            temp.make_file(name="Grek.tsv", contents="β\tv\n")
            temp.make_file(name="README.txt", contents="not a table")
            config = load_tables(temp.absolute_path)
            assert (ScriptTag("Cyrl"), ScriptTag("Grek")) == config.scripts
            assert "bv" == config.romanize_text("бβ")

    def test_empty_directory(self):
        with TempDir() as temp:
            with self.assertRaisesRegex(TableLoadError, "no tables found"):
                load_tables(temp.absolute_path)

    def test_missing_directory(self):
        with TempDir() as temp:
            with self.assertRaises(IOError):
                load_tables(temp.absolute_path / "missing")

    def test_duplicate_script(self):
        table = MappingTable.parse(["б\tb"], "Cyrl")
        with self.assertRaises(TableLoadError):
            RomanizerConfig([table, table])
        with self.assertRaises(TableLoadError):
            RomanizerConfig([])


class RomanizeTests(TestCase):
    @classmethod
    def setUpClass(cls):
        cls.config = load_bundled_tables()

    def test_ascii(self):
        assert "hello" == self.config.romanize_text("hello")
        assert "" == self.config.romanize_text("")
        assert "  a\tb  " == self.config.romanize_text("  a\tb  ")

    def test_examples(self):
        for text, expected in (
            ("Москва", "Moskva"),
            ("Ельцин", "Yeltsin"),
            ("ее", "yee"),
            ("Київ", "Kiyiv"),
            ("Αθήνα", "Athina"),
            ("μπάλα", "bala"),
            ("Λάμπα", "Lamba"),
            ("שלום", "shlvm"),
            ("नमस्ते", "namaste"),
            ("ときょう", "tokyou"),
            ("Москва 2024!", "Moskva 2024!"),
            ("北京是中国的首都", "beijingshizhongguodeshoudou"),
            ("東京はにほん", "dongjinghanihon"),
            ("서울", "seoul"),
            ("한국어", "hangukeo"),
            ("ㅎㅏㄴ", "han"),
        ):
            self.assertEqual(expected, self.config.romanize_text(text), text)

    def test_fallback(self):
        assert "cafe" == self.config.romanize_text("café")
        assert "" == self.config.romanize_text("ก")
        passthrough = self.config.replace(fallback_policy=FallbackPolicy.PASSTHROUGH)
        assert "café ก" == passthrough.romanize_text("café ก")
        assert "Moskva" == passthrough.romanize_text("Москва")
        drop = self.config.replace(fallback_policy="drop")
        assert "caf " == drop.romanize_text("café ก")

    def test_lowercase(self):
        lower = self.config.replace(lowercase_output=True)
        assert "moskva" == lower.romanize_text("Москва")
        assert lower.lowercase_output
        assert not self.config.lowercase_output

    def test_tokens(self):
        self.assertListEqual(
            ["Moskva", "i", "Kiyiv"],
            self.config.romanize_tokens(["Москва", "и", "Київ"]))
        self.assertListEqual([], self.config.romanize_tokens([]))
        self.assertListEqual(["", "b"], self.config.romanize_tokens(["ъ", "б"]))
        self.assertListEqual(
            ["beijing", "shi", "shoudou"],
            self.config.romanize_tokens(["北京", "是", "首都"]))

    def test_module_functions(self):
        assert "Moskva" == romanize_text(self.config, "Москва")
        assert ["Moskva"] == romanize_tokens(self.config, ["Москва"])

    def test_script_precedence(self):
        first = MappingTable.parse(["ж\tzh"], "Cyrl")
        second = MappingTable.parse(["ж\tj"], "Grek")
        assert "zh" == RomanizerConfig([second, first]).romanize_text("ж")

    def test_final_context(self):
        table = MappingTable.parse(["н\tng\tfinal", "н\tn", "а\ta"], "Cyrl")
        config = RomanizerConfig([table])
        assert "nang" == config.romanize_text("нан")
        assert "nang nana" == config.romanize_text("нан нана")

    def test_thread_safety(self):
        rng = random.Random(7)
        alphabet = table_alphabet(self.config.tables[ScriptTag("Cyrl")])
        texts = [random_string(rng, alphabet) for _ in range(1000)]
        serial = [self.config.romanize_text(text) for text in texts]
        with ThreadPoolExecutor(max_workers=8) as executor:
            parallel = list(executor.map(self.config.romanize_text, texts))
        self.assertListEqual(serial, parallel)


class RomanizerInvariantTests(TestCase):
    def test_sample(self):
        config = load_bundled_tables()
        for script, table in config.tables.items():
            rng = random.Random(f"sample-{script}")
            alphabet = table_alphabet(table)
            for _ in range(200):
                text = random_string(rng, alphabet)
                romanized = config.romanize_text(text)
                assert romanized.isascii(), (script, text)
                assert romanized == config.romanize_text(romanized), text
                assert len(text.split()) == len(config.romanize_tokens(text.split()))


class ScriptDetectionTests(TestCase):
    def test_detect_script(self):
        assert "Cyrl" == detect_script("Москва")
        assert "Latn" == detect_script("Moscow")
        assert "Cyrl" == detect_script("Москва is big")
        assert "Zyyy" == detect_script("123 !?")
        assert "Zyyy" == detect_script("")
        assert "Deva" == detect_script("नमस्ते")
        assert "Hira" == detect_script("ときょう")
        assert "Hani" == detect_script("北京")
        assert "Hang" == detect_script("서울")

    def test_common_letters_ignored(self):
        assert "Kana" == detect_script("ーーーア")
        assert "Zyyy" == detect_script("ーー")

    def test_ties(self):
        assert "Cyrl" == detect_script("аб ab")
        assert "Latn" == detect_script("ab аб")

    def test_script_of_texts(self):
        assert "Grek" == script_of_texts(["Αθήνα", "Hello", "Λάμπα"])
