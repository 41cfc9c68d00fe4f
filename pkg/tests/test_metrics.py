from unittest import TestCase
from . import *
from xlit.corpus import SIB200_LABELS
from xlit.metrics import *
from xlit.types import LanguageTag, PromptMode, TagLabel, TaskKind, iter_tag_values


TAGS = list(iter_tag_values())


def confusion_macro_f1(gold, pred):
    """Macro-F1 from an explicit confusion matrix, over classes seen in
    gold or predictions.
    """
    matrix = {(g, p): 0 for g in TAGS for p in TAGS}
    for gold_seq, pred_seq in zip(gold, pred):
        for g, p in zip(gold_seq, pred_seq):
            matrix[(g, p)] += 1
    f1s = []
    for tag in TAGS:
        tp = matrix[(tag, tag)]
        row = sum(matrix[(tag, p)] for p in TAGS)
        column = sum(matrix[(g, tag)] for g in TAGS)
        if row == 0 and column == 0:
            continue
        precision = tp / column if column else 0.0
        recall = tp / row if row else 0.0
        f1s.append(2 * precision * recall / (precision + recall) if tp else 0.0)
    return sum(f1s) / len(f1s) if f1s else 0.0


class FindTagsTests(TestCase):
    def test_labeled(self):
        self.assertListEqual(
            [TagLabel.B_PER, TagLabel.O, TagLabel.B_LOC],
            find_tags("Ivan: B-PER\nzhivyot: O\nMoskve:B-LOC\n"))

    def test_bare(self):
        self.assertListEqual(
            [TagLabel.B_ORG, TagLabel.I_ORG, TagLabel.O], find_tags("B-ORG I-ORG O"))

    def test_labeled_preferred(self):
        assert [TagLabel.I_LOC] == find_tags("O O\nx: I-LOC")

    def test_no_partial_match(self):
        assert [] == find_tags("x: B-PERSON\nOK")

    def test_parse_seqlab_output(self):
        self.assertListEqual(
            [TagLabel.B_PER, TagLabel.O, TagLabel.O], parse_seqlab_output("a: B-PER", 3))
        self.assertListEqual(
            [TagLabel.B_PER], parse_seqlab_output("a: B-PER\nb: I-PER", 1))
        assert [TagLabel.O] * 2 == parse_seqlab_output("no idea", 2)
        with self.assertRaises(ValueError):
            parse_seqlab_output("a: O", 0)


class ParseClsTests(TestCase):
    def test_first_occurrence(self):
        assert "sports" == parse_cls_output(" Sports, not travel", SIB200_LABELS)
        assert "travel" == parse_cls_output("travel or sports", SIB200_LABELS)

    def test_unparsed(self):
        assert parse_cls_output("I cannot tell", SIB200_LABELS) is None
        assert parse_cls_output("", SIB200_LABELS) is None

    def test_longer_wins(self):
        labels = ("science", "science/technology")
        assert "science/technology" == parse_cls_output("science/technology", labels)
        assert "science" == parse_cls_output("science!", labels)

    def test_verbalizers(self):
        verbalizers = {"science/technology": "tech"}
        assert "science/technology" == parse_cls_output("TECH", SIB200_LABELS, verbalizers)

    def test_empty_label_set(self):
        with self.assertRaises(ValueError):
            parse_cls_output("x", ())


class MacroF1Tests(TestCase):
    def test_example(self):
        self.assertAlmostEqual(
            2 / 3, macro_f1([["B-PER", "O", "O"]], [["B-PER", "B-PER", "O"]]))

    def test_perfect(self):
        gold = [["B-PER", "I-PER", "O"], ["B-LOC"]]
        assert 1.0 == macro_f1(gold, gold)

    def test_empty(self):
        assert 0.0 == macro_f1([], [])

    def test_per_class(self):
        scores = per_class_scores([["B-PER", "O", "O"]], [["B-PER", "B-PER", "O"]])
        self.assertListEqual(["O", "B-PER"], list(scores))
        assert ClassScore(0.5, 1.0, 2 / 3, 1) == scores["B-PER"]
        assert 2 == scores["O"].support

    def test_tag_labels_accepted(self):
        assert 1.0 == macro_f1([[TagLabel.O]], [["O"]])

    def test_mismatch(self):
        with self.assertRaisesRegex(MetricError, "1 gold items but 2 predictions"):
            macro_f1([["O"]], [["O"], ["O"]])
        with self.assertRaises(MetricError) as ctx:
            macro_f1([["O"], ["O", "O"]], [["O"], ["O"]])
        assert 1 == ctx.exception.index

    def test_oracle(self):
        rng = random.Random(17)
        for trial in range(1000):
            gold = []
            pred = []
            for _ in range(rng.randint(1, 6)):
                length = rng.randint(1, 8)
                gold.append([rng.choice(TAGS) for _ in range(length)])
                pred.append([rng.choice(TAGS) for _ in range(length)])
            assert abs(confusion_macro_f1(gold, pred) - macro_f1(gold, pred)) <= 1e-12, trial


class AccuracyTests(TestCase):
    def test_accuracy(self):
        assert 0.75 == accuracy(["a", "b", "c", "d"], ["a", "b", "c", "a"])
        assert 0.5 == accuracy(["a", "b"], ["a", None])
        assert 0.0 == accuracy([], [])

    def test_mismatch(self):
        with self.assertRaises(MetricError):
            accuracy(["a"], [])


class MetricReportTests(TestCase):
    def test_score_seqlab(self):
        report = score_predictions(
            "seqlab", "rus_Cyrl", "latn",
            [["B-PER", "O", "O"]], [["B-PER", "B-PER", "O"]],
            n_unparsed=0, model="tiny", metadata=dict(seed=3))
        self.assertAlmostEqual(200 / 3, report.score)
        assert TaskKind.SEQLAB == report.task
        assert LanguageTag("rus", "Cyrl") == report.language
        assert PromptMode.LATN == report.mode
        assert 1 == report.n_examples
        assert {"O", "B-PER"} == set(report.per_class)
        assert dict(seed=3) == report.metadata

    def test_score_cls(self):
        report = score_predictions(
            TaskKind.CLS, "ell_Grek", PromptMode.ORIG,
            ["sports", "travel", "health", "politics"],
            ["sports", "travel", None, "politics"])
        assert 75.0 == report.score
        assert 4 == report.n_examples
        assert 1 == report.n_unparsed
        assert {} == report.per_class

    def test_dict_round_trip(self):
        report = score_predictions(
            "seqlab", "hin_Deva", "combined", [["B-LOC", "O"]], [["B-LOC", "I-LOC"]],
            model="tiny", metadata=dict(policy="random(k=3,attempts=8)"))
        self.assertEqual(report, MetricReport.from_dict(report.to_dict()))
        data = report.to_dict()
        assert "hin_Deva" == data["language"]
        assert "combined" == data["mode"]

    def test_validation(self):
        with self.assertRaises(ValueError):
            MetricReport("cls", "ell_Grek", "orig", 100.5)
        with self.assertRaises(ValueError):
            MetricReport("cls", "ell_Grek", "orig", 50.0, n_examples=2, n_unparsed=3)
        with self.assertRaises(ValueError):
            MetricReport("cls", "ell_Grek", "orig", 50.0, per_class=dict(O=ClassScore(1, 1, 1, 1)))
        with self.assertRaises(ValueError):
            MetricReport("cls", "greek", "orig", 50.0)
        with self.assertRaises(ValueError):
            MetricReport.from_dict(dict(task="cls", language="ell_Grek"))
        with self.assertRaises(ValueError):
            MetricReport.from_dict(dict(task="ner", language="ell_Grek", mode="orig", score=1))
