from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_record
from halfcheck.backends import NLIChainClassifier, RuleTableNLI
from halfcheck.core import SixWayLabel, Split, VeracityLabel
from halfcheck.dataset import DatasetSplit
from halfcheck.detection import (
    ConfusionMatrix3,
    MATRIX_LABELS,
    confusion,
    evaluate_split,
    metrics,
    predict_label,
    render_matrix,
    truncate,
)
from halfcheck.errors import DataError, PreconditionError

# The published 3x3 matrix this module's metric conventions are pinned
# against (rows: model outputs true/false/half-true; columns: gold).
PUBLISHED_MATRIX = ConfusionMatrix3.from_rows([[364, 0, 96], [2, 272, 68], [31, 42, 408]])


def test_predict_label_stub_chains():
    classifier = NLIChainClassifier(RuleTableNLI())
    label, dist = predict_label("The sky is blue.", "The sky is blue.", classifier)
    assert label is VeracityLabel.TRUE
    label, _ = predict_label("The budget was cut.", "The budget was not cut.", classifier)
    assert label is VeracityLabel.FALSE
    label, _ = predict_label("The sky is blue.", "Dogs bark loudly.", classifier)
    assert label is VeracityLabel.HALF_TRUE


def test_confusion_direct_tally():
    matrix = confusion(
        [
            (VeracityLabel.TRUE, VeracityLabel.TRUE),
            (VeracityLabel.FALSE, VeracityLabel.HALF_TRUE),
        ]
    )
    assert matrix.counts[0][0] == 1
    assert matrix.counts[1][2] == 1
    assert matrix.total == 2


def test_confusion_diagonal_for_perfect_predictions():
    pairs = [(label, label) for label in MATRIX_LABELS for _ in range(3)]
    matrix = confusion(pairs)
    for i in range(3):
        for j in range(3):
            assert matrix.counts[i][j] == (3 if i == j else 0)


@given(st.permutations(range(12)))
def test_confusion_permutation_invariance(order):
    rng = random.Random(5)
    pairs = [
        (rng.choice(MATRIX_LABELS), rng.choice(MATRIX_LABELS)) for _ in range(12)
    ]
    shuffled = [pairs[i] for i in order]
    assert confusion(shuffled) == confusion(pairs)


def test_confusion_reconstructs_published_matrix_from_pairs():
    pairs = []
    for i, pred in enumerate(MATRIX_LABELS):
        for j, gold in enumerate(MATRIX_LABELS):
            pairs.extend([(pred, gold)] * PUBLISHED_MATRIX.counts[i][j])
    assert len(pairs) == 1283
    random.Random(3).shuffle(pairs)
    assert confusion(pairs) == PUBLISHED_MATRIX


def test_metrics_published_matrix_per_label():
    report = metrics(PUBLISHED_MATRIX)
    assert report.per_label_precision["half-true"] == pytest.approx(408 / 481)
    assert report.per_label_recall["true"] == pytest.approx(364 / 397)
    printed = report.printed()
    assert printed["per_label_precision"] == {"true": 0.791, "false": 0.795, "half-true": 0.848}
    assert printed["per_label_recall"] == {"true": 0.916, "false": 0.866, "half-true": 0.713}


def test_metrics_published_matrix_macros():
    report = metrics(PUBLISHED_MATRIX)
    printed = report.printed()
    assert printed["macro_precision"] == 0.811
    assert printed["macro_recall"] == 0.831
    assert printed["macro_f1"] == 0.82
    # exact values stay unrounded internally
    assert report.macro_precision == pytest.approx(0.81162, abs=5e-6)
    assert report.macro_recall == pytest.approx(0.832135, abs=5e-6)
    assert report.macro_f1 == pytest.approx(0.82, abs=5e-3)


def test_metrics_alternative_macro_f1_formula():
    report = metrics(PUBLISHED_MATRIX, macro_f1_formula="per-label-mean")
    per_label_mean = sum(report.per_label_f1.values()) / 3
    assert report.macro_f1 == pytest.approx(per_label_mean)
    assert round(report.macro_f1, 2) == 0.82


def test_metrics_diagonal_matrix_all_ones():
    report = metrics(ConfusionMatrix3.from_rows([[5, 0, 0], [0, 7, 0], [0, 0, 9]]))
    assert set(report.per_label_precision.values()) == {1.0}
    assert set(report.per_label_recall.values()) == {1.0}
    assert report.macro_f1 == 1.0


def test_metrics_zero_denominator_flags():
    report = metrics(ConfusionMatrix3.from_rows([[0, 0, 0], [3, 2, 0], [1, 0, 4]]))
    assert report.per_label_precision["true"] == 0.0
    assert any("precision(true)" in w for w in report.warnings)
    assert any("recall(half-true)" not in w for w in report.warnings)


def test_metrics_rejects_all_zero():
    with pytest.raises(DataError):
        metrics(ConfusionMatrix3.from_rows([[0] * 3] * 3))


def test_truncate_behaves_like_published_tables():
    assert truncate(364 / 397, 3) == 0.916
    assert truncate(0.795, 3) == 0.795
    assert truncate(0.9999, 3) == 0.999


@given(
    st.lists(st.integers(min_value=0, max_value=50), min_size=9, max_size=9).filter(
        lambda cells: sum(cells) > 0
    )
)
def test_metric_ranges_and_f1_bound(cells):
    matrix = ConfusionMatrix3.from_rows([cells[0:3], cells[3:6], cells[6:9]])
    report = metrics(matrix)
    for label in ("true", "false", "half-true"):
        p, r, f1 = (
            report.per_label_precision[label],
            report.per_label_recall[label],
            report.per_label_f1[label],
        )
        assert 0.0 <= p <= 1.0
        assert 0.0 <= r <= 1.0
        assert f1 <= max(p, r) + 1e-12
    assert report.macro_f1 <= max(report.macro_precision, report.macro_recall) + 1e-12


# --- evaluate_split ---------------------------------------------------------------

def _four_record_split() -> DatasetSplit:
    nli = RuleTableNLI()
    records = (
        # justification == statement -> SJ entails -> predicted true; gold true
        make_record("a", "Water is wet.", SixWayLabel.TRUE, "Water is wet.", nli=nli),
        # negated justification -> predicted false; gold false
        make_record("b", "The budget was cut.", SixWayLabel.FALSE, "The budget was not cut.", nli=nli),
        # unrelated justification -> predicted half-true; gold half-true
        make_record("c", "Taxes went up.", SixWayLabel.BARELY_TRUE, "Dogs bark loudly.", nli=nli),
        # unrelated justification -> predicted half-true; gold true (a miss)
        make_record("d", "Snow is cold.", SixWayLabel.MOSTLY_TRUE, "Cats sleep all day.", nli=nli),
    )
    return DatasetSplit(name=Split.TEST, records=records)


def test_evaluate_split_hand_traced_tally():
    split = _four_record_split()
    classifier = NLIChainClassifier(RuleTableNLI())
    report = evaluate_split(split, mode="SJ", classifier=classifier)
    # hand trace: diagonal true/false/half-true hits plus one (half-true, true) miss
    assert report.matrix.counts == ((1, 0, 0), (0, 1, 0), (1, 0, 1))
    assert report.per_label_recall["true"] == pytest.approx(0.5)
    assert report.per_label_precision["half-true"] == pytest.approx(0.5)


def test_evaluate_split_workers_match_serial():
    split = _four_record_split()
    classifier = NLIChainClassifier(RuleTableNLI())
    serial = evaluate_split(split, mode="SJ", classifier=classifier)
    parallel = evaluate_split(split, mode="SJ", classifier=classifier, workers=4)
    assert serial == parallel


def test_evaluate_split_j_and_sj_are_independent():
    split = _four_record_split()
    classifier = NLIChainClassifier(RuleTableNLI())
    report_j = evaluate_split(split, mode="J", classifier=classifier)
    report_sj = evaluate_split(split, mode="SJ", classifier=classifier)
    report_j_again = evaluate_split(split, mode="J", classifier=classifier)
    assert report_j == report_j_again
    assert report_j.matrix.total == report_sj.matrix.total == 4


def test_evaluate_split_missing_sj_is_typed_error():
    from halfcheck.core import ClaimRecord

    bare = ClaimRecord(
        id="x", statement="s.", six_way_label=SixWayLabel.TRUE, justification="j.", split=Split.TEST
    )
    split = DatasetSplit(name=Split.TEST, records=(bare,))
    classifier = NLIChainClassifier(RuleTableNLI())
    with pytest.raises(PreconditionError):
        evaluate_split(split, mode="SJ", classifier=classifier)
    # J mode works: the raw justification is always present
    assert evaluate_split(split, mode="J", classifier=classifier).matrix.total == 1


def test_render_matrix_contains_counts_and_macros():
    text = render_matrix(metrics(PUBLISHED_MATRIX))
    assert "364" in text and "408" in text
    assert "macro precision 0.811" in text
    assert "macro F1 0.82" in text
