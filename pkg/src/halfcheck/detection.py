"""Three-way veracity prediction and its confusion-matrix metrics.

Metric values are kept at full float precision internally. Published
tables in this problem area conventionally show 3 decimals produced by
truncation, with macro averages taken over the truncated per-label values;
``DetectionReport.printed()`` reproduces that convention so reports can be
checked digit-for-digit against such tables.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Literal, Mapping, Sequence

from .backends.contracts import VeracityModel
from .core import ClaimRecord, LabelDistribution, VeracityLabel, argmax_label
from .dataset import DatasetSplit
from .errors import DataError, PreconditionError

# Row/column order of the confusion matrix: model outputs in rows, gold
# labels in columns.
MATRIX_LABELS: tuple[VeracityLabel, ...] = (
    VeracityLabel.TRUE,
    VeracityLabel.FALSE,
    VeracityLabel.HALF_TRUE,
)

EvidenceMode = Literal["J", "SJ"]
MacroF1Formula = Literal["harmonic", "per-label-mean"]


def predict_label(
    claim: str, evidence: str, classifier: VeracityModel
) -> tuple[VeracityLabel, LabelDistribution]:
    """Classify one (claim, evidence) pair; the label is the distribution
    argmax with the fixed tie order."""
    if not claim or not claim.strip():
        raise PreconditionError("claim must be non-empty")
    dist = classifier.classify_veracity(claim, evidence)
    return argmax_label(dist), dist


@dataclass(frozen=True)
class ConfusionMatrix3:
    """3x3 counts; ``counts[i][j]`` = predictions of MATRIX_LABELS[i] whose
    gold label is MATRIX_LABELS[j]."""

    counts: tuple[tuple[int, int, int], ...]

    def __post_init__(self) -> None:
        if len(self.counts) != 3 or any(len(row) != 3 for row in self.counts):
            raise DataError("confusion matrix must be 3x3")
        for row in self.counts:
            for cell in row:
                if cell < 0:
                    raise DataError("confusion matrix cells must be non-negative")
        object.__setattr__(self, "counts", tuple(tuple(int(c) for c in row) for row in self.counts))

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def row_sum(self, i: int) -> int:
        return sum(self.counts[i])

    def col_sum(self, j: int) -> int:
        return sum(row[j] for row in self.counts)

    def as_rows(self) -> list[list[int]]:
        return [list(row) for row in self.counts]

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "ConfusionMatrix3":
        return cls(tuple(tuple(int(c) for c in row) for row in rows))


def confusion(
    pred_gold_pairs: Iterable[tuple[VeracityLabel, VeracityLabel]]
) -> ConfusionMatrix3:
    """Tally (prediction, gold) pairs; order-independent."""
    index = {label: i for i, label in enumerate(MATRIX_LABELS)}
    grid = [[0, 0, 0] for _ in range(3)]
    n = 0
    for pred, gold in pred_gold_pairs:
        grid[index[pred]][index[gold]] += 1
        n += 1
    if n == 0:
        raise PreconditionError("cannot tally an empty pair list")
    return ConfusionMatrix3.from_rows(grid)


@dataclass(frozen=True)
class DetectionReport:
    matrix: ConfusionMatrix3
    per_label_precision: Mapping[str, float]
    per_label_recall: Mapping[str, float]
    per_label_f1: Mapping[str, float]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    macro_f1_formula: MacroF1Formula = "harmonic"
    warnings: tuple[str, ...] = field(default=())

    def as_dict(self) -> dict:
        return {
            "matrix": self.matrix.as_rows(),
            "per_label_precision": dict(self.per_label_precision),
            "per_label_recall": dict(self.per_label_recall),
            "per_label_f1": dict(self.per_label_f1),
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "macro_f1_formula": self.macro_f1_formula,
            "warnings": list(self.warnings),
        }

    def printed(self) -> dict:
        """Presentation values following the published-table convention:
        per-label values truncated to 3 decimals, macros averaged over the
        truncated values and truncated again, F1 shown at 2 decimals."""
        prec = {k: truncate(v, 3) for k, v in self.per_label_precision.items()}
        rec = {k: truncate(v, 3) for k, v in self.per_label_recall.items()}
        macro_p = truncate(_mean(list(prec.values())), 3)
        macro_r = truncate(_mean(list(rec.values())), 3)
        if self.macro_f1_formula == "harmonic":
            macro_f1 = round(_harmonic(macro_p, macro_r), 2)
        else:
            macro_f1 = round(_mean([truncate(v, 3) for v in self.per_label_f1.values()]), 2)
        return {
            "per_label_precision": prec,
            "per_label_recall": rec,
            "macro_precision": macro_p,
            "macro_recall": macro_r,
            "macro_f1": macro_f1,
        }


def truncate(value: float, places: int) -> float:
    """Truncate toward zero at ``places`` decimals (published-table style).

    A tiny epsilon absorbs float dust so exact decimal values survive.
    """
    scale = 10**places
    return math.floor(value * scale + 1e-9) / scale if value >= 0 else -truncate(-value, places)


def _mean(values: Sequence[float]) -> float:
    return sum(values) / len(values)


def _harmonic(a: float, b: float) -> float:
    if a + b == 0.0:
        return 0.0
    return 2.0 * a * b / (a + b)


def metrics(
    matrix: ConfusionMatrix3, macro_f1_formula: MacroF1Formula = "harmonic"
) -> DetectionReport:
    """Per-label precision/recall/F1 and macro averages from the matrix.

    Zero-denominator cells yield 0.0 plus a warning flag so downstream
    aggregation never sees NaN. The default macro-F1 is the harmonic mean
    of macro precision and macro recall; ``per-label-mean`` averages the
    per-label F1 values instead.
    """
    if matrix.total == 0:
        raise DataError("all-zero confusion matrix")
    precision: dict[str, float] = {}
    recall: dict[str, float] = {}
    f1: dict[str, float] = {}
    warnings: list[str] = []
    for i, label in enumerate(MATRIX_LABELS):
        diag = matrix.counts[i][i]
        row, col = matrix.row_sum(i), matrix.col_sum(i)
        if row == 0:
            warnings.append(f"precision({label.value}): no predictions, reported as 0")
        if col == 0:
            warnings.append(f"recall({label.value}): no gold instances, reported as 0")
        p = diag / row if row else 0.0
        r = diag / col if col else 0.0
        precision[label.value] = p
        recall[label.value] = r
        f1[label.value] = _harmonic(p, r)
    macro_p = _mean(list(precision.values()))
    macro_r = _mean(list(recall.values()))
    if macro_f1_formula == "harmonic":
        macro_f1 = _harmonic(macro_p, macro_r)
    else:
        macro_f1 = _mean(list(f1.values()))
    return DetectionReport(
        matrix=matrix,
        per_label_precision=precision,
        per_label_recall=recall,
        per_label_f1=f1,
        macro_precision=macro_p,
        macro_recall=macro_r,
        macro_f1=macro_f1,
        macro_f1_formula=macro_f1_formula,
        warnings=tuple(warnings),
    )


def _evidence_text(record: ClaimRecord, mode: EvidenceMode) -> str:
    if mode == "J":
        return record.justification
    if record.shortened_justification is None:
        raise PreconditionError(
            f"record {record.id} has no shortened justification; build the dataset first"
        )
    return record.shortened_justification.rendered


def evaluate_split(
    split: DatasetSplit,
    mode: EvidenceMode,
    classifier: VeracityModel,
    macro_f1_formula: MacroF1Formula = "harmonic",
    workers: int = 1,
) -> DetectionReport:
    """Predict every record against its grouped gold label and score.

    ``mode`` selects the evidence column: J for the full justification, SJ
    for the shortened justification. Tallying is order-independent, so
    fanning out across workers cannot change the report.
    """
    if len(split) == 0:
        raise PreconditionError(f"split {split.name.value} is empty")
    evidence = [_evidence_text(rec, mode) for rec in split.records]

    def one(pair: tuple[ClaimRecord, str]) -> tuple[VeracityLabel, VeracityLabel]:
        rec, ev = pair
        pred, _dist = predict_label(rec.statement, ev, classifier)
        return pred, rec.grouped_label

    items = list(zip(split.records, evidence))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pairs = list(pool.map(one, items))
    else:
        pairs = [one(item) for item in items]
    return metrics(confusion(pairs), macro_f1_formula=macro_f1_formula)


def render_matrix(report: DetectionReport) -> str:
    """Text rendering of the confusion matrix with per-label and macro
    metrics, gold labels in columns."""
    printed = report.printed()
    labels = [label.value for label in MATRIX_LABELS]
    header = ["model \\ gold"] + labels + ["precision"]
    rows = [header]
    for i, label in enumerate(labels):
        row = [label]
        row += [str(c) for c in report.matrix.counts[i]]
        row.append(f"{printed['per_label_precision'][label]:.3f}")
        rows.append(row)
    recall_row = ["recall"] + [f"{printed['per_label_recall'][lab]:.3f}" for lab in labels] + [""]
    rows.append(recall_row)
    widths = [max(len(r[c]) for r in rows) for c in range(len(header))]
    lines = ["  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)).rstrip() for row in rows]
    lines.append(
        "macro precision {p:.3f}  macro recall {r:.3f}  macro F1 {f:.2f}".format(
            p=printed["macro_precision"],
            r=printed["macro_recall"],
            f=printed["macro_f1"],
        )
    )
    return "\n".join(lines) + "\n"
