"""Evaluation of edited claims: content preservation, the disinfo-debunk
ratio, and human-annotation aggregation with Cohen's kappa.

Content preservation is a sentence-level BLEU pinned to one exact variant
so scores are reproducible bit for bit:

* tokens are lowercased whitespace-split words;
* n-gram orders 1..4 with uniform 0.25 weights;
* order-1 precision is unsmoothed -- no shared unigram means a score of 0;
* higher orders use add-one smoothing when their match count is zero
  (which also covers hypotheses shorter than the order);
* the standard brevity penalty applies.

Identical texts therefore score exactly 1.0 and token-disjoint texts
exactly 0.0.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Hashable, Iterable, Literal, Mapping, Optional, Sequence

from .editing import EditResult
from .errors import ConfigError, DataError, PreconditionError

BLEU_ORDERS = 4

BleuVariant = Literal["sentence-mean", "corpus"]

METRIC_NAMES = ("fluency", "edit_correctness")


def _bleu_tokens(text: str) -> list[str]:
    return text.lower().split()


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def _match_counts(hyp: Sequence[str], ref: Sequence[str], n: int) -> tuple[int, int]:
    """Clipped n-gram matches and total hypothesis n-grams."""
    hyp_grams = _ngrams(hyp, n)
    ref_grams = _ngrams(ref, n)
    matched = sum(min(count, ref_grams[gram]) for gram, count in hyp_grams.items())
    total = max(len(hyp) - n + 1, 0)
    return matched, total


def _brevity_penalty(hyp_len: int, ref_len: int) -> float:
    if hyp_len >= ref_len:
        return 1.0
    return math.exp(1.0 - ref_len / hyp_len)


def _bleu_from_counts(
    matches: Sequence[int], totals: Sequence[int], hyp_len: int, ref_len: int
) -> float:
    if matches[0] == 0:
        return 0.0
    log_sum = 0.0
    for n in range(BLEU_ORDERS):
        m, t = matches[n], totals[n]
        if n == 0:
            p = m / t
        elif m == 0:
            p = 1.0 / (t + 1.0)
        else:
            p = m / t
        log_sum += math.log(p) / BLEU_ORDERS
    return _brevity_penalty(hyp_len, ref_len) * math.exp(log_sum)


def content_preservation(edited: str, original: str) -> float:
    """Sentence BLEU of the edited claim against the original claim."""
    if not edited.strip() or not original.strip():
        raise PreconditionError("texts must be non-empty")
    hyp, ref = _bleu_tokens(edited), _bleu_tokens(original)
    matches, totals = [], []
    for n in range(1, BLEU_ORDERS + 1):
        m, t = _match_counts(hyp, ref, n)
        matches.append(m)
        totals.append(t)
    return _bleu_from_counts(matches, totals, len(hyp), len(ref))


def corpus_content_preservation(pairs: Sequence[tuple[str, str]]) -> float:
    """Corpus BLEU: n-gram counts pooled over all (edited, original) pairs
    before computing precisions, same smoothing and brevity penalty."""
    if not pairs:
        raise PreconditionError("no pairs to score")
    matches = [0] * BLEU_ORDERS
    totals = [0] * BLEU_ORDERS
    hyp_len = ref_len = 0
    for edited, original in pairs:
        if not edited.strip() or not original.strip():
            raise PreconditionError("texts must be non-empty")
        hyp, ref = _bleu_tokens(edited), _bleu_tokens(original)
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, BLEU_ORDERS + 1):
            m, t = _match_counts(hyp, ref, n)
            matches[n - 1] += m
            totals[n - 1] += t
    return _bleu_from_counts(matches, totals, hyp_len, ref_len)


@dataclass(frozen=True)
class EditEvalReport:
    """Aggregate quality of an editing run."""

    avg_content_preservation: float
    debunked_count: int
    attempted_count: int
    disinfo_debunk: float
    per_claim: tuple[tuple[str, float, bool], ...]

    def __post_init__(self) -> None:
        if self.attempted_count <= 0:
            raise DataError("attempted_count must be positive")
        expected = self.debunked_count / self.attempted_count
        if not math.isclose(self.disinfo_debunk, expected, abs_tol=1e-12):
            raise DataError("disinfo_debunk ratio does not match its counts")

    @property
    def percent(self) -> int:
        """Debunk ratio at integer-percent rounding (half rounds up)."""
        return int(math.floor(self.disinfo_debunk * 100.0 + 0.5))

    def as_dict(self) -> dict:
        return {
            "avg_content_preservation": self.avg_content_preservation,
            "debunked_count": self.debunked_count,
            "attempted_count": self.attempted_count,
            "disinfo_debunk": self.disinfo_debunk,
            "per_claim": [
                {"id": cid, "bleu": bleu, "debunked": debunked}
                for cid, bleu, debunked in self.per_claim
            ],
        }

    @classmethod
    def from_dict(cls, raw: Mapping) -> "EditEvalReport":
        return cls(
            avg_content_preservation=float(raw["avg_content_preservation"]),
            debunked_count=int(raw["debunked_count"]),
            attempted_count=int(raw["attempted_count"]),
            disinfo_debunk=float(raw["disinfo_debunk"]),
            per_claim=tuple(
                (row["id"], float(row["bleu"]), bool(row["debunked"]))
                for row in raw["per_claim"]
            ),
        )


def evaluate_edits(
    rows: Iterable[tuple[str, str, str, bool]],
    bleu_variant: BleuVariant = "sentence-mean",
) -> EditEvalReport:
    """Aggregate (id, original, edited, debunked) rows into a report."""
    per_claim = []
    pairs = []
    for cid, original, edited, debunked in rows:
        bleu = content_preservation(edited, original)
        per_claim.append((cid, bleu, bool(debunked)))
        pairs.append((edited, original))
    if not per_claim:
        raise PreconditionError("no edit results to evaluate")
    debunked_count = sum(1 for _id, _b, d in per_claim if d)
    if bleu_variant == "corpus":
        avg = corpus_content_preservation(pairs)
    else:
        avg = sum(b for _id, b, _d in per_claim) / len(per_claim)
    return EditEvalReport(
        avg_content_preservation=avg,
        debunked_count=debunked_count,
        attempted_count=len(per_claim),
        disinfo_debunk=debunked_count / len(per_claim),
        per_claim=tuple(per_claim),
    )


def disinfo_debunk(
    results: Sequence[EditResult], bleu_variant: BleuVariant = "sentence-mean"
) -> EditEvalReport:
    """Score an editing run: fraction of claims the detector now calls
    true, plus content preservation between each edit and its original."""
    if not results:
        raise PreconditionError("no edit results to evaluate")
    return evaluate_edits(
        ((r.original.id, r.original.statement, r.selected.text, r.debunked) for r in results),
        bleu_variant=bleu_variant,
    )


def cohen_kappa(pairs: Sequence[tuple[Hashable, Hashable]]) -> float:
    """Cohen's kappa between two annotators, on the x100 scale.

    ``pairs`` holds (annotator A label, annotator B label) per item. The
    chance-agreement term uses each annotator's own marginals; degenerate
    data where chance agreement is 1 (both annotators constant on one
    category) has no defined kappa and raises.
    """
    if not pairs:
        raise PreconditionError("kappa needs at least one pair")
    n = len(pairs)
    observed = sum(1 for a, b in pairs if a == b) / n
    marg_a = Counter(a for a, _b in pairs)
    marg_b = Counter(b for _a, b in pairs)
    categories = set(marg_a) | set(marg_b)
    chance = sum((marg_a[c] / n) * (marg_b[c] / n) for c in categories)
    if math.isclose(chance, 1.0, abs_tol=1e-12):
        raise DataError("degenerate annotations: chance agreement is 1, kappa undefined")
    return 100.0 * (observed - chance) / (1.0 - chance)


@dataclass(frozen=True)
class HumanAnnotation:
    """One annotator's scores for one edited claim (1..3 scales)."""

    claim_id: str
    annotator_id: str
    fluency: int
    edit_correctness: int

    def __post_init__(self) -> None:
        for name in METRIC_NAMES:
            score = getattr(self, name)
            if score not in (1, 2, 3):
                raise DataError(f"{name} score must be 1, 2, or 3, got {score}")

    def as_dict(self) -> dict:
        return {
            "claim_id": self.claim_id,
            "annotator_id": self.annotator_id,
            "fluency": self.fluency,
            "edit_correctness": self.edit_correctness,
        }

    @classmethod
    def from_dict(cls, raw: Mapping) -> "HumanAnnotation":
        return cls(
            claim_id=str(raw["claim_id"]),
            annotator_id=str(raw["annotator_id"]),
            fluency=int(raw["fluency"]),
            edit_correctness=int(raw["edit_correctness"]),
        )


def load_annotations(path: str | Path) -> list[HumanAnnotation]:
    """Read annotations from a JSON-lines file (one HumanAnnotation object
    per line); malformed lines fail loudly with their location."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"annotations file not found: {path}")
    annotations = []
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                annotations.append(HumanAnnotation.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                raise DataError(f"{path}:{line_no}: bad annotation line: {exc}") from exc
    if not annotations:
        raise DataError(f"annotations file {path} holds no annotations")
    return annotations


@dataclass(frozen=True)
class HumanEvalReport:
    means: Mapping[str, float]
    kappas: Mapping[str, Optional[float]]
    flags: tuple[str, ...]

    def as_dict(self) -> dict:
        return {"means": dict(self.means), "kappas": dict(self.kappas), "flags": list(self.flags)}


def human_eval_aggregate(
    annotations: Iterable[HumanAnnotation],
    annotator_pair: Optional[tuple[str, str]] = None,
) -> HumanEvalReport:
    """Per-metric means over every (claim, annotator) score, plus kappa
    per metric for the designated annotator pair.

    With exactly two annotator ids in the data the pair is inferred;
    otherwise it must be given. Degenerate kappas (constant categories)
    are reported as None with a flag rather than failing the aggregate.
    """
    annotations = list(annotations)
    if not annotations:
        raise PreconditionError("no annotations")
    flags: list[str] = []

    means = {
        name: sum(getattr(a, name) for a in annotations) / len(annotations)
        for name in METRIC_NAMES
    }

    ids = sorted({a.annotator_id for a in annotations})
    if annotator_pair is None:
        if len(ids) == 2:
            annotator_pair = (ids[0], ids[1])
        else:
            flags.append(f"no designated annotator pair among {len(ids)} annotators; kappa skipped")
            return HumanEvalReport(
                means=means, kappas={name: None for name in METRIC_NAMES}, flags=tuple(flags)
            )
    elif not set(annotator_pair) <= set(ids):
        raise ConfigError(f"annotator pair {annotator_pair} not present in annotations")

    by_key: dict[tuple[str, str], HumanAnnotation] = {}
    for a in annotations:
        key = (a.claim_id, a.annotator_id)
        if key in by_key:
            flags.append(f"duplicate annotation for claim {a.claim_id} by {a.annotator_id}; kept first")
            continue
        by_key[key] = a

    kappas: dict[str, Optional[float]] = {}
    first, second = annotator_pair
    claim_ids = sorted({a.claim_id for a in annotations})
    for name in METRIC_NAMES:
        pairs = []
        for cid in claim_ids:
            a, b = by_key.get((cid, first)), by_key.get((cid, second))
            if a is not None and b is not None:
                pairs.append((getattr(a, name), getattr(b, name)))
        if not pairs:
            kappas[name] = None
            flags.append(f"{name}: no claims annotated by both designated annotators")
            continue
        try:
            kappas[name] = cohen_kappa(pairs)
        except DataError as exc:
            kappas[name] = None
            flags.append(f"{name}: {exc}")
    return HumanEvalReport(means=means, kappas=kappas, flags=tuple(flags))
