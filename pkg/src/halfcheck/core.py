"""Domain types: label taxonomies, the six-to-three grouping, claim records,
and label distributions.

Everything here is immutable and pure; canonical label serialization is the
lowercase hyphenated string ("half-true", "pants-on-fire").
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional

from .errors import DataError

DISTRIBUTION_TOLERANCE = 1e-6


class SixWayLabel(str, Enum):
    TRUE = "true"
    MOSTLY_TRUE = "mostly-true"
    HALF_TRUE = "half-true"
    BARELY_TRUE = "barely-true"
    FALSE = "false"
    PANTS_ON_FIRE = "pants-on-fire"


class VeracityLabel(str, Enum):
    TRUE = "true"
    HALF_TRUE = "half-true"
    FALSE = "false"


class Split(str, Enum):
    TRAIN = "train"
    VALIDATION = "validation"
    TEST = "test"


# Fixed total order used for deterministic argmax tie-breaking.
VERACITY_ORDER: tuple[VeracityLabel, ...] = (
    VeracityLabel.TRUE,
    VeracityLabel.HALF_TRUE,
    VeracityLabel.FALSE,
)

_GROUPING: dict[SixWayLabel, VeracityLabel] = {
    SixWayLabel.TRUE: VeracityLabel.TRUE,
    SixWayLabel.MOSTLY_TRUE: VeracityLabel.TRUE,
    SixWayLabel.HALF_TRUE: VeracityLabel.HALF_TRUE,
    SixWayLabel.BARELY_TRUE: VeracityLabel.HALF_TRUE,
    SixWayLabel.FALSE: VeracityLabel.FALSE,
    SixWayLabel.PANTS_ON_FIRE: VeracityLabel.FALSE,
}


def _normalize_label_string(raw: str) -> str:
    # Ingestion files vary in case and use spaces or underscores for the
    # hyphen ("Half True", "pants_on_fire"); normalize without guessing.
    return "-".join(raw.strip().lower().replace("_", " ").replace("-", " ").split())


def parse_six_way(raw: str) -> SixWayLabel:
    try:
        return SixWayLabel(_normalize_label_string(raw))
    except ValueError:
        raise DataError(f"not a six-way label: {raw!r}") from None


def parse_veracity(raw: str) -> VeracityLabel:
    try:
        return VeracityLabel(_normalize_label_string(raw))
    except ValueError:
        raise DataError(f"not a veracity label: {raw!r}") from None


def group_label(six: SixWayLabel) -> VeracityLabel:
    """Collapse the six-way taxonomy to three classes.

    true and mostly-true count as true; half-true and barely-true as
    half-true; false and pants-on-fire as false.
    """
    return _GROUPING[six]


@dataclass(frozen=True)
class LabelDistribution:
    """Probabilities over the three veracity labels, summing to 1."""

    probs: Mapping[VeracityLabel, float]

    def __post_init__(self) -> None:
        missing = [lab for lab in VERACITY_ORDER if lab not in self.probs]
        if missing:
            raise DataError(f"distribution missing labels: {[m.value for m in missing]}")
        total = sum(self.probs[lab] for lab in VERACITY_ORDER)
        if not math.isclose(total, 1.0, abs_tol=DISTRIBUTION_TOLERANCE):
            raise DataError(f"distribution sums to {total}, not 1")
        for lab in VERACITY_ORDER:
            p = self.probs[lab]
            if p < 0.0 or p > 1.0:
                raise DataError(f"probability out of range for {lab.value}: {p}")
        object.__setattr__(self, "probs", dict(self.probs))

    def as_dict(self) -> dict[str, float]:
        return {lab.value: float(self.probs[lab]) for lab in VERACITY_ORDER}

    @classmethod
    def from_dict(cls, raw: Mapping[str, float]) -> "LabelDistribution":
        return cls({parse_veracity(k): float(v) for k, v in raw.items()})


def argmax_label(dist: LabelDistribution) -> VeracityLabel:
    """Label with maximal probability; ties broken by the fixed order
    true < half-true < false."""
    best = VERACITY_ORDER[0]
    for lab in VERACITY_ORDER[1:]:
        if dist.probs[lab] > dist.probs[best]:
            best = lab
    return best


@dataclass(frozen=True)
class ShortenedJustification:
    """One or two sentences distilled from a justification, with the NLI
    verdict that selected each.

    ``primary_sentence`` is the best entailment-or-contradiction sentence,
    ``neutral_sentence`` the best neutral one; at least one is present.
    ``rendered`` joins the selected sentences in source order.
    """

    primary_sentence: Optional[tuple[str, "NLIVerdict"]]  # noqa: F821 (backends type)
    neutral_sentence: Optional[tuple[str, "NLIVerdict"]]  # noqa: F821
    rendered: str

    def __post_init__(self) -> None:
        if self.primary_sentence is None and self.neutral_sentence is None:
            raise DataError("shortened justification needs at least one sentence")

    def as_dict(self) -> dict:
        def side(pair):
            if pair is None:
                return None
            text, verdict = pair
            return {"text": text, "verdict": verdict.as_dict()}

        return {
            "primary_sentence": side(self.primary_sentence),
            "neutral_sentence": side(self.neutral_sentence),
            "rendered": self.rendered,
        }

    @classmethod
    def from_dict(cls, raw: Mapping) -> "ShortenedJustification":
        from .backends.contracts import NLIVerdict

        def side(obj):
            if obj is None:
                return None
            return (obj["text"], NLIVerdict.from_dict(obj["verdict"]))

        return cls(
            primary_sentence=side(raw.get("primary_sentence")),
            neutral_sentence=side(raw.get("neutral_sentence")),
            rendered=raw["rendered"],
        )


@dataclass(frozen=True)
class ClaimRecord:
    """One LIAR-style row: the claim, its six-way label, and its evidence."""

    id: str
    statement: str
    six_way_label: SixWayLabel
    justification: str
    speaker: str = ""
    context: str = ""
    split: Split = Split.TEST
    shortened_justification: Optional[ShortenedJustification] = field(default=None)

    def __post_init__(self) -> None:
        if not self.id.strip():
            raise DataError("record id is empty")
        if not self.statement.strip():
            raise DataError(f"record {self.id}: statement is empty")
        if not self.justification.strip():
            raise DataError(f"record {self.id}: justification is empty")

    @property
    def grouped_label(self) -> VeracityLabel:
        return group_label(self.six_way_label)

    def with_shortened_justification(self, sj: ShortenedJustification) -> "ClaimRecord":
        return ClaimRecord(
            id=self.id,
            statement=self.statement,
            six_way_label=self.six_way_label,
            justification=self.justification,
            speaker=self.speaker,
            context=self.context,
            split=self.split,
            shortened_justification=sj,
        )

    def as_dict(self) -> dict:
        sj = self.shortened_justification
        return {
            "id": self.id,
            "statement": self.statement,
            "six_way_label": self.six_way_label.value,
            "justification": self.justification,
            "shortened_justification": sj.as_dict() if sj is not None else None,
            "speaker": self.speaker,
            "context": self.context,
            "split": self.split.value,
        }

    @classmethod
    def from_dict(cls, raw: Mapping) -> "ClaimRecord":
        sj = raw.get("shortened_justification")
        return cls(
            id=str(raw["id"]),
            statement=raw["statement"],
            six_way_label=parse_six_way(raw["six_way_label"]),
            justification=raw["justification"],
            speaker=raw.get("speaker", ""),
            context=raw.get("context", ""),
            split=Split(raw.get("split", "test")),
            shortened_justification=(
                ShortenedJustification.from_dict(sj) if sj is not None else None
            ),
        )
