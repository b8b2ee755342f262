"""Contracts for every learned or linguistic model the pipeline consumes.

The pipeline never talks to a concrete model; it talks to one of the
abstract bases below. Production deployments bind them to neural models,
the test suite binds them to the deterministic rule-based implementations
in :mod:`halfcheck.backends.reference`. Implementations must be
deterministic for fixed inputs and either safely shareable across workers
or declared single-use via ``shareable``.

Declared input-length limits are enforced with :class:`InputTooLong`
rather than silent truncation, which would silently change verdicts.
"""

from __future__ import annotations

import abc
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from ..core import DISTRIBUTION_TOLERANCE, LabelDistribution
from ..errors import DataError, InputTooLong, PreconditionError
from ..textutil import (
    contains_sentinel,
    cosine,
    role_spans,
    strip_role_brackets,
    word_tokens,
)


class NLILabel:
    ENTAILMENT = "entailment"
    CONTRADICTION = "contradiction"
    NEUTRAL = "neutral"
    ALL = (ENTAILMENT, CONTRADICTION, NEUTRAL)


@dataclass(frozen=True)
class NLIVerdict:
    """A three-way entailment decision with its full distribution.

    ``label`` is always the argmax of ``distribution`` and ``confidence``
    the maximal probability.
    """

    label: str
    confidence: float
    distribution: Mapping[str, float]

    def __post_init__(self) -> None:
        if self.label not in NLILabel.ALL:
            raise DataError(f"unknown NLI label {self.label!r}")
        missing = [l for l in NLILabel.ALL if l not in self.distribution]
        if missing:
            raise DataError(f"NLI distribution missing {missing}")
        total = sum(self.distribution[l] for l in NLILabel.ALL)
        if not math.isclose(total, 1.0, abs_tol=DISTRIBUTION_TOLERANCE):
            raise DataError(f"NLI distribution sums to {total}")
        top = max(NLILabel.ALL, key=lambda l: self.distribution[l])
        if self.distribution[self.label] < self.distribution[top]:
            raise DataError("NLI label is not the distribution argmax")
        if not math.isclose(self.confidence, self.distribution[self.label], abs_tol=DISTRIBUTION_TOLERANCE):
            raise DataError("NLI confidence != max probability")
        object.__setattr__(self, "distribution", dict(self.distribution))

    @classmethod
    def from_probs(cls, entailment: float, contradiction: float, neutral: float) -> "NLIVerdict":
        dist = {
            NLILabel.ENTAILMENT: entailment,
            NLILabel.CONTRADICTION: contradiction,
            NLILabel.NEUTRAL: neutral,
        }
        label = max(NLILabel.ALL, key=lambda l: dist[l])
        return cls(label=label, confidence=dist[label], distribution=dist)

    @classmethod
    def concentrated(cls, label: str, confidence: float) -> "NLIVerdict":
        """Put ``confidence`` mass on ``label``, splitting the rest evenly."""
        rest = (1.0 - confidence) / 2.0
        dist = {l: (confidence if l == label else rest) for l in NLILabel.ALL}
        return cls(label=label, confidence=confidence, distribution=dist)

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "confidence": float(self.confidence),
            "distribution": {l: float(self.distribution[l]) for l in NLILabel.ALL},
        }

    @classmethod
    def from_dict(cls, raw: Mapping) -> "NLIVerdict":
        return cls(
            label=raw["label"],
            confidence=float(raw["confidence"]),
            distribution={k: float(v) for k, v in raw["distribution"].items()},
        )


@dataclass(frozen=True)
class SRLFrame:
    """A sentence with bracketed role annotations, e.g.
    ``[ARG0: Tom] [V: eats] [ARG1: apples] .``

    ``tag_count`` is the number of role brackets. Stripping brackets and
    role prefixes recovers the source tokens in order.
    """

    tagged_text: str
    tag_count: int

    def __post_init__(self) -> None:
        found = len(role_spans(self.tagged_text))
        if found != self.tag_count:
            raise DataError(
                f"tag_count {self.tag_count} != {found} bracketed spans in {self.tagged_text!r}"
            )

    @classmethod
    def from_tagged_text(cls, tagged_text: str, source: Optional[str] = None) -> "SRLFrame":
        frame = cls(tagged_text=tagged_text, tag_count=len(role_spans(tagged_text)))
        if source is not None and frame.role_stripped_tokens() != word_tokens(source):
            raise DataError(f"frame does not cover source tokens: {tagged_text!r}")
        return frame

    def role_stripped_tokens(self) -> list[str]:
        return word_tokens(strip_role_brackets(self.tagged_text))


@dataclass(frozen=True)
class Segment:
    """A contiguous substring of a source sentence with its offsets."""

    text: str
    start: int
    end: int

    def __post_init__(self) -> None:
        if self.start < 0 or self.end < self.start:
            raise DataError(f"bad segment offsets [{self.start}, {self.end})")


def check_segments(sentence: str, segments: Sequence[Segment]) -> None:
    """Validate the parser contract: offsets match, ordered, non-overlapping."""
    prev_end = 0
    for seg in segments:
        if sentence[seg.start : seg.end] != seg.text:
            raise DataError(f"segment text does not match offsets: {seg!r}")
        if seg.start < prev_end:
            raise DataError(f"segments overlap or are out of order at {seg!r}")
        prev_end = seg.end


def reassemble_segments(sentence: str, segments: Sequence[Segment]) -> str:
    """Concatenate segments with the original inter-segment gaps."""
    parts = []
    pos = 0
    for seg in segments:
        parts.append(sentence[pos : seg.start])
        parts.append(seg.text)
        pos = seg.end
    parts.append(sentence[pos:])
    return "".join(parts)


@dataclass(frozen=True)
class GenerationRequest:
    """Input to the infill generator: a header-plus-masked-claim text,
    a candidate budget, and literal spans every output must contain."""

    input_text: str
    num_candidates: int = 5
    constraints: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if self.num_candidates < 1:
            raise PreconditionError("num_candidates must be >= 1")
        if not contains_sentinel(self.input_text):
            raise PreconditionError("input_text contains no sentinel")
        for c in self.constraints:
            if not c:
                raise PreconditionError("empty constraint span")
        object.__setattr__(self, "constraints", tuple(self.constraints))


class Backend(abc.ABC):
    """Common surface: a stable identifier, an optional input-length limit,
    and a shareability declaration for the concurrency model."""

    name: str = "backend"
    max_input_chars: Optional[int] = None
    shareable: bool = True

    def _check_length(self, *texts: str) -> None:
        if self.max_input_chars is None:
            return
        for t in texts:
            if len(t) > self.max_input_chars:
                raise InputTooLong(
                    f"{self.name}: input of {len(t)} chars exceeds limit {self.max_input_chars}"
                )

    @staticmethod
    def _require_nonempty(value: str, what: str) -> None:
        if not value or not value.strip():
            raise PreconditionError(f"{what} must be non-empty")


class NLIModel(Backend):
    """Scores a premise/hypothesis pair as entailment, contradiction, or
    neutral."""

    @abc.abstractmethod
    def nli_score(self, premise: str, hypothesis: str) -> NLIVerdict:
        ...


class VeracityModel(Backend):
    """Produces a distribution over true / half-true / false for a claim
    given evidence. Evidence may be empty; the model must still answer."""

    @abc.abstractmethod
    def classify_veracity(self, claim: str, evidence: str) -> LabelDistribution:
        ...


class SRLTagger(Backend):
    """Produces zero or more role-bracketed frames for a sentence."""

    @abc.abstractmethod
    def srl_tag(self, sentence: str) -> list[SRLFrame]:
        ...


class ConstituencyParser(Backend):
    """Divides a sentence into ordered, non-overlapping segments whose
    concatenation (with the original gaps) reconstructs the sentence."""

    @abc.abstractmethod
    def constituency_segments(self, sentence: str) -> list[Segment]:
        ...


class TextEmbedder(Backend):
    """Maps text to a fixed-dimension vector.

    ``similarity`` defaults to the cosine of two ``embed`` calls;
    implementations whose vector space is only defined per batch may
    override it instead.
    """

    dimension: Optional[int] = None

    @abc.abstractmethod
    def embed(self, text: str) -> tuple[float, ...]:
        ...

    def similarity(self, a: str, b: str) -> float:
        return cosine(self.embed(a), self.embed(b))


class InfillGenerator(Backend):
    """Fills sentinel spans, returning up to ``num_candidates`` outputs,
    best first. Every output honors every constraint span verbatim and
    contains no sentinel."""

    @abc.abstractmethod
    def infill(self, request: GenerationRequest) -> list[str]:
        ...


class ContentWordTagger(Backend):
    """Identifies content-word positions (nouns, adjectives, verbs) in a
    token sequence; consumed by training-data construction."""

    @abc.abstractmethod
    def content_word_indices(self, tokens: Sequence[str]) -> list[int]:
        ...
