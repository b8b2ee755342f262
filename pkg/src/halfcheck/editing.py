"""Controlled claim editing: mask the deceptive or contradicting segments,
build the role-tagged infill input, generate bounded candidates, and keep
the best edited claim.

Edits are minimal by construction: the generator receives every unmasked
fragment as a verbatim constraint, so candidates can only differ from the
original inside masked regions.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Literal, Sequence

from .backends.contracts import (
    ConstituencyParser,
    GenerationRequest,
    InfillGenerator,
    NLILabel,
    NLIModel,
    Segment,
    SRLFrame,
    TextEmbedder,
    VeracityModel,
)
from .backends.registry import BackendSet
from .core import ClaimRecord, LabelDistribution, VeracityLabel
from .dataset import select_srl_frame
from .detection import predict_label
from .errors import DataError, NoViableCandidates, PreconditionError
from .textutil import SENTINEL_PATTERN, alnum_tokens, contains_sentinel, sentinel

MAX_CANDIDATES = 5

MaskingPremise = Literal["counter", "segment"]


class MaskReason(str, Enum):
    CONTRADICTION = "contradiction"
    LOW_SIMILARITY = "low-similarity"


@dataclass(frozen=True)
class MaskedClaim:
    """A claim with one or more segments replaced by sentinels.

    Substituting ``masked_segments[k]`` back for sentinel k reconstructs
    the original byte for byte.
    """

    masked_text: str
    masked_segments: tuple[tuple[Segment, MaskReason], ...]
    original: str

    def __post_init__(self) -> None:
        if not self.masked_segments:
            raise DataError("masked claim needs at least one masked segment")
        if self.reconstruct() != self.original:
            raise DataError("masked segments do not reconstruct the original claim")

    def reconstruct(self) -> str:
        out = self.masked_text
        for k, (segment, _reason) in enumerate(self.masked_segments):
            out = out.replace(sentinel(k), segment.text, 1)
        return out

    def unmasked_fragments(self) -> list[str]:
        """Fragments of the claim outside the masks, in order, trimmed."""
        return [f.strip() for f in SENTINEL_PATTERN.split(self.masked_text) if f.strip()]


@dataclass(frozen=True)
class EditCandidate:
    text: str
    detector_label: VeracityLabel
    detector_distribution: LabelDistribution
    overlap: float
    rank: int

    def __post_init__(self) -> None:
        if contains_sentinel(self.text):
            raise DataError("candidate text contains a sentinel")

    def as_dict(self) -> dict:
        return {
            "text": self.text,
            "label": self.detector_label.value,
            "overlap": self.overlap,
            "rank": self.rank,
        }


@dataclass(frozen=True)
class EditResult:
    original: ClaimRecord
    masked: MaskedClaim
    candidates: tuple[EditCandidate, ...]
    selected: EditCandidate
    debunked: bool

    def __post_init__(self) -> None:
        if not 1 <= len(self.candidates) <= MAX_CANDIDATES:
            raise DataError(f"expected 1..{MAX_CANDIDATES} candidates, got {len(self.candidates)}")
        if self.selected not in self.candidates:
            raise DataError("selected candidate is not among the candidates")
        if self.debunked != (self.selected.detector_label is VeracityLabel.TRUE):
            raise DataError("debunked flag disagrees with the selected candidate's label")

    def as_dict(self) -> dict:
        return {
            "id": self.original.id,
            "original": self.original.statement,
            "masked_text": self.masked.masked_text,
            "masked_reasons": [reason.value for _seg, reason in self.masked.masked_segments],
            "candidates": [c.as_dict() for c in self.candidates],
            "selected": self.selected.text,
            "debunked": self.debunked,
        }


def mask_claim(
    claim: str,
    counter: str,
    nli: NLIModel,
    parser: ConstituencyParser,
    embedder: TextEmbedder,
    premise: MaskingPremise = "counter",
    min_confidence: float = 0.0,
) -> MaskedClaim:
    """Mask the segments of ``claim`` that the counter-evidence refutes.

    Every segment whose NLI verdict against the counter is contradiction
    (at or above ``min_confidence``) is masked. If none contradicts, the
    single segment least similar to the counter is masked instead; the
    paper of record for this pipeline treats that fallback as one segment,
    so it never masks more.
    """
    if not claim.strip() or not counter.strip():
        raise PreconditionError("claim and counter must be non-empty")
    segments = parser.constituency_segments(claim)
    if not segments:
        raise DataError("claim yields zero segments")

    masked: list[tuple[Segment, MaskReason]] = []
    for segment in segments:
        if premise == "counter":
            verdict = nli.nli_score(counter, segment.text)
        else:
            verdict = nli.nli_score(segment.text, counter)
        if verdict.label == NLILabel.CONTRADICTION and verdict.confidence >= min_confidence:
            masked.append((segment, MaskReason.CONTRADICTION))

    if not masked:
        lowest = min(segments, key=lambda seg: (embedder.similarity(seg.text, counter), seg.start))
        masked = [(lowest, MaskReason.LOW_SIMILARITY)]

    parts: list[str] = []
    cursor = 0
    for k, (segment, _reason) in enumerate(masked):
        parts.append(claim[cursor : segment.start])
        parts.append(sentinel(k))
        cursor = segment.end
    parts.append(claim[cursor:])
    return MaskedClaim(
        masked_text="".join(parts),
        masked_segments=tuple(masked),
        original=claim,
    )


def build_infill_input(counter_frame: SRLFrame, masked: MaskedClaim) -> str:
    """Bracketed role-tagged counter as header, then the masked claim."""
    return f"[{counter_frame.tagged_text}] {masked.masked_text}"


def generate_edits(
    input_text: str,
    masked: MaskedClaim,
    generator: InfillGenerator,
    n: int = MAX_CANDIDATES,
) -> list[str]:
    """Generate up to ``n`` (at most 5) candidate edited claims.

    The unmasked fragments of the claim are passed as verbatim constraints;
    outputs violating them (or still containing a sentinel) are discarded,
    and an empty surviving set is a typed error.
    """
    if not 1 <= n <= MAX_CANDIDATES:
        raise PreconditionError(f"candidate budget must be in 1..{MAX_CANDIDATES}, got {n}")
    for k in range(len(masked.masked_segments)):
        if sentinel(k) not in input_text:
            raise PreconditionError(f"input_text lacks {sentinel(k)} from the masked claim")
    constraints = tuple(masked.unmasked_fragments())
    request = GenerationRequest(input_text=input_text, num_candidates=n, constraints=constraints)
    raw = generator.infill(request)
    kept = []
    for text in raw[:n]:
        if contains_sentinel(text):
            continue
        if all(c in text for c in constraints):
            kept.append(text)
    if not kept:
        raise NoViableCandidates("generator produced zero constraint-satisfying candidates")
    return kept


def word_overlap(edited: str, original: str) -> float:
    """Fraction of the original's token set present in the edited claim;
    tokens are lowercased alphanumeric runs."""
    if not edited.strip() or not original.strip():
        raise PreconditionError("texts must be non-empty")
    original_tokens = set(alnum_tokens(original))
    if not original_tokens:
        return 0.0
    edited_tokens = set(alnum_tokens(edited))
    return len(edited_tokens & original_tokens) / len(original_tokens)


def score_candidates(
    texts: Sequence[str],
    original: str,
    counter: str,
    classifier: VeracityModel,
) -> tuple[EditCandidate, ...]:
    """Attach the detector verdict and overlap score to each candidate,
    preserving generation rank (0 = best)."""
    scored = []
    for rank, text in enumerate(texts):
        label, dist = predict_label(text, counter, classifier)
        scored.append(
            EditCandidate(
                text=text,
                detector_label=label,
                detector_distribution=dist,
                overlap=word_overlap(text, original),
                rank=rank,
            )
        )
    return tuple(scored)


def select_candidate(scored: Sequence[EditCandidate]) -> EditCandidate:
    """Prefer detector-true candidates; within the pool take the highest
    overlap, best generation rank on ties."""
    if not scored:
        raise PreconditionError("no candidates to select from")
    pool = [c for c in scored if c.detector_label is VeracityLabel.TRUE] or list(scored)
    return sorted(pool, key=lambda c: (-c.overlap, c.rank))[0]


def filter_best(
    candidates: Sequence[str],
    original: str,
    counter: str,
    classifier: VeracityModel,
) -> EditCandidate:
    """Score every candidate and apply the two-stage selection rule."""
    return select_candidate(score_candidates(candidates, original, counter, classifier))


def edit_claim(
    record: ClaimRecord,
    backends: BackendSet,
    premise: MaskingPremise = "counter",
    min_confidence: float = 0.0,
    max_candidates: int = MAX_CANDIDATES,
) -> EditResult:
    """Run the full editing pipeline on one half-true or false claim.

    True-labeled claims are refused: the objective is converting half-true
    and false claims, so editing a true claim is a caller bug. The counter
    is the record's shortened justification.
    """
    grouped = record.grouped_label
    if grouped is VeracityLabel.TRUE:
        raise PreconditionError(
            f"record {record.id} is grouped true; only half-true or false claims are edited"
        )
    if record.shortened_justification is None:
        raise PreconditionError(f"record {record.id} has no shortened justification (counter)")
    counter = record.shortened_justification.rendered

    masked = mask_claim(
        record.statement,
        counter,
        nli=backends.nli,
        parser=backends.parser,
        embedder=backends.embedder,
        premise=premise,
        min_confidence=min_confidence,
    )
    frames = backends.srl.srl_tag(counter)
    if frames:
        counter_frame = select_srl_frame(frames)
    else:
        counter_frame = SRLFrame.from_tagged_text(counter)
    input_text = build_infill_input(counter_frame, masked)
    texts = generate_edits(input_text, masked, backends.generator, n=max_candidates)
    scored = score_candidates(texts, record.statement, counter, backends.classifier)
    selected = select_candidate(scored)
    return EditResult(
        original=record,
        masked=masked,
        candidates=scored,
        selected=selected,
        debunked=selected.detector_label is VeracityLabel.TRUE,
    )
