"""Evidence distillation: reduce a claim's extracted justification to the
one or two sentences that matter, using sentence-level NLI.

The best entailment-or-contradiction sentence becomes the primary evidence
sentence; the best neutral sentence becomes the second. Whichever class is
empty is simply absent, so the result is always one or two verbatim source
sentences, rendered in source order.
"""

from __future__ import annotations

import re
from typing import Literal

from .backends.contracts import NLILabel, NLIModel, NLIVerdict
from .core import ShortenedJustification
from .errors import DataError, PreconditionError

__all__ = ["ShortenedJustification", "split_sentences", "shorten_justification"]

# A sentence ends at ., ! or ? (optionally followed by one closing quote
# or bracket) and then whitespace or end-of-text. Requiring whitespace
# after the terminator keeps decimal points ("$3.50") and other intra-token
# periods from splitting.
_SENTENCE_END = re.compile(r"(?:(?<=[.!?])|(?<=[.!?][\"'”’)\]]))\s+")

PremiseSide = Literal["claim", "sentence"]


def split_sentences(text: str) -> list[str]:
    """Split into sentences on terminal punctuation.

    Joining the result with single spaces reproduces the input modulo
    whitespace; every sentence is a verbatim (stripped) substring.
    """
    if not text or not text.strip():
        raise PreconditionError("cannot split empty text")
    parts = [p.strip() for p in _SENTENCE_END.split(text.strip())]
    return [p for p in parts if p]


def shorten_justification(
    claim: str,
    justification: str,
    nli: NLIModel,
    premise: PremiseSide = "claim",
) -> ShortenedJustification:
    """Select the evidence sentences for ``claim`` from ``justification``.

    Each justification sentence is scored against the claim; with
    ``premise="claim"`` (the default) the claim is the NLI premise and the
    sentence the hypothesis, so a sentence that contradicts the claim gets
    the contradiction label. Ties on confidence keep the earlier sentence.
    """
    if not claim or not claim.strip():
        raise PreconditionError("claim must be non-empty")
    sentences = split_sentences(justification)
    if not sentences:
        raise DataError("justification splits into zero sentences")

    best_primary: tuple[int, str, NLIVerdict] | None = None
    best_neutral: tuple[int, str, NLIVerdict] | None = None
    for idx, sentence in enumerate(sentences):
        if premise == "claim":
            verdict = nli.nli_score(claim, sentence)
        else:
            verdict = nli.nli_score(sentence, claim)
        if verdict.label == NLILabel.NEUTRAL:
            if best_neutral is None or verdict.confidence > best_neutral[2].confidence:
                best_neutral = (idx, sentence, verdict)
        else:
            if best_primary is None or verdict.confidence > best_primary[2].confidence:
                best_primary = (idx, sentence, verdict)

    chosen = [c for c in (best_primary, best_neutral) if c is not None]
    chosen.sort(key=lambda c: c[0])
    return ShortenedJustification(
        primary_sentence=(best_primary[1], best_primary[2]) if best_primary else None,
        neutral_sentence=(best_neutral[1], best_neutral[2]) if best_neutral else None,
        rendered=" ".join(c[1] for c in chosen),
    )
