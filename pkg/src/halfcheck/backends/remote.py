"""HTTP adapters binding the backend contracts to remote model services.

Each adapter POSTs a JSON body to a configured endpoint and maps transport
failures to :class:`BackendUnavailable`. The wire formats are minimal and
documented per adapter; a service hosting a neural model only has to speak
this shape.
"""

from __future__ import annotations

from typing import Optional

import httpx

from ..core import LabelDistribution
from ..errors import BackendUnavailable
from .contracts import (
    ConstituencyParser,
    GenerationRequest,
    InfillGenerator,
    NLIModel,
    NLIVerdict,
    Segment,
    SRLFrame,
    SRLTagger,
    TextEmbedder,
    VeracityModel,
)

DEFAULT_TIMEOUT = 30.0


class _RemoteMixin:
    def __init__(
        self,
        url: str,
        timeout: float = DEFAULT_TIMEOUT,
        client: Optional[httpx.Client] = None,
    ) -> None:
        self._url = url
        self._client = client or httpx.Client(timeout=timeout)

    def _post(self, payload: dict) -> dict:
        try:
            response = self._client.post(self._url, json=payload)
            response.raise_for_status()
            return response.json()
        except httpx.HTTPError as exc:
            raise BackendUnavailable(f"{self._url}: {exc}") from exc


class RemoteNLI(_RemoteMixin, NLIModel):
    """POST {premise, hypothesis} -> {label, confidence, distribution}."""

    name = "remote-nli"

    def nli_score(self, premise: str, hypothesis: str) -> NLIVerdict:
        self._require_nonempty(premise, "premise")
        self._require_nonempty(hypothesis, "hypothesis")
        raw = self._post({"premise": premise, "hypothesis": hypothesis})
        return NLIVerdict.from_dict(raw)


class RemoteVeracityModel(_RemoteMixin, VeracityModel):
    """POST {claim, evidence} -> {"true": p, "half-true": p, "false": p}."""

    name = "remote-classifier"

    def classify_veracity(self, claim: str, evidence: str) -> LabelDistribution:
        self._require_nonempty(claim, "claim")
        raw = self._post({"claim": claim, "evidence": evidence})
        return LabelDistribution.from_dict(raw)


class RemoteSRLTagger(_RemoteMixin, SRLTagger):
    """POST {sentence} -> {"frames": [{"tagged_text": ...}, ...]}."""

    name = "remote-srl"

    def srl_tag(self, sentence: str) -> list[SRLFrame]:
        self._require_nonempty(sentence, "sentence")
        raw = self._post({"sentence": sentence})
        return [SRLFrame.from_tagged_text(f["tagged_text"]) for f in raw["frames"]]


class RemoteConstituencyParser(_RemoteMixin, ConstituencyParser):
    """POST {sentence} -> {"segments": [{"text", "start", "end"}, ...]}."""

    name = "remote-parser"

    def constituency_segments(self, sentence: str) -> list[Segment]:
        self._require_nonempty(sentence, "sentence")
        raw = self._post({"sentence": sentence})
        return [
            Segment(text=s["text"], start=int(s["start"]), end=int(s["end"]))
            for s in raw["segments"]
        ]


class RemoteEmbedder(_RemoteMixin, TextEmbedder):
    """POST {text} -> {"vector": [...]}."""

    name = "remote-embedder"

    def embed(self, text: str) -> tuple[float, ...]:
        self._require_nonempty(text, "text")
        raw = self._post({"text": text})
        return tuple(float(x) for x in raw["vector"])


class RemoteInfillGenerator(_RemoteMixin, InfillGenerator):
    """POST {input_text, num_candidates, constraints} -> {"candidates": [...]}."""

    name = "remote-infiller"

    def infill(self, request: GenerationRequest) -> list[str]:
        raw = self._post(
            {
                "input_text": request.input_text,
                "num_candidates": request.num_candidates,
                "constraints": list(request.constraints),
            }
        )
        return [str(c) for c in raw["candidates"]]
