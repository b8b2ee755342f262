"""Backend selection: string identifiers plus parameters resolve to
implementation instances.

A run binds the six contract keys (nli, classifier, srl, parser, embedder,
generator) and an optional content-word provider. Reference stubs are the
defaults so a bare config always yields a runnable, deterministic pipeline.
Rule tables and lexicons may be given inline or as a JSON/text file path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional

from ..errors import ConfigError
from .contracts import (
    ConstituencyParser,
    ContentWordTagger,
    InfillGenerator,
    NLIModel,
    SRLTagger,
    TextEmbedder,
    VeracityModel,
)
from .reference import (
    BoundaryConstituencyParser,
    HeaderPhraseInfiller,
    LexiconContentWordTagger,
    LexiconSRLTagger,
    NLIChainClassifier,
    RuleTableNLI,
    TableConstituencyParser,
    TermFrequencyEmbedder,
)
from .remote import (
    RemoteConstituencyParser,
    RemoteEmbedder,
    RemoteInfillGenerator,
    RemoteNLI,
    RemoteSRLTagger,
    RemoteVeracityModel,
)

CONTRACT_KEYS = ("nli", "classifier", "srl", "parser", "embedder", "generator")


@dataclass(frozen=True)
class BackendSet:
    """The bound implementations one pipeline run works against."""

    nli: NLIModel
    classifier: VeracityModel
    srl: SRLTagger
    parser: ConstituencyParser
    embedder: TextEmbedder
    generator: InfillGenerator
    content_words: ContentWordTagger


def _load_param(params: Mapping[str, Any], key: str, file_key: Optional[str] = None):
    """Inline value, or contents of the JSON file named by ``<key>_file``."""
    if key in params:
        return params[key]
    fk = file_key or f"{key}_file"
    if fk in params:
        path = Path(params[fk])
        if not path.exists():
            raise ConfigError(f"backend parameter file not found: {path}")
        return json.loads(path.read_text(encoding="utf-8"))
    return None


def _remote_args(params: Mapping[str, Any], backend_id: str) -> dict:
    url = params.get("url")
    if not url:
        raise ConfigError(f"{backend_id} requires a 'url' parameter")
    return {"url": url, "timeout": float(params.get("timeout", 30.0))}


def _build_nli(backend_id: str, params: Mapping[str, Any]) -> NLIModel:
    if backend_id == "rule-nli":
        return RuleTableNLI(
            rules=_load_param(params, "rules") or (),
            negation_confidence=float(params.get("negation_confidence", 0.9)),
            neutral_confidence=float(params.get("neutral_confidence", 0.5)),
            overlap_threshold=float(params.get("overlap_threshold", 0.6)),
        )
    if backend_id == "remote-nli":
        return RemoteNLI(**_remote_args(params, backend_id))
    raise ConfigError(f"unknown nli backend {backend_id!r}")


def _build_classifier(
    backend_id: str, params: Mapping[str, Any], nli: NLIModel
) -> VeracityModel:
    if backend_id == "nli-classifier":
        return NLIChainClassifier(nli=nli, mass=float(params.get("mass", 0.8)))
    if backend_id == "remote-classifier":
        return RemoteVeracityModel(**_remote_args(params, backend_id))
    raise ConfigError(f"unknown classifier backend {backend_id!r}")


def _build_srl(backend_id: str, params: Mapping[str, Any]) -> SRLTagger:
    if backend_id == "lexicon-srl":
        return LexiconSRLTagger(lexicon=_load_param(params, "lexicon"))
    if backend_id == "remote-srl":
        return RemoteSRLTagger(**_remote_args(params, backend_id))
    raise ConfigError(f"unknown srl backend {backend_id!r}")


def _build_parser(backend_id: str, params: Mapping[str, Any]) -> ConstituencyParser:
    if backend_id == "boundary-parser":
        split_words = params.get("split_words")
        if split_words:
            return BoundaryConstituencyParser(split_words=split_words)
        return BoundaryConstituencyParser()
    if backend_id == "table-parser":
        table = _load_param(params, "table") or {}
        fallback = None
        if params.get("fallback", "boundary") == "boundary":
            fallback = BoundaryConstituencyParser()
        return TableConstituencyParser(table=table, fallback=fallback)
    if backend_id == "remote-parser":
        return RemoteConstituencyParser(**_remote_args(params, backend_id))
    raise ConfigError(f"unknown parser backend {backend_id!r}")


def _build_embedder(backend_id: str, params: Mapping[str, Any]) -> TextEmbedder:
    if backend_id == "tf-embedder":
        vocab = _load_param(params, "vocabulary")
        return TermFrequencyEmbedder(vocabulary=vocab)
    if backend_id == "remote-embedder":
        return RemoteEmbedder(**_remote_args(params, backend_id))
    raise ConfigError(f"unknown embedder backend {backend_id!r}")


def _build_generator(backend_id: str, params: Mapping[str, Any]) -> InfillGenerator:
    if backend_id == "header-infiller":
        return HeaderPhraseInfiller()
    if backend_id == "remote-infiller":
        return RemoteInfillGenerator(**_remote_args(params, backend_id))
    raise ConfigError(f"unknown generator backend {backend_id!r}")


def _build_content_words(backend_id: str, params: Mapping[str, Any]) -> ContentWordTagger:
    if backend_id == "lexicon-content-words":
        return LexiconContentWordTagger(lexicon=_load_param(params, "lexicon"))
    raise ConfigError(f"unknown content-word backend {backend_id!r}")


DEFAULT_BINDINGS: dict[str, str] = {
    "nli": "rule-nli",
    "classifier": "nli-classifier",
    "srl": "lexicon-srl",
    "parser": "boundary-parser",
    "embedder": "tf-embedder",
    "generator": "header-infiller",
    "content_words": "lexicon-content-words",
}


def build_backends(bindings: Optional[Mapping[str, Mapping[str, Any]]] = None) -> BackendSet:
    """Resolve a bindings mapping (key -> {"id": ..., params...}) to live
    backends. Missing keys fall back to the reference defaults."""
    bindings = dict(bindings or {})

    def spec(key: str) -> tuple[str, dict]:
        entry = dict(bindings.get(key) or {})
        backend_id = entry.pop("id", DEFAULT_BINDINGS[key])
        return backend_id, entry

    nli = _build_nli(*spec("nli"))
    classifier_id, classifier_params = spec("classifier")
    return BackendSet(
        nli=nli,
        classifier=_build_classifier(classifier_id, classifier_params, nli),
        srl=_build_srl(*spec("srl")),
        parser=_build_parser(*spec("parser")),
        embedder=_build_embedder(*spec("embedder")),
        generator=_build_generator(*spec("generator")),
        content_words=_build_content_words(*spec("content_words")),
    )
