"""Model backend contracts, reference implementations, and selection."""

from .contracts import (
    Backend,
    ConstituencyParser,
    ContentWordTagger,
    GenerationRequest,
    InfillGenerator,
    NLILabel,
    NLIModel,
    NLIVerdict,
    Segment,
    SRLFrame,
    SRLTagger,
    TextEmbedder,
    VeracityModel,
    check_segments,
    reassemble_segments,
)
from .reference import (
    BoundaryConstituencyParser,
    HeaderPhraseInfiller,
    LexiconContentWordTagger,
    LexiconSRLTagger,
    NLIChainClassifier,
    NLIRule,
    RuleTableNLI,
    TableConstituencyParser,
    TermFrequencyEmbedder,
)
from .registry import CONTRACT_KEYS, DEFAULT_BINDINGS, BackendSet, build_backends

__all__ = [
    "Backend",
    "BackendSet",
    "BoundaryConstituencyParser",
    "CONTRACT_KEYS",
    "ConstituencyParser",
    "ContentWordTagger",
    "DEFAULT_BINDINGS",
    "GenerationRequest",
    "HeaderPhraseInfiller",
    "InfillGenerator",
    "LexiconContentWordTagger",
    "LexiconSRLTagger",
    "NLIChainClassifier",
    "NLILabel",
    "NLIModel",
    "NLIRule",
    "NLIVerdict",
    "RuleTableNLI",
    "SRLFrame",
    "SRLTagger",
    "Segment",
    "TableConstituencyParser",
    "TermFrequencyEmbedder",
    "TextEmbedder",
    "VeracityModel",
    "build_backends",
    "check_segments",
    "reassemble_segments",
]
