"""Deterministic rule-based reference implementations of the backend
contracts.

These exist so the full pipeline is verifiable on a desk: every behavior
is a keyed rule table or a closed lexical heuristic, immutable after
construction and freely shareable. No pipeline result of interest depends
on how clever these are -- only on pipeline logic -- so they are kept as
plain and predictable as possible.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence, Union

from ..core import LabelDistribution, VeracityLabel
from ..errors import DataError, NoViableCandidates
from ..textutil import (
    SENTINEL_PATTERN,
    alnum_tokens,
    cosine,
    role_spans,
    span_tokens,
    tf_cosine,
    tf_vector,
    word_tokens,
)
from .contracts import (
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
)

_NEGATION_CUES = frozenset({"not", "no", "never", "none", "cannot", "nothing", "nobody"})
_AUXILIARIES = frozenset({"do", "does", "did", "is", "are", "was", "were", "am", "be", "been"})

# Generous limit: the stubs are cheap, the limit exists to exercise the
# typed-error path the contract promises.
_STUB_MAX_CHARS = 20000


def _clean_token(token: str) -> str:
    return token.strip(string.punctuation + "’").lower()


def _is_negated(text: str) -> bool:
    for tok in word_tokens(text):
        low = tok.lower()
        if low in _NEGATION_CUES or low.endswith("n't") or low.endswith("n’t"):
            return True
    return False


def _content_tokens(text: str) -> set[str]:
    out = set()
    for tok in word_tokens(text):
        low = _clean_token(tok)
        if not low or low in _NEGATION_CUES or low in _AUXILIARIES:
            continue
        out.add(low)
    return out


@dataclass(frozen=True)
class NLIRule:
    """Exact premise/hypothesis pair pinned to a verdict."""

    premise: str
    hypothesis: str
    label: str
    confidence: float = 0.9


RuleLike = Union[NLIRule, Mapping, Sequence]


def _coerce_rule(raw: RuleLike) -> NLIRule:
    if isinstance(raw, NLIRule):
        return raw
    if isinstance(raw, Mapping):
        return NLIRule(
            premise=raw["premise"],
            hypothesis=raw["hypothesis"],
            label=raw["label"],
            confidence=float(raw.get("confidence", 0.9)),
        )
    parts = list(raw)
    if len(parts) == 3:
        return NLIRule(parts[0], parts[1], parts[2])
    if len(parts) == 4:
        return NLIRule(parts[0], parts[1], parts[2], float(parts[3]))
    raise DataError(f"cannot interpret NLI rule {raw!r}")


class RuleTableNLI(NLIModel):
    """NLI by lookup and lexical heuristics, checked in order:

    1. exact (premise, hypothesis) rule from the table;
    2. reflexivity: identical texts entail each other at confidence 1.0;
    3. negation cue: one side negated, high content overlap -> contradiction;
    4. otherwise neutral at confidence 0.5.
    """

    name = "rule-nli"
    max_input_chars = _STUB_MAX_CHARS

    def __init__(
        self,
        rules: Iterable[RuleLike] = (),
        negation_confidence: float = 0.9,
        neutral_confidence: float = 0.5,
        overlap_threshold: float = 0.6,
    ) -> None:
        table = {}
        for raw in rules:
            rule = _coerce_rule(raw)
            table[(rule.premise, rule.hypothesis)] = rule
        self._table = table
        self._negation_confidence = negation_confidence
        self._neutral_confidence = neutral_confidence
        self._overlap_threshold = overlap_threshold

    def nli_score(self, premise: str, hypothesis: str) -> NLIVerdict:
        self._require_nonempty(premise, "premise")
        self._require_nonempty(hypothesis, "hypothesis")
        self._check_length(premise, hypothesis)

        rule = self._table.get((premise, hypothesis))
        if rule is not None:
            return NLIVerdict.concentrated(rule.label, rule.confidence)
        if premise.strip() == hypothesis.strip():
            return NLIVerdict.concentrated(NLILabel.ENTAILMENT, 1.0)
        if self._negation_flip(premise, hypothesis):
            return NLIVerdict.concentrated(NLILabel.CONTRADICTION, self._negation_confidence)
        return NLIVerdict.concentrated(NLILabel.NEUTRAL, self._neutral_confidence)

    def _negation_flip(self, premise: str, hypothesis: str) -> bool:
        if _is_negated(premise) == _is_negated(hypothesis):
            return False
        a, b = _content_tokens(premise), _content_tokens(hypothesis)
        if not a or not b:
            return False
        overlap = len(a & b) / min(len(a), len(b))
        return overlap >= self._overlap_threshold


class NLIChainClassifier(VeracityModel):
    """Veracity by chaining the NLI backend: evidence entailing the claim
    votes true, contradicting votes false, neutral votes half-true, with
    ``mass`` on the vote and the remainder split evenly. Empty evidence
    takes the neutral route."""

    name = "nli-classifier"
    max_input_chars = _STUB_MAX_CHARS

    _LABEL_FOR = {
        NLILabel.ENTAILMENT: VeracityLabel.TRUE,
        NLILabel.CONTRADICTION: VeracityLabel.FALSE,
        NLILabel.NEUTRAL: VeracityLabel.HALF_TRUE,
    }

    def __init__(self, nli: NLIModel, mass: float = 0.8) -> None:
        if not 1.0 / 3.0 < mass <= 1.0:
            raise DataError(f"classifier mass {mass} would not dominate the distribution")
        self._nli = nli
        self._mass = mass

    def classify_veracity(self, claim: str, evidence: str) -> LabelDistribution:
        self._require_nonempty(claim, "claim")
        self._check_length(claim, evidence)
        if evidence.strip():
            nli_label = self._nli.nli_score(evidence, claim).label
        else:
            nli_label = NLILabel.NEUTRAL
        target = self._LABEL_FOR[nli_label]
        rest = (1.0 - self._mass) / 2.0
        return LabelDistribution(
            {lab: (self._mass if lab is target else rest) for lab in VeracityLabel}
        )


DEFAULT_VERB_LEXICON = frozenset(
    {
        "be", "is", "are", "was", "were", "been", "has", "have", "had",
        "say", "says", "said", "get", "gets", "got", "make", "makes", "made",
        "go", "goes", "went", "see", "sees", "saw", "take", "takes", "took",
        "find", "finds", "found", "give", "gives", "gave", "pay", "pays", "paid",
        "cut", "cuts", "create", "creates", "created", "include", "includes",
        "included", "look", "looks", "looked", "let", "lets", "eat", "eats",
        "ate", "own", "owns", "owned", "respect", "respects", "respected",
        "disappoint", "disappoints", "disappointed", "exaggerate", "exaggerates",
        "exaggerated", "benefit", "benefits", "benefited", "estimate", "estimates",
        "estimated", "cost", "costs", "spend", "spends", "spent", "raise",
        "raises", "raised", "vote", "votes", "voted", "support", "supports",
        "supported", "oppose", "opposes", "opposed", "claim", "claims", "claimed",
    }
)


class LexiconSRLTagger(SRLTagger):
    """One frame per verb found by a closed lexicon.

    For each verb occurrence the verb's sentence is bracketed -- tokens
    before the verb as ARG0, the verb as V, the rest up to trailing
    punctuation as ARG1 -- and any other sentences of the input appear
    untagged around it, so a frame always covers the whole input text.
    """

    name = "lexicon-srl"
    max_input_chars = _STUB_MAX_CHARS

    def __init__(self, lexicon: Optional[Iterable[str]] = None) -> None:
        self._lexicon = frozenset(w.lower() for w in (lexicon or DEFAULT_VERB_LEXICON))

    def srl_tag(self, sentence: str) -> list[SRLFrame]:
        from ..evidence import split_sentences

        self._require_nonempty(sentence, "sentence")
        self._check_length(sentence)

        sentence_tokens = [word_tokens(s) for s in split_sentences(sentence)]
        frames = []
        for sent_idx, tokens in enumerate(sentence_tokens):
            for verb_idx, token in enumerate(tokens):
                if token.lower() not in self._lexicon:
                    continue
                frames.append(self._render_frame(sentence_tokens, sent_idx, verb_idx))
        return frames

    def _render_frame(
        self, sentence_tokens: list[list[str]], sent_idx: int, verb_idx: int
    ) -> SRLFrame:
        rendered = []
        tags = 0
        for i, tokens in enumerate(sentence_tokens):
            if i != sent_idx:
                rendered.append(" ".join(tokens))
                continue
            tail_start = len(tokens)
            while tail_start > verb_idx + 1 and _is_punct(tokens[tail_start - 1]):
                tail_start -= 1
            parts = []
            if verb_idx > 0:
                parts.append(f"[ARG0: {' '.join(tokens[:verb_idx])}]")
                tags += 1
            parts.append(f"[V: {tokens[verb_idx]}]")
            tags += 1
            if tail_start > verb_idx + 1:
                parts.append(f"[ARG1: {' '.join(tokens[verb_idx + 1 : tail_start])}]")
                tags += 1
            if tail_start < len(tokens):
                parts.append(" ".join(tokens[tail_start:]))
            rendered.append(" ".join(parts))
        return SRLFrame(tagged_text=" ".join(rendered), tag_count=tags)


def _is_punct(token: str) -> bool:
    return all(ch in string.punctuation for ch in token)


DEFAULT_SPLIT_WORDS = ("that", "which", "to", "will", "because")


class BoundaryConstituencyParser(ConstituencyParser):
    """Segments by splitting after commas and before a closed set of
    function words. Offsets always index the raw input string."""

    name = "boundary-parser"
    max_input_chars = _STUB_MAX_CHARS

    def __init__(self, split_words: Sequence[str] = DEFAULT_SPLIT_WORDS) -> None:
        self._split_words = frozenset(w.lower() for w in split_words)

    def constituency_segments(self, sentence: str) -> list[Segment]:
        self._require_nonempty(sentence, "sentence")
        self._check_length(sentence)

        spans = list(span_tokens(sentence))
        groups: list[list] = [[]]
        for idx, span in enumerate(spans):
            starts_new = False
            if idx > 0:
                if _clean_token(span.group(0)) in self._split_words:
                    starts_new = True
                elif spans[idx - 1].group(0).endswith(","):
                    starts_new = True
            if starts_new and groups[-1]:
                groups.append([])
            groups[-1].append(span)
        segments = []
        for group in groups:
            if not group:
                continue
            start, end = group[0].start(), group[-1].end()
            segments.append(Segment(text=sentence[start:end], start=start, end=end))
        return segments


class TableConstituencyParser(ConstituencyParser):
    """Keyed segmentation: an exact sentence maps to its segment texts,
    located left to right in the source. Unkeyed sentences go to the
    fallback parser (or fail if none is configured).

    Segment granularity is a backend property, not pipeline logic; this
    parser is how tests and configs pin a particular granularity.
    """

    name = "table-parser"
    max_input_chars = _STUB_MAX_CHARS

    def __init__(
        self,
        table: Mapping[str, Sequence[str]],
        fallback: Optional[ConstituencyParser] = None,
    ) -> None:
        self._table = {k: tuple(v) for k, v in table.items()}
        self._fallback = fallback

    def constituency_segments(self, sentence: str) -> list[Segment]:
        self._require_nonempty(sentence, "sentence")
        self._check_length(sentence)

        texts = self._table.get(sentence)
        if texts is None:
            if self._fallback is None:
                raise DataError(f"no segmentation keyed for {sentence!r}")
            return self._fallback.constituency_segments(sentence)
        segments = []
        pos = 0
        for text in texts:
            start = sentence.find(text, pos)
            if start < 0:
                raise DataError(f"keyed segment {text!r} not found in {sentence!r}")
            segments.append(Segment(text=text, start=start, end=start + len(text)))
            pos = start + len(text)
        return segments


class TermFrequencyEmbedder(TextEmbedder):
    """Term-frequency vectors over a fixed sorted vocabulary.

    Without a vocabulary the embedder still answers ``similarity`` (cosine
    over the union vocabulary of the pair) but refuses raw ``embed`` calls,
    since vectors from different per-text vocabularies would not share a
    space.
    """

    name = "tf-embedder"
    max_input_chars = _STUB_MAX_CHARS

    def __init__(self, vocabulary: Optional[Iterable[str]] = None) -> None:
        if vocabulary is None:
            self.vocabulary: Optional[tuple[str, ...]] = None
            self.dimension = None
        else:
            self.vocabulary = tuple(sorted(set(vocabulary)))
            self.dimension = len(self.vocabulary)

    @classmethod
    def from_texts(cls, texts: Iterable[str]) -> "TermFrequencyEmbedder":
        vocab = set()
        for text in texts:
            vocab.update(alnum_tokens(text))
        return cls(vocab)

    def embed(self, text: str) -> tuple[float, ...]:
        self._require_nonempty(text, "text")
        self._check_length(text)
        if self.vocabulary is None:
            raise DataError(
                "term-frequency embedder has no fixed vocabulary; "
                "construct via from_texts(...) or call similarity()"
            )
        return tf_vector(alnum_tokens(text), self.vocabulary)

    def similarity(self, a: str, b: str) -> float:
        if self.vocabulary is None:
            self._require_nonempty(a, "text")
            self._require_nonempty(b, "text")
            self._check_length(a, b)
            return tf_cosine(a, b)
        return cosine(self.embed(a), self.embed(b))


class HeaderPhraseInfiller(InfillGenerator):
    """Fills sentinels with content phrases lifted from the bracketed
    header.

    Candidate ranking is cosine similarity between each header role span
    (arguments first; the verb span only if nothing else exists) and the
    claim text around the sentinels; candidate k fills every sentinel with
    the k-th ranked phrase.
    """

    name = "header-infiller"
    max_input_chars = _STUB_MAX_CHARS

    def infill(self, request: GenerationRequest) -> list[str]:
        self._check_length(request.input_text)
        header, body = _split_header(request.input_text)
        phrases = self._ranked_phrases(header, body)
        if not phrases:
            raise NoViableCandidates("no header phrases available to fill sentinels")

        outputs: list[str] = []
        for phrase in phrases:
            if len(outputs) >= request.num_candidates:
                break
            candidate = SENTINEL_PATTERN.sub(lambda _m: phrase, body)
            if candidate in outputs:
                continue
            if all(c in candidate for c in request.constraints):
                outputs.append(candidate)
        if not outputs:
            raise NoViableCandidates("no candidate satisfied every constraint span")
        return outputs

    def _ranked_phrases(self, header: str, body: str) -> list[str]:
        spans = role_spans(header)
        pool = [text for role, text in spans if role != "V"]
        if not pool:
            pool = [text for _role, text in spans]
        if not pool and header.strip():
            pool = [header.strip()]
        seen = []
        for phrase in pool:
            if phrase and phrase not in seen:
                seen.append(phrase)
        context = SENTINEL_PATTERN.sub(" ", body)
        ranked = sorted(
            enumerate(seen),
            key=lambda pair: (
                -tf_cosine(pair[1], context),
                -len(alnum_tokens(pair[1])),
                pair[0],
            ),
        )
        return [phrase for _idx, phrase in ranked]


def _split_header(input_text: str) -> tuple[str, str]:
    """Split "[header] body" honoring nested brackets inside the header."""
    text = input_text.lstrip()
    if not text.startswith("["):
        return "", text
    depth = 0
    for i, ch in enumerate(text):
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
            if depth == 0:
                return text[1:i], text[i + 1 :].lstrip()
    return "", text


DEFAULT_CONTENT_LEXICON = frozenset(
    {
        # verbs
        "respect", "disappoint", "look", "let", "create", "include", "cut",
        "pay", "eat", "own", "estimate", "benefit", "exaggerate", "spend",
        "raise", "vote", "support", "oppose", "claim", "say", "make", "find",
        # nouns
        "people", "jobs", "job", "positions", "education", "taxes", "tax",
        "breaks", "corporations", "companies", "businesses", "immigrants",
        "number", "million", "renovation", "stadium", "project", "cat",
        "apples", "dog", "money", "budget", "schools", "workers", "voters",
        # adjectives
        "new", "local", "temporary", "illegal", "big", "powerful", "true",
        "false", "many", "good", "bad", "large", "small", "credible",
    }
)


class LexiconContentWordTagger(ContentWordTagger):
    """Content-word positions by a closed lexicon of nouns, adjectives,
    and verbs; punctuation is stripped before lookup."""

    name = "lexicon-content-words"

    def __init__(self, lexicon: Optional[Iterable[str]] = None) -> None:
        self._lexicon = frozenset(w.lower() for w in (lexicon or DEFAULT_CONTENT_LEXICON))

    def content_word_indices(self, tokens: Sequence[str]) -> list[int]:
        return [i for i, tok in enumerate(tokens) if _clean_token(tok) in self._lexicon]
