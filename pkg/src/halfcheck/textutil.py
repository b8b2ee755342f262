"""Small text helpers shared by several stages: tokenization, sentinel
tokens, and role-bracket parsing.

The sentinel surface form is ``<extra_id_N>`` with N counting up from 0
left to right within one text. Angle brackets keep the token unambiguous
under whitespace tokenization.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from typing import Iterator, Sequence

SENTINEL_PATTERN = re.compile(r"<extra_id_\d+>")

# Words plus attached apostrophe parts ("Don't"), or a single non-space
# punctuation character.
_WORD_OR_PUNCT = re.compile(r"[\w$]+(?:['\u2019][\w]+)*|[^\w\s]")

_ALNUM = re.compile(r"[a-z0-9]+")

_ROLE_SPAN = re.compile(r"\[([A-Z][A-Z0-9-]*):\s*(.*?)\]")


def sentinel(n: int) -> str:
    return f"<extra_id_{n}>"


def contains_sentinel(text: str) -> bool:
    return SENTINEL_PATTERN.search(text) is not None


def word_tokens(text: str) -> list[str]:
    """Tokenize into words and single punctuation marks.

    "Tom eats apples." -> ["Tom", "eats", "apples", "."]. Contractions stay
    whole ("Don't"), as do currency-ish words ("$3" splits to "$3" via the
    \\w/$ class, "4,000" splits at the comma -- acceptable for the rule
    stubs that consume this).
    """
    return _WORD_OR_PUNCT.findall(text)


def alnum_tokens(text: str) -> list[str]:
    """Lowercased runs of [a-z0-9]; the token alphabet for overlap and
    term-frequency measures."""
    return _ALNUM.findall(text.lower())


def span_tokens(text: str) -> Iterator[re.Match[str]]:
    """Whitespace-delimited token spans with character offsets."""
    return re.finditer(r"\S+", text)


def role_spans(tagged_text: str) -> list[tuple[str, str]]:
    """Extract ``[ROLE: span]`` annotations as (role, span) pairs."""
    return [(m.group(1), m.group(2)) for m in _ROLE_SPAN.finditer(tagged_text)]


def strip_role_brackets(tagged_text: str) -> str:
    """Remove role brackets and prefixes, keeping the spans in place."""
    return _ROLE_SPAN.sub(lambda m: m.group(2), tagged_text)


def tf_vector(tokens: Sequence[str], vocabulary: Sequence[str]) -> tuple[float, ...]:
    counts = Counter(tokens)
    return tuple(float(counts.get(term, 0)) for term in vocabulary)


def cosine(u: Sequence[float], v: Sequence[float]) -> float:
    """Cosine similarity; zero vectors (or mismatched lengths) score 0."""
    if len(u) != len(v):
        raise ValueError(f"vector length mismatch: {len(u)} != {len(v)}")
    dot = sum(a * b for a, b in zip(u, v))
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return dot / (nu * nv)


def tf_cosine(a: str, b: str) -> float:
    """Cosine between the term-frequency vectors of two texts, over the
    union vocabulary of the pair."""
    ta, tb = alnum_tokens(a), alnum_tokens(b)
    vocab = sorted(set(ta) | set(tb))
    return cosine(tf_vector(ta, vocab), tf_vector(tb, vocab))
