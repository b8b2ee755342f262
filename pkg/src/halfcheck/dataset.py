"""Dataset machinery: LIAR-PLUS ingestion, the shortened-justification
extension, composition reporting, and construction of masked-infill
training instances from paraphrase pairs.

Malformed input lines are never dropped silently; every loader returns the
validated records together with a rejects list that callers persist as a
JSON-lines report.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .backends.contracts import ContentWordTagger, NLIModel, SRLFrame, SRLTagger
from .core import ClaimRecord, Split, group_label, parse_six_way
from .errors import ConfigError, DataError, HalfcheckError, PreconditionError
from .evidence import PremiseSide, shorten_justification
from .textutil import contains_sentinel, sentinel, span_tokens


@dataclass(frozen=True)
class ColumnMap:
    """Tab-separated column indices for the LIAR-PLUS layout.

    The defaults follow the public column order (statement id, label,
    statement, subject, speaker, job, state, party, five credit-history
    counts, context, justification). Files that carry a leading row-number
    column shift everything right by one; use :meth:`with_leading_index`.
    """

    id: int = 0
    label: int = 1
    statement: int = 2
    speaker: int = 4
    context: int = 13
    justification: int = 14

    def __post_init__(self) -> None:
        for name, idx in self.as_dict().items():
            if idx < 0:
                raise ConfigError(f"column index for {name} is negative: {idx}")

    def as_dict(self) -> dict[str, int]:
        return {
            "id": self.id,
            "label": self.label,
            "statement": self.statement,
            "speaker": self.speaker,
            "context": self.context,
            "justification": self.justification,
        }

    @classmethod
    def with_leading_index(cls) -> "ColumnMap":
        return cls(id=1, label=2, statement=3, speaker=5, context=14, justification=15)

    @property
    def max_index(self) -> int:
        return max(self.as_dict().values())


@dataclass(frozen=True)
class DatasetSplit:
    name: Split
    records: tuple[ClaimRecord, ...]

    def __post_init__(self) -> None:
        seen = set()
        for rec in self.records:
            if rec.id in seen:
                raise DataError(f"duplicate record id {rec.id!r} in split {self.name.value}")
            seen.add(rec.id)
            if rec.split is not self.name:
                raise DataError(
                    f"record {rec.id} carries split {rec.split.value}, expected {self.name.value}"
                )

    def __len__(self) -> int:
        return len(self.records)


@dataclass(frozen=True)
class Reject:
    """One refused input line or record, with enough context to fix it."""

    split: str
    location: str
    reason: str

    def as_dict(self) -> dict[str, str]:
        return {"split": self.split, "location": self.location, "reason": self.reason}


@dataclass(frozen=True)
class LoadResult:
    splits: tuple[DatasetSplit, ...]
    rejects: tuple[Reject, ...]


def load_liar_plus(
    paths: Mapping[str, str | Path],
    column_map: Optional[ColumnMap] = None,
) -> LoadResult:
    """Ingest the three tab-separated split files.

    ``paths`` maps split names (train/validation/test) to files. Lines that
    fail validation (missing columns, bad label, empty fields, duplicate
    ids) land in the rejects list.
    """
    column_map = column_map or ColumnMap()
    splits = []
    rejects: list[Reject] = []
    for split_name in ("train", "validation", "test"):
        if split_name not in paths:
            continue
        split = Split(split_name)
        path = Path(paths[split_name])
        if not path.exists():
            raise DataError(f"missing dataset file for {split_name}: {path}")
        records: list[ClaimRecord] = []
        seen_ids: set[str] = set()
        with path.open(encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                location = f"{path.name}:{line_no}"
                try:
                    record = _parse_line(line, split, column_map)
                except HalfcheckError as exc:
                    rejects.append(Reject(split.value, location, str(exc)))
                    continue
                if record.id in seen_ids:
                    rejects.append(Reject(split.value, location, f"duplicate id {record.id!r}"))
                    continue
                seen_ids.add(record.id)
                records.append(record)
        splits.append(DatasetSplit(name=split, records=tuple(records)))
    if not splits:
        raise ConfigError("no split paths supplied")
    if sum(len(s) for s in splits) == 0:
        raise DataError("zero valid records across all supplied splits")
    return LoadResult(splits=tuple(splits), rejects=tuple(rejects))


def _parse_line(line: str, split: Split, column_map: ColumnMap) -> ClaimRecord:
    cols = line.rstrip("\n").split("\t")
    if len(cols) <= column_map.max_index:
        raise DataError(
            f"expected at least {column_map.max_index + 1} columns, got {len(cols)}"
        )
    return ClaimRecord(
        id=cols[column_map.id].strip(),
        statement=cols[column_map.statement].strip(),
        six_way_label=parse_six_way(cols[column_map.label]),
        justification=cols[column_map.justification].strip(),
        speaker=cols[column_map.speaker].strip(),
        context=cols[column_map.context].strip(),
        split=split,
    )


def build_liar_plus_plus(
    splits: Sequence[DatasetSplit],
    nli: NLIModel,
    premise: PremiseSide = "claim",
) -> tuple[tuple[DatasetSplit, ...], tuple[Reject, ...]]:
    """Populate ``shortened_justification`` on every record.

    Original columns are never touched; records whose justification cannot
    be distilled are reported as rejects and omitted from the result split.
    """
    out_splits = []
    rejects: list[Reject] = []
    for split in splits:
        enriched = []
        for rec in split.records:
            try:
                sj = shorten_justification(rec.statement, rec.justification, nli, premise)
            except HalfcheckError as exc:
                rejects.append(Reject(split.name.value, rec.id, str(exc)))
                continue
            enriched.append(rec.with_shortened_justification(sj))
        out_splits.append(DatasetSplit(name=split.name, records=tuple(enriched)))
    return tuple(out_splits), tuple(rejects)


@dataclass(frozen=True)
class CompositionReport:
    """Integer label counts per split, optionally on grouped labels."""

    grouped: bool
    counts: Mapping[str, Mapping[str, int]]
    totals: Mapping[str, int]
    warnings: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "grouped": self.grouped,
            "counts": {s: dict(c) for s, c in self.counts.items()},
            "totals": dict(self.totals),
            "warnings": list(self.warnings),
        }


def composition_report(
    splits: Sequence[DatasetSplit],
    grouped: bool,
    expected_split_sizes: Optional[Mapping[str, int]] = None,
) -> CompositionReport:
    """Count records per (split, label).

    ``expected_split_sizes`` lets callers pin externally documented sizes;
    mismatches are surfaced as warnings rather than failures, since the
    observed data wins.
    """
    counts: dict[str, dict[str, int]] = {}
    totals: dict[str, int] = {}
    warnings: list[str] = []
    for split in splits:
        per_label: dict[str, int] = {}
        for rec in split.records:
            label = group_label(rec.six_way_label).value if grouped else rec.six_way_label.value
            per_label[label] = per_label.get(label, 0) + 1
        counts[split.name.value] = dict(sorted(per_label.items()))
        totals[split.name.value] = len(split)
    if expected_split_sizes:
        for name, expected in expected_split_sizes.items():
            observed = totals.get(name)
            if observed is not None and observed != expected:
                warnings.append(
                    f"split {name}: observed {observed} records, expected {expected}"
                )
    return CompositionReport(
        grouped=grouped, counts=counts, totals=totals, warnings=tuple(warnings)
    )


def select_srl_frame(frames: Sequence[SRLFrame]) -> SRLFrame:
    """The frame with the most role tags; earlier frames win ties."""
    if not frames:
        raise PreconditionError("cannot select from an empty frame list")
    best = frames[0]
    for frame in frames[1:]:
        if frame.tag_count > best.tag_count:
            best = frame
    return best


@dataclass(frozen=True)
class ParaphrasePair:
    original: str
    paraphrase: str
    srl_tagged_paraphrase: Optional[SRLFrame] = None

    def __post_init__(self) -> None:
        if not self.original.strip() or not self.paraphrase.strip():
            raise DataError("paraphrase pair texts must be non-empty")


@dataclass(frozen=True)
class TrainingInstance:
    """A masked-infill training example.

    ``input_text`` is the bracketed tagged paraphrase followed by the
    masked original; ``target_text`` is the original; ``masked_positions``
    pairs each masked token index with its sentinel index.
    """

    input_text: str
    target_text: str
    masked_positions: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if contains_sentinel(self.target_text):
            raise DataError("target_text must not contain sentinels")
        for expected, (_tok, sent_idx) in enumerate(self.masked_positions):
            if sent_idx != expected:
                raise DataError("sentinel indices must be consecutive from 0")
            if sentinel(sent_idx) not in self.input_text:
                raise DataError(f"input_text lacks {sentinel(sent_idx)}")

    def as_dict(self) -> dict:
        return {
            "input_text": self.input_text,
            "target_text": self.target_text,
            "masked_positions": [list(p) for p in self.masked_positions],
        }

    @classmethod
    def from_dict(cls, raw: Mapping) -> "TrainingInstance":
        return cls(
            input_text=raw["input_text"],
            target_text=raw["target_text"],
            masked_positions=tuple((int(a), int(b)) for a, b in raw["masked_positions"]),
        )


def build_training_instance(
    pair: ParaphrasePair,
    content_word_indices: Sequence[int],
    max_masks: int,
    rng_seed: int | str = 0,
    positions: Optional[Sequence[int]] = None,
) -> TrainingInstance:
    """Mask a seeded-random subset of content words in the original.

    Between 1 and ``max_masks`` content-word tokens are replaced with
    sentinels, numbered left to right. ``positions`` overrides the random
    choice for callers that need a specific masking.
    """
    if pair.srl_tagged_paraphrase is None:
        raise PreconditionError("pair lacks an SRL-tagged paraphrase")
    if max_masks < 1:
        raise ConfigError(f"max_masks must be >= 1, got {max_masks}")
    spans = list(span_tokens(pair.original))
    valid = sorted(set(content_word_indices))
    if not valid:
        raise PreconditionError("no content words available to mask")
    if valid[0] < 0 or valid[-1] >= len(spans):
        raise DataError(f"content word index out of range for {pair.original!r}")

    if positions is not None:
        chosen = sorted(set(positions))
        if not chosen:
            raise PreconditionError("explicit positions are empty")
        if not set(chosen) <= set(valid):
            raise PreconditionError("explicit positions must be content-word indices")
        if len(chosen) > max_masks:
            raise PreconditionError(f"more than max_masks={max_masks} positions")
    else:
        rng = random.Random(rng_seed)
        k = rng.randint(1, min(max_masks, len(valid)))
        chosen = sorted(rng.sample(valid, k))

    masked_parts: list[str] = []
    cursor = 0
    masked_positions = []
    for sent_idx, tok_idx in enumerate(chosen):
        span = spans[tok_idx]
        masked_parts.append(pair.original[cursor : span.start()])
        masked_parts.append(sentinel(sent_idx))
        cursor = span.end()
        masked_positions.append((tok_idx, sent_idx))
    masked_parts.append(pair.original[cursor:])
    masked_original = "".join(masked_parts)

    return TrainingInstance(
        input_text=f"[{pair.srl_tagged_paraphrase.tagged_text}] {masked_original}",
        target_text=pair.original,
        masked_positions=tuple(masked_positions),
    )


def reconstruct_original(instance: TrainingInstance) -> str:
    """Substitute the masked tokens back into the masked original; the
    round-trip must reproduce ``target_text`` exactly."""
    spans = list(span_tokens(instance.target_text))
    masked_part = _masked_part(instance.input_text)
    out = masked_part
    for tok_idx, sent_idx in instance.masked_positions:
        out = out.replace(sentinel(sent_idx), spans[tok_idx].group(0), 1)
    return out


def _masked_part(input_text: str) -> str:
    depth = 0
    for i, ch in enumerate(input_text):
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
            if depth == 0:
                return input_text[i + 1 :].lstrip()
    return input_text


def load_paraphrase_pairs(path: str | Path) -> tuple[tuple[ParaphrasePair, ...], tuple[Reject, ...]]:
    """Read (original, paraphrase) rows from a two-column TSV."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"missing paraphrase file: {path}")
    pairs = []
    rejects = []
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            cols = line.rstrip("\n").split("\t")
            if len(cols) < 2 or not cols[0].strip() or not cols[1].strip():
                rejects.append(
                    Reject("paraphrases", f"{path.name}:{line_no}", "expected two non-empty columns")
                )
                continue
            pairs.append(ParaphrasePair(original=cols[0].strip(), paraphrase=cols[1].strip()))
    return tuple(pairs), tuple(rejects)


def generate_training_instances(
    pairs: Iterable[ParaphrasePair],
    srl: SRLTagger,
    content_words: ContentWordTagger,
    max_masks: int = 3,
    seed: int = 0,
) -> tuple[tuple[TrainingInstance, ...], tuple[Reject, ...]]:
    """Tag, select the richest frame, and mask each paraphrase pair.

    The per-pair RNG stream is derived from (seed, position) so output is
    reproducible regardless of how pairs are batched.
    """
    instances = []
    rejects = []
    for i, pair in enumerate(pairs):
        location = f"pair:{i}"
        try:
            frames = srl.srl_tag(pair.paraphrase)
            if not frames:
                raise DataError("paraphrase has no taggable frame")
            tagged = ParaphrasePair(
                original=pair.original,
                paraphrase=pair.paraphrase,
                srl_tagged_paraphrase=select_srl_frame(frames),
            )
            spans = [m.group(0) for m in span_tokens(pair.original)]
            indices = content_words.content_word_indices(spans)
            instance = build_training_instance(
                tagged, indices, max_masks=max_masks, rng_seed=f"{seed}:{i}"
            )
        except HalfcheckError as exc:
            rejects.append(Reject("paraphrases", location, str(exc)))
            continue
        instances.append(instance)
    return tuple(instances), tuple(rejects)
