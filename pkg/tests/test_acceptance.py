"""Acceptance suite.

One test per acceptance criterion. Each prints a pass/fail line (visible
with ``pytest -s``) and enforces its stated numeric tolerance and runtime
budget. Headline full-scale numbers that depend on fine-tuned neural
models are out of reach by design; what is pinned here is the metric
arithmetic against published tables plus property suites over the
deterministic reference backends.
"""

from __future__ import annotations

import os
import random
import re
import sys
import time
from contextlib import contextmanager
from pathlib import Path

import pytest

from conftest import (
    DOLPHINS_BAD_SEGMENT,
    DOLPHINS_CLAIM,
    DOLPHINS_COUNTER,
    DOLPHINS_COUNTER_TAGGED,
    DOLPHINS_SEGMENTS,
    IMMIGRANTS_CLAIM,
    IMMIGRANTS_COUNTER_TAGGED,
    IMMIGRANTS_SEGMENTS,
    make_backends,
    make_record,
)
from halfcheck.backends import (
    HeaderPhraseInfiller,
    LexiconSRLTagger,
    NLIChainClassifier,
    RuleTableNLI,
    TableConstituencyParser,
    TermFrequencyEmbedder,
)
from halfcheck.backends.contracts import NLILabel, SRLFrame
from halfcheck.core import (
    ClaimRecord,
    LabelDistribution,
    SixWayLabel,
    Split,
    VeracityLabel,
)
from halfcheck.dataset import (
    ColumnMap,
    DatasetSplit,
    composition_report,
    load_liar_plus,
    select_srl_frame,
)
from halfcheck.detection import ConfusionMatrix3, metrics
from halfcheck.editing import (
    EditCandidate,
    EditResult,
    MaskReason,
    build_infill_input,
    edit_claim,
    filter_best,
    generate_edits,
    mask_claim,
)
from halfcheck.evaluation import cohen_kappa, content_preservation, disinfo_debunk
from halfcheck.evidence import shorten_justification, split_sentences
from halfcheck.textutil import SENTINEL_PATTERN
from oracles import reference_bleu

GOLDEN_DIR = Path(__file__).parent / "golden"


@contextmanager
def criterion(number: int, name: str, budget_seconds: float):
    started = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - started
        assert elapsed < budget_seconds, f"criterion {number} took {elapsed:.2f}s (budget {budget_seconds}s)"
    except BaseException:
        print(f"[acceptance] criterion {number} ({name}): FAIL", file=sys.stderr)
        raise
    print(f"[acceptance] criterion {number} ({name}): PASS ({elapsed:.2f}s)")


# -----------------------------------------------------------------------------
# 1. published confusion-matrix metrics
# -----------------------------------------------------------------------------

def test_criterion_1_matrix_metrics():
    with criterion(1, "printed-matrix metrics", budget_seconds=1.0):
        matrix = ConfusionMatrix3.from_rows([[364, 0, 96], [2, 272, 68], [31, 42, 408]])
        report = metrics(matrix)
        printed = report.printed()
        expected_precision = {"true": 0.791, "false": 0.795, "half-true": 0.848}
        expected_recall = {"true": 0.916, "false": 0.866, "half-true": 0.713}
        for label, value in expected_precision.items():
            assert abs(printed["per_label_precision"][label] - value) <= 0.0005
        for label, value in expected_recall.items():
            assert abs(printed["per_label_recall"][label] - value) <= 0.0005
        assert abs(printed["macro_precision"] - 0.811) <= 0.0005
        assert abs(printed["macro_recall"] - 0.831) <= 0.0005
        assert abs(printed["macro_f1"] - 0.82) <= 0.0005


# -----------------------------------------------------------------------------
# 2. published debunk-ratio table
# -----------------------------------------------------------------------------

def _result_template(debunked: bool) -> EditResult:
    label = VeracityLabel.TRUE if debunked else VeracityLabel.HALF_TRUE
    record = ClaimRecord(
        id="tpl",
        statement="old claim text.",
        six_way_label=SixWayLabel.HALF_TRUE,
        justification="counter text.",
        split=Split.TEST,
    )
    masked = mask_claim(
        "old claim text.",
        "counter text.",
        nli=RuleTableNLI(),
        parser=TableConstituencyParser({"old claim text.": ["old claim", "text."]}),
        embedder=TermFrequencyEmbedder(),
    )
    candidate = EditCandidate(
        text="new claim text.",
        detector_label=label,
        detector_distribution=LabelDistribution(
            {
                VeracityLabel.TRUE: 0.8 if debunked else 0.1,
                VeracityLabel.HALF_TRUE: 0.1 if debunked else 0.8,
                VeracityLabel.FALSE: 0.1,
            }
        ),
        overlap=0.5,
        rank=0,
    )
    return EditResult(
        original=record, masked=masked, candidates=(candidate,), selected=candidate,
        debunked=debunked,
    )


def test_criterion_2_debunk_ratios():
    with criterion(2, "debunk-ratio table", budget_seconds=1.0):
        fixtures = [
            (223, 7433, 3),
            (2081, 7433, 28),
            (3196, 7433, 43),
            (4243, 6844, 62),
            (6318, 7433, 85),
        ]
        yes, no = _result_template(True), _result_template(False)
        for debunked, attempted, expected_percent in fixtures:
            results = [yes] * debunked + [no] * (attempted - debunked)
            report = disinfo_debunk(results)
            assert report.debunked_count == debunked
            assert report.attempted_count == attempted
            assert report.percent == expected_percent


# -----------------------------------------------------------------------------
# 3. dataset composition
# -----------------------------------------------------------------------------

GROUPED_COMPOSITION = {
    "train": {"true": 3649, "half-true": 3780, "false": 2840},
    "test": {"true": 460, "half-true": 481, "false": 342},
    "validation": {"true": 420, "half-true": 485, "false": 379},
}
DECLARED_SPLIT_SIZES = {"train": 10240, "validation": 1284, "test": 1283}

_SIX_WAY_FOR_GROUP = {
    "true": SixWayLabel.TRUE,
    "half-true": SixWayLabel.HALF_TRUE,
    "false": SixWayLabel.FALSE,
}


def _synthetic_splits() -> list[DatasetSplit]:
    splits = []
    for split_name, counts in GROUPED_COMPOSITION.items():
        split = Split(split_name)
        records = []
        i = 0
        for grouped, count in counts.items():
            for _ in range(count):
                records.append(
                    ClaimRecord(
                        id=f"{split_name}-{i}",
                        statement=f"Statement {i}.",
                        six_way_label=_SIX_WAY_FOR_GROUP[grouped],
                        justification=f"Justification {i}.",
                        split=split,
                    )
                )
                i += 1
        splits.append(DatasetSplit(name=split, records=tuple(records)))
    return splits


def test_criterion_3_composition_synthetic():
    with criterion(3, "dataset composition (synthetic fixture)", budget_seconds=30.0):
        splits = _synthetic_splits()
        report = composition_report(
            splits, grouped=True, expected_split_sizes=DECLARED_SPLIT_SIZES
        )
        for split_name, counts in GROUPED_COMPOSITION.items():
            assert report.counts[split_name] == counts
        # the published per-label train counts sum to 10269 while the
        # declared split size is 10240; that known inconsistency must
        # surface as a warning, not a failure
        assert report.totals["train"] == 10269
        assert any("train" in w and "10240" in w for w in report.warnings)
        assert not any("test:" in w for w in report.warnings)


LIAR_DIR = os.environ.get("HALFCHECK_LIAR_PLUS_DIR")


@pytest.mark.skipif(not LIAR_DIR, reason="set HALFCHECK_LIAR_PLUS_DIR to run against the real dataset")
def test_criterion_3_composition_real_dataset():
    root = Path(LIAR_DIR)
    paths = {}
    for split_name, stems in {
        "train": ("train2", "train"),
        "validation": ("val2", "validation", "val"),
        "test": ("test2", "test"),
    }.items():
        for stem in stems:
            candidate = root / f"{stem}.tsv"
            if candidate.exists():
                paths[split_name] = candidate
                break
    assert len(paths) == 3, f"expected three split files under {root}"
    column_map = ColumnMap.with_leading_index() if "2" in paths["test"].stem else ColumnMap()
    result = load_liar_plus(paths, column_map)
    report = composition_report(
        result.splits, grouped=True, expected_split_sizes=DECLARED_SPLIT_SIZES
    )
    sizes = {split.name.value: len(split) for split in result.splits}
    assert sizes["test"] == 1283
    for split_name, counts in GROUPED_COMPOSITION.items():
        assert report.counts[split_name] == counts


# -----------------------------------------------------------------------------
# 4. evidence-extraction property suite
# -----------------------------------------------------------------------------

def test_criterion_4_evidence_properties():
    with criterion(4, "evidence-extraction properties", budget_seconds=30.0):
        rng = random.Random(2024)
        single_primary_branch = 0
        single_neutral_branch = 0
        for i in range(1000):
            claim = f"Case {i} claim about topic{rng.randint(0, 50)}."
            n_sentences = rng.randint(1, 6)
            sentences = [
                f"Sentence {i}-{j} mentions item{rng.randint(0, 99)}." for j in range(n_sentences)
            ]
            mode = i % 5
            rules = []
            for j, sentence in enumerate(sentences):
                if mode == 0:
                    label = NLILabel.NEUTRAL
                elif mode == 1:
                    label = rng.choice([NLILabel.ENTAILMENT, NLILabel.CONTRADICTION])
                else:
                    label = rng.choice(list(NLILabel.ALL))
                confidence = round(rng.uniform(0.51, 0.99), 2)
                rules.append((claim, sentence, label, confidence))
            nli = RuleTableNLI(rules=rules)
            justification = " ".join(sentences)
            sj = shorten_justification(claim, justification, nli)

            # output is one or two verbatim source sentences
            returned = [s for s in (sj.primary_sentence, sj.neutral_sentence) if s is not None]
            assert 1 <= len(returned) <= 2
            source = split_sentences(justification)
            for text, _verdict in returned:
                assert text in source
            rendered_sentences = split_sentences(sj.rendered)
            assert all(s in source for s in rendered_sentences)

            by_sentence = {s: (lab, conf) for _c, s, lab, conf in rules}
            primary_pool = [
                (j, s) for j, s in enumerate(sentences) if by_sentence[s][0] != NLILabel.NEUTRAL
            ]
            neutral_pool = [
                (j, s) for j, s in enumerate(sentences) if by_sentence[s][0] == NLILabel.NEUTRAL
            ]
            if primary_pool:
                assert sj.primary_sentence is not None
                best_conf = max(by_sentence[s][1] for _j, s in primary_pool)
                assert sj.primary_sentence[1].confidence == pytest.approx(best_conf)
                first_with_best = next(s for _j, s in primary_pool if by_sentence[s][1] == best_conf)
                assert sj.primary_sentence[0] == first_with_best
                if not neutral_pool:
                    single_primary_branch += 1
                    assert sj.neutral_sentence is None
                    assert sj.rendered == sj.primary_sentence[0]
            else:
                assert sj.primary_sentence is None
                single_neutral_branch += 1
                assert sj.rendered == sj.neutral_sentence[0]
        assert single_primary_branch >= 100
        assert single_neutral_branch >= 100


# -----------------------------------------------------------------------------
# 5. masking / editing property suite
# -----------------------------------------------------------------------------

def _masked_shape(masked_text: str) -> re.Pattern[str]:
    parts = [re.escape(p) for p in SENTINEL_PATTERN.split(masked_text)]
    return re.compile(".+?".join(parts), re.DOTALL)


def _random_masking_case(rng: random.Random, i: int):
    n_segments = rng.randint(1, 5)
    segments = [
        " ".join(f"tok{i}x{j}y{k}" for k in range(rng.randint(1, 3)))
        for j in range(n_segments)
    ]
    claim = " ".join(segments)
    counter = f"Auditors say records include checked{i} detail."
    contradictory = [s for s in segments if rng.random() < 0.4]
    rules = [(counter, seg, "contradiction", round(rng.uniform(0.6, 0.95), 2)) for seg in contradictory]
    nli = RuleTableNLI(rules=rules)
    parser = TableConstituencyParser({claim: segments})
    return claim, counter, segments, contradictory, nli, parser


def test_criterion_5_masking_editing_properties():
    with criterion(5, "masking/editing properties", budget_seconds=60.0):
        rng = random.Random(77)
        embedder = TermFrequencyEmbedder()
        generator = HeaderPhraseInfiller()
        srl = LexiconSRLTagger()

        for i in range(1000):
            claim, counter, segments, contradictory, nli, parser = _random_masking_case(rng, i)
            masked = mask_claim(claim, counter, nli=nli, parser=parser, embedder=embedder)
            assert masked.reconstruct() == claim
            if contradictory:
                assert [s.text for s, _r in masked.masked_segments] == contradictory
                assert all(r is MaskReason.CONTRADICTION for _s, r in masked.masked_segments)
            else:
                assert len(masked.masked_segments) == 1
                assert masked.masked_segments[0][1] is MaskReason.LOW_SIMILARITY

            frames = srl.srl_tag(counter)
            frame = select_srl_frame(frames) if frames else SRLFrame.from_tagged_text(counter)
            input_text = build_infill_input(frame, masked)
            candidates = generate_edits(input_text, masked, generator)
            shape = _masked_shape(masked.masked_text)
            for text in candidates:
                assert not SENTINEL_PATTERN.search(text)
                assert shape.fullmatch(text), (masked.masked_text, text)

        # filter_best never passes over a detector-true candidate
        for i in range(300):
            counter = f"filter case {i} counter."
            n = rng.randint(1, 5)
            texts = [f"candidate {i}-{j} words w{rng.randint(0, 9)}." for j in range(n)]
            labels = [rng.choice(list(NLILabel.ALL)) for _ in range(n)]
            nli = RuleTableNLI(
                rules=[(counter, t, lab, 0.9) for t, lab in zip(texts, labels)]
            )
            classifier = NLIChainClassifier(nli)
            best = filter_best(texts, texts[0], counter, classifier)
            if NLILabel.ENTAILMENT in labels:
                assert best.detector_label is VeracityLabel.TRUE

        # oracle-rigged end-to-end fixtures close the reward loop at 100%
        debunked = 0
        cases = 40
        for i in range(cases):
            claim = f"The program saved wrong figure {i} last year."
            bad = f"wrong figure {i}"
            good = f"verified figure {i}"
            counter = f"Auditors report the savings include {good}."
            filled = f"The program saved {good} last year."
            nli = RuleTableNLI(
                rules=[
                    (counter, bad, "contradiction", 0.9),
                    (counter, filled, "entailment", 0.9),
                ]
            )
            backends = make_backends(
                nli=nli,
                parser_table={claim: ["The program saved", bad, "last year."]},
                srl_lexicon=["include"],
            )
            record = make_record(
                f"case-{i}", claim, SixWayLabel.FALSE, counter, nli=nli
            )
            result = edit_claim(record, backends)
            assert result.selected.text == filled
            debunked += int(result.debunked)
        assert debunked == cases


# -----------------------------------------------------------------------------
# 6. BLEU oracle equivalence
# -----------------------------------------------------------------------------

def test_criterion_6_bleu_oracle_equivalence():
    with criterion(6, "content-preservation vs reference BLEU", budget_seconds=30.0):
        rng = random.Random(123)
        vocab = [f"word{i}" for i in range(15)]
        for _ in range(100):
            hyp = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 14)))
            ref = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 14)))
            ours = content_preservation(hyp, ref)
            assert abs(ours - reference_bleu(hyp, ref)) < 1e-6
        for _ in range(20):
            text = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 14)))
            assert content_preservation(text, text) == 1.0


# -----------------------------------------------------------------------------
# 7. Cohen's kappa checks
# -----------------------------------------------------------------------------

def test_criterion_7_kappa():
    with criterion(7, "kappa fixtures and symmetry", budget_seconds=30.0):
        assert cohen_kappa([(1, 1), (2, 2), (3, 3)]) == 100.0
        assert cohen_kappa([(1, 1), (1, 2), (2, 2), (2, 2)]) == 50.0
        rng = random.Random(31)
        checked = 0
        while checked < 200:
            pairs = [
                (rng.randint(1, 3), rng.randint(1, 3)) for _ in range(rng.randint(2, 40))
            ]
            try:
                forward = cohen_kappa(pairs)
            except Exception:
                continue  # degenerate draw; redraw
            backward = cohen_kappa([(b, a) for a, b in pairs])
            assert forward == pytest.approx(backward, abs=1e-12)
            checked += 1


# -----------------------------------------------------------------------------
# 8. infill-input format fixtures
# -----------------------------------------------------------------------------

def test_criterion_8_format_golden_files():
    with criterion(8, "infill-input golden files", budget_seconds=30.0):
        # stadium-jobs claim, one masked segment
        nli = RuleTableNLI(
            rules=[(DOLPHINS_COUNTER, DOLPHINS_BAD_SEGMENT, "contradiction", 0.95)]
        )
        masked = mask_claim(
            DOLPHINS_CLAIM,
            DOLPHINS_COUNTER,
            nli=nli,
            parser=TableConstituencyParser({DOLPHINS_CLAIM: DOLPHINS_SEGMENTS}),
            embedder=TermFrequencyEmbedder(),
        )
        frame = SRLFrame.from_tagged_text(DOLPHINS_COUNTER_TAGGED, source=DOLPHINS_COUNTER)
        produced = build_infill_input(frame, masked)
        golden = (GOLDEN_DIR / "infill_input_stadium_jobs.txt").read_bytes()
        assert (produced + "\n").encode("utf-8") == golden

        # immigrant-estimate claim, two masked segments
        counter2 = "irrelevant premise for masking rules."
        nli2 = RuleTableNLI(
            rules=[
                (counter2, "could be", "contradiction", 0.9),
                (counter2, "3 million", "contradiction", 0.9),
            ]
        )
        masked2 = mask_claim(
            IMMIGRANTS_CLAIM,
            counter2,
            nli=nli2,
            parser=TableConstituencyParser({IMMIGRANTS_CLAIM: IMMIGRANTS_SEGMENTS}),
            embedder=TermFrequencyEmbedder(),
        )
        frame2 = SRLFrame.from_tagged_text(IMMIGRANTS_COUNTER_TAGGED)
        produced2 = build_infill_input(frame2, masked2)
        golden2 = (GOLDEN_DIR / "infill_input_immigrant_estimate.txt").read_bytes()
        assert (produced2 + "\n").encode("utf-8") == golden2
