from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from halfcheck.backends import (
    BackendSet,
    BoundaryConstituencyParser,
    HeaderPhraseInfiller,
    LexiconContentWordTagger,
    LexiconSRLTagger,
    NLIChainClassifier,
    RuleTableNLI,
    TableConstituencyParser,
    TermFrequencyEmbedder,
)
from halfcheck.core import ClaimRecord, SixWayLabel, Split
from halfcheck.evidence import shorten_justification

# Shared worked example: a stadium-jobs claim whose counter-evidence says
# the jobs are temporary, plus an estimate claim masked at two spans.
DOLPHINS_CLAIM = "The Dolphins stadium renovation will create more than 4,000 new local jobs."
DOLPHINS_BAD_SEGMENT = "more than 4,000 new local jobs"
DOLPHINS_SEGMENTS = ["The Dolphins stadium renovation will create", DOLPHINS_BAD_SEGMENT, "."]
DOLPHINS_COUNTER = (
    "The key omission here is that these are jobs associated with the 25-month "
    "stadium renovation project and include temporary positions."
)
DOLPHINS_COUNTER_TAGGED = (
    "The key omission here is that [ARG2: these] are jobs associated with the "
    "25-month stadium renovation project and [V: include] [ARG1: temporary positions] ."
)
DOLPHINS_FILLED = "The Dolphins stadium renovation will create temporary positions."

IMMIGRANTS_CLAIM = "The number of illegal immigrants could be 3 million."
IMMIGRANTS_SEGMENTS = ["The number of illegal immigrants", "could be", "3 million", "."]
IMMIGRANTS_COUNTER = (
    "Every credible estimate we found was in the 11 million range, "
    "with a margin of error of around 1 million."
)
IMMIGRANTS_COUNTER_TAGGED = (
    "[ARG1: Every credible estimate we found] [V: was] [ARG2: in the 11 million range], "
    "[ARGM-ADV: with a margin of error of around 1 million]."
)


def make_record(
    rec_id: str = "r1",
    statement: str = "The sky is green.",
    label: SixWayLabel = SixWayLabel.HALF_TRUE,
    justification: str = "Experts say otherwise. The sky is blue most days.",
    split: Split = Split.TEST,
    nli: RuleTableNLI | None = None,
) -> ClaimRecord:
    """A claim record with its shortened justification populated."""
    record = ClaimRecord(
        id=rec_id,
        statement=statement,
        six_way_label=label,
        justification=justification,
        split=split,
    )
    sj = shorten_justification(statement, justification, nli or RuleTableNLI())
    return record.with_shortened_justification(sj)


def make_backends(
    nli: RuleTableNLI | None = None,
    parser_table: dict | None = None,
    srl_lexicon: list[str] | None = None,
) -> BackendSet:
    nli = nli or RuleTableNLI()
    if parser_table is not None:
        parser = TableConstituencyParser(parser_table)
    else:
        parser = BoundaryConstituencyParser()
    return BackendSet(
        nli=nli,
        classifier=NLIChainClassifier(nli),
        srl=LexiconSRLTagger(lexicon=srl_lexicon),
        parser=parser,
        embedder=TermFrequencyEmbedder(),
        generator=HeaderPhraseInfiller(),
        content_words=LexiconContentWordTagger(),
    )


LIAR_COLUMNS = 15  # id, label, statement, subject, speaker, job, state,
#                    party, 5 count columns, context, justification


def liar_line(
    rec_id: str,
    label: str,
    statement: str,
    justification: str,
    speaker: str = "someone",
    context: str = "a speech",
) -> str:
    cols = [""] * LIAR_COLUMNS
    cols[0] = rec_id
    cols[1] = label
    cols[2] = statement
    cols[3] = "topic"
    cols[4] = speaker
    cols[13] = context
    cols[14] = justification
    return "\t".join(cols)


@pytest.fixture
def liar_fixture_dir(tmp_path: Path) -> Path:
    """Three tiny split files with verbs the default lexicons know."""
    rows = {
        "train": [
            liar_line("t1", "true", "Taxes pay for schools.", "Budget documents include schools. Taxes pay for schools."),
            liar_line("t2", "false", "The budget was cut.", "Officials say the budget was not cut. Records include increases."),
        ],
        "validation": [
            liar_line("v1", "half-true", "The project will create new jobs.",
                      "The report says the jobs include temporary positions. Many people support the project."),
        ],
        "test": [
            liar_line("s1", "half-true", "The renovation will create more than 4,000 new jobs.",
                      "These jobs include temporary positions. The renovation was large."),
            liar_line("s2", "barely-true", "The city will raise new money.",
                      "Auditors found the money include donations. The city was careful."),
            liar_line("s3", "pants-on-fire", "The mayor cut all schools.",
                      "Records say the mayor did not cut all schools. The budget was stable."),
            liar_line("s4", "mostly-true", "Voters support the new budget.",
                      "Polls include wide support. Voters support the new budget."),
        ],
    }
    for name, lines in rows.items():
        (tmp_path / f"{name}.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return tmp_path


@pytest.fixture
def run_config_dict(liar_fixture_dir: Path, tmp_path: Path) -> dict:
    return {
        "data": {
            "liar_plus_train": str(liar_fixture_dir / "train.tsv"),
            "liar_plus_validation": str(liar_fixture_dir / "validation.tsv"),
            "liar_plus_test": str(liar_fixture_dir / "test.tsv"),
        },
        "out_dir": str(tmp_path / "out"),
        "seed": 7,
    }


def write_config(path: Path, payload: dict) -> Path:
    path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
    return path
