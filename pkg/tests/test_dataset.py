from __future__ import annotations

import pytest

from conftest import liar_line
from halfcheck.backends import LexiconContentWordTagger, LexiconSRLTagger, RuleTableNLI
from halfcheck.backends.contracts import SRLFrame
from halfcheck.core import SixWayLabel, Split
from halfcheck.dataset import (
    ColumnMap,
    DatasetSplit,
    ParaphrasePair,
    TrainingInstance,
    build_liar_plus_plus,
    build_training_instance,
    composition_report,
    generate_training_instances,
    load_liar_plus,
    load_paraphrase_pairs,
    reconstruct_original,
    select_srl_frame,
)
from halfcheck.errors import ConfigError, DataError, PreconditionError


# --- loading ------------------------------------------------------------------

def test_load_well_formed_fixture(liar_fixture_dir):
    result = load_liar_plus(
        {
            "train": liar_fixture_dir / "train.tsv",
            "validation": liar_fixture_dir / "validation.tsv",
            "test": liar_fixture_dir / "test.tsv",
        }
    )
    assert [len(s) for s in result.splits] == [2, 1, 4]
    assert result.rejects == ()
    train = result.splits[0]
    assert train.records[0].id == "t1"
    assert train.records[0].six_way_label is SixWayLabel.TRUE
    assert train.records[0].statement == "Taxes pay for schools."
    assert train.records[0].speaker == "someone"
    assert train.records[0].justification.startswith("Budget documents")
    assert train.records[0].split is Split.TRAIN


def test_load_collects_rejects(tmp_path):
    lines = [
        liar_line("a", "true", "Statement one.", "Justification one."),
        "too\tfew\tcolumns",
        liar_line("b", "not-a-label", "Statement two.", "Justification two."),
        liar_line("a", "false", "Duplicate id.", "Justification three."),
        liar_line("c", "false", "", "Missing statement."),
        liar_line("d", "false", "Statement four.", ""),
    ]
    path = tmp_path / "test.tsv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    result = load_liar_plus({"test": path})
    assert len(result.splits[0]) == 1
    reasons = [r.reason for r in result.rejects]
    assert len(reasons) == 5
    assert any("columns" in r for r in reasons)
    assert any("six-way label" in r for r in reasons)
    assert any("duplicate id" in r for r in reasons)
    assert any("justification is empty" in r for r in reasons)


def test_load_missing_file_and_zero_valid(tmp_path):
    with pytest.raises(DataError):
        load_liar_plus({"test": tmp_path / "nope.tsv"})
    bad = tmp_path / "test.tsv"
    bad.write_text("only\tbad\tlines\n", encoding="utf-8")
    with pytest.raises(DataError):
        load_liar_plus({"test": bad})


def test_column_map_variants():
    assert ColumnMap().max_index == 14
    assert ColumnMap.with_leading_index().justification == 15
    with pytest.raises(ConfigError):
        ColumnMap(id=-1)


# --- building the extended dataset ---------------------------------------------

def test_build_populates_every_record(liar_fixture_dir):
    result = load_liar_plus({k: liar_fixture_dir / f"{k}.tsv" for k in ("train", "validation", "test")})
    built, rejects = build_liar_plus_plus(result.splits, RuleTableNLI())
    assert rejects == ()
    for split in built:
        for rec in split.records:
            assert rec.shortened_justification is not None
            assert 1 <= len(rec.shortened_justification.rendered.split(". ")) <= 2


def test_build_reflexive_justification_yields_entailment():
    split = DatasetSplit(
        name=Split.TEST,
        records=(
            __import__("halfcheck.core", fromlist=["ClaimRecord"]).ClaimRecord(
                id="x",
                statement="The sky is blue.",
                six_way_label=SixWayLabel.TRUE,
                justification="The sky is blue.",
                split=Split.TEST,
            ),
        ),
    )
    built, _ = build_liar_plus_plus([split], RuleTableNLI())
    sj = built[0].records[0].shortened_justification
    assert sj.primary_sentence[1].label == "entailment"


def test_build_never_mutates_original_columns(liar_fixture_dir):
    result = load_liar_plus({"test": liar_fixture_dir / "test.tsv"})
    before = [rec.as_dict() for rec in result.splits[0].records]
    built, _ = build_liar_plus_plus(result.splits, RuleTableNLI())
    after = [rec.as_dict() for rec in built[0].records]
    for raw_before, raw_after in zip(before, after):
        for field in ("id", "statement", "six_way_label", "justification", "speaker", "context", "split"):
            assert raw_before[field] == raw_after[field]


# --- composition ----------------------------------------------------------------

def _synthetic_split(name: Split, counts: dict[SixWayLabel, int]) -> DatasetSplit:
    from halfcheck.core import ClaimRecord

    records = []
    i = 0
    for label, count in counts.items():
        for _ in range(count):
            records.append(
                ClaimRecord(
                    id=f"{name.value}-{i}",
                    statement=f"Statement {i}.",
                    six_way_label=label,
                    justification=f"Justification {i}.",
                    split=name,
                )
            )
            i += 1
    return DatasetSplit(name=name, records=tuple(records))


def test_composition_grouped_counts_and_warning():
    split = _synthetic_split(
        Split.TEST,
        {SixWayLabel.TRUE: 2, SixWayLabel.MOSTLY_TRUE: 1, SixWayLabel.BARELY_TRUE: 3},
    )
    report = composition_report([split], grouped=True)
    assert report.counts["test"] == {"half-true": 3, "true": 3}
    assert report.totals["test"] == 6
    flagged = composition_report([split], grouped=True, expected_split_sizes={"test": 7})
    assert any("expected 7" in w for w in flagged.warnings)


def test_composition_empty_split_is_all_zero():
    report = composition_report([DatasetSplit(name=Split.TEST, records=())], grouped=True)
    assert report.counts["test"] == {}
    assert report.totals["test"] == 0


def test_composition_sums_match_split_sizes(liar_fixture_dir):
    result = load_liar_plus({k: liar_fixture_dir / f"{k}.tsv" for k in ("train", "validation", "test")})
    report = composition_report(result.splits, grouped=False)
    for split in result.splits:
        assert sum(report.counts[split.name.value].values()) == len(split)


# --- SRL frame selection ----------------------------------------------------------

def _frame_with_tags(n: int) -> SRLFrame:
    spans = " ".join(f"[ARG{i}: w{i}]" for i in range(n))
    return SRLFrame.from_tagged_text(spans if n else "plain text")


def test_select_srl_frame_max_tags():
    frames = [_frame_with_tags(3), _frame_with_tags(5), _frame_with_tags(2)]
    assert select_srl_frame(frames) is frames[1]


def test_select_srl_frame_singleton_and_tie():
    single = [_frame_with_tags(1)]
    assert select_srl_frame(single) is single[0]
    tie = [_frame_with_tags(4), _frame_with_tags(4)]
    assert select_srl_frame(tie) is tie[0]
    with pytest.raises(PreconditionError):
        select_srl_frame([])


# --- training instances --------------------------------------------------------------

PARAPHRASE_TARGET = "Many people respect you. Don't disappoint them."
PARAPHRASE_SOURCE = "A lot of people look up to you. Don't let them down."
PARAPHRASE_SOURCE_TAGGED = "[ARG0: A lot of people] [V: look] [ARG1: up to you] . Don't let them down ."


def _paraphrase_pair() -> ParaphrasePair:
    return ParaphrasePair(
        original=PARAPHRASE_TARGET,
        paraphrase=PARAPHRASE_SOURCE,
        srl_tagged_paraphrase=SRLFrame.from_tagged_text(PARAPHRASE_SOURCE_TAGGED),
    )


def test_training_instance_published_example():
    instance = build_training_instance(
        _paraphrase_pair(), content_word_indices=[2, 5], max_masks=2, positions=[2, 5]
    )
    assert instance.input_text == (
        "[[ARG0: A lot of people] [V: look] [ARG1: up to you] . Don't let them down .] "
        "Many people <extra_id_0> you. Don't <extra_id_1> them."
    )
    assert instance.target_text == PARAPHRASE_TARGET
    assert instance.masked_positions == ((2, 0), (5, 1))
    assert reconstruct_original(instance) == PARAPHRASE_TARGET


def test_training_instance_max_masks_one():
    instance = build_training_instance(_paraphrase_pair(), [2, 5], max_masks=1, rng_seed=3)
    assert instance.input_text.count("<extra_id_") == 1


def test_training_instance_seed_determinism_and_roundtrip():
    first = build_training_instance(_paraphrase_pair(), [0, 1, 2, 5], max_masks=3, rng_seed=11)
    second = build_training_instance(_paraphrase_pair(), [0, 1, 2, 5], max_masks=3, rng_seed=11)
    assert first == second
    for seed in range(20):
        instance = build_training_instance(_paraphrase_pair(), [0, 1, 2, 5], max_masks=3, rng_seed=seed)
        assert reconstruct_original(instance) == instance.target_text


def test_training_instance_errors():
    with pytest.raises(PreconditionError):
        build_training_instance(_paraphrase_pair(), [], max_masks=2)
    untagged = ParaphrasePair(original="a b.", paraphrase="b a.")
    with pytest.raises(PreconditionError):
        build_training_instance(untagged, [0], max_masks=1)
    with pytest.raises(DataError):
        build_training_instance(_paraphrase_pair(), [99], max_masks=1)


def test_training_instance_validates_sentinels():
    with pytest.raises(DataError):
        TrainingInstance(input_text="x <extra_id_0>", target_text="has <extra_id_0>", masked_positions=((0, 0),))
    with pytest.raises(DataError):
        TrainingInstance(input_text="x <extra_id_1>", target_text="ok", masked_positions=((0, 1),))


def test_generate_training_instances_end_to_end(tmp_path):
    path = tmp_path / "pairs.tsv"
    path.write_text(
        f"{PARAPHRASE_TARGET}\t{PARAPHRASE_SOURCE}\n"
        "no verbs here whatsoever\tnothing here either\n"
        "broken-line-without-tab\n",
        encoding="utf-8",
    )
    pairs, load_rejects = load_paraphrase_pairs(path)
    assert len(pairs) == 2
    assert len(load_rejects) == 1
    instances, rejects = generate_training_instances(
        pairs,
        srl=LexiconSRLTagger(),
        content_words=LexiconContentWordTagger(lexicon=["respect", "disappoint", "people"]),
        max_masks=2,
        seed=5,
    )
    assert len(instances) == 1
    assert len(rejects) == 1  # the verbless pair
    assert instances[0].input_text.startswith("[[ARG0: A lot of people] [V: look]")
    again, _ = generate_training_instances(
        pairs,
        srl=LexiconSRLTagger(),
        content_words=LexiconContentWordTagger(lexicon=["respect", "disappoint", "people"]),
        max_masks=2,
        seed=5,
    )
    assert again == instances
