"""Stage orchestration: reproducible build / detect / edit / evaluate runs
over an output directory.

Every artifact is written atomically (temp file + rename), so an
interrupted run never corrupts earlier outputs. One run owns an output
directory at a time via a lock file. All outputs are byte-deterministic
for a fixed config and seed; wall-clock timestamps appear only in
manifests.
"""

from __future__ import annotations

import json
import os
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Iterator, Optional

from concurrent.futures import ThreadPoolExecutor

from .config import RunConfig
from .core import ClaimRecord, Split, VeracityLabel
from .dataset import (
    ColumnMap,
    DatasetSplit,
    Reject,
    build_liar_plus_plus,
    composition_report,
    generate_training_instances,
    load_liar_plus,
    load_paraphrase_pairs,
)
from .detection import (
    ConfusionMatrix3,
    DetectionReport,
    EvidenceMode,
    evaluate_split,
    metrics,
    render_matrix,
)
from .editing import edit_claim
from .errors import ConfigError, DataError, HalfcheckError, PreconditionError
from .evaluation import EditEvalReport, evaluate_edits

SPLIT_FILES = {"train": "train.jsonl", "validation": "validation.jsonl", "test": "test.jsonl"}


# ---------------------------------------------------------------------------
# Filesystem helpers
# ---------------------------------------------------------------------------

def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(f"{path.name}.tmp-{os.getpid()}")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def write_json(path: Path, payload: Any) -> None:
    _atomic_write_text(path, json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=2) + "\n")


def write_jsonl(path: Path, rows: Iterable[Any]) -> int:
    lines = [json.dumps(row, sort_keys=True, ensure_ascii=False) for row in rows]
    _atomic_write_text(path, "".join(line + "\n" for line in lines))
    return len(lines)


def read_jsonl(path: Path) -> Iterator[tuple[int, Any]]:
    if not path.exists():
        raise DataError(f"missing file: {path}")
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield line_no, json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{line_no}: malformed JSON line: {exc}") from exc


@contextmanager
def output_lock(out_dir: Path) -> Iterator[None]:
    """One writing run per output directory."""
    out_dir.mkdir(parents=True, exist_ok=True)
    lock = out_dir / ".lock"
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise ConfigError(
            f"output directory {out_dir} is locked by another run ({lock} exists)"
        ) from None
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield
    finally:
        lock.unlink(missing_ok=True)


def _manifest(config: RunConfig, command: str, artifacts: dict, counts: dict) -> dict:
    return {
        "command": command,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "config_hash": config.config_hash(),
        "artifacts": artifacts,
        "counts": counts,
    }


# ---------------------------------------------------------------------------
# build-dataset
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StageSummary:
    command: str
    artifacts: dict
    counts: dict
    warnings: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "artifacts": dict(self.artifacts),
            "counts": dict(self.counts),
            "warnings": list(self.warnings),
        }


def _column_map(config: RunConfig) -> ColumnMap:
    if config.data.column_layout == "leading-index":
        return ColumnMap.with_leading_index()
    return ColumnMap()


def effective_workers(config: RunConfig, backends) -> int:
    """Fan out only when every bound backend declares itself shareable;
    single-use backends force serial processing."""
    if config.workers <= 1:
        return 1
    bound = (
        backends.nli,
        backends.classifier,
        backends.srl,
        backends.parser,
        backends.embedder,
        backends.generator,
        backends.content_words,
    )
    if any(not b.shareable for b in bound):
        return 1
    return config.workers


def _build_dataset(config: RunConfig) -> StageSummary:
    paths = config.data.split_paths()
    if not paths:
        raise ConfigError("no LIAR-PLUS split paths configured under data.*")
    loaded = load_liar_plus(paths, _column_map(config))
    backends = config.build_backends()
    built, sj_rejects = build_liar_plus_plus(
        loaded.splits, backends.nli, premise=config.options.evidence_premise
    )

    out = Path(config.out_dir) / "dataset"
    artifacts: dict[str, str] = {}
    counts: dict[str, int] = {}
    for split in built:
        path = out / SPLIT_FILES[split.name.value]
        write_jsonl(path, (rec.as_dict() for rec in split.records))
        artifacts[split.name.value] = str(path)
        counts[split.name.value] = len(split)

    composition = {
        "grouped": composition_report(built, grouped=True).as_dict(),
        "ungrouped": composition_report(built, grouped=False).as_dict(),
    }
    comp_path = out / "composition.json"
    write_json(comp_path, composition)
    artifacts["composition"] = str(comp_path)

    rejects = list(loaded.rejects) + list(sj_rejects)
    rejects_path = out / "rejects.jsonl"
    write_jsonl(rejects_path, (r.as_dict() for r in rejects))
    artifacts["rejects"] = str(rejects_path)
    counts["rejects"] = len(rejects)

    manifest_path = out / "manifest.json"
    write_json(manifest_path, _manifest(config, "build-dataset", artifacts, counts))
    artifacts["manifest"] = str(manifest_path)
    return StageSummary(command="build-dataset", artifacts=artifacts, counts=counts)


def load_built_split(config: RunConfig, split_name: str) -> DatasetSplit:
    """Read one split of the built dataset back from the output directory."""
    try:
        split = Split(split_name)
    except ValueError:
        raise ConfigError(f"unknown split {split_name!r}") from None
    path = Path(config.out_dir) / "dataset" / SPLIT_FILES[split.value]
    if not path.exists():
        raise PreconditionError(
            f"split file {path} not found; run build-dataset into {config.out_dir} first"
        )
    records = []
    for line_no, raw in read_jsonl(path):
        try:
            records.append(ClaimRecord.from_dict(raw))
        except (HalfcheckError, KeyError, ValueError) as exc:
            raise DataError(f"{path}:{line_no}: bad record: {exc}") from exc
    return DatasetSplit(name=split, records=tuple(records))


# ---------------------------------------------------------------------------
# detect
# ---------------------------------------------------------------------------

def _load_matrix_file(path: Path) -> ConfusionMatrix3:
    if not path.exists():
        raise DataError(f"matrix file not found: {path}")
    raw = json.loads(path.read_text(encoding="utf-8"))
    if isinstance(raw, dict):
        raw = raw.get("matrix")
    if not isinstance(raw, list):
        raise DataError(f"matrix file {path} must hold a 3x3 array (or an object with 'matrix')")
    return ConfusionMatrix3.from_rows(raw)


def _detect(
    config: RunConfig,
    split_name: str = "test",
    mode: Optional[EvidenceMode] = None,
    from_matrix: Optional[str | Path | ConfusionMatrix3] = None,
) -> tuple[StageSummary, DetectionReport]:
    mode = mode or config.options.evidence_mode
    if from_matrix is not None:
        if not isinstance(from_matrix, ConfusionMatrix3):
            from_matrix = _load_matrix_file(Path(from_matrix))
        report = metrics(from_matrix, config.options.macro_f1)
        tag = "matrix"
    else:
        split = load_built_split(config, split_name)
        backends = config.build_backends()
        report = evaluate_split(
            split,
            mode=mode,
            classifier=backends.classifier,
            macro_f1_formula=config.options.macro_f1,
            workers=effective_workers(config, backends),
        )
        tag = f"{split_name}_{mode}"

    out = Path(config.out_dir) / "detect"
    report_path = out / f"report_{tag}.json"
    write_json(report_path, {**report.as_dict(), "printed": report.printed()})
    matrix_path = out / f"matrix_{tag}.txt"
    _atomic_write_text(matrix_path, render_matrix(report))
    artifacts = {"report": str(report_path), "matrix": str(matrix_path)}
    counts = {"evaluated": report.matrix.total}
    manifest_path = out / "manifest.json"
    write_json(manifest_path, _manifest(config, "detect", artifacts, counts))
    artifacts["manifest"] = str(manifest_path)
    return StageSummary(command="detect", artifacts=artifacts, counts=counts), report


# ---------------------------------------------------------------------------
# edit
# ---------------------------------------------------------------------------

def _edit(config: RunConfig, split_name: str = "test") -> StageSummary:
    split = load_built_split(config, split_name)
    backends = config.build_backends()
    options = config.options

    editable = [rec for rec in split.records if rec.grouped_label is not VeracityLabel.TRUE]
    skipped = len(split) - len(editable)

    def one(rec: ClaimRecord):
        try:
            result = edit_claim(
                rec,
                backends,
                premise=options.masking_premise,
                min_confidence=options.masking_min_confidence,
                max_candidates=options.max_candidates,
            )
            return result.as_dict(), None
        except HalfcheckError as exc:
            return None, Reject(split.name.value, rec.id, str(exc))

    workers = effective_workers(config, backends)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(one, editable))
    else:
        outcomes = [one(rec) for rec in editable]

    rows = [row for row, _reject in outcomes if row is not None]
    rejects = [reject for _row, reject in outcomes if reject is not None]

    out = Path(config.out_dir) / "edit"
    results_path = out / "results.jsonl"
    write_jsonl(results_path, rows)
    rejects_path = out / "rejects.jsonl"
    write_jsonl(rejects_path, (r.as_dict() for r in rejects))
    artifacts = {"results": str(results_path), "rejects": str(rejects_path)}
    counts = {
        "edited": len(rows),
        "rejected": len(rejects),
        "skipped_true": skipped,
        "debunked": sum(1 for row in rows if row["debunked"]),
    }
    manifest_path = out / "manifest.json"
    write_json(manifest_path, _manifest(config, "edit", artifacts, counts))
    artifacts["manifest"] = str(manifest_path)
    return StageSummary(command="edit", artifacts=artifacts, counts=counts)


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------

def render_eval_table(report: EditEvalReport) -> str:
    """Text table: content preservation and the debunk ratio."""
    return (
        "technique        CP     disinfo-debunk\n"
        "our technique    {cp:.2f}   {d} / {n} ({pct}%)\n".format(
            cp=report.avg_content_preservation,
            d=report.debunked_count,
            n=report.attempted_count,
            pct=report.percent,
        )
    )


def _evaluate(config: RunConfig, results_path: Optional[str | Path] = None) -> tuple[StageSummary, EditEvalReport]:
    path = Path(results_path) if results_path else Path(config.out_dir) / "edit" / "results.jsonl"
    if not path.exists():
        raise PreconditionError(f"results file not found: {path}")
    rows = []
    for line_no, raw in read_jsonl(path):
        try:
            rows.append((str(raw["id"]), raw["original"], raw["selected"], bool(raw["debunked"])))
        except (KeyError, TypeError) as exc:
            raise DataError(f"{path}:{line_no}: malformed result line: {exc}") from exc
    if not rows:
        raise DataError(f"results file {path} holds no result lines")

    if config.options.rescore_backend is not None:
        rows = _rescore(config, rows)

    report = evaluate_edits(rows, bleu_variant=config.options.bleu_variant)
    out = Path(config.out_dir) / "evaluate"
    report_path = out / "report.json"
    write_json(report_path, report.as_dict())
    table_path = out / "table.txt"
    _atomic_write_text(table_path, render_eval_table(report))
    artifacts = {"report": str(report_path), "table": str(table_path)}
    counts = {"attempted": report.attempted_count, "debunked": report.debunked_count}
    manifest_path = out / "manifest.json"
    write_json(manifest_path, _manifest(config, "evaluate", artifacts, counts))
    artifacts["manifest"] = str(manifest_path)
    return StageSummary(command="evaluate", artifacts=artifacts, counts=counts), report


def _rescore(config: RunConfig, rows: list[tuple[str, str, str, bool]]) -> list[tuple[str, str, str, bool]]:
    """Re-judge the debunk verdicts with a held-out classifier binding.

    By default the debunk flag comes from the same classifier that filtered
    the candidates; rescoring breaks that circularity when a second model
    is available. Requires the built dataset to recover each counter.
    """
    from .backends.registry import build_backends
    from .detection import predict_label

    bindings = config.resolved_bindings()
    rb = config.options.rescore_backend
    bindings["classifier"] = {"id": rb.id, **rb.params}
    backends = build_backends(bindings)
    counters = {}
    for split_name in SPLIT_FILES:
        try:
            split = load_built_split(config, split_name)
        except (PreconditionError, DataError):
            continue
        for rec in split.records:
            if rec.shortened_justification is not None:
                counters[rec.id] = rec.shortened_justification.rendered
    rescored = []
    for cid, original, selected, _debunked in rows:
        counter = counters.get(cid)
        if counter is None:
            raise DataError(f"cannot rescore {cid}: no built record with a counter found")
        label, _dist = predict_label(selected, counter, backends.classifier)
        rescored.append((cid, original, selected, label is VeracityLabel.TRUE))
    return rescored


# ---------------------------------------------------------------------------
# training data
# ---------------------------------------------------------------------------

def _training_data(
    config: RunConfig,
    take: Optional[int] = None,
    split_sizes: Optional[tuple[int, int, int]] = None,
) -> StageSummary:
    if not config.data.paraphrases:
        raise ConfigError("data.paraphrases is not configured")
    pairs, load_rejects = load_paraphrase_pairs(config.data.paraphrases)
    if take is not None:
        pairs = pairs[:take]
    backends = config.build_backends()
    instances, gen_rejects = generate_training_instances(
        pairs,
        srl=backends.srl,
        content_words=backends.content_words,
        max_masks=config.options.max_masks,
        seed=config.seed,
    )

    out = Path(config.out_dir) / "training"
    artifacts: dict[str, str] = {}
    counts: dict[str, int] = {"instances": len(instances)}
    if split_sizes is not None:
        n_train, n_val, n_test = split_sizes
        if n_train + n_val + n_test > len(instances):
            raise DataError(
                f"split sizes {split_sizes} exceed the {len(instances)} generated instances"
            )
        chunks = {
            "train": instances[:n_train],
            "validation": instances[n_train : n_train + n_val],
            "test": instances[n_train + n_val : n_train + n_val + n_test],
        }
    else:
        chunks = {"train": instances}
    for name, chunk in chunks.items():
        path = out / f"{name}.jsonl"
        write_jsonl(path, (inst.as_dict() for inst in chunk))
        artifacts[name] = str(path)
        counts[name] = len(chunk)

    rejects = list(load_rejects) + list(gen_rejects)
    rejects_path = out / "rejects.jsonl"
    write_jsonl(rejects_path, (r.as_dict() for r in rejects))
    artifacts["rejects"] = str(rejects_path)
    counts["rejects"] = len(rejects)
    manifest_path = out / "manifest.json"
    write_json(manifest_path, _manifest(config, "build-training-data", artifacts, counts))
    artifacts["manifest"] = str(manifest_path)
    return StageSummary(command="build-training-data", artifacts=artifacts, counts=counts)


# ---------------------------------------------------------------------------
# public entry points (locked)
# ---------------------------------------------------------------------------

def run_build_dataset(config: RunConfig) -> StageSummary:
    with output_lock(Path(config.out_dir)):
        return _build_dataset(config)


def run_detect(
    config: RunConfig,
    split_name: str = "test",
    mode: Optional[EvidenceMode] = None,
    from_matrix: Optional[str | Path | ConfusionMatrix3] = None,
) -> tuple[StageSummary, DetectionReport]:
    with output_lock(Path(config.out_dir)):
        return _detect(config, split_name, mode, from_matrix)


def run_edit(config: RunConfig, split_name: str = "test") -> StageSummary:
    with output_lock(Path(config.out_dir)):
        return _edit(config, split_name)


def run_evaluate(
    config: RunConfig, results_path: Optional[str | Path] = None
) -> tuple[StageSummary, EditEvalReport]:
    with output_lock(Path(config.out_dir)):
        return _evaluate(config, results_path)


def run_training_data(
    config: RunConfig,
    take: Optional[int] = None,
    split_sizes: Optional[tuple[int, int, int]] = None,
) -> StageSummary:
    with output_lock(Path(config.out_dir)):
        return _training_data(config, take, split_sizes)


def run_pipeline(config: RunConfig, split_name: str = "test") -> StageSummary:
    """build -> detect -> edit -> evaluate, one manifest linking them all.

    Stops at the first stage whose preconditions fail; artifacts written by
    completed stages stay intact.
    """
    with output_lock(Path(config.out_dir)):
        build = _build_dataset(config)
        detect, _report = _detect(config, split_name=split_name)
        edit = _edit(config, split_name=split_name)
        evaluate, _eval_report = _evaluate(config)
        artifacts = {
            "build_dataset": build.artifacts,
            "detect": detect.artifacts,
            "edit": edit.artifacts,
            "evaluate": evaluate.artifacts,
        }
        counts = {
            "build_dataset": build.counts,
            "detect": detect.counts,
            "edit": edit.counts,
            "evaluate": evaluate.counts,
        }
        manifest_path = Path(config.out_dir) / "pipeline.manifest.json"
        write_json(manifest_path, _manifest(config, "pipeline", artifacts, counts))
        summary_artifacts = {"manifest": str(manifest_path)}
        for stage, stage_artifacts in artifacts.items():
            for key, value in stage_artifacts.items():
                summary_artifacts[f"{stage}.{key}"] = value
        return StageSummary(command="pipeline", artifacts=summary_artifacts, counts=counts)
