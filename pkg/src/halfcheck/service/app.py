"""FastAPI service wrapping the pipeline.

Single-claim endpoints answer against the backends bound at startup; batch
job endpoints run the build/detect/edit/evaluate stages against an output
directory on the service host. Typed package errors map to a stable error
body so thin clients can translate them into exit codes.
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..config import RunConfig
from ..core import ClaimRecord, Split, group_label, parse_six_way
from ..detection import ConfusionMatrix3, metrics, predict_label, render_matrix
from ..editing import edit_claim
from ..errors import BackendError, ConfigError, DataError, HalfcheckError
from ..evaluation import (
    HumanAnnotation,
    cohen_kappa,
    content_preservation,
    human_eval_aggregate,
)
from ..evidence import shorten_justification
from ..runs import (
    run_build_dataset,
    run_detect,
    run_edit,
    run_evaluate,
    run_pipeline,
    run_training_data,
)
from . import schemas


def error_kind(exc: HalfcheckError) -> str:
    if isinstance(exc, ConfigError):
        return "config"
    if isinstance(exc, DataError):
        return "data"
    if isinstance(exc, BackendError):
        return "backend"
    return "internal"


_STATUS_FOR_KIND = {"config": 422, "data": 400, "backend": 502, "internal": 500}


def create_app(config: Optional[RunConfig] = None) -> FastAPI:
    config = config or RunConfig()
    app = FastAPI(title="halfcheck", version=__version__)
    app.state.config = config
    app.state.backends = config.build_backends()

    @app.exception_handler(HalfcheckError)
    async def _halfcheck_error(_request: Request, exc: HalfcheckError) -> JSONResponse:
        kind = error_kind(exc)
        return JSONResponse(
            status_code=_STATUS_FOR_KIND[kind],
            content={"error": {"kind": kind, "message": str(exc)}},
        )

    def job_config(payload: schemas.JobRequest) -> RunConfig:
        return payload.config if payload.config is not None else app.state.config

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        backends = app.state.backends
        return schemas.HealthResponse(
            status="ok",
            version=__version__,
            backends={
                "nli": backends.nli.name,
                "classifier": backends.classifier.name,
                "srl": backends.srl.name,
                "parser": backends.parser.name,
                "embedder": backends.embedder.name,
                "generator": backends.generator.name,
                "content_words": backends.content_words.name,
            },
        )

    @app.post("/labels/group", response_model=schemas.GroupLabelResponse)
    def group(payload: schemas.GroupLabelRequest) -> schemas.GroupLabelResponse:
        six = parse_six_way(payload.six_way_label)
        return schemas.GroupLabelResponse(
            six_way_label=six.value, veracity_label=group_label(six).value
        )

    @app.post("/nli", response_model=schemas.NLIResponse)
    def nli(payload: schemas.NLIRequest) -> schemas.NLIResponse:
        verdict = app.state.backends.nli.nli_score(payload.premise, payload.hypothesis)
        return schemas.NLIResponse(**verdict.as_dict())

    @app.post("/evidence/shorten", response_model=schemas.ShortenResponse)
    def shorten(payload: schemas.ShortenRequest) -> schemas.ShortenResponse:
        sj = shorten_justification(
            payload.claim,
            payload.justification,
            app.state.backends.nli,
            premise=app.state.config.options.evidence_premise,
        )
        return schemas.ShortenResponse(**sj.as_dict())

    @app.post("/detect", response_model=schemas.DetectResponse)
    def detect(payload: schemas.DetectRequest) -> schemas.DetectResponse:
        label, dist = predict_label(
            payload.claim, payload.evidence, app.state.backends.classifier
        )
        return schemas.DetectResponse(label=label.value, distribution=dist.as_dict())

    @app.post("/detect/metrics", response_model=schemas.DetectionReportResponse)
    def matrix_metrics(payload: schemas.MatrixMetricsRequest) -> schemas.DetectionReportResponse:
        report = metrics(
            ConfusionMatrix3.from_rows(payload.matrix),
            macro_f1_formula=payload.macro_f1_formula,
        )
        return schemas.DetectionReportResponse(
            **report.as_dict(), printed=report.printed(), rendered=render_matrix(report)
        )

    @app.post("/edit", response_model=schemas.EditResponse)
    def edit(payload: schemas.EditRequest) -> schemas.EditResponse:
        backends = app.state.backends
        options = app.state.config.options
        sj = shorten_justification(
            payload.statement, payload.justification, backends.nli,
            premise=options.evidence_premise,
        )
        record = ClaimRecord(
            id=payload.id,
            statement=payload.statement,
            six_way_label=parse_six_way(payload.six_way_label),
            justification=payload.justification,
            split=Split.TEST,
            shortened_justification=sj,
        )
        result = edit_claim(
            record,
            backends,
            premise=options.masking_premise,
            min_confidence=options.masking_min_confidence,
            max_candidates=options.max_candidates,
        )
        return schemas.EditResponse(counter=sj.rendered, **result.as_dict())

    @app.post("/evaluate/content-preservation", response_model=schemas.ContentPreservationResponse)
    def cp(payload: schemas.ContentPreservationRequest) -> schemas.ContentPreservationResponse:
        return schemas.ContentPreservationResponse(
            bleu=content_preservation(payload.edited, payload.original)
        )

    @app.post("/evaluate/kappa", response_model=schemas.KappaResponse)
    def kappa(payload: schemas.KappaRequest) -> schemas.KappaResponse:
        return schemas.KappaResponse(kappa=cohen_kappa(payload.pairs))

    @app.post("/evaluate/human", response_model=schemas.HumanEvalResponse)
    def human(payload: schemas.HumanEvalRequest) -> schemas.HumanEvalResponse:
        report = human_eval_aggregate(
            [HumanAnnotation(**a.model_dump()) for a in payload.annotations],
            annotator_pair=payload.annotator_pair,
        )
        return schemas.HumanEvalResponse(**report.as_dict())

    @app.post("/jobs/build-dataset", response_model=schemas.JobResponse)
    def build_dataset_job(payload: schemas.JobRequest) -> schemas.JobResponse:
        summary = run_build_dataset(job_config(payload))
        return schemas.JobResponse(**summary.as_dict())

    @app.post("/jobs/detect", response_model=schemas.DetectJobResponse)
    def detect_job(payload: schemas.DetectJobRequest) -> schemas.DetectJobResponse:
        matrix = (
            ConfusionMatrix3.from_rows(payload.from_matrix)
            if payload.from_matrix is not None
            else None
        )
        summary, report = run_detect(
            job_config(payload), split_name=payload.split, mode=payload.mode, from_matrix=matrix
        )
        return schemas.DetectJobResponse(
            **summary.as_dict(),
            report=schemas.DetectionReportResponse(
                **report.as_dict(), printed=report.printed(), rendered=render_matrix(report)
            ),
        )

    @app.post("/jobs/edit", response_model=schemas.JobResponse)
    def edit_job(payload: schemas.EditJobRequest) -> schemas.JobResponse:
        summary = run_edit(job_config(payload), split_name=payload.split)
        return schemas.JobResponse(**summary.as_dict())

    @app.post("/jobs/evaluate", response_model=schemas.EvaluateJobResponse)
    def evaluate_job(payload: schemas.EvaluateJobRequest) -> schemas.EvaluateJobResponse:
        from ..runs import render_eval_table

        summary, report = run_evaluate(job_config(payload), results_path=payload.results_path)
        return schemas.EvaluateJobResponse(
            **summary.as_dict(), report=report.as_dict(), table=render_eval_table(report)
        )

    @app.post("/jobs/pipeline", response_model=schemas.JobResponse)
    def pipeline_job(payload: schemas.PipelineJobRequest) -> schemas.JobResponse:
        summary = run_pipeline(job_config(payload), split_name=payload.split)
        return schemas.JobResponse(**summary.as_dict())

    @app.post("/jobs/build-training-data", response_model=schemas.JobResponse)
    def training_data_job(payload: schemas.TrainingDataJobRequest) -> schemas.JobResponse:
        summary = run_training_data(
            job_config(payload), take=payload.take, split_sizes=payload.split_sizes
        )
        return schemas.JobResponse(**summary.as_dict())

    return app
