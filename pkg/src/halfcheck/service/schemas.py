"""Pydantic request/response models for the service API."""

from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field, field_validator

from ..config import RunConfig


class ErrorBody(BaseModel):
    kind: Literal["config", "data", "backend", "internal"]
    message: str


class ErrorResponse(BaseModel):
    error: ErrorBody


class HealthResponse(BaseModel):
    status: str
    version: str
    backends: dict[str, str]


class GroupLabelRequest(BaseModel):
    six_way_label: str = Field(min_length=1)


class GroupLabelResponse(BaseModel):
    six_way_label: str
    veracity_label: str


class NLIRequest(BaseModel):
    premise: str = Field(min_length=1)
    hypothesis: str = Field(min_length=1)


class NLIResponse(BaseModel):
    label: str
    confidence: float
    distribution: dict[str, float]


class ShortenRequest(BaseModel):
    claim: str = Field(min_length=1)
    justification: str = Field(min_length=1)


class SentenceVerdict(BaseModel):
    text: str
    verdict: NLIResponse


class ShortenResponse(BaseModel):
    primary_sentence: Optional[SentenceVerdict]
    neutral_sentence: Optional[SentenceVerdict]
    rendered: str


class DetectRequest(BaseModel):
    claim: str = Field(min_length=1)
    evidence: str = ""


class DetectResponse(BaseModel):
    label: str
    distribution: dict[str, float]


class MatrixMetricsRequest(BaseModel):
    matrix: list[list[int]]
    macro_f1_formula: Literal["harmonic", "per-label-mean"] = "harmonic"

    @field_validator("matrix")
    @classmethod
    def _shape(cls, value: list[list[int]]) -> list[list[int]]:
        if len(value) != 3 or any(len(row) != 3 for row in value):
            raise ValueError("matrix must be 3x3")
        return value


class DetectionReportResponse(BaseModel):
    matrix: list[list[int]]
    per_label_precision: dict[str, float]
    per_label_recall: dict[str, float]
    per_label_f1: dict[str, float]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    macro_f1_formula: str
    warnings: list[str]
    printed: dict[str, Any]
    rendered: str


class EditRequest(BaseModel):
    id: str = "adhoc"
    statement: str = Field(min_length=1)
    six_way_label: str = Field(min_length=1)
    justification: str = Field(min_length=1)


class CandidateModel(BaseModel):
    text: str
    label: str
    overlap: float
    rank: int


class EditResponse(BaseModel):
    id: str
    original: str
    counter: str
    masked_text: str
    masked_reasons: list[str]
    candidates: list[CandidateModel]
    selected: str
    debunked: bool


class ContentPreservationRequest(BaseModel):
    edited: str = Field(min_length=1)
    original: str = Field(min_length=1)


class ContentPreservationResponse(BaseModel):
    bleu: float


class KappaRequest(BaseModel):
    pairs: list[tuple[Any, Any]] = Field(min_length=1)


class KappaResponse(BaseModel):
    kappa: float


class AnnotationModel(BaseModel):
    claim_id: str
    annotator_id: str
    fluency: int = Field(ge=1, le=3)
    edit_correctness: int = Field(ge=1, le=3)


class HumanEvalRequest(BaseModel):
    annotations: list[AnnotationModel] = Field(min_length=1)
    annotator_pair: Optional[tuple[str, str]] = None


class HumanEvalResponse(BaseModel):
    means: dict[str, float]
    kappas: dict[str, Optional[float]]
    flags: list[str]


class JobRequest(BaseModel):
    """Batch jobs carry their full run configuration; the service default
    config applies when omitted. Paths inside the config are resolved on
    the service host."""

    config: Optional[RunConfig] = None


class DetectJobRequest(JobRequest):
    split: str = "test"
    mode: Optional[Literal["J", "SJ"]] = None
    from_matrix: Optional[list[list[int]]] = None


class EditJobRequest(JobRequest):
    split: str = "test"


class EvaluateJobRequest(JobRequest):
    results_path: Optional[str] = None


class PipelineJobRequest(JobRequest):
    split: str = "test"


class TrainingDataJobRequest(JobRequest):
    take: Optional[int] = Field(default=None, ge=1)
    split_sizes: Optional[tuple[int, int, int]] = None


class JobResponse(BaseModel):
    command: str
    artifacts: dict[str, Any]
    counts: dict[str, Any]
    warnings: list[str] = Field(default_factory=list)


class DetectJobResponse(JobResponse):
    report: DetectionReportResponse


class EvaluateJobResponse(JobResponse):
    report: dict[str, Any]
    table: str
