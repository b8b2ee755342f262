"""Run configuration: backend bindings, dataset paths, output directory,
seed, and every knob the pipeline leaves open (NLI direction, masking
confidence, BLEU variant, macro-F1 formula, candidate budget).

The config is one human-editable JSON file; CLI flags override individual
fields. A canonical hash of the resolved config ties artifacts to the
exact settings that produced them.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .backends.registry import CONTRACT_KEYS, DEFAULT_BINDINGS, BackendSet, build_backends
from .errors import ConfigError


class BackendBinding(BaseModel):
    model_config = ConfigDict(extra="forbid")

    id: str
    params: dict[str, Any] = Field(default_factory=dict)


class DataPaths(BaseModel):
    model_config = ConfigDict(extra="forbid")

    liar_plus_train: Optional[str] = None
    liar_plus_validation: Optional[str] = None
    liar_plus_test: Optional[str] = None
    paraphrases: Optional[str] = None
    column_layout: Literal["plain", "leading-index"] = "plain"

    def split_paths(self) -> dict[str, str]:
        out = {}
        if self.liar_plus_train:
            out["train"] = self.liar_plus_train
        if self.liar_plus_validation:
            out["validation"] = self.liar_plus_validation
        if self.liar_plus_test:
            out["test"] = self.liar_plus_test
        return out


class StageOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    # premise side when scoring justification sentences against the claim
    evidence_premise: Literal["claim", "sentence"] = "claim"
    # premise side when scoring claim segments against the counter
    masking_premise: Literal["counter", "segment"] = "counter"
    masking_min_confidence: float = Field(default=0.0, ge=0.0, le=1.0)
    bleu_variant: Literal["sentence-mean", "corpus"] = "sentence-mean"
    macro_f1: Literal["harmonic", "per-label-mean"] = "harmonic"
    max_candidates: int = Field(default=5, ge=1, le=5)
    evidence_mode: Literal["J", "SJ"] = "SJ"
    # re-score selected edits with a second classifier binding if set
    rescore_backend: Optional[BackendBinding] = None
    max_masks: int = Field(default=3, ge=1)


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    backends: dict[str, BackendBinding] = Field(default_factory=dict)
    data: DataPaths = Field(default_factory=DataPaths)
    out_dir: str = "runs/out"
    seed: int = 0
    workers: int = Field(default=1, ge=1)
    options: StageOptions = Field(default_factory=StageOptions)

    @field_validator("backends")
    @classmethod
    def _known_keys(cls, value: dict[str, BackendBinding]) -> dict[str, BackendBinding]:
        allowed = set(CONTRACT_KEYS) | {"content_words"}
        unknown = set(value) - allowed
        if unknown:
            raise ValueError(f"unknown backend keys: {sorted(unknown)}")
        return value

    def resolved_bindings(self) -> dict[str, dict[str, Any]]:
        """All seven backend keys bound, defaults filling the gaps."""
        out = {}
        for key, default_id in DEFAULT_BINDINGS.items():
            binding = self.backends.get(key)
            if binding is None:
                out[key] = {"id": default_id}
            else:
                out[key] = {"id": binding.id, **binding.params}
        return out

    def build_backends(self) -> BackendSet:
        return build_backends(self.resolved_bindings())

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


def load_config(path: Optional[str | Path] = None, overrides: Optional[dict] = None) -> RunConfig:
    """Read a JSON config file (or start from defaults) and apply flat
    overrides for the shared CLI flags (seed, out_dir, workers)."""
    raw: dict[str, Any] = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        try:
            raw = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {p} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError(f"config file {p} must hold a JSON object")
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc
