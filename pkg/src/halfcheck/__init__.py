"""Half-truth detection and debunking pipeline.

Evidence distillation via textual entailment, three-way veracity
classification, and controlled claim editing, with every model behind a
pluggable backend contract.
"""

__version__ = "0.1.0"

from .core import (
    ClaimRecord,
    LabelDistribution,
    ShortenedJustification,
    SixWayLabel,
    Split,
    VeracityLabel,
    argmax_label,
    group_label,
)

__all__ = [
    "ClaimRecord",
    "LabelDistribution",
    "ShortenedJustification",
    "SixWayLabel",
    "Split",
    "VeracityLabel",
    "__version__",
    "argmax_label",
    "group_label",
]
