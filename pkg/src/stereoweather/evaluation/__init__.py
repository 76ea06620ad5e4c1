from .evaluate import EvaluationResult, MetricRecord, SubsetReport, aggregate, evaluate
from .metrics import D1_ABS_THRESHOLD, D1_REL_THRESHOLD, d1, epe

__all__ = [
    "D1_ABS_THRESHOLD",
    "D1_REL_THRESHOLD",
    "EvaluationResult",
    "MetricRecord",
    "SubsetReport",
    "aggregate",
    "d1",
    "epe",
    "evaluate",
]
