"""Quantitative protocols: robustness buckets, backbone tables, aesthetics."""

from .aesthetics import (HUMAN_EVAL_CONTEXT, aesthetics_report,
                         score_aesthetics)
from .backbones import (REFERENCE_FOOTER, REFERENCE_ROWS, bench_backbones,
                        parameter_count)
from .report import BenchReport, render_table
from .robustness import (BUCKETS, RobustnessBucket, RobustnessScene,
                         bench_robustness, demo_setup, pixel_diff,
                         silhouette_iou)

__all__ = [
    "BUCKETS", "BenchReport", "HUMAN_EVAL_CONTEXT", "REFERENCE_FOOTER",
    "REFERENCE_ROWS", "RobustnessBucket", "RobustnessScene",
    "aesthetics_report", "bench_backbones", "bench_robustness", "demo_setup",
    "parameter_count", "pixel_diff", "render_table", "score_aesthetics",
    "silhouette_iou",
]
