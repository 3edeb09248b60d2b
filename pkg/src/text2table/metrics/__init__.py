from .coverage import (CoverageReport, Direction, PRF, coverage_report, f1, header_coverage,
                       table_set_items, tuple_coverage)
from .judged import AutoQaReport, TabEvalReport, autoqa, parse_qa_pairs, tabeval, unroll_table
from .numeric import NumericReport, numeric_eval, numeric_eval_values
from .similarity import Similarity, SimilarityKind, chrf

__all__ = [
    "AutoQaReport", "CoverageReport", "Direction", "NumericReport", "PRF", "Similarity", "SimilarityKind",
    "TabEvalReport", "autoqa", "chrf", "coverage_report", "f1", "header_coverage", "numeric_eval",
    "numeric_eval_values", "parse_qa_pairs", "table_set_items", "tabeval", "tuple_coverage", "unroll_table",
]
