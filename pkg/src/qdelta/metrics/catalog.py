"""Canonical metric names, component ordering, and quality directions.

The 32-component impact vector is the 18 method-level metrics followed
by the 14 class-level metrics, in the orders below. docs/metrics.md is
the human-readable statement of the same contract.
"""
from __future__ import annotations

METHOD_METRICS: tuple[str, ...] = (
    "HCPL", "HDIF", "HEFF", "HPL", "HPV", "HTRP", "HVOL",
    "MI", "McCC", "NL", "NLE", "NII", "NOI",
    "CD", "CLOC", "DLOC", "LLOC", "LOC",
)

CLASS_METRICS: tuple[str, ...] = (
    "NL", "NLE", "WMC", "CBO", "CBOI", "NII", "NOI", "RFC",
    "AD", "CD", "CLOC", "DLOC", "LLOC", "LOC",
)

COMPONENT_NAMES: tuple[str, ...] = tuple(
    [f"method_{m}" for m in METHOD_METRICS] + [f"class_{m}" for m in CLASS_METRICS]
)

N_COMPONENTS = len(COMPONENT_NAMES)  # 32

# Metrics where an increase improves quality; for every other metric a
# decrease is the improvement. Zero change is always neutral.
HIGHER_IS_BETTER: frozenset[str] = frozenset({"MI", "AD", "CD", "CLOC", "DLOC"})

ALL_METRIC_NAMES: tuple[str, ...] = (
    "HCPL", "HDIF", "HEFF", "HPL", "HPV", "HTRP", "HVOL", "MI", "McCC",
    "NL", "NLE", "WMC", "CBO", "CBOI", "NII", "NOI", "RFC",
    "AD", "CD", "CLOC", "DLOC", "LLOC", "LOC",
)

METRIC_DESCRIPTIONS: dict[str, str] = {
    "HCPL": "Halstead Calculated Program Length",
    "HDIF": "Halstead Difficulty",
    "HEFF": "Halstead Effort",
    "HPL": "Halstead Program Length",
    "HPV": "Halstead Program Vocabulary",
    "HTRP": "Halstead Time Required to Program",
    "HVOL": "Halstead Volume",
    "MI": "Maintainability Index",
    "McCC": "McCabe's Cyclomatic Complexity",
    "NL": "Nesting Level",
    "NLE": "Nesting Level Else-If",
    "WMC": "Weighted Methods per Class",
    "CBO": "Coupling Between Object classes",
    "CBOI": "CBO Inverse",
    "NII": "Number of Incoming Invocations",
    "NOI": "Number of Outgoing Invocations",
    "RFC": "Response set For Class",
    "AD": "API Documentation",
    "CD": "Comment Density",
    "CLOC": "Comment Lines of Code",
    "DLOC": "Documentation Lines of Code",
    "LLOC": "Logical Lines of Code",
    "LOC": "Lines of Code",
}


def verdict(metric: str, mean_delta: float) -> str:
    """Classify a mean percentage delta as improvement/degradation/neutral."""
    if metric not in METRIC_DESCRIPTIONS:
        raise KeyError(f"unknown metric {metric!r}")
    if mean_delta == 0:
        return "neutral"
    if metric in HIGHER_IS_BETTER:
        return "improvement" if mean_delta > 0 else "degradation"
    return "improvement" if mean_delta < 0 else "degradation"
