"""Source parsing and static metric computation for the subject language."""

from .catalog import (
    ALL_METRIC_NAMES,
    CLASS_METRICS,
    COMPONENT_NAMES,
    HIGHER_IS_BETTER,
    METHOD_METRICS,
    N_COMPONENTS,
    verdict,
)
from .engine import (
    EntityMetrics,
    FileContext,
    compute_all_metrics,
    compute_class_metrics,
    compute_method_metrics,
)
from .entities import ClassNode, EntityTree, MethodNode, parse_entities

__all__ = [
    "ALL_METRIC_NAMES",
    "CLASS_METRICS",
    "COMPONENT_NAMES",
    "HIGHER_IS_BETTER",
    "METHOD_METRICS",
    "N_COMPONENTS",
    "verdict",
    "EntityMetrics",
    "FileContext",
    "compute_all_metrics",
    "compute_class_metrics",
    "compute_method_metrics",
    "ClassNode",
    "EntityTree",
    "MethodNode",
    "parse_entities",
]
