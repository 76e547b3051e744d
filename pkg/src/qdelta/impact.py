"""Quantify a modification's effect on the metric catalogue.

For every affected entity matched across the before/after snapshots we
take the percentage difference of each metric, then average per metric
over methods and over classes separately, giving the 32-component
impact vector.
"""
from __future__ import annotations

from dataclasses import dataclass

from .metrics import CLASS_METRICS, METHOD_METRICS, compute_all_metrics, parse_entities
from .metrics.engine import EntityMetrics
from .metrics.entities import ClassNode, EntityTree, MethodNode
from .records import ImpactVector, Modification


class ModificationExcluded(Exception):
    """The modification cannot produce an impact vector."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def percentage_delta(before: float, after: float) -> float | None:
    """Percent change relative to the initial value.

    Zero-to-zero is no change; zero-to-something has no defined
    percentage and yields None.
    """
    if before != 0:
        return (after - before) / before * 100.0
    if after == 0:
        return 0.0
    return None


@dataclass(frozen=True)
class EntityPairing:
    """Matched before/after entities touched by a hunk, plus the
    entities that exist on only one side."""

    method_pairs: list[tuple[MethodNode, MethodNode]]
    class_pairs: list[tuple[ClassNode, ClassNode]]
    unmatched_before: list[str]
    unmatched_after: list[str]


def _spans_intersect(start: int, end: int, lo: int, hi: int) -> bool:
    return lo <= hi and start <= hi and end >= lo


def affected_entities(
    mod: Modification, before_tree: EntityTree, after_tree: EntityTree
) -> EntityPairing:
    hunk = mod.hunk
    removed_lo, removed_hi = hunk.old_start + 1, hunk.old_start + hunk.old_len
    added_lo, added_hi = hunk.new_start + 1, hunk.new_start + hunk.new_len

    def touched(before_node, after_node) -> bool:
        if before_node is not None and _spans_intersect(
            before_node.start_line, before_node.end_line, removed_lo, removed_hi
        ):
            return True
        if after_node is not None and _spans_intersect(
            after_node.start_line, after_node.end_line, added_lo, added_hi
        ):
            return True
        return False

    before_methods = {m.qualified_name: m for _, m in before_tree.all_methods()}
    after_methods = {m.qualified_name: m for _, m in after_tree.all_methods()}
    before_classes = {c.qualified_name: c for c in before_tree.all_classes()}
    after_classes = {c.qualified_name: c for c in after_tree.all_classes()}

    method_pairs = [
        (before_methods[k], after_methods[k])
        for k in sorted(set(before_methods) & set(after_methods))
        if touched(before_methods[k], after_methods[k])
    ]
    class_pairs = [
        (before_classes[k], after_classes[k])
        for k in sorted(set(before_classes) & set(after_classes))
        if touched(before_classes[k], after_classes[k])
    ]
    unmatched_before = sorted(
        [k for k in set(before_methods) - set(after_methods) if touched(before_methods[k], None)]
        + [k for k in set(before_classes) - set(after_classes) if touched(before_classes[k], None)]
    )
    unmatched_after = sorted(
        [k for k in set(after_methods) - set(before_methods) if touched(None, after_methods[k])]
        + [k for k in set(after_classes) - set(before_classes) if touched(None, after_classes[k])]
    )

    if not method_pairs and not class_pairs and not unmatched_before and not unmatched_after:
        # nothing structural intersects (imports, package line): the
        # change belongs to every class of the file
        class_pairs = [
            (before_classes[k], after_classes[k])
            for k in sorted(set(before_classes) & set(after_classes))
        ]
    return EntityPairing(method_pairs, class_pairs, unmatched_before, unmatched_after)


def _mean_deltas(
    pairs: list[tuple[str, str]],
    metric_names: tuple[str, ...],
    before_metrics: dict[str, EntityMetrics],
    after_metrics: dict[str, EntityMetrics],
) -> list[float | None]:
    out: list[float | None] = []
    for name in metric_names:
        deltas = []
        for before_key, after_key in pairs:
            d = percentage_delta(
                before_metrics[before_key].values[name],
                after_metrics[after_key].values[name],
            )
            if d is not None:
                deltas.append(d)
        out.append(sum(deltas) / len(deltas) if deltas else None)
    return out


def compute_impact(
    mod: Modification,
    pairing: EntityPairing,
    before_metrics: dict[str, EntityMetrics],
    after_metrics: dict[str, EntityMetrics],
) -> ImpactVector:
    if not pairing.method_pairs and not pairing.class_pairs:
        raise ModificationExcluded("no matched entities")
    method_keys = [(b.qualified_name, a.qualified_name) for b, a in pairing.method_pairs]
    class_keys = [(b.qualified_name, a.qualified_name) for b, a in pairing.class_pairs]
    return ImpactVector(
        modification_id=mod.id,
        repo=mod.repo.full_name,
        method_deltas=tuple(
            _mean_deltas(method_keys, METHOD_METRICS, before_metrics, after_metrics)
        ),
        class_deltas=tuple(
            _mean_deltas(class_keys, CLASS_METRICS, before_metrics, after_metrics)
        ),
        affected_methods=len(method_keys),
        affected_classes=len(class_keys),
    )


def impact_of_modification(mod: Modification) -> ImpactVector:
    """Full per-modification path: parse both snapshots, match entities,
    compute metric deltas. Raises ModificationExcluded when the
    modification cannot be measured."""
    if not mod.syntactic:
        raise ModificationExcluded("not syntactically isolated")
    before_tree = parse_entities(mod.isolated_before)
    after_tree = parse_entities(mod.isolated_after)
    if before_tree.errors or after_tree.errors:
        raise ModificationExcluded("snapshot failed to parse")
    pairing = affected_entities(mod, before_tree, after_tree)
    before_metrics = compute_all_metrics(before_tree)
    after_metrics = compute_all_metrics(after_tree)
    return compute_impact(mod, pairing, before_metrics, after_metrics)


def filter_zero_impact(vectors: list[ImpactVector]) -> list[ImpactVector]:
    """Keep vectors with at least one defined nonzero component."""
    return [
        v
        for v in vectors
        if any(c is not None and c != 0 for c in v.components)
    ]
