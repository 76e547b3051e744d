"""Distribution exports and per-cluster report rendering."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .metrics.catalog import (
    CLASS_METRICS,
    COMPONENT_NAMES,
    METHOD_METRICS,
    METRIC_DESCRIPTIONS,
    verdict,
)
from .records import ClusterResult, ImpactVector, SummaryPair

UNSUMMARIZED = "(unsummarized)"


@dataclass(frozen=True)
class DistributionRow:
    component: str
    count: int
    minimum: float | None
    q1: float | None
    median: float | None
    q3: float | None
    maximum: float | None
    mean: float | None


def export_distributions(vectors: list[ImpactVector]) -> list[DistributionRow]:
    """Five-number summary plus mean for each of the 32 components,
    over the defined values only. Quantiles interpolate linearly."""
    if not vectors:
        raise ValueError("need at least one impact vector")
    rows: list[DistributionRow] = []
    for j, name in enumerate(COMPONENT_NAMES):
        values = [v.components[j] for v in vectors if v.components[j] is not None]
        if not values:
            rows.append(DistributionRow(name, 0, None, None, None, None, None, None))
            continue
        arr = np.asarray(values, dtype=np.float64)
        rows.append(
            DistributionRow(
                component=name,
                count=len(values),
                minimum=float(arr.min()),
                q1=float(np.quantile(arr, 0.25)),
                median=float(np.quantile(arr, 0.5)),
                q3=float(np.quantile(arr, 0.75)),
                maximum=float(arr.max()),
                mean=float(arr.mean()),
            )
        )
    return rows


def distributions_csv(rows: list[DistributionRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["component", "count", "min", "q1", "median", "q3", "max", "mean"])
    for r in rows:
        writer.writerow(
            [
                r.component,
                r.count,
                _fmt(r.minimum),
                _fmt(r.q1),
                _fmt(r.median),
                _fmt(r.q3),
                _fmt(r.maximum),
                _fmt(r.mean),
            ]
        )
    return buf.getvalue()


def _fmt(x: float | None) -> str:
    return "" if x is None else f"{x:.6g}"


@dataclass(frozen=True)
class MetricImpactRow:
    metric: str
    level: str  # method | class
    mean_delta: float | None
    defined_members: int
    verdict: str  # improvement | degradation | neutral | undefined


@dataclass(frozen=True)
class MemberRow:
    index: int
    modification_id: str
    detailed: str
    simple: str


@dataclass(frozen=True)
class ClusterReport:
    cluster_id: int
    silhouette: float
    repositories: list[str]
    members: list[MemberRow]
    metric_rows: list[MetricImpactRow]


def render_cluster_report(
    cluster_id: int,
    result: ClusterResult,
    impacts: dict[str, ImpactVector],
    summaries: dict[str, SummaryPair],
) -> ClusterReport:
    member_ids = sorted(
        mid for mid, c in result.assignment.items() if c == cluster_id
    )
    members = []
    for idx, mid in enumerate(member_ids, start=1):
        pair = summaries.get(mid)
        members.append(
            MemberRow(
                index=idx,
                modification_id=mid,
                detailed=pair.detailed if pair else UNSUMMARIZED,
                simple=pair.simple if pair else UNSUMMARIZED,
            )
        )
    repositories = sorted({impacts[mid].repo for mid in member_ids if mid in impacts})
    metric_rows: list[MetricImpactRow] = []
    for level, names in (("method", METHOD_METRICS), ("class", CLASS_METRICS)):
        for offset, name in enumerate(names):
            j = offset if level == "method" else len(METHOD_METRICS) + offset
            values = [
                impacts[mid].components[j]
                for mid in member_ids
                if mid in impacts and impacts[mid].components[j] is not None
            ]
            if values:
                mean = sum(values) / len(values)
                metric_rows.append(
                    MetricImpactRow(name, level, mean, len(values), verdict(name, mean))
                )
            else:
                metric_rows.append(MetricImpactRow(name, level, None, 0, "undefined"))
    cluster_sil = result.cluster_silhouette.get(cluster_id, 0.0)
    return ClusterReport(
        cluster_id=cluster_id,
        silhouette=cluster_sil,
        repositories=repositories,
        members=members,
        metric_rows=metric_rows,
    )


def cluster_report_text(report: ClusterReport) -> str:
    lines = [
        f"Cluster {report.cluster_id}"
        f"  (silhouette {report.silhouette:.4f},"
        f" {len(report.members)} modifications,"
        f" repositories: {', '.join(report.repositories) or '-'})",
        "",
        "  Members:",
    ]
    for m in report.members:
        lines.append(f"    {m.index}. {m.detailed}  |  {m.simple}")
    lines.append("")
    lines.append(f"  {'Metric':<6} {'Level':<7} {'Mean %':>10}  Verdict")
    for row in report.metric_rows:
        mean = "n/a" if row.mean_delta is None else f"{row.mean_delta:+.1f}%"
        desc = METRIC_DESCRIPTIONS[row.metric]
        lines.append(
            f"  {row.metric:<6} {row.level:<7} {mean:>10}  {row.verdict:<12} {desc}"
        )
    lines.append("")
    return "\n".join(lines)


def cluster_members_csv(reports: list[ClusterReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["cluster", "index", "modification_id", "summary", "simple_summary"])
    for rep in reports:
        for m in rep.members:
            writer.writerow([rep.cluster_id, m.index, m.modification_id, m.detailed, m.simple])
    return buf.getvalue()


def cluster_metrics_csv(reports: list[ClusterReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["cluster", "metric", "level", "mean_delta_pct", "defined_members", "verdict"])
    for rep in reports:
        for row in rep.metric_rows:
            writer.writerow(
                [
                    rep.cluster_id,
                    row.metric,
                    row.level,
                    _fmt(row.mean_delta),
                    row.defined_members,
                    row.verdict,
                ]
            )
    return buf.getvalue()
