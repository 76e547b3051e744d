"""Stage orchestration. Stages communicate only through the artifact
files in the output directory, so any completed prefix of the pipeline
can be resumed or rerun independently:

    commits.jsonl -> modifications.jsonl -> impacts.jsonl
                                          -> summaries.jsonl
    impacts.jsonl -> clusters.json -> report.txt / *.csv

Artifacts carry no timestamps; a rerun with unchanged inputs and the
same seed is byte-identical.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Any, Iterable, Iterator

from .cluster import evaluate_clusters, impute_matrix, select_k, standardize_columns
from .config import STAGES, PipelineConfig
from .impact import ModificationExcluded, filter_zero_impact, impact_of_modification
from .mining.history import MinerStats, mine_commits, repo_ref_for_path
from .records import ClusterResult, CommitFileRecord, ImpactVector, Modification, SummaryPair
from .report import (
    cluster_members_csv,
    cluster_metrics_csv,
    cluster_report_text,
    distributions_csv,
    export_distributions,
    render_cluster_report,
)
from .splitter import RecordSplitError, split_into_modifications
from .summarize import LlmClient, LlmConfig, summarize_all

logger = logging.getLogger(__name__)

ARTIFACTS = {
    "mine": ("commits.jsonl",),
    "split": ("modifications.jsonl",),
    "analyze": ("impacts.jsonl",),
    "summarize": ("summaries.jsonl",),
    "cluster": ("clusters.json",),
    "report": ("report.txt", "report_members.csv", "report_metrics.csv", "distributions.csv"),
}

_PRODUCER = {
    "commits.jsonl": "mine",
    "modifications.jsonl": "split",
    "impacts.jsonl": "analyze",
    "summaries.jsonl": "summarize",
    "clusters.json": "cluster",
}


class MissingArtifactError(Exception):
    def __init__(self, artifact: str):
        stage = _PRODUCER.get(artifact, "?")
        super().__init__(
            f"missing artifact {artifact}; run or enable the '{stage}' stage first"
        )
        self.artifact = artifact
        self.stage = stage


class PipelineLockedError(Exception):
    pass


class PipelineLock:
    """One pipeline process per output directory."""

    def __init__(self, out_dir: Path):
        self.path = out_dir / ".qd.lock"
        self._fd: int | None = None

    def __enter__(self) -> "PipelineLock":
        try:
            self._fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            os.write(self._fd, str(os.getpid()).encode())
        except FileExistsError:
            raise PipelineLockedError(
                f"another run holds {self.path}; remove it if stale"
            ) from None
        return self

    def __exit__(self, *exc) -> None:
        if self._fd is not None:
            os.close(self._fd)
            self.path.unlink(missing_ok=True)


def write_jsonl(path: Path, rows: Iterable[dict]) -> None:
    with path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False))
            fh.write("\n")


def _require(path: Path) -> Path:
    if not path.exists():
        raise MissingArtifactError(path.name)
    return path


def read_jsonl(path: Path) -> Iterator[dict]:
    _require(path)
    with path.open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)


# -- snapshot blob store -----------------------------------------------

def _store_snapshot(text: str, out_dir: Path, threshold: int) -> Any:
    data = text.encode("utf-8")
    if len(data) <= threshold:
        return text
    digest = hashlib.sha256(data).hexdigest()
    blob_dir = out_dir / "blobs"
    blob_dir.mkdir(parents=True, exist_ok=True)
    blob_path = blob_dir / digest
    if not blob_path.exists():
        blob_path.write_bytes(data)
    return {"$blob": digest}


def _load_snapshot(value: Any, out_dir: Path) -> str:
    if isinstance(value, dict) and "$blob" in value:
        return (out_dir / "blobs" / value["$blob"]).read_text(encoding="utf-8")
    return value


def dump_modification(mod: Modification, out_dir: Path, threshold: int) -> dict:
    raw = mod.to_json()
    raw["isolated_before"] = _store_snapshot(mod.isolated_before, out_dir, threshold)
    raw["isolated_after"] = _store_snapshot(mod.isolated_after, out_dir, threshold)
    return raw


def load_modification(raw: dict, out_dir: Path) -> Modification:
    raw = dict(raw)
    raw["isolated_before"] = _load_snapshot(raw["isolated_before"], out_dir)
    raw["isolated_after"] = _load_snapshot(raw["isolated_after"], out_dir)
    return Modification.from_json(raw)


# -- stages ------------------------------------------------------------

def stage_mine(config: PipelineConfig) -> MinerStats:
    stats = MinerStats()
    out = config.out_dir / "commits.jsonl"

    def rows() -> Iterator[dict]:
        for path in config.repos:
            ref = repo_ref_for_path(path)
            for record in mine_commits(path, config.extension, repo_ref=ref, stats=stats):
                yield record.to_json()

    write_jsonl(out, rows())
    logger.info(
        "mine: %d commits seen, %d records, %d skipped",
        stats.commits_seen,
        stats.records_emitted,
        stats.files_skipped,
    )
    return stats


def stage_split(config: PipelineConfig) -> int:
    inp = _require(config.out_dir / "commits.jsonl")
    out = config.out_dir / "modifications.jsonl"
    count = 0
    failed = 0

    def rows() -> Iterator[dict]:
        nonlocal count, failed
        for raw in read_jsonl(inp):
            record = CommitFileRecord.from_json(raw)
            try:
                mods = split_into_modifications(record)
            except RecordSplitError as exc:
                failed += 1
                logger.error("split: %s", exc)
                continue
            for mod in mods:
                count += 1
                yield dump_modification(mod, config.out_dir, config.blob_threshold_bytes)

    write_jsonl(out, rows())
    logger.info("split: %d modifications (%d records failed)", count, failed)
    return count


def stage_analyze(config: PipelineConfig) -> int:
    vectors: list[ImpactVector] = []
    excluded: dict[str, int] = {}
    for raw in read_jsonl(config.out_dir / "modifications.jsonl"):
        mod = load_modification(raw, config.out_dir)
        try:
            vectors.append(impact_of_modification(mod))
        except ModificationExcluded as exc:
            excluded[exc.reason] = excluded.get(exc.reason, 0) + 1
    retained = filter_zero_impact(vectors)
    retained.sort(key=lambda v: v.modification_id)
    write_jsonl(config.out_dir / "impacts.jsonl", (v.to_json() for v in retained))
    logger.info(
        "analyze: %d vectors, %d retained after zero-impact filter, excluded=%s",
        len(vectors),
        len(retained),
        excluded,
    )
    return len(retained)


def stage_summarize(config: PipelineConfig) -> int:
    mods = [
        load_modification(raw, config.out_dir)
        for raw in read_jsonl(config.out_dir / "modifications.jsonl")
    ]
    client = None
    if not config.offline:
        client = LlmClient(
            LlmConfig(
                endpoint=config.llm_endpoint,
                model=config.llm_model,
                temperature=config.llm_temperature,
            )
        )
    pairs, stats = summarize_all(mods, client=client, offline=config.offline)
    ordered = [pairs[mid] for mid in sorted(pairs)]
    write_jsonl(config.out_dir / "summaries.jsonl", (p.to_json() for p in ordered))
    logger.info("summarize: %d llm, %d fallback", stats.llm, stats.fallback)
    return len(ordered)


def stage_cluster(config: PipelineConfig) -> ClusterResult:
    vectors = [
        ImpactVector.from_json(raw) for raw in read_jsonl(config.out_dir / "impacts.jsonl")
    ]
    n = len(vectors)
    if n < 3:
        raise RuntimeError(f"clustering needs at least 3 impact vectors, have {n}")
    matrix = impute_matrix(vectors)
    if config.standardize:
        matrix = standardize_columns(matrix)
    k_min = config.k_min if config.k_min is not None else 2
    k_max = config.k_max if config.k_max is not None else min(50, n // 5)
    k_max = min(k_max, n - 1)
    k_min = max(2, min(k_min, k_max))
    ids = [v.modification_id for v in vectors]
    result = select_k(matrix, ids, k_min, k_max, restarts=config.restarts, seed=config.seed)
    repo_of = {v.modification_id: v.repo for v in vectors}
    evaluate_clusters(result, repo_of)
    (config.out_dir / "clusters.json").write_text(
        json.dumps(result.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    logger.info(
        "cluster: k=%d mean silhouette %.4f, retained %d/%d",
        result.k,
        result.mean_silhouette,
        len(result.retained),
        result.k,
    )
    return result


def stage_report(config: PipelineConfig) -> list[int]:
    impacts = {
        raw["modification_id"]: ImpactVector.from_json(raw)
        for raw in read_jsonl(config.out_dir / "impacts.jsonl")
    }
    summaries_path = config.out_dir / "summaries.jsonl"
    summaries: dict[str, SummaryPair] = {}
    if summaries_path.exists():
        summaries = {
            raw["modification_id"]: SummaryPair.from_json(raw)
            for raw in read_jsonl(summaries_path)
        }
    clusters_path = config.out_dir / "clusters.json"
    if not clusters_path.exists():
        raise MissingArtifactError("clusters.json")
    result = ClusterResult.from_json(json.loads(clusters_path.read_text(encoding="utf-8")))
    # report retained clusters from the strongest silhouette down
    ordered = sorted(result.retained, key=lambda c: (-result.cluster_silhouette[c], c))
    reports = [render_cluster_report(c, result, impacts, summaries) for c in ordered]
    text = [
        f"Retained clusters: {len(ordered)} of {result.k}"
        f" (mean silhouette {result.mean_silhouette:.4f}, seed {result.seed})",
        "",
    ]
    for rep in reports:
        text.append(cluster_report_text(rep))
    rejected = sorted(result.rejection_reasons)
    if rejected:
        text.append("Rejected clusters:")
        for c in rejected:
            reasons = "; ".join(result.rejection_reasons[c])
            text.append(f"  cluster {c}: {reasons}")
        text.append("")
    (config.out_dir / "report.txt").write_text("\n".join(text), encoding="utf-8")
    (config.out_dir / "report_members.csv").write_text(
        cluster_members_csv(reports), encoding="utf-8"
    )
    (config.out_dir / "report_metrics.csv").write_text(
        cluster_metrics_csv(reports), encoding="utf-8"
    )
    rows = export_distributions(list(impacts.values())) if impacts else []
    (config.out_dir / "distributions.csv").write_text(
        distributions_csv(rows), encoding="utf-8"
    )
    return [rep.cluster_id for rep in reports]


_STAGE_FUNCTIONS = {
    "mine": stage_mine,
    "split": stage_split,
    "analyze": stage_analyze,
    "summarize": stage_summarize,
    "cluster": stage_cluster,
    "report": stage_report,
}


def run_pipeline(config: PipelineConfig) -> dict[str, Any]:
    """Run every enabled stage in pipeline order under the directory lock."""
    config.out_dir.mkdir(parents=True, exist_ok=True)
    results: dict[str, Any] = {}
    with PipelineLock(config.out_dir):
        for stage in STAGES:
            if stage not in config.stages:
                continue
            logger.info("running stage %s", stage)
            results[stage] = _STAGE_FUNCTIONS[stage](config)
    return results
