"""Domain records shared by every pipeline stage.

Each record maps 1:1 onto a line of the JSONL artifacts, so the
``to_json``/``from_json`` pairs are the wire format. Field names are
part of the artifact contract; do not rename them casually.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class RepositoryRef:
    """Identity of a source repository plus the popularity counters
    used for corpus selection."""

    full_name: str
    stars: int
    forks: int
    clone_url: str

    def __post_init__(self) -> None:
        if not self.full_name or self.full_name.count("/") != 1:
            raise ValueError(f"full_name must be 'owner/name', got {self.full_name!r}")
        if self.stars < 0 or self.forks < 0:
            raise ValueError("stars and forks must be non-negative")

    def to_json(self) -> dict[str, Any]:
        return {
            "full_name": self.full_name,
            "stars": self.stars,
            "forks": self.forks,
            "clone_url": self.clone_url,
        }

    @classmethod
    def from_json(cls, raw: dict[str, Any]) -> "RepositoryRef":
        return cls(
            full_name=raw["full_name"],
            stars=int(raw["stars"]),
            forks=int(raw["forks"]),
            clone_url=raw["clone_url"],
        )


@dataclass(frozen=True)
class CommitFileRecord:
    """One modified file in one commit, with full before/after snapshots."""

    sha: str
    filename: str
    commit_message: str
    code_before: str
    code_after: str
    diff: str
    repo: RepositoryRef

    def to_json(self) -> dict[str, Any]:
        return {
            "sha": self.sha,
            "filename": self.filename,
            "commit_message": self.commit_message,
            "code_before": self.code_before,
            "code_after": self.code_after,
            "diff": self.diff,
            "repo": self.repo.to_json(),
        }

    @classmethod
    def from_json(cls, raw: dict[str, Any]) -> "CommitFileRecord":
        return cls(
            sha=raw["sha"],
            filename=raw["filename"],
            commit_message=raw["commit_message"],
            code_before=raw["code_before"],
            code_after=raw["code_after"],
            diff=raw["diff"],
            repo=RepositoryRef.from_json(raw["repo"]),
        )


@dataclass(frozen=True)
class Hunk:
    """A contiguous changed region of a file.

    ``old_start``/``new_start`` are 0-based line indices into the before
    and after files; the hunk replaces ``removed`` (``old_len`` lines at
    ``old_start``) with ``added``. Lines keep their trailing newline so
    application is byte-exact.
    """

    old_start: int
    old_len: int
    new_start: int
    new_len: int
    removed: tuple[str, ...]
    added: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.removed) != self.old_len or len(self.added) != self.new_len:
            raise ValueError("hunk lengths do not match line payloads")

    def to_json(self) -> dict[str, Any]:
        return {
            "old_start": self.old_start,
            "old_len": self.old_len,
            "new_start": self.new_start,
            "new_len": self.new_len,
            "removed": list(self.removed),
            "added": list(self.added),
        }

    @classmethod
    def from_json(cls, raw: dict[str, Any]) -> "Hunk":
        return cls(
            old_start=int(raw["old_start"]),
            old_len=int(raw["old_len"]),
            new_start=int(raw["new_start"]),
            new_len=int(raw["new_len"]),
            removed=tuple(raw["removed"]),
            added=tuple(raw["added"]),
        )


@dataclass(frozen=True)
class Modification:
    """One isolated change: a single hunk with the file state before it
    and the file state with only this hunk applied."""

    id: str
    record_ref: dict[str, str]  # {"sha": ..., "filename": ...}
    hunk: Hunk
    isolated_before: str
    isolated_after: str
    repo: RepositoryRef
    syntactic: bool = True

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "record_ref": dict(self.record_ref),
            "hunk": self.hunk.to_json(),
            "isolated_before": self.isolated_before,
            "isolated_after": self.isolated_after,
            "repo": self.repo.to_json(),
            "syntactic": self.syntactic,
        }

    @classmethod
    def from_json(cls, raw: dict[str, Any]) -> "Modification":
        return cls(
            id=raw["id"],
            record_ref=dict(raw["record_ref"]),
            hunk=Hunk.from_json(raw["hunk"]),
            isolated_before=raw["isolated_before"],
            isolated_after=raw["isolated_after"],
            repo=RepositoryRef.from_json(raw["repo"]),
            syntactic=bool(raw.get("syntactic", True)),
        )


@dataclass(frozen=True)
class ImpactVector:
    """Average percentage differences a modification induced, split into
    the method-level and class-level metric blocks.

    ``None`` marks an undefined component (no affected entity defined a
    delta for that metric). ``defined_mask`` mirrors that, method block
    first, in the canonical component order.
    """

    modification_id: str
    repo: str  # repository full_name
    method_deltas: tuple[float | None, ...]
    class_deltas: tuple[float | None, ...]
    affected_methods: int
    affected_classes: int

    def __post_init__(self) -> None:
        if len(self.method_deltas) != 18 or len(self.class_deltas) != 14:
            raise ValueError("impact vector must have 18 method + 14 class components")

    @property
    def components(self) -> tuple[float | None, ...]:
        return self.method_deltas + self.class_deltas

    @property
    def defined_mask(self) -> tuple[bool, ...]:
        return tuple(v is not None for v in self.components)

    def to_json(self) -> dict[str, Any]:
        return {
            "modification_id": self.modification_id,
            "repo": self.repo,
            "method_deltas": list(self.method_deltas),
            "class_deltas": list(self.class_deltas),
            "affected_methods": self.affected_methods,
            "affected_classes": self.affected_classes,
            "defined_mask": list(self.defined_mask),
        }

    @classmethod
    def from_json(cls, raw: dict[str, Any]) -> "ImpactVector":
        return cls(
            modification_id=raw["modification_id"],
            repo=raw["repo"],
            method_deltas=tuple(raw["method_deltas"]),
            class_deltas=tuple(raw["class_deltas"]),
            affected_methods=int(raw["affected_methods"]),
            affected_classes=int(raw["affected_classes"]),
        )


@dataclass(frozen=True)
class SummaryPair:
    """Detailed one-sentence summary plus its generalized short form."""

    modification_id: str
    detailed: str
    simple: str
    source: str  # "llm" | "fallback"

    def to_json(self) -> dict[str, Any]:
        return {
            "modification_id": self.modification_id,
            "detailed": self.detailed,
            "simple": self.simple,
            "source": self.source,
        }

    @classmethod
    def from_json(cls, raw: dict[str, Any]) -> "SummaryPair":
        return cls(
            modification_id=raw["modification_id"],
            detailed=raw["detailed"],
            simple=raw["simple"],
            source=raw["source"],
        )


@dataclass
class ClusterResult:
    """Outcome of one clustering run over the impact vectors."""

    k: int
    seed: int
    assignment: dict[str, int]  # modification_id -> cluster index
    centroids: list[list[float]]
    point_silhouette: dict[str, float]
    cluster_silhouette: dict[int, float]
    mean_silhouette: float
    retained: set[int] = field(default_factory=set)
    rejection_reasons: dict[int, list[str]] = field(default_factory=dict)

    def to_json(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "seed": self.seed,
            "assignment": dict(sorted(self.assignment.items())),
            "centroids": self.centroids,
            "point_silhouette": dict(sorted(self.point_silhouette.items())),
            "cluster_silhouette": {str(c): s for c, s in sorted(self.cluster_silhouette.items())},
            "mean_silhouette": self.mean_silhouette,
            "retained": sorted(self.retained),
            "rejection_reasons": {str(c): r for c, r in sorted(self.rejection_reasons.items())},
        }

    @classmethod
    def from_json(cls, raw: dict[str, Any]) -> "ClusterResult":
        return cls(
            k=int(raw["k"]),
            seed=int(raw["seed"]),
            assignment={m: int(c) for m, c in raw["assignment"].items()},
            centroids=[list(map(float, row)) for row in raw["centroids"]],
            point_silhouette={m: float(s) for m, s in raw["point_silhouette"].items()},
            cluster_silhouette={int(c): float(s) for c, s in raw["cluster_silhouette"].items()},
            mean_silhouette=float(raw["mean_silhouette"]),
            retained=set(int(c) for c in raw["retained"]),
            rejection_reasons={int(c): list(r) for c, r in raw["rejection_reasons"].items()},
        )
