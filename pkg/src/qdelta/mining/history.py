"""Walk a local git clone and emit one record per (commit, matching
modified file) pair.

Commits are visited oldest-first in topological order. Merge commits
are diffed against their first parent only, so every record reflects
the mainline change. Renames surface as a deletion plus an addition,
keeping records keyed by filename.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator

from git import Repo
from git.exc import InvalidGitRepositoryError, NoSuchPathError

from ..diffs import make_unified_diff
from ..records import CommitFileRecord, RepositoryRef

logger = logging.getLogger(__name__)


class NotARepositoryError(Exception):
    pass


@dataclass
class MinerStats:
    commits_seen: int = 0
    records_emitted: int = 0
    files_skipped: int = 0
    skip_reasons: dict[str, int] = field(default_factory=dict)

    def skip(self, reason: str) -> None:
        self.files_skipped += 1
        self.skip_reasons[reason] = self.skip_reasons.get(reason, 0) + 1


def _decode_blob(blob) -> str | None:
    if blob is None:
        return ""
    try:
        return blob.data_stream.read().decode("utf-8")
    except (UnicodeDecodeError, OSError):
        return None


def repo_ref_for_path(path: str | Path, stars: int = 0, forks: int = 0) -> RepositoryRef:
    """Identity for a local clone: local/<directory-name>."""
    name = Path(path).resolve().name or "repo"
    return RepositoryRef(
        full_name=f"local/{name}", stars=stars, forks=forks, clone_url=str(path)
    )


def mine_commits(
    local_repo_path: str | Path,
    extension: str = ".java",
    repo_ref: RepositoryRef | None = None,
    stats: MinerStats | None = None,
) -> Iterator[CommitFileRecord]:
    """Yield a CommitFileRecord per modified file matching *extension*.

    The record's diff is re-derived from the two snapshots so that
    downstream splitting always sees one canonical unified-diff shape.
    """
    try:
        repo = Repo(str(local_repo_path))
    except (InvalidGitRepositoryError, NoSuchPathError) as exc:
        raise NotARepositoryError(f"{local_repo_path} is not a git repository") from exc
    if repo_ref is None:
        repo_ref = repo_ref_for_path(local_repo_path)
    if stats is None:
        stats = MinerStats()
    try:
        commits = list(repo.iter_commits(topo_order=True))
    except ValueError:
        return  # repository without any commit
    commits.reverse()
    for commit in commits:
        stats.commits_seen += 1
        parent = commit.parents[0] if commit.parents else None
        if parent is None:
            # root commit: every blob is an addition
            for blob in commit.tree.traverse():
                if blob.type != "blob" or not blob.path.endswith(extension):
                    continue
                after = _decode_blob(blob)
                if after is None:
                    stats.skip("undecodable")
                    logger.warning("skipping undecodable blob %s@%s", blob.path, commit.hexsha)
                    continue
                stats.records_emitted += 1
                yield CommitFileRecord(
                    sha=commit.hexsha,
                    filename=blob.path,
                    commit_message=commit.message.strip()
                    if isinstance(commit.message, str)
                    else commit.message.decode("utf-8", "replace").strip(),
                    code_before="",
                    code_after=after,
                    diff=make_unified_diff("", after, blob.path),
                    repo=repo_ref,
                )
            continue
        for change in parent.diff(commit):
            for rec in _records_for_change(change, commit, extension, repo_ref, stats):
                yield rec


def _records_for_change(change, commit, extension, repo_ref, stats) -> list[CommitFileRecord]:
    message = (
        commit.message.strip()
        if isinstance(commit.message, str)
        else commit.message.decode("utf-8", "replace").strip()
    )

    def build(filename: str, before: str | None, after: str | None) -> CommitFileRecord | None:
        if not filename.endswith(extension):
            return None
        if before is None or after is None:
            stats.skip("undecodable")
            logger.warning("skipping undecodable blob %s@%s", filename, commit.hexsha)
            return None
        if before == after:
            return None
        stats.records_emitted += 1
        return CommitFileRecord(
            sha=commit.hexsha,
            filename=filename,
            commit_message=message,
            code_before=before,
            code_after=after,
            diff=make_unified_diff(before, after, filename),
            repo=repo_ref,
        )

    records: list[CommitFileRecord] = []
    if change.renamed_file:
        # rename = delete old path + add new path
        old = build(change.rename_from, _decode_blob(change.a_blob), "")
        new = build(change.rename_to, "", _decode_blob(change.b_blob))
        records.extend(r for r in (old, new) if r)
        return records
    if change.new_file:
        rec = build(change.b_path, "", _decode_blob(change.b_blob))
    elif change.deleted_file:
        rec = build(change.a_path, _decode_blob(change.a_blob), "")
    else:
        rec = build(change.b_path or change.a_path, _decode_blob(change.a_blob), _decode_blob(change.b_blob))
    if rec:
        records.append(rec)
    return records
