"""Decompose a commit-file record into isolated modifications.

Each hunk of the record's diff becomes one modification whose after
state is the before file with only that hunk applied. A modification
whose isolated snapshots fail to parse is kept but flagged
``syntactic=False`` so the metric stages skip it.
"""
from __future__ import annotations

from .diffs import DiffParseError, apply_hunk, apply_hunks, parse_unified_diff
from .metrics import parse_entities
from .records import CommitFileRecord, Modification


class RecordSplitError(Exception):
    """The record's diff cannot be reconciled with its snapshots."""


def modification_id(sha: str, filename: str, hunk_index: int) -> str:
    return f"{sha}:{filename}:{hunk_index}"


def split_into_modifications(record: CommitFileRecord) -> list[Modification]:
    if record.code_before == record.code_after:
        return []
    try:
        hunks = parse_unified_diff(record.diff, record.code_before)
    except DiffParseError as exc:
        raise RecordSplitError(f"{record.sha}:{record.filename}: {exc}") from exc
    reconstructed = apply_hunks(record.code_before, hunks)
    if reconstructed != record.code_after:
        raise RecordSplitError(
            f"{record.sha}:{record.filename}: diff does not reproduce code_after"
        )
    mods: list[Modification] = []
    for idx, hunk in enumerate(hunks):
        isolated_after = apply_hunk(record.code_before, hunk)
        syntactic = _parses_cleanly(record.code_before) and _parses_cleanly(isolated_after)
        mods.append(
            Modification(
                id=modification_id(record.sha, record.filename, idx),
                record_ref={"sha": record.sha, "filename": record.filename},
                hunk=hunk,
                isolated_before=record.code_before,
                isolated_after=isolated_after,
                repo=record.repo,
                syntactic=syntactic,
            )
        )
    return mods


def _parses_cleanly(source: str) -> bool:
    return not parse_entities(source).errors
