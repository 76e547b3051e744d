"""Unified-diff plumbing: generate, parse, and apply hunks.

Internally everything works on lists of lines that keep their trailing
newline (``splitlines(keepends=True)``) so that applying hunks is
byte-exact, including files without a final newline.
"""
from __future__ import annotations

import difflib
import re

from .records import Hunk

_HUNK_HEADER = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@")
_NO_EOL = "\\ No newline at end of file"


class DiffParseError(Exception):
    """Raised when a diff text cannot be interpreted as a unified diff."""


class PatchConflictError(Exception):
    """Raised when a hunk's removed lines do not match the target text."""

    def __init__(self, message: str, line: int):
        super().__init__(message)
        self.line = line  # first mismatching 1-based line number


def split_lines(text: str) -> list[str]:
    return text.splitlines(keepends=True)


def make_unified_diff(before: str, after: str, filename: str, context: int = 3) -> str:
    """Render the canonical unified diff between two file snapshots."""
    lines = difflib.unified_diff(
        split_lines(before),
        split_lines(after),
        fromfile=f"a/{filename}",
        tofile=f"b/{filename}",
        n=context,
    )
    out: list[str] = []
    for line in lines:
        if line.endswith("\n"):
            out.append(line)
        else:
            out.append(line + "\n" + _NO_EOL + "\n")
    return "".join(out)


def extract_hunks(before: str, after: str, context: int = 3) -> list[Hunk]:
    """Compute the changed regions between two snapshots.

    Changed runs closer than 2*context lines merge into one hunk, the
    same grouping a unified diff with that context would produce. The
    hunk payload covers the full region from the first to the last
    changed line of the group, so interior unchanged lines are carried
    in both ``removed`` and ``added``.
    """
    a = split_lines(before)
    b = split_lines(after)
    matcher = difflib.SequenceMatcher(None, a, b, autojunk=False)
    hunks: list[Hunk] = []
    for group in matcher.get_grouped_opcodes(context):
        changed = [op for op in group if op[0] != "equal"]
        if not changed:
            continue
        old_start, new_start = changed[0][1], changed[0][3]
        old_end, new_end = changed[-1][2], changed[-1][4]
        hunks.append(
            Hunk(
                old_start=old_start,
                old_len=old_end - old_start,
                new_start=new_start,
                new_len=new_end - new_start,
                removed=tuple(a[old_start:old_end]),
                added=tuple(b[new_start:new_end]),
            )
        )
    return hunks


def parse_unified_diff(diff: str, before: str) -> list[Hunk]:
    """Parse a unified diff against its before-text into trimmed hunks.

    Context lines inside each @@ block are verified against *before*
    and stripped from the edges, so the returned hunks carry only the
    changed region (plus any interior context a grouped diff keeps).
    """
    if not diff.strip():
        return []
    lines = diff.splitlines(keepends=True)
    i = 0
    while i < len(lines) and lines[i].startswith(("---", "+++", "diff ", "index ")):
        i += 1
    before_lines = split_lines(before)
    hunks: list[Hunk] = []
    while i < len(lines):
        m = _HUNK_HEADER.match(lines[i])
        if not m:
            if lines[i].strip() == "":
                i += 1
                continue
            raise DiffParseError(f"expected hunk header, got {lines[i]!r}")
        old_start_1 = int(m.group(1))
        old_len = int(m.group(2)) if m.group(2) is not None else 1
        new_start_1 = int(m.group(3))
        new_len = int(m.group(4)) if m.group(4) is not None else 1
        # unified diff is 1-based; a zero-length range names the line before
        old_start = old_start_1 - 1 if old_len > 0 else old_start_1
        new_start = new_start_1 - 1 if new_len > 0 else new_start_1
        i += 1
        ops: list[tuple[str, str]] = []
        while i < len(lines) and not _HUNK_HEADER.match(lines[i]):
            raw = lines[i]
            if raw.startswith("\\"):
                # no-newline marker: strip the newline we or git appended
                # to the previous payload line
                if ops:
                    tag, text = ops[-1]
                    ops[-1] = (tag, text.rstrip("\n"))
                i += 1
                continue
            # single-file diffs have no mid-stream headers, so a line
            # starting '---' here is a removed '--...' payload line
            tag, text = raw[0], raw[1:]
            if tag not in (" ", "-", "+"):
                if raw.strip() == "":
                    # some tools emit a bare newline for an empty context line
                    tag, text = " ", raw
                else:
                    raise DiffParseError(f"unexpected diff line {raw!r}")
            ops.append((tag, text))
            i += 1
        hunks.append(_trim_hunk(ops, old_start, new_start, before_lines))
    return hunks


def _trim_hunk(
    ops: list[tuple[str, str]], old_start: int, new_start: int, before_lines: list[str]
) -> Hunk:
    first = next((j for j, (tag, _) in enumerate(ops) if tag != " "), None)
    if first is None:
        raise DiffParseError("hunk contains no changes")
    last = max(j for j, (tag, _) in enumerate(ops) if tag != " ")
    lead = first  # leading context lines
    region_old = old_start + lead
    region_new = new_start + lead
    removed = tuple(t for tag, t in ops[first : last + 1] if tag in (" ", "-"))
    added = tuple(t for tag, t in ops[first : last + 1] if tag in (" ", "+"))
    for offset, text in enumerate(removed):
        idx = region_old + offset
        if idx >= len(before_lines) or before_lines[idx] != text:
            raise DiffParseError(
                f"diff does not match before-text at line {idx + 1}"
            )
    return Hunk(
        old_start=region_old,
        old_len=len(removed),
        new_start=region_new,
        new_len=len(added),
        removed=removed,
        added=added,
    )


def apply_hunk(before: str, hunk: Hunk, offset: int = 0) -> str:
    """Apply one hunk to a file snapshot.

    *offset* shifts the hunk's old coordinates, which callers use when
    replaying several hunks whose positions were computed against the
    original file.
    """
    lines = split_lines(before)
    start = hunk.old_start + offset
    if start < 0 or start + hunk.old_len > len(lines):
        raise PatchConflictError(
            f"hunk range {start + 1}..{start + hunk.old_len} outside file", start + 1
        )
    for j, expected in enumerate(hunk.removed):
        if lines[start + j] != expected:
            raise PatchConflictError(
                f"hunk context mismatch at line {start + j + 1}", start + j + 1
            )
    new_lines = lines[:start] + list(hunk.added) + lines[start + hunk.old_len :]
    return "".join(new_lines)


def apply_hunks(before: str, hunks: list[Hunk]) -> str:
    """Replay every hunk, in ascending old_start order, onto *before*."""
    text = before
    offset = 0
    for hunk in sorted(hunks, key=lambda h: h.old_start):
        text = apply_hunk(text, hunk, offset=offset)
        offset += hunk.new_len - hunk.old_len
    return text
