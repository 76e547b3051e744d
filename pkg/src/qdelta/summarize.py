"""Natural-language summaries for modifications.

Two-step remote path: ask the model for a one-sentence description of
the hunk, then ask it to generalize that sentence. The deterministic
fallback classifies the hunk by shape and never needs the network, so
the pipeline always finishes with some summary for every modification.
"""
from __future__ import annotations

import concurrent.futures
import logging
import os
import random
import re
import threading
import time
from dataclasses import dataclass, field
from importlib import resources

import requests

from .metrics import parse_entities
from .records import Modification, SummaryPair

logger = logging.getLogger(__name__)

DETAILED_LIMIT = 200
SIMPLE_LIMIT = 60

CATEGORY_IMPORTS = "Remove unused imports"
CATEGORY_NEW_METHODS = "Add new methods"
CATEGORY_CALL = "Changed method call"
CATEGORY_COMMENTS = "Updated comments"
CATEGORY_DEFAULT = "Modified code block"

_IMPORT_RE = re.compile(r"^\s*import\s+[\w.]+(\s*\.\s*\*)?\s*;\s*$")
_COMMENT_RE = re.compile(r"^\s*(//|/\*+|\*+/?|\*)")
_METHOD_DECL_RE = re.compile(
    r"^\s*(?:@\w+(?:\([^)]*\))?\s*)*"
    r"(?:(?:public|private|protected|static|final|abstract|synchronized|native)\s+)*"
    r"[\w<>\[\],.\s]+?\s+\w+\s*\([^)]*\)\s*(?:throws\s+[\w.,\s]+)?\s*\{?\s*$"
)


class SummaryInputError(ValueError):
    pass


@dataclass
class LlmConfig:
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model: str = "gpt-4"
    temperature: float = 0.0
    api_key_env: str = "QD_LLM_KEY"
    max_retries: int = 3
    timeout: float = 30.0
    max_in_flight: int = 4
    requests_per_second: float = 2.0


class TokenBucket:
    """Simple thread-safe rate limiter."""

    def __init__(self, rate: float, capacity: float | None = None):
        self.rate = rate
        self.capacity = capacity if capacity is not None else max(1.0, rate)
        self.tokens = self.capacity
        self.updated = time.monotonic()
        self.lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self.lock:
                now = time.monotonic()
                self.tokens = min(self.capacity, self.tokens + (now - self.updated) * self.rate)
                self.updated = now
                if self.tokens >= 1.0:
                    self.tokens -= 1.0
                    return
                wait = (1.0 - self.tokens) / self.rate
            time.sleep(wait)


class LlmClient:
    """Minimal chat-completion client with retry and rate limiting."""

    def __init__(self, config: LlmConfig, session: requests.Session | None = None):
        self.config = config
        self.session = session or requests.Session()
        self.bucket = TokenBucket(config.requests_per_second)

    def complete(self, prompt: str) -> str:
        key = os.environ.get(self.config.api_key_env, "")
        if not key:
            raise RuntimeError(f"missing API key in ${self.config.api_key_env}")
        payload = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature,
        }
        headers = {"Authorization": f"Bearer {key}"}
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries):
            self.bucket.acquire()
            try:
                resp = self.session.post(
                    self.config.endpoint,
                    json=payload,
                    headers=headers,
                    timeout=self.config.timeout,
                )
                if resp.status_code == 429 or resp.status_code >= 500:
                    raise RuntimeError(f"retryable status {resp.status_code}")
                resp.raise_for_status()
                data = resp.json()
                return data["choices"][0]["message"]["content"]
            except Exception as exc:  # noqa: BLE001 - every failure is retryable here
                last_error = exc
                logger.warning(
                    "summary request failed (attempt %d/%d): %s",
                    attempt + 1,
                    self.config.max_retries,
                    exc,
                )
                if attempt + 1 < self.config.max_retries:
                    time.sleep((2**attempt) + random.uniform(0, 0.5))
        raise RuntimeError(f"summary request failed after {self.config.max_retries} attempts: {last_error}")


def _load_prompt(name: str) -> str:
    return resources.files("qdelta.prompts").joinpath(name).read_text(encoding="utf-8")


def hunk_diff_text(mod: Modification) -> str:
    lines = ["-" + line.rstrip("\n") for line in mod.hunk.removed]
    lines += ["+" + line.rstrip("\n") for line in mod.hunk.added]
    return "\n".join(lines)


def _single_sentence(text: str, limit: int) -> str:
    text = " ".join(text.strip().split())
    for stop in (". ", "! ", "? "):
        cut = text.find(stop)
        if cut != -1:
            text = text[: cut + 1]
            break
    return text[:limit]


def enclosing_entity_name(mod: Modification) -> str:
    """Qualified name of the innermost before-entity the hunk touches,
    falling back to the file name."""
    tree = parse_entities(mod.isolated_before)
    lo = mod.hunk.old_start + 1
    hi = mod.hunk.old_start + max(mod.hunk.old_len, 1)
    best_name = None
    best_size = None
    for cls in tree.all_classes():
        candidates = [cls] + list(cls.methods)
        for node in candidates:
            if node.start_line <= hi and node.end_line >= lo:
                size = node.end_line - node.start_line
                if best_size is None or size < best_size:
                    best_size = size
                    best_name = node.qualified_name
    return best_name or mod.record_ref.get("filename", "file")


def categorize_hunk(mod: Modification) -> str:
    removed = [line.rstrip("\n") for line in mod.hunk.removed]
    added = [line.rstrip("\n") for line in mod.hunk.added]
    removed_only = [l for l in removed if l not in added]
    added_only = [l for l in added if l not in removed]
    changed = [l for l in removed_only + added_only if l.strip()]
    if not changed:
        return CATEGORY_DEFAULT
    if removed_only and not added_only and all(_IMPORT_RE.match(l) for l in removed_only if l.strip()):
        return CATEGORY_IMPORTS
    if all(_COMMENT_RE.match(l) for l in changed):
        return CATEGORY_COMMENTS
    if added_only and not removed_only and _looks_like_member_block(added_only):
        return CATEGORY_NEW_METHODS
    if len(removed_only) == 1 and len(added_only) == 1:
        if _is_call_token_substitution(removed_only[0], added_only[0]):
            return CATEGORY_CALL
    return CATEGORY_DEFAULT


def _looks_like_member_block(lines: list[str]) -> bool:
    stripped = [l for l in lines if l.strip()]
    if not any(_METHOD_DECL_RE.match(l) for l in stripped):
        return False
    opens = sum(l.count("{") for l in stripped)
    closes = sum(l.count("}") for l in stripped)
    return opens == closes and opens >= 1


_WORD_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*|\d+|\S")


def _is_call_token_substitution(before: str, after: str) -> bool:
    a = _WORD_RE.findall(before)
    b = _WORD_RE.findall(after)
    if len(a) != len(b):
        return False
    diffs = [i for i, (x, y) in enumerate(zip(a, b)) if x != y]
    if len(diffs) != 1:
        return False
    i = diffs[0]
    return i + 1 < len(a) and a[i + 1] == "(" and b[i + 1] == "("


def fallback_summarize(mod: Modification) -> SummaryPair:
    if not mod.hunk.removed and not mod.hunk.added:
        raise SummaryInputError(f"{mod.id}: empty hunk")
    category = categorize_hunk(mod)
    entity = enclosing_entity_name(mod)
    detailed = _single_sentence(f"{category} in {entity}.", DETAILED_LIMIT)
    simple = category[:SIMPLE_LIMIT]
    return SummaryPair(
        modification_id=mod.id, detailed=detailed, simple=simple, source="fallback"
    )


def summarize(
    mod: Modification,
    client: LlmClient | None = None,
    offline: bool = False,
) -> SummaryPair:
    """Two-step summary; falls back to the rule-based path when the
    remote model is unavailable."""
    if not mod.hunk.removed and not mod.hunk.added:
        raise SummaryInputError(f"{mod.id}: empty hunk")
    if offline or client is None:
        return fallback_summarize(mod)
    try:
        detailed_raw = client.complete(
            _load_prompt("detailed.txt").format(diff=hunk_diff_text(mod))
        )
        detailed = _single_sentence(detailed_raw, DETAILED_LIMIT)
        simple_raw = client.complete(_load_prompt("simple.txt").format(summary=detailed))
        simple = _single_sentence(simple_raw, SIMPLE_LIMIT)
        if not detailed or not simple:
            raise RuntimeError("model returned an empty summary")
        return SummaryPair(
            modification_id=mod.id, detailed=detailed, simple=simple, source="llm"
        )
    except Exception as exc:  # noqa: BLE001
        logger.warning("falling back to rule-based summary for %s: %s", mod.id, exc)
        return fallback_summarize(mod)


@dataclass
class SummarizeStats:
    llm: int = 0
    fallback: int = 0
    errors: list[str] = field(default_factory=list)


def summarize_all(
    mods: list[Modification],
    client: LlmClient | None = None,
    offline: bool = False,
    max_in_flight: int = 4,
) -> tuple[dict[str, SummaryPair], SummarizeStats]:
    """Summaries for every modification, keyed by id.

    Remote requests run on a small worker pool; results do not depend
    on completion order.
    """
    stats = SummarizeStats()
    out: dict[str, SummaryPair] = {}
    if offline or client is None:
        for mod in mods:
            out[mod.id] = fallback_summarize(mod)
            stats.fallback += 1
        return out, stats
    with concurrent.futures.ThreadPoolExecutor(max_workers=max_in_flight) as pool:
        futures = {pool.submit(summarize, mod, client): mod.id for mod in mods}
        for future in concurrent.futures.as_completed(futures):
            pair = future.result()
            out[pair.modification_id] = pair
            if pair.source == "llm":
                stats.llm += 1
            else:
                stats.fallback += 1
    return out, stats
