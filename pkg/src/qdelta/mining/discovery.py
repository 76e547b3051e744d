"""Candidate repository discovery through a code-hosting search API.

Talks to a GitHub-style ``/search/repositories`` endpoint, walks the
result pages, and keeps only repositories strictly above the star and
fork thresholds, ordered by descending stars.
"""
from __future__ import annotations

import logging
import os
import time

import requests

from ..records import RepositoryRef

logger = logging.getLogger(__name__)

DEFAULT_API_BASE = "https://api.github.com"
TOKEN_ENV = "QD_API_TOKEN"
PER_PAGE = 100


class ApiRequestError(Exception):
    """Network or auth failure after the retry budget is spent."""

    def __init__(self, message: str, attempts: int):
        super().__init__(f"{message} (after {attempts} attempts)")
        self.attempts = attempts


class ApiParseError(Exception):
    """The API answered with a payload missing an expected field."""

    def __init__(self, field: str):
        super().__init__(f"malformed API response: missing or invalid field {field!r}")
        self.field = field


def _get_with_retries(
    session: requests.Session,
    url: str,
    params: dict,
    max_retries: int = 4,
) -> dict:
    headers = {"Accept": "application/vnd.github+json"}
    token = os.environ.get(TOKEN_ENV, "")
    if token:
        headers["Authorization"] = f"Bearer {token}"
    last: Exception | None = None
    for attempt in range(max_retries):
        try:
            resp = session.get(url, params=params, headers=headers, timeout=30)
            if resp.status_code in (403, 429):
                reset = resp.headers.get("X-RateLimit-Reset")
                wait = 2**attempt
                if reset:
                    wait = max(wait, min(int(reset) - int(time.time()), 120))
                logger.warning("rate limited; backing off %ss", wait)
                time.sleep(wait)
                last = RuntimeError(f"rate limited (status {resp.status_code})")
                continue
            if resp.status_code == 401:
                raise ApiRequestError("authentication rejected", attempt + 1)
            resp.raise_for_status()
            return resp.json()
        except ApiRequestError:
            raise
        except Exception as exc:  # noqa: BLE001
            last = exc
            wait = 2**attempt
            logger.warning("search request failed (attempt %d): %s", attempt + 1, exc)
            time.sleep(wait)
    raise ApiRequestError(str(last), max_retries)


def _parse_repo(item: dict) -> RepositoryRef:
    for field in ("full_name", "stargazers_count", "forks_count", "clone_url"):
        if field not in item or item[field] is None:
            raise ApiParseError(field)
    try:
        return RepositoryRef(
            full_name=item["full_name"],
            stars=int(item["stargazers_count"]),
            forks=int(item["forks_count"]),
            clone_url=item["clone_url"],
        )
    except (TypeError, ValueError) as exc:
        raise ApiParseError(str(exc)) from exc


def discover_repositories(
    min_stars: int,
    min_forks: int,
    query_terms: list[str],
    limit: int,
    api_base: str = DEFAULT_API_BASE,
    session: requests.Session | None = None,
) -> list[RepositoryRef]:
    """Repositories with stars > min_stars and forks > min_forks, best
    match for *query_terms*, at most *limit*, ordered by stars desc."""
    if limit < 1:
        raise ValueError("limit must be >= 1")
    session = session or requests.Session()
    q_parts = list(query_terms)
    if min_stars > 0:
        q_parts.append(f"stars:>{min_stars}")
    if min_forks > 0:
        q_parts.append(f"forks:>{min_forks}")
    query = " ".join(q_parts) if q_parts else "stars:>=0"
    found: list[RepositoryRef] = []
    page = 1
    while len(found) < limit:
        data = _get_with_retries(
            session,
            f"{api_base}/search/repositories",
            {
                "q": query,
                "sort": "stars",
                "order": "desc",
                "per_page": PER_PAGE,
                "page": page,
            },
        )
        if "items" not in data:
            raise ApiParseError("items")
        items = data["items"]
        if not isinstance(items, list):
            raise ApiParseError("items")
        if not items:
            break
        for item in items:
            repo = _parse_repo(item)
            # the API query is advisory; the thresholds are enforced here
            if repo.stars > min_stars and repo.forks > min_forks:
                found.append(repo)
                if len(found) >= limit:
                    break
        page += 1
    found.sort(key=lambda r: (-r.stars, r.full_name))
    return found[:limit]
