"""Corpus construction: repository discovery and commit-history mining."""

from .discovery import ApiParseError, ApiRequestError, discover_repositories
from .history import MinerStats, mine_commits

__all__ = [
    "ApiParseError",
    "ApiRequestError",
    "discover_repositories",
    "MinerStats",
    "mine_commits",
]
