from __future__ import annotations

import sys
from pathlib import Path

import pytest
from git import Repo

sys.path.insert(0, str(Path(__file__).parent))

from fixture_repos import ALPHA_COMMITS, BETA_COMMITS  # noqa: E402

_BASE_EPOCH = 1700000000


def build_repo(path: Path, commits) -> Repo:
    """Replay a commit list with pinned identity and timestamps so the
    resulting SHAs are identical on every run."""
    path.mkdir(parents=True, exist_ok=True)
    repo = Repo.init(path, initial_branch="main")
    repo.git.update_environment(
        GIT_AUTHOR_NAME="Fixture Author",
        GIT_AUTHOR_EMAIL="fixture@example.invalid",
        GIT_COMMITTER_NAME="Fixture Author",
        GIT_COMMITTER_EMAIL="fixture@example.invalid",
    )
    for i, (message, files) in enumerate(commits):
        for name, content in files.items():
            target = path / name
            if content is None:
                target.unlink()
            elif isinstance(content, bytes):
                target.write_bytes(content)
            else:
                target.write_text(content, encoding="utf-8")
        repo.git.add("-A")
        stamp = f"{_BASE_EPOCH + i * 60} +0000"
        repo.git.update_environment(GIT_AUTHOR_DATE=stamp, GIT_COMMITTER_DATE=stamp)
        repo.git.commit("-m", message, "--allow-empty")
    return repo


@pytest.fixture(scope="session")
def alpha_repo(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("fixture") / "alpha"
    build_repo(path, ALPHA_COMMITS)
    return path


@pytest.fixture(scope="session")
def beta_repo(tmp_path_factory) -> Path:
    path = tmp_path_factory.mktemp("fixture") / "beta"
    build_repo(path, BETA_COMMITS)
    return path
