import pytest
from git import Repo

from conftest import build_repo
from qdelta.diffs import apply_hunks, parse_unified_diff
from qdelta.mining.discovery import (
    ApiParseError,
    ApiRequestError,
    discover_repositories,
)
from qdelta.mining.history import (
    MinerStats,
    NotARepositoryError,
    mine_commits,
)


def item(full_name, stars, forks):
    return {
        "full_name": full_name,
        "stargazers_count": stars,
        "forks_count": forks,
        "clone_url": f"https://example.invalid/{full_name}.git",
    }


# star/fork counts for real popular repositories in the subject domain
CANDIDATES = [
    item("TeamNewPipe/NewPipe", 25292, 2764),
    item("CarGuo/GSYVideoPlayer", 18991, 4086),
    item("LuckSiege/PictureSelector", 12697, 2935),
    item("zhihu/Matisse", 12444, 2080),
    item("lipangit/JiaoZiVideoPlayer", 10458, 2437),
    item("bytedeco/javacv", 6896, 1559),
    item("react-native-video/react-native-video", 6686, 2758),
    item("648540858/wvp-GB28181-pro", 3650, 1146),
    item("GoogleCloudPlatform/java-docs-samples", 1608, 2827),
    item("RameshMF/spring-boot-tutorial", 1452, 1677),
    item("tiny/one-star-demo", 1001, 4),
    item("other/low-stars", 400, 2400),
]


class FakeApi:
    def __init__(self, items, status_plan=None):
        self.items = items
        self.status_plan = list(status_plan or [])
        self.calls = 0

    def get(self, url, params=None, headers=None, timeout=None):
        self.calls += 1
        status = self.status_plan.pop(0) if self.status_plan else 200
        return _Resp(status, self._page(params) if status == 200 else {})

    def _page(self, params):
        page = params.get("page", 1)
        per = params["per_page"]
        start = (page - 1) * per
        return {"items": self.items[start : start + per]}


class _Resp:
    def __init__(self, status, payload):
        self.status_code = status
        self._payload = payload
        self.headers = {}

    def raise_for_status(self):
        if self.status_code >= 400:
            raise RuntimeError(f"status {self.status_code}")

    def json(self):
        return self._payload


class TestDiscovery:
    def test_thresholds_are_strict_and_ordering_by_stars(self):
        api = FakeApi(CANDIDATES)
        repos = discover_repositories(1000, 1000, ["video"], 10, session=api)
        names = [r.full_name for r in repos]
        assert "CarGuo/GSYVideoPlayer" in names
        assert "RameshMF/spring-boot-tutorial" in names  # both strictly above 1000
        assert "tiny/one-star-demo" not in names  # forks too low
        assert "other/low-stars" not in names  # stars too low
        stars = [r.stars for r in repos]
        assert stars == sorted(stars, reverse=True)
        gsy = next(r for r in repos if r.full_name == "CarGuo/GSYVideoPlayer")
        assert (gsy.stars, gsy.forks) == (18991, 4086)

    def test_zero_thresholds_pass_first_five(self):
        api = FakeApi(CANDIDATES)
        repos = discover_repositories(0, 0, [], 5, session=api)
        assert len(repos) == 5

    def test_boundary_equal_to_threshold_is_rejected(self):
        api = FakeApi([item("x/edge", 1000, 5000), item("x/above", 1001, 1001)])
        repos = discover_repositories(1000, 1000, [], 10, session=api)
        assert [r.full_name for r in repos] == ["x/above"]

    def test_limit_caps_results(self):
        api = FakeApi(CANDIDATES)
        repos = discover_repositories(0, 0, [], 3, session=api)
        assert len(repos) == 3

    def test_retry_then_success_counts_attempts(self, monkeypatch):
        monkeypatch.setattr("time.sleep", lambda s: None)
        api = FakeApi(CANDIDATES, status_plan=[500, 200])
        repos = discover_repositories(0, 0, [], 2, session=api)
        assert len(repos) == 2
        assert api.calls == 2

    def test_exhausted_retries_raise_with_attempt_count(self, monkeypatch):
        monkeypatch.setattr("time.sleep", lambda s: None)
        api = FakeApi(CANDIDATES, status_plan=[500, 500, 500, 500])
        with pytest.raises(ApiRequestError) as exc:
            discover_repositories(0, 0, [], 2, session=api)
        assert exc.value.attempts == 4

    def test_malformed_item_names_the_offending_field(self):
        bad = [dict(item("a/b", 10, 10))]
        del bad[0]["forks_count"]
        api = FakeApi(bad)
        with pytest.raises(ApiParseError) as exc:
            discover_repositories(0, 0, [], 1, session=api)
        assert exc.value.field == "forks_count"

    def test_missing_items_key_is_a_parse_error(self):
        class NoItems(FakeApi):
            def _page(self, params):
                return {"total_count": 0}

        with pytest.raises(ApiParseError) as exc:
            discover_repositories(0, 0, [], 1, session=NoItems([]))
        assert exc.value.field == "items"


MINI_COMMITS = [
    ("add A", {"A.java": "class A {\n    int x;\n}\n"}),
    ("docs", {"README.md": "hello\n"}),
    ("change A", {"A.java": "class A {\n    int x;\n    int y;\n}\n"}),
]


class TestMineCommits:
    def test_mini_repo_two_java_touches_two_records(self, tmp_path):
        build_repo(tmp_path / "mini", MINI_COMMITS)
        stats = MinerStats()
        records = list(mine_commits(tmp_path / "mini", ".java", stats=stats))
        assert len(records) == 2
        assert stats.commits_seen == 3
        assert stats.records_emitted == 2
        assert records[0].code_before == ""
        assert records[0].code_after == "class A {\n    int x;\n}\n"
        assert records[1].commit_message == "change A"

    def test_records_are_in_history_order_with_full_snapshots(self, tmp_path):
        build_repo(tmp_path / "mini", MINI_COMMITS)
        first, second = list(mine_commits(tmp_path / "mini", ".java"))
        assert first.code_after == second.code_before

    def test_diff_applies_to_before_giving_after(self, tmp_path):
        build_repo(tmp_path / "mini", MINI_COMMITS)
        for record in mine_commits(tmp_path / "mini", ".java"):
            hunks = parse_unified_diff(record.diff, record.code_before)
            assert apply_hunks(record.code_before, hunks) == record.code_after

    def test_empty_repository_yields_nothing(self, tmp_path):
        Repo.init(tmp_path / "empty")
        assert list(mine_commits(tmp_path / "empty", ".java")) == []

    def test_not_a_repository_is_fatal(self, tmp_path):
        (tmp_path / "plain").mkdir()
        with pytest.raises(NotARepositoryError):
            list(mine_commits(tmp_path / "plain", ".java"))

    def test_binary_java_file_is_skipped_with_counter(self, tmp_path):
        commits = [
            ("add binary", {"B.java": b"\x00\xff\x80bin", "ok.txt": "t\n"}),
            ("modify binary", {"B.java": b"\x00\xff\x81bin2"}),
        ]
        build_repo(tmp_path / "bin", commits)
        stats = MinerStats()
        records = list(mine_commits(tmp_path / "bin", ".java", stats=stats))
        assert records == []
        assert stats.files_skipped == 2
        assert stats.skip_reasons["undecodable"] == 2

    def test_rename_is_delete_plus_add(self, tmp_path):
        content = "class R {\n    int a;\n}\n"
        commits = [
            ("add", {"Old.java": content}),
            ("rename", {"Old.java": None, "New.java": content}),
        ]
        build_repo(tmp_path / "ren", commits)
        records = list(mine_commits(tmp_path / "ren", ".java"))
        by_msg = [r for r in records if r.commit_message == "rename"]
        assert {(r.filename, r.code_before == "", r.code_after == "") for r in by_msg} == {
            ("Old.java", False, True),
            ("New.java", True, False),
        }

    def test_merge_commit_diffs_against_first_parent_only(self, tmp_path):
        path = tmp_path / "merge"
        repo = build_repo(path, [("base", {"M.java": "class M {\n}\n"})])
        repo.git.checkout("-b", "side")
        (path / "M.java").write_text("class M {\n    int side;\n}\n")
        repo.git.add("-A")
        repo.git.update_environment(
            GIT_AUTHOR_DATE="1700001000 +0000", GIT_COMMITTER_DATE="1700001000 +0000"
        )
        repo.git.commit("-m", "side change")
        repo.git.checkout("main")
        repo.git.update_environment(
            GIT_AUTHOR_DATE="1700002000 +0000", GIT_COMMITTER_DATE="1700002000 +0000"
        )
        repo.git.merge("side", "--no-ff", "-m", "merge side")
        records = list(mine_commits(path, ".java"))
        merge_records = [r for r in records if r.commit_message == "merge side"]
        # against the first parent (main), the merge introduces the side change
        assert len(merge_records) == 1
        assert "int side;" in merge_records[0].code_after
        assert "int side;" not in merge_records[0].code_before

    def test_fixture_corpus_counters_match_ground_truth(self, alpha_repo):
        stats = MinerStats()
        records = list(mine_commits(alpha_repo, ".java", stats=stats))
        assert stats.commits_seen == 14
        assert stats.records_emitted == len(records) == 14
        assert stats.files_skipped == 1
