import pytest

from qdelta.diffs import apply_hunks, make_unified_diff
from qdelta.records import CommitFileRecord, RepositoryRef
from qdelta.splitter import RecordSplitError, split_into_modifications

REPO = RepositoryRef("test/fixture", 0, 0, "/tmp/fixture")


def record(before: str, after: str, filename="A.java", sha="deadbeef") -> CommitFileRecord:
    return CommitFileRecord(
        sha=sha,
        filename=filename,
        commit_message="msg",
        code_before=before,
        code_after=after,
        diff=make_unified_diff(before, after, filename),
        repo=REPO,
    )


IMPORTS_BEFORE = """\
package app;

import android.animation.ObjectAnimator;
import android.animation.ValueAnimator;
import android.animation.ValueAnimator.AnimatorUpdateListener;

public class Player {

    public void start() {
    }
}
"""

IMPORTS_AFTER = IMPORTS_BEFORE.replace(
    """import android.animation.ObjectAnimator;
import android.animation.ValueAnimator;
import android.animation.ValueAnimator.AnimatorUpdateListener;
""",
    "",
)


def test_import_removal_is_exactly_one_modification():
    mods = split_into_modifications(record(IMPORTS_BEFORE, IMPORTS_AFTER))
    assert len(mods) == 1
    mod = mods[0]
    assert mod.hunk.old_len == 3
    assert all(line.startswith("import ") for line in mod.hunk.removed)
    assert mod.hunk.added == ()
    assert mod.isolated_after == IMPORTS_AFTER
    assert mod.syntactic


def test_identical_snapshots_yield_no_modifications():
    text = "public class A {\n}\n"
    assert split_into_modifications(record(text, text)) == []


TWO_HUNK_BEFORE = "".join(
    [
        "public class Big {\n",
        "    int a() {\n",
        "        return 1;\n",
        "    }\n",
        "\n",
        "    // filler one\n",
        "    // filler two\n",
        "    // filler three\n",
        "    // filler four\n",
        "    // filler five\n",
        "    // filler six\n",
        "    // filler seven\n",
        "\n",
        "    int b() {\n",
        "        return 2;\n",
        "    }\n",
        "}\n",
    ]
)

TWO_HUNK_AFTER = TWO_HUNK_BEFORE.replace("return 1;", "return 10;").replace(
    "return 2;", "return 20;"
)


class TestTwoHunkRecord:
    def test_splits_into_two_modifications(self):
        mods = split_into_modifications(record(TWO_HUNK_BEFORE, TWO_HUNK_AFTER))
        assert len(mods) == 2

    def test_sequential_application_reproduces_code_after(self):
        mods = split_into_modifications(record(TWO_HUNK_BEFORE, TWO_HUNK_AFTER))
        assert apply_hunks(TWO_HUNK_BEFORE, [m.hunk for m in mods]) == TWO_HUNK_AFTER

    def test_isolation_each_after_state_contains_only_its_hunk(self):
        mods = split_into_modifications(record(TWO_HUNK_BEFORE, TWO_HUNK_AFTER))
        assert "return 10;" in mods[0].isolated_after
        assert "return 2;" in mods[0].isolated_after  # second hunk not applied
        assert "return 1;" in mods[1].isolated_before
        assert "return 20;" in mods[1].isolated_after

    def test_isolation_lines_outside_the_hunk_are_untouched(self):
        mods = split_into_modifications(record(TWO_HUNK_BEFORE, TWO_HUNK_AFTER))
        for mod in mods:
            before_lines = mod.isolated_before.splitlines(keepends=True)
            after_lines = mod.isolated_after.splitlines(keepends=True)
            h = mod.hunk
            assert before_lines[: h.old_start] == after_lines[: h.new_start]
            assert before_lines[h.old_start + h.old_len :] == after_lines[h.new_start + h.new_len :]

    def test_ids_are_deterministic_and_distinct(self):
        first = split_into_modifications(record(TWO_HUNK_BEFORE, TWO_HUNK_AFTER))
        second = split_into_modifications(record(TWO_HUNK_BEFORE, TWO_HUNK_AFTER))
        assert [m.id for m in first] == [m.id for m in second]
        assert first[0].id != first[1].id
        assert [m.to_json() for m in first] == [m.to_json() for m in second]


def test_added_file_is_one_whole_file_modification():
    after = "public class New {\n}\n"
    mods = split_into_modifications(record("", after))
    assert len(mods) == 1
    assert mods[0].isolated_before == ""
    assert mods[0].isolated_after == after


def test_deleted_file_is_one_whole_file_modification():
    before = "public class Old {\n}\n"
    mods = split_into_modifications(record(before, ""))
    assert len(mods) == 1
    assert mods[0].isolated_after == ""


def test_unbalanced_result_is_flagged_not_syntactic():
    before = "public class A {\n    int x;\n}\n"
    after = "public class A {\n    int x;\n}\n}\n"
    mods = split_into_modifications(record(before, after))
    assert len(mods) == 1
    assert not mods[0].syntactic


def test_garbage_diff_is_a_fatal_record_error():
    rec = CommitFileRecord(
        sha="s",
        filename="A.java",
        commit_message="m",
        code_before="a\n",
        code_after="b\n",
        diff="not a diff @@ nonsense",
        repo=REPO,
    )
    with pytest.raises(RecordSplitError):
        split_into_modifications(rec)


def test_diff_not_matching_snapshots_is_a_fatal_record_error():
    good = record("a\n", "b\n")
    rec = CommitFileRecord(
        sha="s",
        filename="A.java",
        commit_message="m",
        code_before="a\n",
        code_after="DIFFERENT\n",
        diff=good.diff,
        repo=REPO,
    )
    with pytest.raises(RecordSplitError):
        split_into_modifications(rec)
