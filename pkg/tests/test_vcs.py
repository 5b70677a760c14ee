import json

import pytest

from refaware.errors import LineOutOfRange, NotARepository, UnknownCommit, UnknownPathAtCommit, UnsupportedBackend
from refaware.vcs import GitRepository, HistoryBuilder, SyntheticRepository, open_repo


def small_history():
    return (
        HistoryBuilder()
        .commit("c1", {"A.java": ["a", "b", "c"]})
        .commit("c2", {"A.java": ["a", "B", "c", "d"]})
        .commit("c3", {"A.java": ["x", "a", "B", "c", "d"]})
        .build()
    )


def test_commits_and_ranges():
    repo = small_history()
    assert repo.commits() == ["c1", "c2", "c3"]
    assert repo.commits("c1..c3") == ["c2", "c3"]
    assert repo.commits("c3..c3") == []
    with pytest.raises(UnknownCommit):
        repo.commits("nope..c3")


def test_diff_of_root_commit_adds_everything():
    [fd] = small_history().file_diffs(None, "c1")
    assert fd.path_before is None and fd.lines_added == 3


def test_blame_follows_unchanged_lines():
    repo = small_history()
    assert repo.blame_line("c3", "A.java", 1).commit == "c3"
    assert repo.blame_line("c3", "A.java", 2).commit == "c1"
    b = repo.blame_line("c3", "A.java", 3)
    assert (b.commit, b.path, b.line) == ("c2", "A.java", 2)
    assert repo.blame_line("c3", "A.java", 5).commit == "c2"


def test_blame_through_file_rename():
    body = [f"line {i}" for i in range(10)]
    repo = (
        HistoryBuilder()
        .commit("c1", {"Old.java": body})
        .commit("c2", {"New.java": body}, delete=["Old.java"])
        .build()
    )
    [fd] = repo.file_diffs("c1", "c2")
    assert fd.is_rename and fd.edit_lists == ()
    b = repo.blame_line("c2", "New.java", 4)
    assert (b.commit, b.path, b.line) == ("c1", "Old.java", 4)


def test_errors():
    repo = small_history()
    with pytest.raises(UnknownCommit):
        repo.file_diffs("c1", "zzz")
    with pytest.raises(UnknownPathAtCommit):
        repo.read_file("c1", "B.java")
    with pytest.raises(LineOutOfRange):
        repo.blame_line("c1", "A.java", 4)
    with pytest.raises(UnsupportedBackend):
        SyntheticRepository({"commits": [{"id": "x", "parents": ["y"]}]})


def test_descriptor_roundtrip(tmp_path):
    repo = small_history()
    path = tmp_path / "history.json"
    path.write_text(json.dumps(repo.descriptor()))
    again = open_repo(path)
    assert again.descriptor() == repo.descriptor()
    assert "".join(again.diff("c1", "c2")) == "".join(repo.diff("c1", "c2"))


def test_open_repo_rejects_missing_and_plain_dirs(tmp_path):
    with pytest.raises(NotARepository):
        open_repo(tmp_path / "missing")
    with pytest.raises(NotARepository):
        open_repo(tmp_path)


def test_git_backend_matches_synthetic(git_repo):
    root, (g1, g2, g3) = git_repo([
        {"A.java": "a\nb\nc\n"},
        {"A.java": "a\nB\nc\nd\n"},
        {"A.java": "x\na\nB\nc\nd\n"},
    ])
    repo = open_repo(root)
    assert isinstance(repo, GitRepository)
    assert repo.commits() == [g1, g2, g3]
    assert repo.parents(g2) == (g1,)
    synth = small_history()
    for (gp, gc), (sp, sc) in [((g1, g2), ("c1", "c2")), ((g2, g3), ("c2", "c3"))]:
        # hunk section headers are git cosmetics; compare the changed lines
        def lines(fds):
            return [[(e.deleted(), e.added()) for e in fd.edit_lists] for fd in fds]

        assert lines(repo.file_diffs(gp, gc)) == lines(synth.file_diffs(sp, sc))
    b = repo.blame_line(g3, "A.java", 3)
    assert (b.commit, b.path, b.line) == (g2, "A.java", 2)
    assert repo.read_file(g1, "A.java").lines == ("a", "b", "c")
    with pytest.raises(UnknownCommit):
        repo.parents("f" * 40)


def test_git_backend_rename(git_repo):
    body = "".join(f"line {i}\n" for i in range(10))
    root, (g1, g2) = git_repo([{"Old.java": body}, {"Old.java": None, "New.java": body}])
    repo = open_repo(root)
    [fd] = repo.file_diffs(g1, g2)
    assert (fd.path_before, fd.path_after, fd.edit_lists) == ("Old.java", "New.java", ())
    b = repo.blame_line(g2, "New.java", 4)
    assert (b.commit, b.path) == (g1, "Old.java")
