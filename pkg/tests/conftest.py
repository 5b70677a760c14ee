import os
import subprocess

import pytest


def _git(cwd, *args):
    env = dict(
        os.environ,
        GIT_AUTHOR_NAME="Dev", GIT_AUTHOR_EMAIL="dev@example.org",
        GIT_COMMITTER_NAME="Dev", GIT_COMMITTER_EMAIL="dev@example.org",
        GIT_AUTHOR_DATE="2020-01-01T00:00:00Z", GIT_COMMITTER_DATE="2020-01-01T00:00:00Z",
    )
    out = subprocess.run(["git", *args], cwd=cwd, env=env, check=True, stdout=subprocess.PIPE, stderr=subprocess.PIPE)
    return out.stdout.decode().strip()


@pytest.fixture
def git_repo(tmp_path):
    """Factory: ``make(commits)`` where each commit is a {path: content or None} map."""

    def make(commits):
        root = tmp_path / "repo"
        root.mkdir()
        _git(root, "init", "-q", "-b", "main")
        ids = []
        for files in commits:
            for path, content in files.items():
                target = root / path
                if content is None:
                    target.unlink()
                    continue
                target.parent.mkdir(parents=True, exist_ok=True)
                target.write_text(content)
            _git(root, "add", "-A")
            _git(root, "commit", "-q", "-m", f"c{len(ids)}")
            ids.append(_git(root, "rev-parse", "HEAD"))
        return root, ids

    return make


# -- acceptance summary ---------------------------------------------------------

ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, text = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n:2d}: {text}")
