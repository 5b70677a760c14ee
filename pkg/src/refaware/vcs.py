"""Repository access: a git backend that shells out to ``git`` and an
in-memory synthetic backend driven by a JSON descriptor.

Synthetic descriptor schema::

    {"commits": [
        {"id": "c1", "parents": [], "message": "optional",
         "files": {"src/A.java": "full file content\\n", ...}},
        ...
    ]}

Commits are listed in topological order (parents first). ``files`` is the
complete tree snapshot at that commit; a path missing from the map does not
exist at that commit. Content may be a string or a list of lines (a list is
joined with newlines and gets a trailing newline).
"""
from __future__ import annotations

import difflib
import json
import subprocess
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path

from .diffcore import FileDiff, parse_unified_diff
from .errors import (
    LineOutOfRange,
    NotARepository,
    UnknownCommit,
    UnknownPathAtCommit,
    UnsupportedBackend,
)


@dataclass(frozen=True)
class FileVersion:
    commit: str
    path: str
    lines: tuple[str, ...]

    @property
    def text(self) -> str:
        return "\n".join(self.lines) + ("\n" if self.lines else "")


@dataclass(frozen=True)
class BlameResult:
    commit: str
    path: str
    line: int
    boundary: bool = False  # git marks lines older than the available history


def split_lines(text: str) -> list[str]:
    if not text:
        return []
    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()
    return lines


class Repository(ABC):
    backend: str = ""

    def __init__(self, first_parent: bool = True):
        self.first_parent_only = first_parent
        self.skipped: list[tuple[str | None, str, str]] = []
        self._diff_cache: dict[tuple, list[FileDiff]] = {}

    @abstractmethod
    def commits(self, rev_range: str | None = None) -> list[str]:
        """Commit ids in topological order, oldest first."""

    @abstractmethod
    def parents(self, commit: str) -> tuple[str, ...]:
        ...

    @abstractmethod
    def has_commit(self, commit: str) -> bool:
        ...

    @abstractmethod
    def diff(self, parent: str | None, child: str) -> list[str]:
        """Unified ``-U0`` diff text, one chunk per changed file.

        ``parent=None`` diffs against the empty tree.
        """

    @abstractmethod
    def blame_line(self, commit: str, path: str, line: int) -> BlameResult:
        ...

    @abstractmethod
    def read_file(self, commit: str, path: str) -> FileVersion:
        ...

    def first_parent(self, commit: str) -> str | None:
        ps = self.parents(commit)
        return ps[0] if ps else None

    def file_diffs(self, parent: str | None, child: str) -> list[FileDiff]:
        key = (parent, child)
        if key not in self._diff_cache:
            skipped: list[str] = []
            diffs = parse_unified_diff("".join(self.diff(parent, child)), skipped)
            for path in skipped:
                self.skipped.append((parent, child, path))
            self._diff_cache[key] = diffs
        return self._diff_cache[key]

    def _check_commit(self, commit):
        if commit is not None and not self.has_commit(commit):
            raise UnknownCommit(commit)


# -- synthetic backend --------------------------------------------------------


class SyntheticRepository(Repository):
    backend = "synthetic"

    def __init__(self, descriptor: dict, first_parent: bool = True):
        super().__init__(first_parent)
        self._order: list[str] = []
        self._parents: dict[str, tuple[str, ...]] = {}
        self._trees: dict[str, dict[str, str]] = {}
        self.messages: dict[str, str] = {}
        commits = descriptor.get("commits") if isinstance(descriptor, dict) else None
        if not isinstance(commits, list):
            raise UnsupportedBackend("descriptor has no 'commits' list")
        for entry in commits:
            cid = entry.get("id")
            if not cid or not isinstance(cid, str):
                raise UnsupportedBackend("commit without a string id")
            if cid in self._parents:
                raise UnsupportedBackend(f"duplicate commit id {cid!r}")
            parents = tuple(entry.get("parents", ()))
            for p in parents:
                if p not in self._parents:
                    raise UnsupportedBackend(f"commit {cid!r} lists unknown or later parent {p!r}")
            files = {}
            for path, content in entry.get("files", {}).items():
                if isinstance(content, list):
                    content = "\n".join(content) + "\n"
                files[path] = content
            self._order.append(cid)
            self._parents[cid] = parents
            self._trees[cid] = files
            self.messages[cid] = entry.get("message", "")

    def descriptor(self) -> dict:
        return {
            "commits": [
                {
                    "id": c,
                    "parents": list(self._parents[c]),
                    "message": self.messages[c],
                    "files": dict(self._trees[c]),
                }
                for c in self._order
            ]
        }

    def commits(self, rev_range=None):
        if rev_range is None:
            return list(self._order)
        start, _, end = rev_range.partition("..")
        for c in (start, end):
            if c and c not in self._parents:
                raise UnknownCommit(c)
        end = end or self._order[-1]
        reachable = self._ancestors(end)
        excluded = self._ancestors(start) if start else set()
        return [c for c in self._order if c in reachable and c not in excluded]

    def _ancestors(self, commit):
        seen, stack = set(), [commit]
        while stack:
            c = stack.pop()
            if c in seen:
                continue
            seen.add(c)
            stack.extend(self._parents[c])
        return seen

    def parents(self, commit):
        self._check_commit(commit)
        return self._parents[commit]

    def has_commit(self, commit):
        return commit in self._parents

    def tree(self, commit) -> dict[str, str]:
        self._check_commit(commit)
        return self._trees[commit]

    def read_file(self, commit, path):
        tree = self.tree(commit)
        if path not in tree:
            raise UnknownPathAtCommit(f"{path} at {commit}")
        return FileVersion(commit, path, tuple(split_lines(tree[path])))

    def diff(self, parent, child):
        self._check_commit(parent)
        self._check_commit(child)
        if parent == child:
            return []
        old = self._trees[parent] if parent is not None else {}
        new = self._trees[child]
        deleted = sorted(set(old) - set(new))
        added = sorted(set(new) - set(old))
        renames = _pair_renames(old, new, deleted, added)
        renamed_from = {a: d for d, a in renames}
        renamed_to = {d for d, _ in renames}

        chunks = []
        for path in sorted(set(old) | set(new)):
            if path in renamed_to:
                continue
            if path in renamed_from:
                src = renamed_from[path]
                chunks.append(_render_file(src, path, old[src], new[path], rename=True))
            elif path in old and path in new:
                if old[path] != new[path]:
                    chunks.append(_render_file(path, path, old[path], new[path]))
            elif path in new:
                chunks.append(_render_file(None, path, "", new[path]))
            else:
                chunks.append(_render_file(path, None, old[path], ""))
        return chunks

    def blame_line(self, commit, path, line):
        self._check_commit(commit)
        tree = self._trees[commit]
        if path not in tree:
            raise UnknownPathAtCommit(f"{path} at {commit}")
        n = len(split_lines(tree[path]))
        if not 1 <= line <= n:
            raise LineOutOfRange(f"{path}:{line} at {commit} (file has {n} lines)")
        while True:
            parent = self.first_parent(commit)
            if parent is None:
                return BlameResult(commit, path, line)
            fd = next((f for f in self.file_diffs(parent, commit) if f.path_after == path), None)
            if fd is None:
                commit = parent
                continue
            if fd.path_before is None:
                return BlameResult(commit, path, line)
            old_line = _map_to_parent(fd, line)
            if old_line is None:
                return BlameResult(commit, path, line)
            commit, path, line = parent, fd.path_before, old_line


def _map_to_parent(fd: FileDiff, line: int) -> int | None:
    """Line number in the before-file for an unchanged after-line, else None."""
    shift = 0
    for edit in fd.edit_lists:
        if line in edit.add_numbers:
            return None
        # end of the add run, exclusive, in after-file coordinates
        add_end = edit.add_start + len(edit.add_lines) if edit.add_lines else edit.add_start + 1
        if line >= add_end:
            shift += len(edit.del_lines) - len(edit.add_lines)
        else:
            break
    return line + shift


def _pair_renames(old, new, deleted, added):
    """Pair deleted and added paths whose content is at least 50% similar."""
    candidates = []
    for d in deleted:
        for a in added:
            if old[d] == new[a]:
                score = 1.0
            else:
                score = difflib.SequenceMatcher(None, old[d], new[a], autojunk=False).ratio()
            if score >= 0.5:
                candidates.append((-score, d, a))
    candidates.sort()
    used_d, used_a, pairs = set(), set(), []
    for neg, d, a in candidates:
        if d in used_d or a in used_a:
            continue
        used_d.add(d)
        used_a.add(a)
        pairs.append((d, a))
    return pairs


def _segments(text: str) -> list[str]:
    parts = text.split("\n")
    out = [p + "\n" for p in parts[:-1]]
    if parts[-1]:
        out.append(parts[-1])
    return out


def _render_file(before_path, after_path, old_text, new_text, rename=False) -> str:
    a = before_path if before_path is not None else after_path
    b = after_path if after_path is not None else before_path
    out = [f"diff --git a/{a} b/{b}\n"]
    if before_path is None:
        out.append("new file mode 100644\n")
    elif after_path is None:
        out.append("deleted file mode 100644\n")
    old_seg, new_seg = _segments(old_text), _segments(new_text)
    if rename:
        ratio = 100 if old_text == new_text else int(
            100 * difflib.SequenceMatcher(None, old_text, new_text, autojunk=False).ratio()
        )
        out.append(f"similarity index {ratio}%\nrename from {before_path}\nrename to {after_path}\n")
    if old_seg == new_seg:
        return "".join(out)
    out.append(f"--- {'a/' + before_path if before_path is not None else '/dev/null'}\n")
    out.append(f"+++ {'b/' + after_path if after_path is not None else '/dev/null'}\n")
    sm = difflib.SequenceMatcher(None, old_seg, new_seg, autojunk=False)
    for tag, i1, i2, j1, j2 in sm.get_opcodes():
        if tag == "equal":
            continue
        nd, na = i2 - i1, j2 - j1
        ds = i1 + 1 if nd else i1
        as_ = j1 + 1 if na else j1
        dspec = str(ds) if nd == 1 else f"{ds},{nd}"
        aspec = str(as_) if na == 1 else f"{as_},{na}"
        out.append(f"@@ -{dspec} +{aspec} @@\n")
        for seg in old_seg[i1:i2]:
            out.append(_body_line("-", seg))
        for seg in new_seg[j1:j2]:
            out.append(_body_line("+", seg))
    return "".join(out)


def _body_line(tag, seg):
    if seg.endswith("\n"):
        return tag + seg
    return tag + seg + "\n\\ No newline at end of file\n"


class HistoryBuilder:
    """Incrementally build a synthetic descriptor; unchanged files carry over."""

    def __init__(self):
        self._commits: list[dict] = []
        self._trees: dict[str, dict[str, str]] = {}

    def commit(self, cid, files=None, delete=(), parents=None, message=""):
        if parents is None:
            parents = [self._commits[-1]["id"]] if self._commits else []
        tree = dict(self._trees[parents[0]]) if parents else {}
        for path in delete:
            tree.pop(path, None)
        for path, content in (files or {}).items():
            if isinstance(content, (list, tuple)):
                content = "\n".join(content) + "\n"
            tree[path] = content
        self._trees[cid] = tree
        self._commits.append({"id": cid, "parents": list(parents), "message": message, "files": tree})
        return self

    def descriptor(self) -> dict:
        return {"commits": [dict(c, files=dict(c["files"])) for c in self._commits]}

    def build(self) -> SyntheticRepository:
        return SyntheticRepository(self.descriptor())


# -- git backend --------------------------------------------------------------


class GitRepository(Repository):
    backend = "git"

    def __init__(self, path, first_parent: bool = True, git: str = "git"):
        super().__init__(first_parent)
        self.path = str(path)
        self._git = git
        self._known: dict[str, bool] = {}
        self._empty_tree = None

    def _run(self, *args, check=True) -> bytes:
        cmd = [self._git, "-C", self.path, "-c", "core.quotepath=false", *args]
        proc = subprocess.run(cmd, stdout=subprocess.PIPE, stderr=subprocess.PIPE)
        if check and proc.returncode != 0:
            raise subprocess.CalledProcessError(proc.returncode, cmd, proc.stdout, proc.stderr)
        return proc.stdout

    def _text(self, *args) -> str:
        return self._run(*args).decode("utf-8", "replace")

    def has_commit(self, commit):
        if commit not in self._known:
            out = self._run("rev-parse", "--verify", "-q", f"{commit}^{{commit}}", check=False)
            self._known[commit] = bool(out.strip())
        return self._known[commit]

    def commits(self, rev_range=None):
        args = ["rev-list", "--topo-order", "--reverse"]
        if self.first_parent_only:
            args.append("--first-parent")
        try:
            out = self._text(*args, rev_range or "HEAD")
        except subprocess.CalledProcessError as exc:
            raise UnknownCommit(rev_range or "HEAD") from exc
        return out.split()

    def parents(self, commit):
        self._check_commit(commit)
        fields = self._text("rev-list", "--parents", "-n", "1", commit).split()
        return tuple(fields[1:])

    def empty_tree(self) -> str:
        if self._empty_tree is None:
            proc = subprocess.run(
                [self._git, "-C", self.path, "hash-object", "-t", "tree", "--stdin"],
                input=b"", stdout=subprocess.PIPE, check=True,
            )
            self._empty_tree = proc.stdout.decode().strip()
        return self._empty_tree

    def diff(self, parent, child):
        self._check_commit(parent)
        self._check_commit(child)
        if parent == child:
            return []
        base = parent if parent is not None else self.empty_tree()
        text = self._text(
            "diff", "-U0", "-M", "--no-color", "--no-ext-diff", "--src-prefix=a/", "--dst-prefix=b/",
            base, child,
        )
        chunks, current = [], []
        for line in text.splitlines(keepends=True):
            if line.startswith("diff --git ") and current:
                chunks.append("".join(current))
                current = []
            current.append(line)
        if current:
            chunks.append("".join(current))
        return chunks

    def read_file(self, commit, path):
        self._check_commit(commit)
        try:
            raw = self._run("show", f"{commit}:{path}")
        except subprocess.CalledProcessError as exc:
            raise UnknownPathAtCommit(f"{path} at {commit}") from exc
        return FileVersion(commit, path, tuple(split_lines(raw.decode("utf-8", "replace"))))

    def blame_line(self, commit, path, line):
        n = len(self.read_file(commit, path).lines)
        if not 1 <= line <= n:
            raise LineOutOfRange(f"{path}:{line} at {commit} (file has {n} lines)")
        args = ["blame", "--porcelain", "-L", f"{line},{line}"]
        if self.first_parent_only:
            args.append("--first-parent")
        out = self._text(*args, commit, "--", path).splitlines()
        sha, orig_line = out[0].split()[:2]
        filename, boundary = path, False
        for header in out[1:]:
            if header.startswith("\t"):
                break
            if header.startswith("filename "):
                filename = header[len("filename "):]
            elif header == "boundary":
                boundary = True
        return BlameResult(sha, filename, int(orig_line), boundary)


def open_repo(location, first_parent: bool = True) -> Repository:
    """Open a git working directory or a synthetic-history JSON descriptor."""
    if isinstance(location, dict):
        return SyntheticRepository(location, first_parent)
    path = Path(location)
    if not path.exists():
        raise NotARepository(str(location))
    if path.is_dir():
        proc = subprocess.run(
            ["git", "-C", str(path), "rev-parse", "--git-dir"],
            stdout=subprocess.PIPE, stderr=subprocess.PIPE,
        )
        if proc.returncode != 0:
            raise NotARepository(str(location))
        return GitRepository(path, first_parent)
    try:
        descriptor = json.loads(path.read_text(encoding="utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise UnsupportedBackend(f"{location}: not a synthetic-history descriptor") from exc
    return SyntheticRepository(descriptor, first_parent)


__all__ = [
    "BlameResult",
    "FileVersion",
    "GitRepository",
    "HistoryBuilder",
    "Repository",
    "SyntheticRepository",
    "open_repo",
    "split_lines",
]
