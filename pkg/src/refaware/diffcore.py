"""Parse zero-context unified diffs into edit-lists.

An edit-list is one contiguous run of deleted lines together with the
contiguous run of added lines that replaces it. With ``-U0`` every hunk is
exactly one edit-list, so the hunk header gives both start positions.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import MalformedDiff

NO_NEWLINE_MARKER = "\\ No newline at end of file"

_HUNK_RE = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@(.*)$")
_GIT_HEADER_RE = re.compile(r"^diff --git (.+)$")


@dataclass(frozen=True)
class EditList:
    """A run of deleted lines and the run of added lines replacing it.

    Starts follow the hunk-header convention: when a side is empty its start
    names the line *before* the insertion/removal point.
    """

    del_start: int
    del_lines: tuple[str, ...]
    add_start: int
    add_lines: tuple[str, ...]
    del_no_newline: bool = False
    add_no_newline: bool = False
    section: str = ""

    def __post_init__(self):
        if not self.del_lines and not self.add_lines:
            raise ValueError("edit-list with neither deleted nor added lines")

    @property
    def del_numbers(self) -> range:
        return range(self.del_start, self.del_start + len(self.del_lines)) if self.del_lines else range(0)

    @property
    def add_numbers(self) -> range:
        return range(self.add_start, self.add_start + len(self.add_lines)) if self.add_lines else range(0)

    def deleted(self):
        """(line number, text) for each deleted line."""
        return list(zip(self.del_numbers, self.del_lines))

    def added(self):
        return list(zip(self.add_numbers, self.add_lines))


@dataclass(frozen=True)
class FileDiff:
    path_before: str | None
    path_after: str | None
    edit_lists: tuple[EditList, ...] = ()
    binary: bool = False
    similarity: int | None = None

    def __post_init__(self):
        if self.path_before is None and self.path_after is None:
            raise ValueError("file diff needs at least one path")

    @property
    def path(self) -> str:
        """The identity path: after-side path, or before-side for deletions."""
        return self.path_after if self.path_after is not None else self.path_before

    @property
    def is_rename(self) -> bool:
        return (
            self.path_before is not None
            and self.path_after is not None
            and self.path_before != self.path_after
        )

    @property
    def lines_added(self) -> int:
        return sum(len(e.add_lines) for e in self.edit_lists)

    @property
    def lines_deleted(self) -> int:
        return sum(len(e.del_lines) for e in self.edit_lists)


def _strip_prefix(raw: str, prefix: str) -> str | None:
    raw = raw.split("\t", 1)[0]
    if raw == "/dev/null":
        return None
    raw = _unquote(raw)
    if raw.startswith(prefix):
        return raw[len(prefix):]
    return raw


def _unquote(raw: str) -> str:
    if len(raw) >= 2 and raw[0] == raw[-1] == '"':
        body = raw[1:-1].encode("latin-1", "backslashreplace").decode("unicode_escape")
        # git escapes raw UTF-8 bytes as octal; re-decode them
        return body.encode("latin-1", "replace").decode("utf-8", "replace")
    return raw


def _split_git_header(rest: str) -> tuple[str | None, str | None]:
    if rest.startswith('"'):
        end = rest.find('"', 1)
        while end > 0 and rest[end - 1] == "\\":
            end = rest.find('"', end + 1)
        a, b = rest[: end + 1], rest[end + 2:]
        return _strip_prefix(a, "a/"), _strip_prefix(b, "b/")
    # "a/X b/X" is the common unambiguous case
    n = len(rest)
    if n % 2 == 1:
        half = (n - 1) // 2
        a, b = rest[:half], rest[half + 1:]
        if a[2:] == b[2:] and a.startswith("a/") and b.startswith("b/"):
            return a[2:], b[2:]
    idx = rest.find(" b/")
    if idx < 0:
        return None, None
    return _strip_prefix(rest[:idx], "a/"), _strip_prefix(rest[idx + 1:], "b/")


class _FileBuilder:
    def __init__(self, before=None, after=None):
        self.before = before
        self.after = after
        self.edits: list[EditList] = []
        self.binary = False
        self.similarity = None
        self.new_file = False
        self.deleted_file = False

    def build(self) -> FileDiff | None:
        before, after = self.before, self.after
        if self.new_file:
            before = None
        if self.deleted_file:
            after = None
        if before is None and after is None:
            return None
        return FileDiff(before, after, tuple(self.edits), self.binary, self.similarity)


def parse_unified_diff(text: str, skipped: list | None = None) -> list[FileDiff]:
    """Parse unified-diff text (git or plain) into FileDiffs.

    Binary entries are dropped from the result; when ``skipped`` is given
    their paths are appended to it.
    """
    result: list[FileDiff] = []
    if not text:
        return result
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    offsets = []
    pos = 0
    for line in lines:
        offsets.append(pos)
        pos += len(line.encode("utf-8", "surrogateescape")) + 1

    current: _FileBuilder | None = None

    def finish():
        nonlocal current
        if current is None:
            return
        fd = current.build()
        current = None
        if fd is None:
            return
        if fd.binary:
            if skipped is not None:
                skipped.append(fd.path)
            return
        result.append(fd)

    i = 0
    while i < len(lines):
        line = lines[i]
        m = _GIT_HEADER_RE.match(line)
        if m:
            finish()
            current = _FileBuilder(*_split_git_header(m.group(1)))
            i += 1
            continue
        if line.startswith("--- ") and i + 1 < len(lines) and lines[i + 1].startswith("+++ "):
            before = _strip_prefix(line[4:], "a/")
            after = _strip_prefix(lines[i + 1][4:], "b/")
            if current is None or current.edits:
                finish()
                current = _FileBuilder(before, after)
            else:
                current.before, current.after = before, after
                if before is None:
                    current.new_file = True
                if after is None:
                    current.deleted_file = True
            i += 2
            continue
        if line.startswith("@@"):
            if current is None:
                raise MalformedDiff("hunk outside of a file section", offsets[i])
            i = _parse_hunk(lines, offsets, i, current)
            continue
        if current is not None:
            if line.startswith("rename from "):
                current.before = _unquote(line[len("rename from "):])
            elif line.startswith("rename to "):
                current.after = _unquote(line[len("rename to "):])
            elif line.startswith("similarity index "):
                current.similarity = int(line[len("similarity index "):].rstrip("%"))
            elif line.startswith("new file mode"):
                current.new_file = True
            elif line.startswith("deleted file mode"):
                current.deleted_file = True
            elif line.startswith("Binary files ") or line == "GIT binary patch":
                current.binary = True
        i += 1
    finish()
    return result


def _parse_hunk(lines, offsets, i, builder: _FileBuilder) -> int:
    m = _HUNK_RE.match(lines[i])
    if not m:
        raise MalformedDiff(f"bad hunk header {lines[i]!r}", offsets[i])
    old_start = int(m.group(1))
    old_count = int(m.group(2)) if m.group(2) is not None else 1
    new_start = int(m.group(3))
    new_count = int(m.group(4)) if m.group(4) is not None else 1
    section = m.group(5)
    i += 1

    old_line = old_start if old_count else old_start + 1
    new_line = new_start if new_count else new_start + 1
    old_left, new_left = old_count, new_count
    dels: list[str] = []
    adds: list[str] = []
    del_first = add_first = None
    flags = {"del": False, "add": False}
    first_in_hunk = [True]
    last = None

    def close():
        nonlocal dels, adds, del_first, add_first
        if dels or adds:
            builder.edits.append(
                EditList(
                    del_first if dels else old_line - 1,
                    tuple(dels),
                    add_first if adds else new_line - 1,
                    tuple(adds),
                    flags["del"],
                    flags["add"],
                    section if first_in_hunk[0] else "",
                )
            )
            first_in_hunk[0] = False
        dels, adds = [], []
        del_first = add_first = None
        flags["del"] = flags["add"] = False

    while i < len(lines) and (old_left > 0 or new_left > 0 or lines[i].startswith("\\")):
        line = lines[i]
        tag = line[:1]
        if tag == "-":
            if old_left <= 0:
                raise MalformedDiff("more deleted lines than the header announces", offsets[i])
            if adds:
                # a deletion after additions starts a new run (not produced by -U0)
                close()
            if del_first is None:
                del_first = old_line
            dels.append(line[1:])
            old_line += 1
            old_left -= 1
            last = "del"
        elif tag == "+":
            if new_left <= 0:
                raise MalformedDiff("more added lines than the header announces", offsets[i])
            if add_first is None:
                add_first = new_line
            adds.append(line[1:])
            new_line += 1
            new_left -= 1
            last = "add"
        elif tag == " " or line == "":
            if old_left <= 0 or new_left <= 0:
                raise MalformedDiff("context line beyond hunk bounds", offsets[i])
            close()
            old_line += 1
            new_line += 1
            old_left -= 1
            new_left -= 1
            last = None
        elif tag == "\\":
            if last is not None:
                flags[last] = True
        else:
            raise MalformedDiff(f"unexpected line in hunk body {line!r}", offsets[i])
        i += 1
    if old_left > 0 or new_left > 0:
        at = offsets[i] if i < len(offsets) else (offsets[-1] if offsets else 0)
        raise MalformedDiff("hunk body shorter than its header", at)
    close()
    return i


def _range_spec(start: int, count: int) -> str:
    return str(start) if count == 1 else f"{start},{count}"


def format_edit_list(edit: EditList) -> str:
    """Render an edit-list back to a ``-U0`` hunk."""
    out = [
        f"@@ -{_range_spec(edit.del_start, len(edit.del_lines))} "
        f"+{_range_spec(edit.add_start, len(edit.add_lines))} @@{edit.section}"
    ]
    out.extend("-" + t for t in edit.del_lines)
    if edit.del_no_newline:
        out.append(NO_NEWLINE_MARKER)
    out.extend("+" + t for t in edit.add_lines)
    if edit.add_no_newline:
        out.append(NO_NEWLINE_MARKER)
    return "\n".join(out) + "\n"


def format_file_diff(fd: FileDiff) -> str:
    a = fd.path_before if fd.path_before is not None else fd.path_after
    b = fd.path_after if fd.path_after is not None else fd.path_before
    out = [f"diff --git a/{a} b/{b}\n"]
    if fd.path_before is None:
        out.append("new file mode 100644\n")
    elif fd.path_after is None:
        out.append("deleted file mode 100644\n")
    if fd.is_rename:
        out.append(f"similarity index {fd.similarity if fd.similarity is not None else 100}%\n")
        out.append(f"rename from {fd.path_before}\nrename to {fd.path_after}\n")
    if fd.edit_lists:
        out.append(f"--- {'a/' + fd.path_before if fd.path_before is not None else '/dev/null'}\n")
        out.append(f"+++ {'b/' + fd.path_after if fd.path_after is not None else '/dev/null'}\n")
        out.extend(format_edit_list(e) for e in fd.edit_lists)
    return "".join(out)


def total_churn(diffs) -> tuple[int, int]:
    """(lines added, lines deleted) summed over every edit-list."""
    added = deleted = 0
    for fd in diffs:
        added += fd.lines_added
        deleted += fd.lines_deleted
    return added, deleted


def apply_edit_lists(before: list[str], edit_lists) -> list[str]:
    """Apply one file's edit-lists to its before-lines, returning after-lines."""
    out: list[str] = []
    cursor = 0  # 0-based index of the next unconsumed before-line
    for edit in edit_lists:
        # copy untouched lines up to the edit point
        upto = edit.del_start - 1 if edit.del_lines else edit.del_start
        if upto < cursor or upto > len(before):
            raise ValueError(f"edit-list at line {edit.del_start} out of order or out of range")
        out.extend(before[cursor:upto])
        cursor = upto
        if edit.del_lines:
            actual = before[cursor:cursor + len(edit.del_lines)]
            if list(edit.del_lines) != actual:
                raise ValueError(f"deleted lines do not match before-file at line {edit.del_start}")
            cursor += len(edit.del_lines)
        out.extend(edit.add_lines)
    out.extend(before[cursor:])
    return out
