"""End-to-end categorization of one commit: match, detect, categorize, locate."""
from __future__ import annotations

import threading

from .categorizer import categorize_commit
from .errors import MissingStructure, UnknownPathAtCommit
from .matcher import DEFAULT_THRESHOLD, cross_editlist_move_scan, match_statements
from .metrics import compute_basic_metrics, compute_rams
from .propagation import name_alterations, renames_in_scope
from .refactoring import detect_builtin, is_rename, merge_instances, with_ids
from .structure import enclosing, parse_structure

_MAX_ROUNDS = 4


def _hints_for(instances, fd, edit):
    out = []
    for inst in instances:
        if any(inst.covers("before", fd.path_before, n) for n in edit.del_numbers) or any(
            inst.covers("after", fd.path_after, n) for n in edit.add_numbers
        ):
            out.append(inst)
    return out


def match_commit(file_diffs, instances, threshold=DEFAULT_THRESHOLD):
    """Edit-list matching with hints and in-scope renames, then the move scan."""
    alterations = name_alterations(instances)
    matches = []
    for fd in file_diffs:
        renames = renames_in_scope(alterations, fd.path_after or fd.path_before)
        for edit in fd.edit_lists:
            if not edit.del_lines or not edit.add_lines:
                continue
            matches.extend(
                match_statements(
                    edit,
                    _hints_for(instances, fd, edit),
                    path_before=fd.path_before,
                    path_after=fd.path_after,
                    threshold=threshold,
                    renames=renames,
                )
            )
    matches.extend(cross_editlist_move_scan(file_diffs, matches))
    return matches, alterations


class CommitAnalyzer:
    """Categorizes commits of one repository, memoizing results.

    ``instances_by_commit`` holds external refactoring instances per commit.
    One analyzer must be used by one thread at a time.
    """

    def __init__(self, repo, instances_by_commit=None, threshold=DEFAULT_THRESHOLD, structures=True):
        self.repo = repo
        self.instances_by_commit = instances_by_commit or {}
        self.threshold = threshold
        self.structures = structures
        self._records: dict[str, list] = {}
        self._instances: dict[str, list] = {}
        self._struct_cache: dict[tuple[str, str], object] = {}

    def instances(self, commit):
        if commit not in self._instances:
            self.analyze(commit)
        return self._instances[commit]

    def file_diffs(self, commit):
        return self.repo.file_diffs(self.repo.first_parent(commit), commit)

    def analyze(self, commit):
        if commit in self._records:
            return self._records[commit]
        fds = self.file_diffs(commit)
        external = with_ids(self.instances_by_commit.get(commit, []), f"ext-{commit[:10]}")
        matches, alterations = match_commit(fds, external, self.threshold)
        merged = external
        seen = None
        for _ in range(_MAX_ROUNDS):
            builtin = merge_instances(external, detect_builtin(fds, matches))[len(external):]
            key = sorted(repr(inst) for inst in builtin if is_rename(inst.type_name))
            merged = with_ids(external + builtin, f"bi-{commit[:10]}")
            if key == seen or not key:
                break
            seen = key
            # builtin renames unlock rename-aware matching of their other sites
            matches, alterations = match_commit(fds, merged, self.threshold)
        records = categorize_commit(fds, matches, merged, alterations, commit)
        if self.structures:
            self._locate(commit, fds, records)
        self._records[commit] = records
        self._instances[commit] = merged
        return records

    def structure(self, commit, path):
        key = (commit, path)
        if key not in self._struct_cache:
            try:
                text = "\n".join(self.repo.read_file(commit, path).lines)
            except UnknownPathAtCommit as exc:
                raise MissingStructure(f"{path} at {commit}") from exc
            self._struct_cache[key] = parse_structure(text)
        return self._struct_cache[key]

    def _locate(self, commit, fds, records):
        parent = self.repo.first_parent(commit)
        for r in records:
            at = parent if r.side == "Del" else commit
            if at is None:
                continue
            index = self.structure(at, r.path)
            r.enclosing_class, r.enclosing_method = enclosing(index, r.line)


class AnalyzerPool:
    """Thread-local analyzers over repository handles from ``open_handle``."""

    def __init__(self, open_handle, instances_by_commit=None, threshold=DEFAULT_THRESHOLD):
        self._open = open_handle
        self._instances = instances_by_commit
        self._threshold = threshold
        self._local = threading.local()

    def get(self) -> CommitAnalyzer:
        a = getattr(self._local, "analyzer", None)
        if a is None:
            a = CommitAnalyzer(self._open(), self._instances, self._threshold)
            self._local.analyzer = a
        return a


def commit_metrics(analyzer: CommitAnalyzer, commit):
    """(RamVector, diff-computed change metrics) of one commit."""
    records = analyzer.analyze(commit)
    fds = analyzer.file_diffs(commit)
    parent = analyzer.repo.first_parent(commit)
    before, after = {}, {}
    for r in records:
        if r.side == "Del" and r.path not in before:
            before[r.path] = analyzer.structure(parent, r.path)
        elif r.side == "Add" and r.path not in after:
            after[r.path] = analyzer.structure(commit, r.path)
    for fd in fds:
        # presence checks need both sides of every touched file
        if fd.path_before is not None and parent is not None and fd.path_before not in before:
            before[fd.path_before] = analyzer.structure(parent, fd.path_before)
        if fd.path_after is not None and fd.path_after not in after:
            after[fd.path_after] = analyzer.structure(commit, fd.path_after)
    renames = {fd.path_before: fd.path_after for fd in fds if fd.is_rename}
    return compute_rams(records, before, after, renames), compute_basic_metrics(fds)
