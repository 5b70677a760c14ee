"""Refactoring-aware SZZ: drop pure-refactoring lines from fixes, then blame
each remaining fix line backwards past pure refactoring/move/propagation."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

from .categorizer import ADD, PURE_DEL_CATEGORIES, SKIP_CATEGORIES
from .errors import LineOriginUnavailable, RefawareError, TraceDepthExceeded, UnknownFixLine

MAX_DEPTH = 50
BUGGY = "buggy"
CLEAN = "clean"


@dataclass(frozen=True)
class FixAnnotation:
    fix_commit: str
    fix_lines: tuple[tuple[str, int], ...]


@dataclass
class BugLabel:
    inducing_commit: str
    inducing_line: tuple[str, int]
    trace: list[tuple[str, str]]
    origin_fix: str
    fix_line: tuple[str, int]
    flags: list[str] = field(default_factory=list)

    @property
    def excluded(self) -> bool:
        return "excluded" in self.flags

    def to_dict(self) -> dict:
        return {
            "inducing_commit": self.inducing_commit,
            "inducing_line": list(self.inducing_line),
            "trace": [list(h) for h in self.trace],
            "origin_fix": self.origin_fix,
            "fix_line": list(self.fix_line),
            "flags": list(self.flags),
        }

    @classmethod
    def from_dict(cls, d) -> "BugLabel":
        return cls(
            d["inducing_commit"], tuple(d["inducing_line"]), [tuple(h) for h in d["trace"]],
            d["origin_fix"], tuple(d["fix_line"]), list(d.get("flags", [])),
        )


@dataclass
class TraceFailure:
    fix_commit: str
    path: str
    line: int
    error: str

    def to_dict(self):
        return {"fix_commit": self.fix_commit, "path": self.path, "line": self.line, "error": self.error}


@dataclass
class LabelResult:
    labels: list[BugLabel]
    verdicts: dict[str, str]
    failures: list[TraceFailure]
    dropped: list[tuple[str, str, int]]  # fix lines filtered out as pure refactoring

    @property
    def buggy(self) -> list[str]:
        return [c for c, v in self.verdicts.items() if v == BUGGY]


# -- annotations --------------------------------------------------------------


def load_annotations(text: str) -> list[FixAnnotation]:
    """Group JSONL ``{"fix_commit", "path", "line"}`` rows per fix commit."""
    grouped: dict[str, set] = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            row = json.loads(raw)
            commit, path, line = row["fix_commit"], row["path"], row["line"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ValueError(f"annotation line {n}: {exc}") from None
        if not isinstance(line, int) or isinstance(line, bool) or line < 1:
            raise ValueError(f"annotation line {n}: bad line number {line!r}")
        grouped.setdefault(commit, set()).add((path, line))
    return [FixAnnotation(c, tuple(sorted(lines))) for c, lines in sorted(grouped.items())]


def dump_annotations(annotations) -> str:
    return "".join(
        json.dumps({"fix_commit": a.fix_commit, "path": p, "line": n}) + "\n"
        for a in annotations
        for p, n in a.fix_lines
    )


# -- filtering and tracing ----------------------------------------------------


def filter_fix_lines(annotation: FixAnnotation, records) -> list[tuple[str, int]]:
    """Fix lines whose deletion is not pure move/refactoring/propagation."""
    by_ref = {(r.path, r.line): r for r in records if r.side != ADD}
    kept = []
    for ref in annotation.fix_lines:
        rec = by_ref.get(tuple(ref))
        if rec is None:
            raise UnknownFixLine(f"{ref[0]}:{ref[1]} is not deleted by {annotation.fix_commit}")
        if rec.category not in PURE_DEL_CATEGORIES:
            kept.append(tuple(ref))
    return kept


def trace_origin(analyzer, fix_commit, path, line, *, skip=True, max_depth=MAX_DEPTH) -> BugLabel:
    """Blame a before-side fix line back to the commit that really authored it.

    ``analyzer`` is a :class:`~refaware.pipeline.CommitAnalyzer`. With
    ``skip=False`` the first blamed commit is returned (plain SZZ).
    """
    repo = analyzer.repo
    at = repo.first_parent(fix_commit)
    if at is None:
        raise LineOriginUnavailable(f"{fix_commit} has no parent to blame from")
    cur_path, cur_line = path, line
    trace: list[tuple[str, str]] = []
    flags: list[str] = []
    while True:
        blamed = repo.blame_line(at, cur_path, cur_line)
        commit = blamed.commit
        records = analyzer.analyze(commit)
        rec = next((r for r in records if r.side == ADD and r.path == blamed.path and r.line == blamed.line), None)
        if rec is None or blamed.boundary:
            # the line predates the visible history: label the oldest commit we reached
            trace.append((commit, rec.category if rec else "Add"))
            flags.append("origin-unavailable")
            return BugLabel(commit, (blamed.path, blamed.line), trace, fix_commit, (path, line), flags)
        trace.append((commit, rec.category))
        if not skip or rec.category not in SKIP_CATEGORIES or rec.partner is None:
            return BugLabel(commit, (blamed.path, blamed.line), trace, fix_commit, (path, line), flags)
        if len(trace) >= max_depth:
            raise TraceDepthExceeded(f"{fix_commit} {path}:{line} exceeded {max_depth} hops")
        parent = repo.first_parent(commit)
        if parent is None:
            raise LineOriginUnavailable(f"{commit} has no parent")
        at = parent
        cur_path, cur_line = rec.partner


def commit_churn(analyzer, commit) -> int:
    return sum(fd.lines_added + fd.lines_deleted for fd in analyzer.file_diffs(commit))


def label_dataset(
    analyzer,
    annotations,
    commits=None,
    *,
    skip=True,
    filter_refactorings=True,
    max_depth=MAX_DEPTH,
    max_commit_churn=None,
) -> LabelResult:
    """Trace every annotated fix line; commits named by a label are buggy.

    Output is sorted, so it does not depend on the order of ``annotations``.
    Labels whose inducing commit churns more than ``max_commit_churn`` lines
    are kept but flagged ``excluded`` and do not make their commit buggy.
    """
    lines: dict[str, set] = {}
    for a in annotations:
        lines.setdefault(a.fix_commit, set()).update(tuple(x) for x in a.fix_lines)
    labels, failures, dropped = [], [], []
    for fix in sorted(lines):
        ann = FixAnnotation(fix, tuple(sorted(lines[fix])))
        try:
            kept = filter_fix_lines(ann, analyzer.analyze(fix)) if filter_refactorings else list(ann.fix_lines)
        except RefawareError as exc:
            failures.extend(TraceFailure(fix, p, n, f"{type(exc).__name__}: {exc}") for p, n in ann.fix_lines)
            continue
        dropped.extend((fix, p, n) for p, n in ann.fix_lines if (p, n) not in kept)
        for p, n in kept:
            try:
                label = trace_origin(analyzer, fix, p, n, skip=skip, max_depth=max_depth)
            except RefawareError as exc:
                failures.append(TraceFailure(fix, p, n, f"{type(exc).__name__}: {exc}"))
                continue
            if max_commit_churn is not None and commit_churn(analyzer, label.inducing_commit) > max_commit_churn:
                label.flags.append("excluded")
            labels.append(label)
    labels.sort(key=lambda b: (b.origin_fix, b.fix_line, b.inducing_commit))
    if commits is None:
        commits = analyzer.repo.commits()
    inducing = {b.inducing_commit for b in labels if not b.excluded}
    verdicts = {c: (BUGGY if c in inducing else CLEAN) for c in commits}
    return LabelResult(labels, verdicts, failures, dropped)


# -- serialization ------------------------------------------------------------


def labels_to_jsonl(labels) -> str:
    return "".join(json.dumps(b.to_dict(), ensure_ascii=False) + "\n" for b in labels)


def labels_from_jsonl(text: str) -> list[BugLabel]:
    return [BugLabel.from_dict(json.loads(s)) for s in text.splitlines() if s.strip()]


def verdicts_to_csv(verdicts: dict[str, str]) -> str:
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("commit_id", "verdict"))
    for c, v in verdicts.items():
        w.writerow((c, v))
    return out.getvalue()


def verdicts_from_csv(text: str) -> dict[str, str]:
    rows = csv.DictReader(io.StringIO(text))
    out = {}
    for row in rows:
        verdict = row.get("verdict", "").strip().lower()
        if verdict in ("1", "true"):
            verdict = BUGGY
        elif verdict in ("0", "false"):
            verdict = CLEAN
        out[row["commit_id"]] = verdict
    return out


def label_diff(prior: dict[str, str], current: dict[str, str]) -> dict:
    """Commits whose verdict changed relative to a prior labeling."""
    to_buggy = sorted(c for c, v in current.items() if v == BUGGY and prior.get(c) == CLEAN)
    to_clean = sorted(c for c, v in current.items() if v == CLEAN and prior.get(c) == BUGGY)
    return {
        "flipped": len(to_buggy) + len(to_clean),
        "clean_to_buggy": to_buggy,
        "buggy_to_clean": to_clean,
        "missing_in_prior": sorted(c for c in current if c not in prior),
    }
