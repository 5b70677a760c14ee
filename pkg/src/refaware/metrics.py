"""Refactoring-aware metrics (66 per commit), the diff-computable change
metrics, and merging with imported history metrics into 80 features."""
from __future__ import annotations

import csv
import io
import math
import posixpath
from collections import Counter, defaultdict
from dataclasses import dataclass

from .categorizer import ADD, CATEGORIES, DEL, EDIT, MOVE, PROPAGATION
from .errors import MissingCommitRow, MissingField, MissingStructure, NonNumericField
from .structure import enclosing

ENTITY_KINDS = ("purely_added", "purely_deleted", "purely_moved", "purely_refactored", "purely_propagated", "edited")

RAM_NAMES = (
    tuple(f"line_{c}" for c in CATEGORIES)
    + tuple(f"class_{k}" for k in ENTITY_KINDS)
    + tuple(f"class_avg_{c}" for c in CATEGORIES)
    + tuple(f"method_{k}" for k in ENTITY_KINDS)
    + tuple(f"method_avg_{c}" for c in CATEGORIES)
)
assert len(RAM_NAMES) == 66

KAMEI_NAMES = ("ns", "nd", "nf", "entropy", "la", "ld", "lt", "fix", "ndev", "age", "nuc", "exp", "rexp", "sexp")
COMPUTED_KAMEI = ("ns", "nd", "nf", "entropy", "la", "ld")
FEATURE_NAMES = RAM_NAMES + KAMEI_NAMES
KAMEI_HEADER = ("commit_id",) + KAMEI_NAMES


@dataclass(frozen=True)
class RamVector:
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) != len(RAM_NAMES):
            raise ValueError(f"expected {len(RAM_NAMES)} values, got {len(self.values)}")

    def __len__(self):
        return len(self.values)

    def __getitem__(self, name: str) -> float:
        return self.values[RAM_NAMES.index(name)]

    def as_dict(self) -> dict[str, float]:
        return dict(zip(RAM_NAMES, self.values))

    @classmethod
    def zeros(cls) -> "RamVector":
        return cls((0,) * len(RAM_NAMES))


@dataclass(frozen=True)
class FeatureVector:
    commit: str
    values: tuple[float, ...]
    computed: tuple[bool, ...]  # per Kamei slot: True when computed from the diff
    label: int | None = None

    def __len__(self):
        return len(self.values)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(FEATURE_NAMES, self.values))


def _classify(records, absent_before: bool, absent_after: bool) -> str:
    flags = [r.flags for r in records]
    if any(EDIT in f for f in flags):
        return "edited"
    if all(r.side == ADD and not r.flags for r in records) and absent_before:
        return "purely_added"
    if all(r.side == DEL and not r.flags for r in records) and absent_after:
        return "purely_deleted"
    if any(not f for f in flags):
        return "edited"
    if all(f == {MOVE} for f in flags):
        return "purely_moved"
    if all(f == {PROPAGATION} for f in flags):
        return "purely_propagated"
    return "purely_refactored"


def _entity_block(groups, absent) -> list[float]:
    """6 entity counts then 18 per-entity category averages."""
    kinds = Counter()
    per_cat = Counter()
    for key, recs in groups.items():
        kinds[_classify(recs, *absent(key))] += 1
        per_cat.update(r.category for r in recs)
    n = len(groups)
    counts = [kinds[k] for k in ENTITY_KINDS]
    avgs = [per_cat[c] / n if n else 0.0 for c in CATEGORIES]
    return counts + avgs


def compute_rams(records, structure_before, structure_after, renames=None) -> RamVector:
    """66 metrics for one commit's records.

    ``structure_before``/``structure_after`` map paths to parsed structures of
    each touched file on that side. ``renames`` maps before-paths to
    after-paths so both sides of a renamed file form one entity. Lines outside
    any declared class count towards a ``<toplevel>`` pseudo-class; lines
    outside any method are not part of the method-level block.
    """
    renames = renames or {}
    back = {v: k for k, v in renames.items()}
    records = list(records)
    line_counts = Counter(r.category for r in records)

    classes = defaultdict(list)
    methods = defaultdict(list)
    for r in records:
        side_structs = structure_before if r.side == DEL else structure_after
        index = side_structs.get(r.path)
        if index is None:
            raise MissingStructure(f"no {'before' if r.side == DEL else 'after'} structure for {r.path}")
        cls, meth = enclosing(index, r.line)
        ident = renames.get(r.path, r.path) if r.side == DEL else r.path
        classes[(ident, cls)].append(r)
        if meth is not None:
            methods[(ident, cls, meth)].append(r)

    def before_index(ident):
        return structure_before.get(back.get(ident, ident))

    def absent_class(key):
        ident, cls = key
        b, a = before_index(ident), structure_after.get(ident)
        return (b is None or cls not in b.class_names(), a is None or cls not in a.class_names())

    def absent_method(key):
        ident, cls, meth = key
        b, a = before_index(ident), structure_after.get(ident)
        return (b is None or not b.has_method(cls, meth), a is None or not a.has_method(cls, meth))

    values = [float(line_counts[c]) for c in CATEGORIES]
    values += _entity_block(classes, absent_class)
    values += _entity_block(methods, absent_method)
    return RamVector(tuple(float(v) for v in values))


def _first_component(path: str) -> str:
    return path.split("/", 1)[0] if "/" in path else "<root>"


def compute_basic_metrics(file_diffs) -> dict[str, float]:
    """NS, ND, NF, Entropy, LA and LD of one commit's diff."""
    file_diffs = list(file_diffs)
    paths = [fd.path for fd in file_diffs]
    churn = [fd.lines_added + fd.lines_deleted for fd in file_diffs]
    total = sum(churn)
    entropy = 0.0
    if total:
        for c in churn:
            if c:
                p = c / total
                entropy -= p * math.log2(p)
        entropy /= math.log2(max(len(file_diffs), 2))
    return {
        "ns": float(len({_first_component(p) for p in paths})),
        "nd": float(len({posixpath.dirname(p) for p in paths})),
        "nf": float(len(paths)),
        "entropy": entropy,
        "la": float(sum(fd.lines_added for fd in file_diffs)),
        "ld": float(sum(fd.lines_deleted for fd in file_diffs)),
    }


def _number(field: str, raw) -> float:
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        value = float(raw)
    else:
        text = str(raw).strip()
        if field == "fix" and text.lower() in ("true", "false"):
            return 1.0 if text.lower() == "true" else 0.0
        try:
            value = float(text)
        except ValueError:
            raise NonNumericField(field, raw) from None
    if not math.isfinite(value):
        raise NonNumericField(field, raw)
    return value


def load_kamei_csv(text: str) -> dict[str, dict[str, str]]:
    """Rows keyed by commit id; column names are matched case-insensitively."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None:
        return {}
    fields = {name.strip().lower(): name for name in reader.fieldnames}
    if "commit_id" not in fields:
        raise MissingField("commit_id")
    rows = {}
    for raw in reader:
        row = {k: raw[orig] for k, orig in fields.items() if raw.get(orig) is not None}
        rows[row["commit_id"]] = row
    return rows


def merge_external_metrics(
    ram: RamVector,
    row: dict | None,
    *,
    commit: str = "",
    prefer_computed: bool = False,
    computed: dict[str, float] | None = None,
    label: int | None = None,
) -> FeatureVector:
    """RAMs followed by the 14 change metrics of ``row``.

    With ``prefer_computed`` the diff-computed NS/ND/NF/Entropy/LA/LD replace
    the imported values.
    """
    if row is None:
        raise MissingCommitRow(commit)
    lowered = {str(k).strip().lower(): v for k, v in row.items()}
    kamei, flags = [], []
    for name in KAMEI_NAMES:
        if prefer_computed and computed is not None and name in COMPUTED_KAMEI:
            kamei.append(float(computed[name]))
            flags.append(True)
            continue
        if name not in lowered or lowered[name] in (None, ""):
            raise MissingField(name.upper())
        kamei.append(_number(name, lowered[name]))
        flags.append(False)
    return FeatureVector(commit or str(lowered.get("commit_id", "")), tuple(ram.values) + tuple(kamei), tuple(flags), label)


def _fmt(v: float) -> str:
    return repr(float(v)) if v != int(v) else str(int(v))


def features_csv(vectors, merged: bool = True) -> str:
    """CSV with ``commit_id``, the RAM names, then (if merged) the 14 change metrics."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    names = FEATURE_NAMES if merged else RAM_NAMES
    w.writerow(("commit_id",) + names)
    for commit, values in vectors:
        w.writerow([commit] + [_fmt(v) for v in values[: len(names)]])
    return out.getvalue()


def read_features_csv(text: str) -> tuple[list[str], list[str], list[list[float]]]:
    """(feature names, commit ids, rows) from a metrics CSV."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if not header or header[0] != "commit_id":
        raise MissingField("commit_id")
    names = header[1:]
    commits, rows = [], []
    for rec in reader:
        if not rec:
            continue
        commits.append(rec[0])
        rows.append([_number(n, v) for n, v in zip(names, rec[1:])])
    return names, commits, rows
