"""Per-line change categories (18 labels), input reordering by
informativeness, and the pure-refactoring clean-commit pre-filter."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import EmptyCommit, InconsistentInputs
from .propagation import alignment_gaps, lcs_alignment, mark_propagation
from .refactoring import refactoring_token_spans, span_indices
from .tokenizer import tokenize

ADD = "Add"
DEL = "Del"
MOVE = "Move"
REFACTORING = "Refactoring"
PROPAGATION = "Propagation"
EDIT = "Edit"
FLAG_ORDER = (MOVE, REFACTORING, PROPAGATION, EDIT)

_COMBOS = ((), (MOVE,), (REFACTORING,), (PROPAGATION,), (EDIT,), (REFACTORING, PROPAGATION),
           (REFACTORING, EDIT), (PROPAGATION, EDIT), (REFACTORING, PROPAGATION, EDIT))


def category_name(side: str, flags) -> str:
    return "_".join([side, *(f for f in FLAG_ORDER if f in flags)])


ADD_CATEGORIES = tuple(category_name(ADD, c) for c in _COMBOS)
DEL_CATEGORIES = tuple(category_name(DEL, c) for c in _COMBOS)
CATEGORIES = ADD_CATEGORIES + DEL_CATEGORIES

# Add-side categories through which bug-inducing tracing continues
SKIP_CATEGORIES = frozenset({"Add_Move", "Add_Refactoring", "Add_Propagation", "Add_Refactoring_Propagation"})
PURE_DEL_CATEGORIES = frozenset({"Del_Move", "Del_Refactoring", "Del_Propagation", "Del_Refactoring_Propagation"})

RECORD_FIELDS = (
    "commit", "side", "path", "line", "raw_text", "flags", "category",
    "partner", "refactoring_ids", "enclosing_class", "enclosing_method",
)


@dataclass
class LineChangeRecord:
    commit: str
    side: str
    path: str
    line: int
    raw_text: str
    flags: frozenset = frozenset()
    category: str = ""
    partner: tuple[str, int] | None = None
    refactoring_ids: list[str] = field(default_factory=list)
    enclosing_class: str | None = None
    enclosing_method: str | None = None

    def __post_init__(self):
        if not self.category:
            self.category = category_name(self.side, self.flags)

    @property
    def ref(self) -> tuple[str, int]:
        return (self.path, self.line)

    def to_dict(self) -> dict:
        return {
            "commit": self.commit,
            "side": self.side,
            "path": self.path,
            "line": self.line,
            "raw_text": self.raw_text,
            "flags": [f for f in FLAG_ORDER if f in self.flags],
            "category": self.category,
            "partner": list(self.partner) if self.partner else None,
            "refactoring_ids": list(self.refactoring_ids),
            "enclosing_class": self.enclosing_class,
            "enclosing_method": self.enclosing_method,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LineChangeRecord":
        return cls(
            d["commit"], d["side"], d["path"], d["line"], d["raw_text"], frozenset(d["flags"]),
            d["category"], tuple(d["partner"]) if d.get("partner") else None,
            list(d.get("refactoring_ids", [])), d.get("enclosing_class"), d.get("enclosing_method"),
        )


def records_to_jsonl(records) -> str:
    return "".join(json.dumps(r.to_dict(), ensure_ascii=False) + "\n" for r in records)


def records_from_jsonl(text: str) -> list[LineChangeRecord]:
    return [LineChangeRecord.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]


def _covering(instances, side, path, line):
    return [inst for inst in instances if inst.covers(side, path, line)]


def _pair_flags(d_text, a_text, d_ref, a_ref, instances, alterations, match):
    """Flags of a matched pair plus the instance ids that explained tokens."""
    d_tok, a_tok = tokenize(d_text), tokenize(a_text)
    d_texts = [t.text for t in d_tok]
    a_texts = [t.text for t in a_tok]
    if d_texts == a_texts:
        return frozenset({MOVE}), []

    refactored_d, refactored_a, ids = set(), set(), []
    for inst in _covering(instances, "before", *d_ref):
        got = span_indices(refactoring_token_spans(inst, "before", *d_ref, tokens=d_tok))
        refactored_d |= got
        if got and inst.ident not in ids:
            ids.append(inst.ident)
    for inst in _covering(instances, "after", *a_ref):
        got = span_indices(refactoring_token_spans(inst, "after", *a_ref, tokens=a_tok))
        refactored_a |= got
        if got and inst.ident not in ids:
            ids.append(inst.ident)
    prop_d, prop_a = mark_propagation(match, d_tok, a_tok, alterations)

    flags = set()
    gaps = alignment_gaps(len(d_texts), len(a_texts), lcs_alignment(d_texts, a_texts))
    for dels, ins in gaps:
        for side_idx, refactored, propagated in ((dels, refactored_d, prop_d), (ins, refactored_a, prop_a)):
            for k in side_idx:
                if k in refactored:
                    flags.add(REFACTORING)
                elif k in propagated:
                    flags.add(PROPAGATION)
                else:
                    flags.add(EDIT)
    if PROPAGATION in flags:
        for alt in alterations:
            if alt.source.ident and alt.source.ident not in ids and alt.applies_to(a_ref[0]):
                if (alt.old_name in d_texts) or (alt.new_name in a_texts):
                    ids.append(alt.source.ident)
    return frozenset(flags), ids


def categorize_commit(file_diffs, matches, instances=(), alterations=(), commit: str = "") -> list[LineChangeRecord]:
    """One record per changed line, in diff order (deleted before added)."""
    del_text, add_text = {}, {}
    order = []
    for fd in file_diffs:
        for edit in fd.edit_lists:
            for n, t in edit.deleted():
                del_text[(fd.path_before, n)] = t
                order.append((DEL, (fd.path_before, n)))
            for n, t in edit.added():
                add_text[(fd.path_after, n)] = t
                order.append((ADD, (fd.path_after, n)))

    by_del, by_add = {}, {}
    for m in matches:
        if m.del_ref not in del_text or m.add_ref not in add_text:
            raise InconsistentInputs(f"match {m.del_ref} -> {m.add_ref} is outside the diff")
        if m.del_ref in by_del or m.add_ref in by_add:
            raise InconsistentInputs(f"line matched twice: {m.del_ref} / {m.add_ref}")
        by_del[m.del_ref] = m
        by_add[m.add_ref] = m

    pair_info = {}
    for m in matches:
        pair_info[(m.del_ref, m.add_ref)] = _pair_flags(
            del_text[m.del_ref], add_text[m.add_ref], m.del_ref, m.add_ref, instances, alterations, m
        )

    records = []
    for side, ref in order:
        m = by_del.get(ref) if side == DEL else by_add.get(ref)
        text = del_text[ref] if side == DEL else add_text[ref]
        if m is None:
            records.append(LineChangeRecord(commit, side, ref[0], ref[1], text))
            continue
        flags, ids = pair_info[(m.del_ref, m.add_ref)]
        partner = m.add_ref if side == DEL else m.del_ref
        records.append(LineChangeRecord(commit, side, ref[0], ref[1], text, flags, partner=partner, refactoring_ids=list(ids)))
    return records


# -- input reordering ---------------------------------------------------------

REORDER_GROUPS = (
    tuple(c for c in ADD_CATEGORIES if c == ADD or EDIT in c.split("_")),
    tuple(c for c in DEL_CATEGORIES if EDIT in c.split("_")),
    ("Add_Propagation", "Del_Propagation", "Add_Refactoring_Propagation", "Del_Refactoring_Propagation"),
    ("Add_Move", "Add_Refactoring", "Del", "Del_Move", "Del_Refactoring"),
)
_GROUP_OF = {c: k for k, group in enumerate(REORDER_GROUPS) for c in group}


def reorder_changes(records) -> list[tuple[int, list[str]]]:
    """Raw lines grouped most-informative first, as (group rank, lines).

    Empty groups are omitted; lines keep their original order within a group.
    """
    groups: dict[int, list[str]] = {}
    for r in records:
        groups.setdefault(_GROUP_OF[r.category], []).append(r.raw_text)
    return [(k, groups[k]) for k in sorted(groups)]


# -- clean-commit pre-filter --------------------------------------------------

CLEAN = "clean"
UNDECIDED = "undecided"
_SAFE_FLAGS = frozenset({MOVE, REFACTORING, PROPAGATION})


def pure_refactoring_filter(records) -> str:
    """``clean`` when every change is pure move/refactoring/propagation.

    Bare deletions are tolerated; a bare addition or any edit leaves the
    commit ``undecided``.
    """
    records = list(records)
    if not records:
        raise EmptyCommit("no changed lines")
    for r in records:
        if not r.flags <= _SAFE_FLAGS or EDIT in r.flags:
            return UNDECIDED
        if r.side == ADD and not r.flags:
            return UNDECIDED
    return CLEAN
