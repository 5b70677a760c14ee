"""Refactoring propagation: reference sites updated because a refactoring
renamed, added or removed a named element."""
from __future__ import annotations

from dataclasses import dataclass

from .refactoring import NAME_ALTERING, RefactoringInstance, element_names, owning_method

FILE_SCOPE = "file"
PROJECT_SCOPE = "project"


@dataclass(frozen=True)
class NameAlteration:
    element_kind: str
    old_name: str | None
    new_name: str | None
    source: RefactoringInstance
    scope: str
    member_of: str | None = None  # method owning an added/removed parameter

    @property
    def is_rename(self) -> bool:
        return self.old_name is not None and self.new_name is not None

    def applies_to(self, path: str) -> bool:
        return self.scope == PROJECT_SCOPE or path in self.source.paths()


def name_alterations(instances) -> list[NameAlteration]:
    out = []
    for inst in instances:
        spec = NAME_ALTERING.get(inst.type_name)
        if spec is None:
            continue
        kind, how = spec
        old, new = element_names(inst)
        if old is None and new is None:
            continue
        if how == "rename" and (old is None or new is None or old == new):
            continue
        member = None
        if how == "rename":
            scope = FILE_SCOPE if kind in ("variable", "parameter") else PROJECT_SCOPE
        else:
            # call sites of the owning method may live in any changed file
            scope = PROJECT_SCOPE
            member = owning_method(inst)
            if member is None:
                continue
        out.append(NameAlteration(kind, old, new, inst, scope, member))
    return out


def renames_in_scope(alterations, path) -> dict[str, str]:
    """old -> new for renames applying to ``path``; ambiguous olds dropped."""
    found: dict[str, set[str]] = {}
    for alt in alterations:
        if alt.is_rename and alt.applies_to(path):
            found.setdefault(alt.old_name, set()).add(alt.new_name)
    return {old: news.pop() for old, news in found.items() if len(news) == 1}


def lcs_alignment(a, b) -> list[tuple[int, int]]:
    """Index pairs of a longest common subsequence of two sequences."""
    n, m = len(a), len(b)
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        row, below = table[i], table[i + 1]
        for j in range(m - 1, -1, -1):
            row[j] = below[j + 1] + 1 if a[i] == b[j] else max(below[j], row[j + 1])
    pairs, i, j = [], 0, 0
    while i < n and j < m:
        if a[i] == b[j]:
            pairs.append((i, j))
            i += 1
            j += 1
        elif table[i + 1][j] >= table[i][j + 1]:
            i += 1
        else:
            j += 1
    return pairs


def alignment_gaps(n: int, m: int, pairs):
    """Unaligned stretches as (deleted indices, inserted indices) tuples."""
    gaps = []
    pi = pj = -1
    for i, j in list(pairs) + [(n, m)]:
        dels = list(range(pi + 1, i))
        ins = list(range(pj + 1, j))
        if dels or ins:
            gaps.append((dels, ins))
        pi, pj = i, j
    return gaps


def _call_arguments(texts, method) -> set[int]:
    """Token positions inside the argument lists of calls to ``method``."""
    inside = set()
    for k in range(len(texts) - 1):
        if texts[k] != method or texts[k + 1] != "(":
            continue
        depth = 0
        for j in range(k + 1, len(texts)):
            if texts[j] == "(":
                depth += 1
            elif texts[j] == ")":
                depth -= 1
                if depth == 0:
                    break
            if j > k + 1:
                inside.add(j)
    return inside


def mark_propagation(match, del_tokens, add_tokens, alterations) -> tuple[set[int], set[int]]:
    """Token positions (deleted side, added side) explained as propagation.

    Alterations whose own refactoring covers either line of the match are
    skipped there: those tokens belong to the refactoring itself.
    """
    d_texts = [t.text if hasattr(t, "text") else t for t in del_tokens]
    a_texts = [t.text if hasattr(t, "text") else t for t in add_tokens]
    del_path, del_line = match.del_ref
    add_path, add_line = match.add_ref
    live = [
        alt for alt in alterations
        if (alt.applies_to(del_path) or alt.applies_to(add_path))
        and not alt.source.covers("before", del_path, del_line)
        and not alt.source.covers("after", add_path, add_line)
    ]
    if not live:
        return set(), set()
    gaps = alignment_gaps(len(d_texts), len(a_texts), lcs_alignment(d_texts, a_texts))
    del_marked: set[int] = set()
    add_marked: set[int] = set()
    for alt in live:
        if alt.is_rename:
            for dels, ins in gaps:
                olds = [i for i in dels if d_texts[i] == alt.old_name]
                news = [j for j in ins if a_texts[j] == alt.new_name]
                if olds and news:
                    del_marked.update(olds)
                    add_marked.update(news)
        elif alt.new_name is not None:
            args = _call_arguments(a_texts, alt.member_of)
            add_marked.update(j for _, ins in gaps for j in ins if j in args)
        else:
            args = _call_arguments(d_texts, alt.member_of)
            del_marked.update(i for dels, _ in gaps for i in dels if i in args)
    return del_marked, add_marked
