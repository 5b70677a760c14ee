"""Statement matching inside edit-lists.

Pairs come from three sources, tried in order: refactoring hints, cosine
similarity of term-frequency vectors (strictly above the threshold), and a
commit-wide scan for token-identical moved lines.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

from .tokenizer import cosine, term_freq, tokenize

DEFAULT_THRESHOLD = 0.8

HINT = "hint"
RENAME = "rename"  # identical once in-scope renames are applied
SIMILARITY = "similarity"
MOVE = "move"


@dataclass(frozen=True)
class StatementMatch:
    del_ref: tuple[str, int]
    add_ref: tuple[str, int]
    similarity: float
    provenance: str


def _greedy(pairs):
    """Take pairs best-first; each line joins at most one pair.

    ``pairs`` holds (sort key, del line, add line) tuples; lower keys win.
    """
    used_d, used_a, out = set(), set(), []
    for key, d, a in sorted(pairs):
        if d in used_d or a in used_a:
            continue
        used_d.add(d)
        used_a.add(a)
        out.append((d, a))
    return out


def _renamed(texts, renames):
    return tuple(renames.get(t, t) for t in texts)


def match_statements(
    edit_list,
    hints=(),
    *,
    path_before=None,
    path_after=None,
    threshold: float = DEFAULT_THRESHOLD,
    renames: dict[str, str] | None = None,
) -> list[StatementMatch]:
    """Match deleted to added lines of one edit-list.

    ``renames`` maps old to new identifiers of in-scope renames; a pair whose
    token sequences coincide once the renames are applied is matched before
    the similarity phase.
    """
    dels = {n: tokenize(t) for n, t in edit_list.deleted()}
    adds = {n: tokenize(t) for n, t in edit_list.added()}
    tf_d = {n: term_freq(ts) for n, ts in dels.items()}
    tf_a = {n: term_freq(ts) for n, ts in adds.items()}
    out: list[StatementMatch] = []
    used_d: set[int] = set()
    used_a: set[int] = set()

    def take(found, provenance, score):
        for d, a in found:
            used_d.add(d)
            used_a.add(a)
            out.append(StatementMatch((path_before, d), (path_after, a), score(d, a), provenance))

    def sim(d, a):
        return cosine(tf_d[d], tf_a[a])

    for inst in sorted(hints, key=_instance_key):
        cov_d = [d for d in dels if d not in used_d and inst.covers("before", path_before, d)]
        cov_a = [a for a in adds if a not in used_a and inst.covers("after", path_after, a)]
        pairs = [((-sim(d, a), abs(d - a), d, a), d, a) for d in cov_d for a in cov_a]
        take(_greedy(pairs), HINT, sim)

    if renames:
        texts_a = {a: tuple(t.text for t in ts) for a, ts in adds.items()}
        pairs = []
        for d, ts in dels.items():
            if d in used_d or not ts:
                continue
            target = _renamed((t.text for t in ts), renames)
            if target == tuple(t.text for t in ts):
                continue
            for a, ta in texts_a.items():
                if a not in used_a and ta == target:
                    pairs.append(((abs(d - a), d, a), d, a))
        take(_greedy(pairs), RENAME, sim)

    pairs = []
    for d in dels:
        if d in used_d:
            continue
        for a in adds:
            if a in used_a:
                continue
            s = sim(d, a)
            if s > threshold:
                pairs.append(((-s, abs(d - a), d, a), d, a))
    take(_greedy(pairs), SIMILARITY, sim)
    return out


def _instance_key(inst):
    return (inst.type_name, inst.description, repr(inst.left_ranges), repr(inst.right_ranges))


def _common_prefix(p: str, q: str) -> int:
    n = 0
    for x, y in zip(p.split("/"), q.split("/")):
        if x != y:
            break
        n += 1
    return n


def cross_editlist_move_scan(file_diffs, matches) -> list[StatementMatch]:
    """Pair leftover token-identical lines anywhere in the commit as moves.

    Ties prefer the longest common path prefix, then the smallest line
    distance. Lines without tokens (blank or comment-only) never move.
    """
    matched_d = {m.del_ref for m in matches}
    matched_a = {m.add_ref for m in matches}
    free_d = defaultdict(list)
    free_a = []
    for fd in file_diffs:
        for edit in fd.edit_lists:
            for n, text in edit.deleted():
                ref = (fd.path_before, n)
                if ref not in matched_d:
                    key = tuple(t.text for t in tokenize(text))
                    if key:
                        free_d[key].append(ref)
            for n, text in edit.added():
                ref = (fd.path_after, n)
                if ref not in matched_a:
                    key = tuple(t.text for t in tokenize(text))
                    if key:
                        free_a.append((key, ref))
    pairs = []
    for key, a in free_a:
        for d in free_d.get(key, ()):
            rank = (-_common_prefix(d[0], a[0]) - (d[0] == a[0]), abs(d[1] - a[1]), a, d)
            pairs.append((rank, d, a))
    return [StatementMatch(d, a, 1.0, MOVE) for d, a in _greedy(pairs)]
