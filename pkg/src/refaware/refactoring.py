"""Refactoring instances: loading miner reports, builtin rename/move
detection, and token-level attribution of a changed line to an instance.

The report format is the JSON emitted by the common Java refactoring miner::

    {"commits": [{"repository": "...", "sha1": "...", "url": "...",
      "refactorings": [{"type": "Rename Variable", "description": "...",
        "leftSideLocations": [{"filePath": "...", "startLine": 1, "endLine": 1,
          "startColumn": 5, "endColumn": 9, "codeElementType": "...",
          "description": "...", "codeElement": "..."}],
        "rightSideLocations": [...]}]}]}
"""
from __future__ import annotations

import json
import re
from collections import defaultdict
from dataclasses import dataclass, field, replace

from .errors import NoIntersection, SchemaError
from .tokenizer import IDENTIFIER, Token, tokenize

EXTERNAL = "external_report"
BUILTIN = "builtin"

# type name -> (element kind, alteration) for refactorings that alter a name
NAME_ALTERING = {
    "Rename Class": ("class", "rename"),
    "Move And Rename Class": ("class", "rename"),
    "Rename Method": ("method", "rename"),
    "Move And Rename Method": ("method", "rename"),
    "Rename Attribute": ("attribute", "rename"),
    "Move And Rename Attribute": ("attribute", "rename"),
    "Rename Parameter": ("parameter", "rename"),
    "Rename Variable": ("variable", "rename"),
    "Add Parameter": ("parameter", "add"),
    "Remove Parameter": ("parameter", "remove"),
}

MOVE_STATEMENT = "Move Statement"


@dataclass(frozen=True)
class CodeRange:
    path: str
    start_line: int
    end_line: int
    start_column: int | None = None
    end_column: int | None = None
    element_type: str = ""
    element_name: str = ""
    description: str = ""

    def __post_init__(self):
        if self.start_line > self.end_line:
            raise ValueError(f"range {self.start_line}..{self.end_line} is reversed")

    def covers(self, path: str, line: int) -> bool:
        return path == self.path and self.start_line <= line <= self.end_line


@dataclass(frozen=True)
class RefactoringInstance:
    type_name: str
    description: str = ""
    left_ranges: tuple[CodeRange, ...] = ()
    right_ranges: tuple[CodeRange, ...] = ()
    origin: str = EXTERNAL
    commit: str = ""
    ident: str = field(default="", compare=False)

    def ranges(self, side: str) -> tuple[CodeRange, ...]:
        return self.left_ranges if side == "before" else self.right_ranges

    def covers(self, side: str, path: str, line: int) -> bool:
        return any(r.covers(path, line) for r in self.ranges(side))

    def paths(self) -> set[str]:
        return {r.path for r in self.left_ranges + self.right_ranges}


# -- report I/O ---------------------------------------------------------------

_LOCATION_FIELDS = (
    ("filePath", "path", str),
    ("startLine", "start_line", int),
    ("endLine", "end_line", int),
)


def _load_range(obj, path) -> CodeRange:
    if not isinstance(obj, dict):
        raise SchemaError("location must be an object", path)
    kw = {}
    for key, attr, typ in _LOCATION_FIELDS:
        if key not in obj:
            raise SchemaError("missing field", f"{path}.{key}")
        value = obj[key]
        if not isinstance(value, typ) or isinstance(value, bool):
            raise SchemaError(f"expected {typ.__name__}", f"{path}.{key}")
        kw[attr] = value
    for key, attr in (("startColumn", "start_column"), ("endColumn", "end_column")):
        value = obj.get(key)
        if value is not None and (not isinstance(value, int) or isinstance(value, bool)):
            raise SchemaError("expected int", f"{path}.{key}")
        # the miner writes 0 for "no column information"
        kw[attr] = value if value else None
    if kw["start_line"] > kw["end_line"]:
        raise SchemaError("startLine after endLine", path)
    return CodeRange(
        element_type=str(obj.get("codeElementType", "")),
        element_name=str(obj.get("codeElement") or ""),
        description=str(obj.get("description", "")),
        **kw,
    )


def load_report(json_text: str) -> list[RefactoringInstance]:
    """Parse a refactoring report; every instance carries its commit id."""
    try:
        doc = json.loads(json_text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("commits"), list):
        raise SchemaError("expected an object with a 'commits' array")
    out = []
    for ci, commit in enumerate(doc["commits"]):
        cpath = f"$.commits[{ci}]"
        if not isinstance(commit, dict):
            raise SchemaError("commit entry must be an object", cpath)
        sha = commit.get("sha1")
        if not isinstance(sha, str) or not sha:
            raise SchemaError("missing sha1", f"{cpath}.sha1")
        refs = commit.get("refactorings", [])
        if not isinstance(refs, list):
            raise SchemaError("expected an array", f"{cpath}.refactorings")
        for ri, ref in enumerate(refs):
            rpath = f"{cpath}.refactorings[{ri}]"
            if not isinstance(ref, dict):
                raise SchemaError("refactoring must be an object", rpath)
            type_name = ref.get("type")
            if not isinstance(type_name, str) or not type_name:
                raise SchemaError("missing type", f"{rpath}.type")
            sides = []
            for key in ("leftSideLocations", "rightSideLocations"):
                locs = ref.get(key, [])
                if not isinstance(locs, list):
                    raise SchemaError("expected an array", f"{rpath}.{key}")
                sides.append(tuple(_load_range(loc, f"{rpath}.{key}[{li}]") for li, loc in enumerate(locs)))
            out.append(
                RefactoringInstance(
                    type_name, str(ref.get("description", "")), sides[0], sides[1], EXTERNAL, sha,
                    ident=f"ext-{sha[:10]}-{ri}",
                )
            )
    return out


def _dump_range(r: CodeRange) -> dict:
    return {
        "filePath": r.path,
        "startLine": r.start_line,
        "endLine": r.end_line,
        "startColumn": r.start_column or 0,
        "endColumn": r.end_column or 0,
        "codeElementType": r.element_type,
        "description": r.description,
        "codeElement": r.element_name or None,
    }


def dump_report(instances) -> str:
    """Serialize instances back into the report format, grouped by commit."""
    by_commit: dict[str, list] = {}
    for inst in instances:
        by_commit.setdefault(inst.commit, []).append(
            {
                "type": inst.type_name,
                "description": inst.description,
                "leftSideLocations": [_dump_range(r) for r in inst.left_ranges],
                "rightSideLocations": [_dump_range(r) for r in inst.right_ranges],
            }
        )
    doc = {"commits": [{"sha1": sha, "refactorings": refs} for sha, refs in by_commit.items()]}
    return json.dumps(doc, indent=2)


def group_by_commit(instances) -> dict[str, list[RefactoringInstance]]:
    grouped = defaultdict(list)
    for inst in instances:
        grouped[inst.commit].append(inst)
    return dict(grouped)


# -- names --------------------------------------------------------------------

_IDENT = r"[^\W\d][\w$]*"
_RENAME_DECL_RE = re.compile(rf"^(?:Move And )?Rename (?:Variable|Parameter|Attribute) .*?\b({_IDENT}) : .*? to .*?\b({_IDENT}) : ")
_RENAME_METHOD_RE = re.compile(rf"^(?:Move And )?Rename Method .*?({_IDENT})\(.*? (?:moved and )?renamed to .*?({_IDENT})\(")
_RENAME_CLASS_RE = re.compile(r"^(?:Move And )?Rename Class (\S+) (?:moved and )?renamed to (\S+)")
_PARAM_RE = re.compile(rf"^(?:Add|Remove) Parameter ({_IDENT}) : .*? in method .*?({_IDENT})\(")


def identifier_of(code_element: str) -> str | None:
    """Best-effort identifier from a miner ``codeElement`` string."""
    text = code_element.strip()
    if not text:
        return None
    if "(" in text:
        m = re.search(rf"({_IDENT})\s*\(", text)
        return m.group(1) if m else None
    text = text.split(" : ", 1)[0].strip()
    text = re.sub(r"<.*>", "", text)
    words = text.split()
    if not words:
        return None
    last = words[-1].rsplit(".", 1)[-1]
    return last if re.fullmatch(_IDENT, last) else None


def element_names(inst: RefactoringInstance) -> tuple[str | None, str | None]:
    """(old name, new name) for a name-altering instance, else (None, None)."""
    kind = NAME_ALTERING.get(inst.type_name)
    if kind is None:
        return None, None
    desc = inst.description
    if kind[1] == "rename":
        for rx in (_RENAME_DECL_RE, _RENAME_METHOD_RE, _RENAME_CLASS_RE):
            m = rx.match(desc)
            if m:
                return m.group(1).rsplit(".", 1)[-1], m.group(2).rsplit(".", 1)[-1]
        old = next((identifier_of(r.element_name) for r in inst.left_ranges if r.element_name), None)
        new = next((identifier_of(r.element_name) for r in inst.right_ranges if r.element_name), None)
        return old, new
    m = _PARAM_RE.match(desc)
    name = m.group(1) if m else None
    if name is None:
        side = inst.right_ranges if kind[1] == "add" else inst.left_ranges
        name = next((identifier_of(r.element_name) for r in side if r.element_name), None)
    return (None, name) if kind[1] == "add" else (name, None)


def owning_method(inst: RefactoringInstance) -> str | None:
    """Method whose parameter list an Add/Remove Parameter instance changes."""
    m = _PARAM_RE.match(inst.description)
    return m.group(2) if m else None


def is_rename(type_name: str) -> bool:
    return NAME_ALTERING.get(type_name, ("", ""))[1] == "rename"


# -- token attribution --------------------------------------------------------


def refactoring_token_spans(inst, side, path, line, text=None, tokens=None) -> list[range]:
    """Token index ranges on one line that ``inst`` explains.

    Column windows bound the span when present. Rename types explain only
    the tokens equal to the old (before side) or new (after side) name; other
    types explain every token in the window, or the whole line.
    """
    if tokens is None:
        tokens = tokenize(text or "")
    ranges = [r for r in inst.ranges(side) if r.covers(path, line)]
    if not ranges:
        raise NoIntersection(f"{inst.type_name} does not cover {path}:{line} on the {side} side")
    name = None
    if is_rename(inst.type_name):
        old, new = element_names(inst)
        name = old if side == "before" else new
    picked: set[int] = set()
    for r in ranges:
        for k, tok in enumerate(tokens):
            if not _inside(tok, r, line):
                continue
            if name is not None and tok.text != name:
                continue
            picked.add(k)
    return _to_ranges(picked)


def _inside(tok: Token, r: CodeRange, line: int) -> bool:
    if r.start_column is not None and line == r.start_line and tok.col < r.start_column:
        return False
    if r.end_column is not None and line == r.end_line and tok.end_col > r.end_column:
        return False
    return True


def _to_ranges(indices) -> list[range]:
    out: list[range] = []
    for k in sorted(indices):
        if out and out[-1].stop == k:
            out[-1] = range(out[-1].start, k + 1)
        else:
            out.append(range(k, k + 1))
    return out


def span_indices(spans) -> set[int]:
    return {k for r in spans for k in r}


# -- builtin detection --------------------------------------------------------

_TYPE_KEYWORDS = frozenset("boolean byte char double float int long short void var".split())
_NOT_A_TYPE = frozenset("return new throw else case yield assert".split())
_LOCAL_RENAMES = frozenset({"Rename Variable", "Rename Parameter"})
# modifiers that cannot appear on a local variable
_MEMBER_MODIFIERS = frozenset("private protected public static transient volatile".split())


def _substitution(d: list[Token], a: list[Token]):
    """The single identifier substitution turning d into a, or None."""
    if len(d) != len(a) or not d:
        return None
    sub = None
    positions = []
    for k, (x, y) in enumerate(zip(d, a)):
        if x.text == y.text:
            continue
        if x.kind != IDENTIFIER or y.kind != IDENTIFIER:
            return None
        if sub is None:
            sub = (x.text, y.text)
        elif sub != (x.text, y.text):
            return None
        positions.append(k)
    if sub is None:
        return None
    return sub, positions


def _is_type_token(tok: Token) -> bool:
    return tok.kind == IDENTIFIER or tok.text in _TYPE_KEYWORDS or tok.text in (">", "]")


def _declaration_kind(tokens: list[Token], k: int) -> str | None:
    """Classify tokens[k] as a declared name, or None for a plain usage."""
    prev = tokens[k - 1] if k > 0 else None
    nxt = tokens[k + 1] if k + 1 < len(tokens) else None
    if prev is not None and prev.text in ("class", "interface", "enum", "record"):
        return "Rename Class"
    if prev is None or not _is_type_token(prev) or prev.text in _NOT_A_TYPE:
        return None
    if k >= 2 and tokens[k - 2].text in (".", "new"):
        return None
    if nxt is not None and nxt.text == "(":
        return "Rename Method"
    if nxt is None or nxt.text in ("=", ";", ",", ")", ":", "["):
        depth, opener = 0, None
        for j in range(k - 1, -1, -1):
            t = tokens[j].text
            if t == ")":
                depth += 1
            elif t == "(":
                if depth == 0:
                    opener = j
                    break
                depth -= 1
        if opener is not None and opener >= 1:
            callee = tokens[opener - 1]
            before = tokens[opener - 2] if opener >= 2 else None
            # method header (type before the name) or constructor (modifier or nothing)
            header = before is None or before.text in _MEMBER_MODIFIERS or (
                _is_type_token(before) and before.text not in _NOT_A_TYPE
            )
            if callee.kind == IDENTIFIER and header:
                return "Rename Parameter"
            return None
        if any(t.text in _MEMBER_MODIFIERS for t in tokens[:k]):
            return "Rename Attribute"
        return "Rename Variable"
    return None


def _unmatched_substitutions(fd, matched_d, matched_a):
    """Unmatched same-edit-list pairs differing by one identifier substitution."""
    found = []
    for edit in fd.edit_lists:
        dels = [(n, tokenize(t)) for n, t in edit.deleted() if (fd.path_before, n) not in matched_d]
        adds = [(n, tokenize(t)) for n, t in edit.added() if (fd.path_after, n) not in matched_a]
        cands = []
        for d, dt in dels:
            for a, at in adds:
                sub = _substitution(dt, at)
                if sub is not None:
                    cands.append(((abs(d - a), d, a), d, a, dt, sub))
        used_d, used_a = set(), set()
        for _, d, a, dt, sub in sorted(cands, key=lambda c: c[0]):
            if d in used_d or a in used_a:
                continue
            used_d.add(d)
            used_a.add(a)
            found.append(((fd.path_before, d), (fd.path_after, a), dt, sub))
    return found


def detect_builtin(file_diffs, matches) -> list[RefactoringInstance]:
    """Detect renames and moves from statement pairs.

    A rename needs the same old->new identifier substitution on every pair of
    the file that renames ``old``, at least two such pairs, and at least one
    pair where the substituted name sits at a declaration site. Pairs come
    from ``matches`` and, for lines the matcher left alone, from the
    closest unmatched lines of the same edit-list.
    """
    texts_before, texts_after = {}, {}
    for fd in file_diffs:
        for edit in fd.edit_lists:
            for n, t in edit.deleted():
                texts_before[(fd.path_before, n)] = t
            for n, t in edit.added():
                texts_after[(fd.path_after, n)] = t

    out: list[RefactoringInstance] = []
    per_file: dict[str, list] = defaultdict(list)
    for m in sorted(matches, key=lambda m: (m.add_ref, m.del_ref)):
        d_text = texts_before.get(m.del_ref)
        a_text = texts_after.get(m.add_ref)
        if d_text is None or a_text is None:
            continue
        d_tok, a_tok = tokenize(d_text), tokenize(a_text)
        if [t.text for t in d_tok] == [t.text for t in a_tok]:
            if m.del_ref != m.add_ref and d_tok:
                out.append(
                    RefactoringInstance(
                        MOVE_STATEMENT,
                        f"Move Statement {m.del_ref[0]}:{m.del_ref[1]} to {m.add_ref[0]}:{m.add_ref[1]}",
                        (CodeRange(m.del_ref[0], m.del_ref[1], m.del_ref[1], element_type="STATEMENT"),),
                        (CodeRange(m.add_ref[0], m.add_ref[1], m.add_ref[1], element_type="STATEMENT"),),
                        BUILTIN,
                    )
                )
            continue
        found = _substitution(d_tok, a_tok)
        if found is not None:
            per_file[m.add_ref[0]].append((m.del_ref, m.add_ref, d_tok, found))

    matched_d = {m.del_ref for m in matches}
    matched_a = {m.add_ref for m in matches}
    for fd in file_diffs:
        if fd.path_before is not None and fd.path_after is not None:
            per_file[fd.path_after].extend(_unmatched_substitutions(fd, matched_d, matched_a))

    entries = []
    for path in sorted(per_file):
        for d_ref, a_ref, d_tok, ((old, new), positions) in sorted(per_file[path], key=lambda e: (e[1], e[0])):
            decl = None
            for k in positions:
                decl = decl or _declaration_kind(d_tok, k)
            entries.append((path, old, new, decl, d_ref, a_ref))
    targets = defaultdict(set)
    for path, old, new, *_ in entries:
        targets[(path, old)].add(new)
    consistent = [e for e in entries if len(targets[(e[0], e[1])]) == 1]

    emitted = set()
    for path, old, new, kind, _, _ in consistent:
        if kind is None:
            continue
        local = kind in _LOCAL_RENAMES
        key = (path if local else None, old, new, kind)
        if key in emitted:
            continue
        emitted.add(key)
        sites = [e for e in consistent if (e[1], e[2]) == (old, new) and (not local or e[0] == path)]
        if len(sites) < 2:
            continue
        decls = [e for e in sites if e[3] == kind]
        left = tuple(CodeRange(d[0], d[1], d[1], element_type="DECLARATION", element_name=old) for *_, d, _ in decls)
        right = tuple(CodeRange(a[0], a[1], a[1], element_type="DECLARATION", element_name=new) for *_, a in decls)
        out.append(RefactoringInstance(kind, _rename_description(kind, old, new), left, right, BUILTIN))
    return out


def _rename_description(type_name, old, new):
    if type_name == "Rename Method":
        return f"Rename Method {old}() renamed to {new}()"
    if type_name == "Rename Class":
        return f"Rename Class {old} renamed to {new}"
    return f"{type_name} {old} : ? to {new} : ?"


def merge_instances(external, builtin) -> list[RefactoringInstance]:
    """External instances win: drop builtin ones touching a line they cover."""
    covered = set()
    for inst in external:
        for side in ("before", "after"):
            for r in inst.ranges(side):
                for n in range(r.start_line, r.end_line + 1):
                    covered.add((side, r.path, n))
    kept = list(external)
    for inst in builtin:
        clash = any(
            (side, r.path, n) in covered
            for side in ("before", "after")
            for r in inst.ranges(side)
            for n in range(r.start_line, r.end_line + 1)
        )
        if not clash:
            kept.append(inst)
    return kept


def with_ids(instances, prefix: str) -> list[RefactoringInstance]:
    return [inst if inst.ident else replace(inst, ident=f"{prefix}-{k}") for k, inst in enumerate(instances)]
