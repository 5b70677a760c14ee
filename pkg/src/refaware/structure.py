"""Class and method line ranges of Java-like source via brace tracking."""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import LineOutOfRange

TOPLEVEL = "<toplevel>"

_CLASS_RE = re.compile(r"\b(class|interface|enum|record)\s+([^\W\d][\w$]*)")
_ANNOTATION_RE = re.compile(r"@\s*[\w$.]+(\s*\([^()]*\))?")
_METHOD_RE = re.compile(
    r"([^\W\d][\w$]*)\s*\(([^()]*)\)\s*(?:throws\s+[\w$.,\s<>]+)?\s*$"
)
_NOT_METHODS = frozenset(
    "if for while switch catch synchronized try do else return new throw super this".split()
)


@dataclass
class MethodSpan:
    name: str
    signature_text: str
    start_line: int
    end_line: int


@dataclass
class ClassSpan:
    name: str
    start_line: int
    end_line: int
    methods: list[MethodSpan] = field(default_factory=list)


@dataclass
class StructureIndex:
    n_lines: int
    classes: list[ClassSpan]

    def class_names(self) -> set[str]:
        return {c.name for c in self.classes}

    def has_method(self, class_name: str, signature: str) -> bool:
        return any(
            m.signature_text == signature
            for c in self.classes if c.name == class_name
            for m in c.methods
        )


def _blank_literals(text: str) -> list[str]:
    """Source lines with comments and string/char literal bodies blanked."""
    out = []
    i, n = 0, len(text)
    buf = []
    state = None  # None, "block", '"', "'"
    while i < n:
        ch = text[i]
        nxt = text[i + 1] if i + 1 < n else ""
        if ch == "\n":
            out.append("".join(buf))
            buf = []
            if state in ('"', "'"):
                state = None  # unterminated literal ends at the line break
            i += 1
            continue
        if state == "block":
            if ch == "*" and nxt == "/":
                state = None
                buf.append("  ")
                i += 2
            else:
                buf.append(" ")
                i += 1
            continue
        if state in ('"', "'"):
            if ch == "\\":
                buf.append("  " if nxt and nxt != "\n" else " ")
                i += 2 if nxt and nxt != "\n" else 1
                continue
            if ch == state:
                state = None
                buf.append(ch)
            else:
                buf.append(" ")
            i += 1
            continue
        if ch == "/" and nxt == "/":
            j = text.find("\n", i)
            j = n if j < 0 else j
            buf.append(" " * (j - i))
            i = j
            continue
        if ch == "/" and nxt == "*":
            state = "block"
            buf.append("  ")
            i += 2
            continue
        if ch in ('"', "'"):
            state = ch
        buf.append(ch)
        i += 1
    out.append("".join(buf))
    if text.endswith("\n"):
        out.pop()
    return out


def _signature(name: str, params: str) -> str:
    params = " ".join(params.split())
    return f"{name}({params})"


def parse_structure(text: str) -> StructureIndex:
    """Index class/interface/enum/record bodies and the methods inside them.

    Anonymous and local classes are not indexed; their lines belong to the
    enclosing method. Unbalanced input is handled leniently: stray closing
    braces are ignored and unclosed bodies end at the last line.
    """
    lines = _blank_literals(text) if text else []
    n_lines = len(lines)
    classes: list[ClassSpan] = []
    # frames: ("class", ClassSpan) | ("method", MethodSpan) | ("block", None)
    stack: list[tuple[str, object]] = []
    header: list[tuple[int, str]] = []  # (line, text) pieces since the last ; { }

    def header_text():
        return " ".join(t for _, t in header).strip()

    def header_start():
        for ln, t in header:
            if t.strip():
                return ln
        return None

    for ln, line in enumerate(lines, start=1):
        seg_start = 0
        for col, ch in enumerate(line):
            if ch not in "{};":
                continue
            header.append((ln, line[seg_start:col]))
            seg_start = col + 1
            if ch == ";":
                header.clear()
                continue
            if ch == "}":
                header.clear()
                if stack:
                    kind, span = stack.pop()
                    if kind in ("class", "method"):
                        span.end_line = ln
                continue
            # opening brace
            htext = header_text()
            start = header_start() or ln
            header.clear()
            in_code = any(k in ("method", "block") for k, _ in stack)
            top = stack[-1][0] if stack else None
            cm = _CLASS_RE.search(htext) if not in_code else None
            if cm:
                owner = ".".join(s.name for k, s in stack if k == "class")
                name = f"{owner}.{cm.group(2)}" if owner else cm.group(2)
                span = ClassSpan(name, start, ln)
                classes.append(span)
                stack.append(("class", span))
                continue
            if top == "class":
                stripped = _ANNOTATION_RE.sub(" ", htext)
                mm = _METHOD_RE.search(stripped)
                if mm and mm.group(1) not in _NOT_METHODS and "=" not in stripped[: mm.start()]:
                    before = stripped[: mm.start()].split()
                    if not before or before[-1] != "new":
                        method = MethodSpan(mm.group(1), _signature(mm.group(1), mm.group(2)), start, ln)
                        stack[-1][1].methods.append(method)
                        stack.append(("method", method))
                        continue
            stack.append(("block", None))
        header.append((ln, line[seg_start:]))
    for kind, span in stack:
        if kind in ("class", "method"):
            span.end_line = max(n_lines, span.start_line)
    toplevel = ClassSpan(TOPLEVEL, 1, n_lines)
    return StructureIndex(n_lines, [toplevel, *classes])


def enclosing(index: StructureIndex, line: int) -> tuple[str, str | None]:
    """Innermost (class, method-or-None) containing ``line``."""
    if not 1 <= line <= index.n_lines:
        raise LineOutOfRange(f"line {line} outside 1..{index.n_lines}")
    best_class = index.classes[0]
    for c in index.classes[1:]:
        if c.start_line <= line <= c.end_line:
            if best_class.name == TOPLEVEL or c.start_line >= best_class.start_line:
                best_class = c
    method = None
    for m in best_class.methods:
        if m.start_line <= line <= m.end_line:
            method = m.signature_text
    return best_class.name, method
