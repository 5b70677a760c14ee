"""Line tokenizer for Java-like source and term-frequency cosine similarity."""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass

JAVA_KEYWORDS = frozenset(
    """
    abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized
    this throw throws transient try void volatile while true false null var
    record yield sealed permits non-sealed
    """.split()
)

IDENTIFIER = "identifier"
KEYWORD = "keyword"
NUMBER = "number"
STRING = "string_literal"
CHAR = "char_literal"
OPERATOR = "operator"
PUNCTUATION = "punctuation"

_OPERATORS = sorted(
    """>>>= <<= >>= >>> -> :: ++ -- && || == != <= >= += -= *= /= %= &= |= ^=
    << >> + - * / % = < > ! & | ^ ~ ? : @""".split(),
    key=len,
    reverse=True,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<line_comment>//.*)
  | (?P<block_comment>/\*.*?(?:\*/|$))
  | (?P<string>"(?:[^"\\]|\\.)*(?:"|\\?$))
  | (?P<char>'(?:[^'\\]|\\.)*(?:'|\\?$))
  | (?P<number>
        0[xX][0-9a-fA-F_]*[lL]?
      | 0[bB][01_]*[lL]?
      | (?:\d[\d_]*(?:\.[\d_]*)?|\.\d[\d_]*)(?:[eE][+-]?\d+)?[fFdDlL]?
    )
  | (?P<ident>(?:[^\W\d]|\$)[\w$]*)
  | (?P<op>"""
    + "|".join(re.escape(o) for o in _OPERATORS)
    + r""")
  | (?P<other>\S)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    text: str
    kind: str
    col: int = 0  # 1-indexed start column

    @property
    def end_col(self) -> int:
        """1-indexed inclusive end column."""
        return self.col + len(self.text) - 1


def tokenize(line: str) -> list[Token]:
    """Split one source line into tokens, dropping whitespace and comments."""
    tokens: list[Token] = []
    for m in _TOKEN_RE.finditer(line):
        kind = m.lastgroup
        text = m.group()
        if kind in ("ws", "line_comment", "block_comment"):
            continue
        col = m.start() + 1
        if kind == "ident":
            tokens.append(Token(text, KEYWORD if text in JAVA_KEYWORDS else IDENTIFIER, col))
        elif kind == "number":
            tokens.append(Token(text, NUMBER, col))
        elif kind == "string":
            tokens.append(Token(text, STRING, col))
        elif kind == "char":
            tokens.append(Token(text, CHAR, col))
        elif kind == "op":
            tokens.append(Token(text, OPERATOR, col))
        else:
            tokens.append(Token(text, PUNCTUATION, col))
    return tokens


def token_texts(line: str) -> list[str]:
    return [t.text for t in tokenize(line)]


def term_freq(tokens) -> Counter:
    """Raw token counts; accepts Tokens or plain strings."""
    return Counter(t.text if isinstance(t, Token) else t for t in tokens)


def cosine(a: Counter, b: Counter) -> float:
    """Cosine of two count vectors; 0 when either side is empty."""
    if not a or not b:
        return 0.0
    if len(a) > len(b):
        a, b = b, a
    dot = sum(n * b[t] for t, n in a.items() if t in b)
    if dot == 0:
        return 0.0
    na = sum(n * n for n in a.values())
    nb = sum(n * n for n in b.values())
    # integer product under one sqrt keeps perfect squares exact (4/5 stays 0.8)
    return min(1.0, dot / math.sqrt(na * nb))


def line_similarity(a: str, b: str) -> float:
    return cosine(term_freq(tokenize(a)), term_freq(tokenize(b)))
