"""Tokenizer for Java source text.

Produces a flat token stream (comments kept separately) with 1-based
line positions. The classification of tokens into operators and
operands for the token-count metrics follows the normative table in
docs/metrics.md; keep the two in sync.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized
    this throw throws transient try void volatile while""".split()
)

# true/false/null are intentionally absent from KEYWORDS: they lex as
# identifiers and therefore count as literal operands
MODIFIER_KEYWORDS = frozenset(
    "public private protected static final abstract native synchronized transient volatile strictfp default".split()
)

# longest match first
OPERATORS = [
    ">>>=", ">>=", "<<=", ">>>", "...",
    "->", "::", "==", "!=", "<=", ">=", "&&", "||", "++", "--",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<", ">>",
    "+", "-", "*", "/", "%", "=", "<", ">", "!", "&", "|", "^", "~",
    "?", ":", ".", ",", ";", "(", ")", "{", "}", "[", "]", "@",
]

# Openers count as the operator occurrence for their bracket pair;
# closers carry no weight of their own.
NON_COUNTING_OPERATORS = frozenset({")", "}", "]"})

_NUMBER = re.compile(
    r"0[xX][0-9a-fA-F_]+[lL]?"
    r"|0[bB][01_]+[lL]?"
    r"|(?:\d[\d_]*)?\.\d[\d_]*(?:[eE][+-]?\d+)?[fFdD]?"
    r"|\d[\d_]*\.(?:[eE][+-]?\d+)?[fFdD]?"
    r"|\d[\d_]*(?:[eE][+-]?\d+)?[fFdDlL]?"
)
_IDENT = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")


@dataclass(frozen=True)
class Token:
    kind: str  # keyword | ident | number | string | char | op
    text: str
    line: int

    @property
    def is_operand(self) -> bool:
        if self.kind in ("number", "string", "char"):
            return True
        if self.kind == "ident":
            return True
        return False  # keywords and operators

    @property
    def counts_as_operator(self) -> bool:
        if self.kind == "keyword":
            return True
        if self.kind == "op":
            return self.text not in NON_COUNTING_OPERATORS
        return False


@dataclass(frozen=True)
class Comment:
    text: str
    line: int  # first line
    end_line: int
    is_doc: bool  # /** ... */ block
    is_block: bool
    next_token_index: int = -1  # index of the first code token after this comment


class LexError(Exception):
    def __init__(self, message: str, line: int):
        super().__init__(f"{message} (line {line})")
        self.line = line


def tokenize(source: str) -> tuple[list[Token], list[Comment], list[str]]:
    """Lex Java source into (code tokens, comments, error messages)."""
    tokens: list[Token] = []
    comments: list[Comment] = []
    errors: list[str] = []
    i = 0
    line = 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            line += 1
            i += 1
            continue
        if ch in " \t\r\f":
            i += 1
            continue
        if source.startswith("//", i):
            end = source.find("\n", i)
            end = n if end == -1 else end
            comments.append(Comment(source[i:end], line, line, False, False, len(tokens)))
            i = end
            continue
        if source.startswith("/*", i):
            close = source.find("*/", i + 2)
            if close == -1:
                errors.append(f"unterminated block comment at line {line}")
                text = source[i:]
                comments.append(
                    Comment(
                        text, line, line + text.count("\n"),
                        text.startswith("/**"), True, len(tokens),
                    )
                )
                break
            text = source[i : close + 2]
            is_doc = text.startswith("/**") and len(text) > 4
            comments.append(
                Comment(text, line, line + text.count("\n"), is_doc, True, len(tokens))
            )
            line += text.count("\n")
            i = close + 2
            continue
        if source.startswith('"""', i):
            close = source.find('"""', i + 3)
            if close == -1:
                errors.append(f"unterminated text block at line {line}")
                break
            text = source[i : close + 3]
            tokens.append(Token("string", text, line))
            line += text.count("\n")
            i = close + 3
            continue
        if ch == '"':
            j = i + 1
            while j < n and source[j] != '"':
                if source[j] == "\\":
                    j += 1
                elif source[j] == "\n":
                    break
                j += 1
            if j >= n or source[j] != '"':
                errors.append(f"unterminated string literal at line {line}")
                i = j
                continue
            tokens.append(Token("string", source[i : j + 1], line))
            i = j + 1
            continue
        if ch == "'":
            j = i + 1
            while j < n and source[j] != "'":
                if source[j] == "\\":
                    j += 1
                elif source[j] == "\n":
                    break
                j += 1
            if j >= n or source[j] != "'":
                errors.append(f"unterminated char literal at line {line}")
                i = j
                continue
            tokens.append(Token("char", source[i : j + 1], line))
            i = j + 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            m = _NUMBER.match(source, i)
            if m:
                tokens.append(Token("number", m.group(), line))
                i = m.end()
                continue
        m = _IDENT.match(source, i)
        if m:
            word = m.group()
            kind = "keyword" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, line))
            i = m.end()
            continue
        for op in OPERATORS:
            if source.startswith(op, i):
                tokens.append(Token("op", op, line))
                i += len(op)
                break
        else:
            errors.append(f"unexpected character {ch!r} at line {line}")
            i += 1
    return tokens, comments, errors
