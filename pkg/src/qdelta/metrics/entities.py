"""Structural parse of Java source into classes, methods, and fields.

This is a declaration-level parser, not a full grammar: it matches
brackets, slices class bodies into member segments, and classifies each
segment. Statement internals stay as raw token ranges for the metric
walkers. Local and anonymous classes inside method bodies are not
lifted into the tree; their tokens simply belong to the enclosing
method.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .lexer import MODIFIER_KEYWORDS, Comment, Token, tokenize

TYPE_KEYWORDS = frozenset({"class", "interface", "enum"})

_OPEN = {"(": ")", "[": "]"}


class EntityTreeUnavailable(Exception):
    """Raised when the source is too broken to yield any structure."""


@dataclass
class MethodNode:
    name: str
    signature: str  # name(paramType,paramType,...)
    qualified_name: str  # Owner.name(paramTypes)
    start_line: int
    end_line: int
    seg: tuple[int, int]  # inclusive token index range of the declaration
    body: tuple[int, int] | None  # inclusive token range inside the braces
    modifiers: frozenset[str]
    doc: Comment | None


@dataclass
class FieldNode:
    names: tuple[str, ...]
    start_line: int
    end_line: int
    modifiers: frozenset[str]
    doc: Comment | None


@dataclass
class ClassNode:
    name: str
    qualified_name: str
    kind: str  # class | interface | enum
    start_line: int
    end_line: int
    seg: tuple[int, int]
    body: tuple[int, int]  # inclusive token range inside the braces
    name_token_index: int = -1  # the declaration's name identifier
    methods: list[MethodNode] = field(default_factory=list)
    fields: list[FieldNode] = field(default_factory=list)
    nested: list["ClassNode"] = field(default_factory=list)
    doc: Comment | None = None


@dataclass
class EntityTree:
    source: str
    tokens: list[Token]
    comments: list[Comment]
    classes: list[ClassNode]
    imports: frozenset[str]  # simple names brought in by single-type imports
    errors: list[str]

    def all_classes(self) -> list[ClassNode]:
        out: list[ClassNode] = []

        def walk(nodes: list[ClassNode]) -> None:
            for node in nodes:
                out.append(node)
                walk(node.nested)

        walk(self.classes)
        return out

    def all_methods(self) -> list[tuple[ClassNode, MethodNode]]:
        return [(c, m) for c in self.all_classes() for m in c.methods]

    @property
    def declared_type_names(self) -> frozenset[str]:
        return frozenset(c.name for c in self.all_classes())


def parse_entities(source: str) -> EntityTree:
    """Parse source text into an entity tree.

    Always returns a tree; recoverable problems land in ``tree.errors``.
    A tree with errors is treated as non-syntactic downstream.
    """
    tokens, comments, errors = tokenize(source)
    match = _match_braces(tokens, errors)
    segments = _scan_segments(tokens, 0, len(tokens) - 1, match)
    imports: set[str] = set()
    classes: list[ClassNode] = []
    for seg in segments:
        kind = _classify(tokens, seg)
        if kind == "import":
            name = _import_simple_name(tokens, seg)
            if name:
                imports.add(name)
        elif kind == "type":
            node = _parse_type(tokens, comments, seg, match, prefix="", errors=errors)
            if node:
                classes.append(node)
    return EntityTree(
        source=source,
        tokens=tokens,
        comments=comments,
        classes=classes,
        imports=frozenset(imports),
        errors=errors,
    )


def _match_braces(tokens: list[Token], errors: list[str]) -> dict[int, int]:
    match: dict[int, int] = {}
    stack: list[int] = []
    for i, tok in enumerate(tokens):
        if tok.kind != "op":
            continue
        if tok.text == "{":
            stack.append(i)
        elif tok.text == "}":
            if not stack:
                errors.append(f"unmatched '}}' at line {tok.line}")
                continue
            match[stack.pop()] = i
    for i in stack:
        errors.append(f"unclosed '{{' at line {tokens[i].line}")
    return match


def _scan_segments(
    tokens: list[Token], start: int, end: int, match: dict[int, int]
) -> list[tuple[int, int]]:
    """Slice a declaration region into member segments.

    A segment ends at a top-level ';' or at the matching '}' of a
    block-bodied member. A '{' that follows a top-level '=' is an array
    or anonymous-class initializer and stays inside its field segment.
    """
    segments: list[tuple[int, int]] = []
    i = start
    seg_start = start
    depth = 0  # parens and brackets
    saw_eq = False
    while i <= end:
        tok = tokens[i]
        if tok.kind == "op":
            if tok.text in _OPEN:
                depth += 1
            elif tok.text in (")", "]"):
                depth -= 1
            elif tok.text == "=" and depth == 0:
                saw_eq = True
            elif tok.text == ";" and depth == 0:
                segments.append((seg_start, i))
                i += 1
                seg_start = i
                saw_eq = False
                continue
            elif tok.text == "{" and depth == 0:
                close = match.get(i)
                if close is None or close > end:
                    # unbalanced: swallow the rest as one segment
                    segments.append((seg_start, end))
                    return segments
                if saw_eq:
                    i = close + 1
                    continue
                segments.append((seg_start, close))
                i = close + 1
                seg_start = i
                saw_eq = False
                continue
        i += 1
    if seg_start <= end:
        segments.append((seg_start, end))
    return segments


def _skip_annotations_and_modifiers(tokens: list[Token], i: int, end: int) -> int:
    while i <= end:
        tok = tokens[i]
        if tok.kind == "op" and tok.text == "@":
            if i + 1 <= end and tokens[i + 1].text == "interface":
                return i  # '@interface' declaration, not an annotation use
            i += 1
            while i + 1 <= end and tokens[i].kind == "ident" and tokens[i + 1].text == ".":
                i += 2
            if i <= end and tokens[i].kind == "ident":
                i += 1
            if i <= end and tokens[i].text == "(":
                depth = 0
                while i <= end:
                    if tokens[i].text == "(":
                        depth += 1
                    elif tokens[i].text == ")":
                        depth -= 1
                        if depth == 0:
                            i += 1
                            break
                    i += 1
            continue
        if tok.kind == "keyword" and tok.text in MODIFIER_KEYWORDS:
            i += 1
            continue
        break
    return i


def _classify(tokens: list[Token], seg: tuple[int, int]) -> str:
    s, e = seg
    first = tokens[s]
    if first.kind == "keyword" and first.text in ("package", "import"):
        return first.text
    i = _skip_annotations_and_modifiers(tokens, s, e)
    if i <= e and tokens[i].kind == "keyword" and tokens[i].text in TYPE_KEYWORDS:
        return "type"
    if i <= e and tokens[i].text == "@" and i + 1 <= e and tokens[i + 1].text == "interface":
        return "type"
    block_bodied = tokens[e].kind == "op" and tokens[e].text == "}"
    depth = 0
    for j in range(i, e + 1):
        tok = tokens[j]
        if tok.kind != "op":
            continue
        if tok.text in _OPEN:
            if tok.text == "(" and depth == 0:
                if j > i and tokens[j - 1].kind == "ident":
                    return "method"
                return "other"
            depth += 1
        elif tok.text in (")", "]"):
            depth -= 1
        elif tok.text == "=" and depth == 0:
            return "field"
        elif tok.text == "{" and depth == 0:
            return "initializer" if block_bodied else "field"
    return "field" if not block_bodied else "initializer"


def _import_simple_name(tokens: list[Token], seg: tuple[int, int]) -> str | None:
    s, e = seg
    body = tokens[s + 1 : e]  # between 'import' and ';'
    if not body:
        return None
    # wildcard and static-member imports contribute nothing to the type table
    if body[-1].text == "*" or body[0].text == "static":
        return None
    idents = [t.text for t in body if t.kind == "ident"]
    return idents[-1] if idents else None


def _attached_doc(comments: list[Comment], seg_start_tok: int) -> Comment | None:
    best = None
    for c in comments:
        if c.next_token_index == seg_start_tok and c.is_doc:
            best = c
    return best


def _parse_type(
    tokens: list[Token],
    comments: list[Comment],
    seg: tuple[int, int],
    match: dict[int, int],
    prefix: str,
    errors: list[str],
) -> ClassNode | None:
    s, e = seg
    i = _skip_annotations_and_modifiers(tokens, s, e)
    kind = "class"
    if tokens[i].text == "@" and i + 1 <= e and tokens[i + 1].text == "interface":
        kind = "interface"
        i += 2
    elif tokens[i].kind == "keyword" and tokens[i].text in TYPE_KEYWORDS:
        kind = tokens[i].text
        i += 1
    else:
        return None
    if i > e or tokens[i].kind != "ident":
        errors.append(f"type declaration without a name at line {tokens[s].line}")
        return None
    name = tokens[i].text
    name_index = i
    body_open = None
    for j in range(i, e + 1):
        if tokens[j].kind == "op" and tokens[j].text == "{":
            body_open = j
            break
    if body_open is None or match.get(body_open) != e:
        errors.append(f"malformed body for type {name} at line {tokens[s].line}")
        return None
    qualified = f"{prefix}.{name}" if prefix else name
    node = ClassNode(
        name=name,
        qualified_name=qualified,
        kind=kind,
        start_line=tokens[s].line,
        end_line=tokens[e].line,
        seg=seg,
        body=(body_open + 1, e - 1),
        name_token_index=name_index,
        doc=_attached_doc(comments, s),
    )
    if body_open + 1 <= e - 1:
        for member_seg in _scan_segments(tokens, body_open + 1, e - 1, match):
            member_kind = _classify(tokens, member_seg)
            if member_kind == "type":
                child = _parse_type(tokens, comments, member_seg, match, qualified, errors)
                if child:
                    node.nested.append(child)
            elif member_kind == "method":
                method = _parse_method(tokens, comments, member_seg, match, qualified)
                if method:
                    node.methods.append(method)
            elif member_kind == "field":
                node.fields.append(_parse_field(tokens, comments, member_seg))
    return node


def _parse_method(
    tokens: list[Token],
    comments: list[Comment],
    seg: tuple[int, int],
    match: dict[int, int],
    owner: str,
) -> MethodNode | None:
    s, e = seg
    i = _skip_annotations_and_modifiers(tokens, s, e)
    paren = None
    depth = 0
    for j in range(i, e + 1):
        tok = tokens[j]
        if tok.kind != "op":
            continue
        if tok.text == "(" and depth == 0:
            paren = j
            break
        if tok.text in _OPEN:
            depth += 1
        elif tok.text in (")", "]"):
            depth -= 1
    if paren is None or paren == s or tokens[paren - 1].kind != "ident":
        return None
    name = tokens[paren - 1].text
    # No tokens between modifiers and the name means no return type: that
    # is a constructor when the name matches the owner, otherwise it is an
    # enum constant with arguments, which is not a method.
    if paren - 1 == i and name != owner.rsplit(".", 1)[-1]:
        return None
    close = _match_paren(tokens, paren, e)
    if close is None:
        return None
    params = _param_types(tokens, paren + 1, close - 1)
    signature = f"{name}({','.join(params)})"
    body: tuple[int, int] | None = None
    if tokens[e].text == "}":
        body_open = None
        for j in range(close + 1, e + 1):
            if tokens[j].kind == "op" and tokens[j].text == "{":
                body_open = j
                break
        if body_open is not None and match.get(body_open) == e:
            body = (body_open + 1, e - 1)
    modifiers = frozenset(
        t.text for t in tokens[s:paren] if t.kind == "keyword" and t.text in MODIFIER_KEYWORDS
    )
    return MethodNode(
        name=name,
        signature=signature,
        qualified_name=f"{owner}.{signature}",
        start_line=tokens[s].line,
        end_line=tokens[e].line,
        seg=seg,
        body=body,
        modifiers=modifiers,
        doc=_attached_doc(comments, s),
    )


def _match_paren(tokens: list[Token], open_idx: int, end: int) -> int | None:
    depth = 0
    for j in range(open_idx, end + 1):
        if tokens[j].kind != "op":
            continue
        if tokens[j].text == "(":
            depth += 1
        elif tokens[j].text == ")":
            depth -= 1
            if depth == 0:
                return j
    return None


def _param_types(tokens: list[Token], start: int, end: int) -> list[str]:
    if start > end:
        return []
    groups: list[list[Token]] = [[]]
    depth = 0
    for j in range(start, end + 1):
        tok = tokens[j]
        if tok.kind == "op":
            if tok.text in ("(", "[", "<"):
                depth += 1
            elif tok.text in (")", "]", ">"):
                depth -= 1
            elif tok.text == "," and depth == 0:
                groups.append([])
                continue
        groups[-1].append(tok)
    types: list[str] = []
    for group in groups:
        toks = [t for t in group if not (t.kind == "keyword" and t.text == "final")]
        toks = _strip_annotations(toks)
        if len(toks) >= 2 and toks[-1].kind == "ident":
            toks = toks[:-1]  # drop the parameter name
        types.append("".join(t.text for t in toks))
    return [t for t in types if t]


def _strip_annotations(toks: list[Token]) -> list[Token]:
    out: list[Token] = []
    i = 0
    while i < len(toks):
        if toks[i].kind == "op" and toks[i].text == "@":
            i += 1
            if i < len(toks) and toks[i].kind == "ident":
                i += 1
            if i < len(toks) and toks[i].text == "(":
                depth = 0
                while i < len(toks):
                    if toks[i].text == "(":
                        depth += 1
                    elif toks[i].text == ")":
                        depth -= 1
                        if depth == 0:
                            i += 1
                            break
                    i += 1
            continue
        out.append(toks[i])
        i += 1
    return out


def _parse_field(
    tokens: list[Token], comments: list[Comment], seg: tuple[int, int]
) -> FieldNode:
    """One declaration statement counts as one member, however many
    declarators it carries; the recorded name is the last identifier
    before the first top-level '=' (or before the terminator)."""
    s, e = seg
    i = _skip_annotations_and_modifiers(tokens, s, e)
    name: str | None = None
    depth = 0
    for j in range(i, e + 1):
        tok = tokens[j]
        if tok.kind == "op":
            if tok.text in _OPEN:
                depth += 1
            elif tok.text in (")", "]"):
                depth = max(0, depth - 1)
            elif tok.text == "=" and depth == 0:
                break
        elif tok.kind == "ident" and depth == 0:
            name = tok.text
    modifiers = frozenset(
        t.text for t in tokens[s:i] if t.kind == "keyword" and t.text in MODIFIER_KEYWORDS
    )
    return FieldNode(
        names=(name,) if name else (),
        start_line=tokens[s].line,
        end_line=tokens[e].line,
        modifiers=modifiers,
        doc=_attached_doc(comments, s),
    )
