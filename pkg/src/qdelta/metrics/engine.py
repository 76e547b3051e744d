"""Per-entity metric computation over a parsed file.

All definitions follow the normative tables in docs/metrics.md. The
oracle fixtures in the test suite hand-count against those same tables,
so any change here must update the docs (and will break the oracle).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

from .catalog import CLASS_METRICS, METHOD_METRICS
from .entities import ClassNode, EntityTree, FieldNode, MethodNode
from .lexer import Token

_DECISION_KEYWORDS = frozenset({"if", "for", "while", "case", "catch"})
_STRUCT_KEYWORDS = frozenset({"if", "for", "while", "do", "switch", "try"})


@dataclass(frozen=True)
class EntityMetrics:
    entity_kind: str  # "method" | "class"
    entity_key: str
    values: dict[str, float]

    def __post_init__(self) -> None:
        expected = METHOD_METRICS if self.entity_kind == "method" else CLASS_METRICS
        missing = set(expected) - set(self.values)
        if missing:
            raise ValueError(f"missing metrics for {self.entity_key}: {sorted(missing)}")


def _ln(x: float) -> float:
    return math.log(x) if x > 0 else 0.0


def _nlog2n(n: int) -> float:
    return n * math.log2(n) if n > 0 else 0.0


@dataclass(frozen=True)
class HalsteadCounts:
    n1: int  # distinct operators
    n2: int  # distinct operands
    N1: int  # total operators
    N2: int  # total operands

    @property
    def hpl(self) -> float:
        return float(self.N1 + self.N2)

    @property
    def hpv(self) -> float:
        return float(self.n1 + self.n2)

    @property
    def hvol(self) -> float:
        return self.hpl * math.log2(self.hpv) if self.hpv > 1 else 0.0

    @property
    def hdif(self) -> float:
        return (self.n1 / 2.0) * (self.N2 / self.n2) if self.n2 > 0 else 0.0

    @property
    def heff(self) -> float:
        return self.hdif * self.hvol

    @property
    def htrp(self) -> float:
        return self.heff / 18.0

    @property
    def hcpl(self) -> float:
        return _nlog2n(self.n1) + _nlog2n(self.n2)


def halstead_counts(tokens: Iterable[Token]) -> HalsteadCounts:
    ops: dict[str, int] = {}
    operands: dict[str, int] = {}
    for tok in tokens:
        if tok.is_operand:
            operands[tok.text] = operands.get(tok.text, 0) + 1
        elif tok.counts_as_operator:
            ops[tok.text] = ops.get(tok.text, 0) + 1
    return HalsteadCounts(
        n1=len(ops), n2=len(operands), N1=sum(ops.values()), N2=sum(operands.values())
    )


def maintainability_index(hvol: float, mccc: float, lloc: float) -> float:
    return 171.0 - 5.2 * _ln(hvol) - 0.23 * mccc - 16.2 * _ln(lloc)


def _is_wildcard_question(tokens: list[Token], i: int, end: int) -> bool:
    if i + 1 > end:
        return False
    nxt = tokens[i + 1]
    if nxt.kind == "keyword" and nxt.text in ("extends", "super"):
        return True
    return nxt.kind == "op" and nxt.text in (">", ",", ")")


def cyclomatic_complexity(tokens: list[Token], body: tuple[int, int] | None) -> int:
    """1 + decision points: if / for / while / case / catch keywords,
    ternary conditionals, and short-circuit operators. A do-while loop
    is counted once, at its 'while' token."""
    if body is None:
        return 1
    b0, b1 = body
    count = 0
    for i in range(b0, min(b1, len(tokens) - 1) + 1):
        tok = tokens[i]
        if tok.kind == "keyword" and tok.text in _DECISION_KEYWORDS:
            count += 1
        elif tok.kind == "op":
            if tok.text in ("&&", "||"):
                count += 1
            elif tok.text == "?" and not _is_wildcard_question(tokens, i, b1):
                count += 1
    return 1 + count


def _skip_parens(tokens: list[Token], i: int, end: int) -> int:
    """tokens[i] is '('; return the index just past its match."""
    depth = 0
    while i <= end:
        if tokens[i].kind == "op":
            if tokens[i].text == "(":
                depth += 1
            elif tokens[i].text == ")":
                depth -= 1
                if depth == 0:
                    return i + 1
        i += 1
    return end + 1


def _match_brace(tokens: list[Token], i: int, end: int) -> int:
    """tokens[i] is '{'; return the index of its matching '}'."""
    depth = 0
    for j in range(i, end + 1):
        if tokens[j].kind == "op":
            if tokens[j].text == "{":
                depth += 1
            elif tokens[j].text == "}":
                depth -= 1
                if depth == 0:
                    return j
    return end


def nesting_levels(tokens: list[Token], body: tuple[int, int] | None) -> tuple[int, int]:
    """(NL, NLE) for a method body.

    Control structures (if, for, while, do, switch, try) deepen both
    counters. A direct 'else if' continues the ladder at the same depth
    for both. An if opening a braced else block deepens NL but, as the
    ladder's next rung, not NLE.
    """
    if body is None:
        return 0, 0
    b0, b1 = body
    max_nl = 0
    max_nle = 0

    def record(dnl: int, dnle: int) -> None:
        nonlocal max_nl, max_nle
        max_nl = max(max_nl, dnl)
        max_nle = max(max_nle, dnle)

    def block(i: int, dnl: int, dnle: int) -> int:
        """tokens[i] is '{'; walk the statements inside."""
        close = _match_brace(tokens, i, b1)
        j = i + 1
        while j < close:
            j = stmt(j, dnl, dnle)
        return close + 1

    def if_stmt(i: int, dnl: int, dnle: int) -> int:
        record(dnl + 1, dnle + 1)
        i += 1
        if i <= b1 and tokens[i].text == "(":
            i = _skip_parens(tokens, i, b1)
        i = stmt(i, dnl + 1, dnle + 1)
        if i <= b1 and tokens[i].kind == "keyword" and tokens[i].text == "else":
            i += 1
            if i > b1:
                return i
            if tokens[i].kind == "keyword" and tokens[i].text == "if":
                return if_stmt(i, dnl, dnle)
            if tokens[i].text == "{":
                close = _match_brace(tokens, i, b1)
                j = i + 1
                if j < close and tokens[j].kind == "keyword" and tokens[j].text == "if":
                    j = if_stmt(j, dnl + 1, dnle)
                while j < close:
                    j = stmt(j, dnl + 1, dnle + 1)
                return close + 1
            return stmt(i, dnl + 1, dnle + 1)
        return i

    def stmt(i: int, dnl: int, dnle: int) -> int:
        if i > b1:
            return i
        tok = tokens[i]
        if tok.kind == "op":
            if tok.text == "{":
                return block(i, dnl, dnle)
            if tok.text == ";":
                return i + 1
            if tok.text == "}":
                return i + 1  # tolerate stray close
        if tok.kind == "keyword":
            kw = tok.text
            if kw == "if":
                return if_stmt(i, dnl, dnle)
            if kw in ("for", "while"):
                record(dnl + 1, dnle + 1)
                i += 1
                if i <= b1 and tokens[i].text == "(":
                    i = _skip_parens(tokens, i, b1)
                return stmt(i, dnl + 1, dnle + 1)
            if kw == "do":
                record(dnl + 1, dnle + 1)
                i = stmt(i + 1, dnl + 1, dnle + 1)
                if i <= b1 and tokens[i].kind == "keyword" and tokens[i].text == "while":
                    i += 1
                    if i <= b1 and tokens[i].text == "(":
                        i = _skip_parens(tokens, i, b1)
                    if i <= b1 and tokens[i].text == ";":
                        i += 1
                return i
            if kw == "switch":
                record(dnl + 1, dnle + 1)
                i += 1
                if i <= b1 and tokens[i].text == "(":
                    i = _skip_parens(tokens, i, b1)
                if i <= b1 and tokens[i].text == "{":
                    return block(i, dnl + 1, dnle + 1)
                return i
            if kw == "try":
                record(dnl + 1, dnle + 1)
                i += 1
                if i <= b1 and tokens[i].text == "(":
                    i = _skip_parens(tokens, i, b1)  # try-with-resources
                if i <= b1 and tokens[i].text == "{":
                    i = block(i, dnl + 1, dnle + 1)
                while i <= b1 and tokens[i].kind == "keyword" and tokens[i].text in ("catch", "finally"):
                    is_catch = tokens[i].text == "catch"
                    i += 1
                    if is_catch and i <= b1 and tokens[i].text == "(":
                        i = _skip_parens(tokens, i, b1)
                    if i <= b1 and tokens[i].text == "{":
                        i = block(i, dnl + 1, dnle + 1)
                return i
            if kw == "synchronized" and i + 1 <= b1 and tokens[i + 1].text == "(":
                i = _skip_parens(tokens, i + 1, b1)
                return stmt(i, dnl, dnle)
            if kw in ("case", "default"):
                # classic labels end at ':', arrow labels at '->'; never
                # scan past a brace or ';' if the label is malformed
                while i <= b1 and tokens[i].text not in (":", "->", "{", "}", ";"):
                    i += 1
                if i <= b1 and tokens[i].text in (":", "->"):
                    return i + 1
                return i
            if kw == "else":
                # dangling else from a skipped construct; walk its body
                return stmt(i + 1, dnl, dnle)
        # labeled statement: ident ':' <stmt>
        if (
            tok.kind == "ident"
            and i + 1 <= b1
            and tokens[i + 1].kind == "op"
            and tokens[i + 1].text == ":"
        ):
            nxt = tokens[i + 2] if i + 2 <= b1 else None
            if nxt is not None and (
                (nxt.kind == "keyword" and nxt.text in _STRUCT_KEYWORDS) or nxt.text == "{"
            ):
                return stmt(i + 2, dnl, dnle)
        # expression or declaration statement: scan to ';' at depth 0
        depth = 0
        while i <= b1:
            t = tokens[i]
            if t.kind == "op":
                if t.text in ("(", "["):
                    depth += 1
                elif t.text in (")", "]"):
                    depth -= 1
                    if depth < 0:
                        return i  # past the end of an enclosing group
                elif t.text == "{":
                    i = _match_brace(tokens, i, b1)
                elif t.text == "}" and depth == 0:
                    return i  # enclosing block closes without ';'
                elif t.text == ";" and depth == 0:
                    return i + 1
            i += 1
        return i

    i = b0
    while i <= b1:
        i = stmt(i, 0, 0)
    return max_nl, max_nle


@dataclass(frozen=True)
class CallSite:
    owner: str  # qualified class name of the calling method's class
    caller: str  # method qualified name
    name: str  # simple name being invoked


class FileContext:
    """File-scoped resolution tables shared by the per-entity metrics."""

    def __init__(self, tree: EntityTree):
        self.tree = tree
        self.classes = tree.all_classes()
        self.pairs = tree.all_methods()
        self.type_table = tree.declared_type_names | tree.imports
        self.method_names = frozenset(m.name for _, m in self.pairs)
        self.sites: list[CallSite] = []
        tokens = tree.tokens
        for cls, method in self.pairs:
            if method.body is None:
                continue
            b0, b1 = method.body
            for j in range(b0, b1):
                tok = tokens[j]
                if tok.kind != "ident":
                    continue
                if tokens[j + 1].kind == "op" and tokens[j + 1].text == "(":
                    prev = tokens[j - 1] if j > 0 else None
                    if prev is not None and (
                        (prev.kind == "keyword" and prev.text == "new") or prev.text == "@"
                    ):
                        continue
                    self.sites.append(
                        CallSite(owner=cls.qualified_name, caller=method.qualified_name, name=tok.text)
                    )

    def methods_named(self, name: str) -> list[tuple[ClassNode, MethodNode]]:
        return [(c, m) for c, m in self.pairs if m.name == name]


def _span_lloc(tree: EntityTree, seg: tuple[int, int]) -> int:
    return len({tok.line for tok in tree.tokens[seg[0] : seg[1] + 1]})


def _span_cloc(tree: EntityTree, start_line: int, end_line: int) -> int:
    lines: set[int] = set()
    for c in tree.comments:
        lo = max(c.line, start_line)
        hi = min(c.end_line, end_line)
        for ln in range(lo, hi + 1):
            lines.add(ln)
    return len(lines)


def _doc_lines(node: MethodNode | ClassNode | FieldNode) -> int:
    if node.doc is None:
        return 0
    return node.doc.end_line - node.doc.line + 1


def compute_method_metrics(
    method: MethodNode, tree: EntityTree, ctx: FileContext | None = None
) -> EntityMetrics:
    if ctx is None:
        ctx = FileContext(tree)
    h = halstead_counts(tree.tokens[method.seg[0] : method.seg[1] + 1])
    mccc = cyclomatic_complexity(tree.tokens, method.body)
    nl, nle = nesting_levels(tree.tokens, method.body)
    loc = method.end_line - method.start_line + 1
    lloc = _span_lloc(tree, method.seg)
    cloc = _span_cloc(tree, method.start_line, method.end_line)
    dloc = _doc_lines(method)
    cd = cloc / (cloc + lloc) if (cloc + lloc) > 0 else 0.0
    noi = sum(
        1
        for s in ctx.sites
        if s.caller == method.qualified_name and s.name in ctx.method_names
    )
    nii = sum(1 for s in ctx.sites if s.name == method.name)
    values = {
        "HCPL": h.hcpl,
        "HDIF": h.hdif,
        "HEFF": h.heff,
        "HPL": h.hpl,
        "HPV": h.hpv,
        "HTRP": h.htrp,
        "HVOL": h.hvol,
        "MI": maintainability_index(h.hvol, mccc, lloc),
        "McCC": float(mccc),
        "NL": float(nl),
        "NLE": float(nle),
        "NII": float(nii),
        "NOI": float(noi),
        "CD": cd,
        "CLOC": float(cloc),
        "DLOC": float(dloc),
        "LLOC": float(lloc),
        "LOC": float(loc),
    }
    return EntityMetrics("method", method.qualified_name, values)


def compute_class_metrics(
    cls: ClassNode, tree: EntityTree, ctx: FileContext | None = None
) -> EntityMetrics:
    if ctx is None:
        ctx = FileContext(tree)
    tokens = tree.tokens
    own_method_names = frozenset(m.name for m in cls.methods)
    mcccs = [cyclomatic_complexity(tokens, m.body) for m in cls.methods]
    nestings = [nesting_levels(tokens, m.body) for m in cls.methods]
    wmc = float(sum(mcccs))
    nl = float(max((a for a, _ in nestings), default=0))
    nle = float(max((b for _, b in nestings), default=0))

    seg = cls.seg
    # a type's declaration-name identifier is not a reference to it
    decl_name_tokens: dict[str, set[int]] = {}
    for c in ctx.classes:
        decl_name_tokens.setdefault(c.name, set()).add(c.name_token_index)

    def is_reference(j: int, type_name: str) -> bool:
        return (
            tokens[j].kind == "ident"
            and tokens[j].text == type_name
            and j not in decl_name_tokens.get(type_name, ())
        )

    referenced: set[str] = set()
    for j in range(seg[0], seg[1] + 1):
        tok = tokens[j]
        if tok.kind != "ident" or tok.text == cls.name:
            continue
        if tok.text in ctx.type_table and is_reference(j, tok.text):
            referenced.add(tok.text)
    cbo = float(len(referenced))

    referencing = 0
    for other in ctx.classes:
        if other.qualified_name == cls.qualified_name or other.name == cls.name:
            continue
        if any(
            is_reference(j, cls.name) for j in range(other.seg[0], other.seg[1] + 1)
        ):
            referencing += 1
    cboi = float(referencing)

    class_noi = sum(
        1
        for s in ctx.sites
        if s.owner == cls.qualified_name
        and s.name in ctx.method_names
        and s.name not in own_method_names
    )
    class_nii = sum(
        1 for s in ctx.sites if s.owner != cls.qualified_name and s.name in own_method_names
    )
    external_called = {
        s.name
        for s in ctx.sites
        if s.owner == cls.qualified_name
        and s.name in ctx.method_names
        and s.name not in own_method_names
    }
    rfc = float(len(cls.methods) + len(external_called))

    public_members = [m for m in cls.methods if "public" in m.modifiers] + [
        f for f in cls.fields if "public" in f.modifiers
    ]
    documented = [m for m in public_members if m.doc is not None]
    ad = len(documented) / len(public_members) if public_members else 1.0

    loc = cls.end_line - cls.start_line + 1
    lloc = _span_lloc(tree, seg)
    cloc = _span_cloc(tree, cls.start_line, cls.end_line)
    dloc = _doc_lines(cls) + sum(_doc_lines(m) for m in cls.methods) + sum(
        _doc_lines(f) for f in cls.fields
    )
    cd = cloc / (cloc + lloc) if (cloc + lloc) > 0 else 0.0
    values = {
        "NL": nl,
        "NLE": nle,
        "WMC": wmc,
        "CBO": cbo,
        "CBOI": cboi,
        "NII": float(class_nii),
        "NOI": float(class_noi),
        "RFC": rfc,
        "AD": ad,
        "CD": cd,
        "CLOC": float(cloc),
        "DLOC": float(dloc),
        "LLOC": float(lloc),
        "LOC": float(loc),
    }
    return EntityMetrics("class", cls.qualified_name, values)


def compute_all_metrics(tree: EntityTree) -> dict[str, EntityMetrics]:
    """Every parsed entity's metrics, keyed by qualified name."""
    ctx = FileContext(tree)
    out: dict[str, EntityMetrics] = {}
    for cls in ctx.classes:
        out[cls.qualified_name] = compute_class_metrics(cls, tree, ctx)
        for m in cls.methods:
            out[m.qualified_name] = compute_method_metrics(m, tree, ctx)
    return out
