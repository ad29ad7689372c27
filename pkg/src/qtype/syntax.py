"""Lexing, parsing and post-processing of the Q subset.

Grammar summary: expressions are separated by newlines or semicolons; all
infix operators share one precedence and associate to the right; ``f[a;b]``
and ``f x`` are application; ``{[p] body}`` is a lambda, ``$[c;t;f]`` a
conditional, ``do[n;body]`` a loop, ``(a;b)`` a list literal, ``1 2 3`` and
```a`b`` vector literals, ``k!v`` a dictionary, ``x*:2`` compound assignment.

Type annotations are comments: ``//$:`` (interrogative, checked) and
``//!:`` (imperative, trusted), each followed by a declaration.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Callable, Optional

from . import typelang as tl


@dataclass(frozen=True)
class SourceSpan:
    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __str__(self):
        return f"{self.file}:{self.start_line}:{self.start_col}"

    def sort_key(self):
        return (self.file, self.start_line, self.start_col, self.end_line, self.end_col)


class QSyntaxError(Exception):
    kind = "syntax-error"

    def __init__(self, message: str, span: Optional[SourceSpan] = None):
        super().__init__(message)
        self.message = message
        self.span = span


class LexError(QSyntaxError):
    kind = "lex-error"


class ParseError(QSyntaxError):
    kind = "parse-error"

    def __init__(self, message, span=None, expected=()):
        super().__init__(message, span)
        self.expected = tuple(expected)


class ScopeError(QSyntaxError):
    kind = "scope-error"


class DeclParseError(QSyntaxError):
    kind = "decl-error"

    def __init__(self, message, span=None, offset=0):
        super().__init__(message, span)
        self.offset = offset


# -- tokens ------------------------------------------------------------------

TOKEN_KINDS = (
    "IntLit", "LongLit", "FloatLit", "BoolLit", "SymbolLit", "CharLit", "Name",
    "Operator", "Punct", "AnnotImperative", "AnnotInterrogative", "Separator",
)
LITERAL_KINDS = ("IntLit", "LongLit", "FloatLit", "BoolLit", "SymbolLit", "CharLit")
NUMERIC_KINDS = ("IntLit", "LongLit", "FloatLit", "BoolLit")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: SourceSpan
    start: int  # character offsets into the source
    end: int
    atype: Optional[str] = None  # atomic type of a literal token
    value: Optional[str] = None  # decoded payload: symbol name, char text, declaration

    def __repr__(self):
        return f"{self.kind}({self.value if self.value is not None else self.text!r})"


_SUFFIX_TYPES = {"j": "long", "f": "float", "h": "short", "e": "real", "i": "int"}
_SUFFIX_KINDS = {"long": "LongLit", "float": "FloatLit", "short": "IntLit",
                 "real": "FloatLit", "int": "IntLit"}

_BOOL_RE = re.compile(r"[01]+b(?![A-Za-z0-9_.])")
_NUM_RE = re.compile(r"\d+(\.\d*)?([eE][+-]?\d+)?([jfhei])?")
_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*")
_SYM_RE = re.compile(r"`[A-Za-z0-9_.]*")
_OPERATORS = ("<>", "<=", ">=", "+", "-", "*", "%", "<", ">", "=", "&", "|",
              "!", ":", "$")
_PUNCT = "()[]{};"
_OPEN, _CLOSE = "([{", ")]}"


class _Positions:
    def __init__(self, source, file):
        self.file = file
        self.line_starts = [0]
        for i, ch in enumerate(source):
            if ch == "\n":
                self.line_starts.append(i + 1)

    def linecol(self, offset):
        lo, hi = 0, len(self.line_starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.line_starts[mid] <= offset:
                lo = mid
            else:
                hi = mid - 1
        return lo + 1, offset - self.line_starts[lo] + 1

    def span(self, start, end):
        """Span of source[start:end] (end exclusive, non-empty)."""
        sl, sc = self.linecol(start)
        el, ec = self.linecol(max(start, end - 1))
        return SourceSpan(self.file, sl, sc, el, ec)


def tokenize(source: str, file: str = "<input>") -> list:
    pos = _Positions(source, file)
    tokens = []
    depth = 0
    i, n = 0, len(source)

    def emit(kind, start, end, atype=None, value=None):
        tokens.append(Token(kind, source[start:end], pos.span(start, end),
                            start, end, atype, value))

    while i < n:
        ch = source[i]
        if ch == "\n":
            if depth == 0:
                emit("Separator", i, i + 1)
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            continue
        if source.startswith("//", i):
            j = source.find("\n", i)
            j = n if j < 0 else j
            tag = source[i:i + 4]
            if tag in ("//$:", "//!:"):
                kind = "AnnotInterrogative" if tag == "//$:" else "AnnotImperative"
                emit(kind, i, j, value=source[i + 4:j].strip())
            i = j
            continue
        m = _BOOL_RE.match(source, i)
        if m:
            emit("BoolLit", i, m.end(), "boolean", m.group()[:-1])
            i = m.end()
            continue
        if ch.isdigit():
            m = _NUM_RE.match(source, i)
            j = m.end()
            if j < n and (source[j].isalnum() or source[j] in "._"):
                raise LexError(f"malformed numeric literal {source[i:j + 1]!r}",
                               pos.span(i, j + 1))
            suffix = m.group(3)
            if suffix:
                atype = _SUFFIX_TYPES[suffix]
                if atype in ("short", "int", "long") and (m.group(1) or m.group(2)):
                    raise LexError(f"malformed numeric literal {m.group()!r}", pos.span(i, j))
            elif m.group(1) or m.group(2):
                atype = "float"
            else:
                atype = "int"
            emit(_SUFFIX_KINDS[atype], i, j, atype, m.group())
            i = j
            continue
        if ch == "`":
            m = _SYM_RE.match(source, i)
            emit("SymbolLit", i, m.end(), "symbol", m.group()[1:])
            i = m.end()
            continue
        if ch == '"':
            j = i + 1
            chars = []
            while True:
                if j >= n or source[j] == "\n":
                    raise LexError("unterminated character literal", pos.span(i, j))
                c = source[j]
                if c == '"':
                    break
                if c == "\\":
                    if j + 1 >= n:
                        raise LexError("unterminated character literal", pos.span(i, j + 1))
                    chars.append({"n": "\n", "t": "\t"}.get(source[j + 1], source[j + 1]))
                    j += 2
                    continue
                chars.append(c)
                j += 1
            emit("CharLit", i, j + 1, "char", "".join(chars))
            i = j + 1
            continue
        if ch.isalpha():
            m = _NAME_RE.match(source, i)
            emit("Name", i, m.end())
            i = m.end()
            continue
        if ch in _PUNCT:
            if ch in _OPEN:
                depth += 1
            elif ch in _CLOSE:
                depth = max(0, depth - 1)
            emit("Punct", i, i + 1)
            i += 1
            continue
        for op in _OPERATORS:
            if source.startswith(op, i):
                emit("Operator", i, i + len(op))
                i += len(op)
                break
        else:
            raise LexError(f"unexpected character {ch!r}", pos.span(i, i + 1))
    return tokens


# -- AST ---------------------------------------------------------------------

@dataclass(eq=False)
class Node:
    span: SourceSpan
    id: int = field(default=-1, init=False)
    first_tok: int = field(default=-1, init=False, repr=False)
    last_tok: int = field(default=-1, init=False, repr=False)

    def children(self) -> list:
        return []

    def walk(self):
        yield self
        for c in self.children():
            yield from c.walk()


@dataclass(eq=False)
class Literal(Node):
    atype: str = "int"
    lexeme: str = ""


@dataclass(eq=False)
class Var(Node):
    name: str = ""
    key: Optional[str] = None  # resolution key, filled by postprocess
    is_global: bool = False
    operator: bool = False


@dataclass(eq=False)
class Lambda(Node):
    params: list = field(default_factory=list)
    body: list = field(default_factory=list)
    explicit: bool = True
    param_keys: list = field(default_factory=list)

    def children(self):
        return list(self.body)


@dataclass(eq=False)
class App(Node):
    fn: Node = None
    arg: Node = None  # a ListLit packing the arguments when arity > 1
    arity: int = 1
    bracket: bool = False

    @property
    def args(self):
        return list(self.arg.items) if self.arity != 1 else [self.arg]

    def children(self):
        return [self.fn, self.arg]


@dataclass(eq=False)
class Assign(Node):
    target: Node = None
    value: Node = None

    def children(self):
        return [self.target, self.value]


@dataclass(eq=False)
class IndexAssign(Node):
    base: Node = None
    index: Node = None
    value: Node = None

    def children(self):
        return [self.base, self.index, self.value]


@dataclass(eq=False)
class Cond(Node):
    test: Node = None
    then: Node = None
    orelse: Node = None

    def children(self):
        return [self.test, self.then, self.orelse]


@dataclass(eq=False)
class DoLoop(Node):
    count: Node = None
    body: list = field(default_factory=list)

    def children(self):
        return [self.count] + list(self.body)


@dataclass(eq=False)
class ListLit(Node):
    items: list = field(default_factory=list)

    def children(self):
        return list(self.items)


@dataclass(eq=False)
class VectorLit(Node):
    atype: str = "int"
    items: tuple = ()


@dataclass(eq=False)
class DictLit(Node):
    domain: Node = None
    range: Node = None

    def children(self):
        return [self.domain, self.range]


@dataclass(eq=False)
class Seq(Node):
    items: list = field(default_factory=list)

    def children(self):
        return list(self.items)


@dataclass
class Annotation:
    kind: str  # "imperative" | "interrogative"
    text: str
    span: SourceSpan
    anchor: int  # index of the last significant token before the comment
    target: Optional[int] = None
    decl: Optional[tuple] = None


def form(node: Node) -> str:
    """Compact structural rendering, used by tests and the type listing."""
    if isinstance(node, Literal):
        return f"{node.atype} {node.lexeme}"
    if isinstance(node, Var):
        return f"Var {node.name}"
    if isinstance(node, VectorLit):
        return f"Vector({node.atype}; {' '.join(node.items)})"
    name = type(node).__name__
    if isinstance(node, Lambda):
        return f"Lambda([{';'.join(node.params)}], " + ", ".join(form(c) for c in node.body) + ")"
    return f"{name}(" + ", ".join(form(c) for c in node.children()) + ")"


# -- parser ------------------------------------------------------------------

INFIX = ("+", "-", "*", "%", "<", ">", "=", "<>", "<=", ">=", "&", "|")


class Parser:
    def __init__(self, tokens: list, file: str = "<input>"):
        self.file = file
        self.tokens = []
        self.annotations = []
        for t in tokens:
            if t.kind in ("AnnotImperative", "AnnotInterrogative"):
                kind = "imperative" if t.kind == "AnnotImperative" else "interrogative"
                self.annotations.append(
                    Annotation(kind, t.value, t.span, self._last_significant()))
            else:
                self.tokens.append(t)
        self.i = 0

    def _last_significant(self):
        for k in range(len(self.tokens) - 1, -1, -1):
            if self.tokens[k].kind != "Separator":
                return k
        return -1

    # token helpers
    def peek(self, k=0) -> Optional[Token]:
        j = self.i + k
        return self.tokens[j] if j < len(self.tokens) else None

    def at(self, text, kind=None, k=0):
        t = self.peek(k)
        return t is not None and t.text == text and (kind is None or t.kind == kind)

    def advance(self) -> Token:
        t = self.tokens[self.i]
        self.i += 1
        return t

    def expect(self, text):
        t = self.peek()
        if t is None or t.text != text:
            self.error(f"expected {text!r}", [text])
        return self.advance()

    def error(self, msg, expected=()):
        t = self.peek()
        if t is None:
            span = self.tokens[-1].span if self.tokens else SourceSpan(self.file, 1, 1, 1, 1)
            msg += " at end of input"
        else:
            span = t.span
            msg += f", found {t.text!r}"
        raise ParseError(msg, span, expected)

    def _finish(self, node, first):
        last = self.i - 1
        node.first_tok, node.last_tok = first, last
        a, b = self.tokens[first].span, self.tokens[last].span
        node.span = SourceSpan(self.file, a.start_line, a.start_col, b.end_line, b.end_col)
        return node

    def _copy_span(self, node, like):
        node.first_tok, node.last_tok, node.span = like.first_tok, like.last_tok, like.span
        return node

    # grammar
    def parse_program(self) -> Seq:
        items = []
        while self.peek() is not None:
            if self.peek().kind == "Separator" or self.at(";", "Punct"):
                self.advance()
                continue
            items.append(self.expr())
            t = self.peek()
            if t is not None and not (t.kind == "Separator" or t.text == ";"):
                self.error("expected end of expression", ["newline", ";"])
        root = Seq(SourceSpan(self.file, 1, 1, 1, 1), items=items)
        if items:
            root.first_tok, root.last_tok = items[0].first_tok, items[-1].last_tok
            a, b = items[0].span, items[-1].span
            root.span = SourceSpan(self.file, a.start_line, a.start_col, b.end_line, b.end_col)
        return root

    def _starts_term(self, t: Optional[Token]) -> bool:
        if t is None:
            return False
        if t.kind in LITERAL_KINDS or t.kind == "Name":
            return True
        if t.kind == "Punct":
            return t.text in "({"
        return t.kind == "Operator" and t.text == "$" and self.at("[", k=1)

    def expr(self) -> Node:
        first = self.i
        lhs = self.term()
        t = self.peek()
        if t is None:
            return lhs
        if t.kind == "Operator":
            if t.text == ":":
                self.advance()
                value = self.expr()
                if isinstance(lhs, Var) and not lhs.operator:
                    return self._finish(Assign(None, target=lhs, value=value), first)
                if isinstance(lhs, App) and lhs.bracket and lhs.arity == 1:
                    return self._finish(
                        IndexAssign(None, base=lhs.fn, index=lhs.arg, value=value), first)
                raise ParseError("invalid assignment target", lhs.span, ["name"])
            if t.text in INFIX and self.at(":", "Operator", k=1):
                op_tok = self.advance()
                self.advance()
                if not isinstance(lhs, Var):
                    raise ParseError("compound assignment needs a name", lhs.span, ["name"])
                rhs = self.expr()
                op = self._op_var(op_tok)
                again = self._copy_span(Var(None, name=lhs.name), lhs)
                pack = self._pack([again, rhs])
                app = self._copy_span(App(None, fn=op, arg=pack, arity=2), pack)
                return self._finish(Assign(None, target=lhs, value=app), first)
            if t.text == "!":
                self.advance()
                rng = self.expr()
                return self._finish(DictLit(None, domain=lhs, range=rng), first)
            if t.text in INFIX:
                op = self._op_var(self.advance())
                rhs = self.expr()
                pack = self._pack([lhs, rhs])
                return self._finish(App(None, fn=op, arg=pack, arity=2), first)
            if t.text == "$" and self._starts_term(t):
                pass
            else:
                return lhs
        if self._starts_term(t):
            arg = self.expr()
            return self._finish(App(None, fn=lhs, arg=arg, arity=1), first)
        return lhs

    def _op_var(self, tok):
        v = Var(tok.span, name=tok.text, operator=True)
        v.first_tok = v.last_tok = self.i - 1 if self.tokens[self.i - 1] is tok else self.tokens.index(tok)
        return v

    def _pack(self, items):
        pack = ListLit(None, items=items)
        pack.first_tok, pack.last_tok = items[0].first_tok, items[-1].last_tok
        a, b = items[0].span, items[-1].span
        pack.span = SourceSpan(self.file, a.start_line, a.start_col, b.end_line, b.end_col)
        return pack

    def term(self) -> Node:
        first = self.i
        t = self.peek()
        if t is None:
            self.error("expected an expression", ["expression"])
        if t.kind in NUMERIC_KINDS:
            node = self._numbers()
        elif t.kind == "SymbolLit":
            node = self._symbols()
        elif t.kind == "CharLit":
            self.advance()
            if len(t.value) == 1:
                node = Literal(None, atype="char", lexeme=t.text)
            else:
                node = VectorLit(None, atype="char", items=tuple(t.value))
            self._finish(node, first)
        elif t.kind == "Name":
            if t.text == "do" and self.at("[", k=1):
                node = self._do()
            else:
                self.advance()
                node = self._finish(Var(None, name=t.text), first)
        elif t.kind == "Operator" and t.text == "$" and self.at("[", k=1):
            node = self._cond()
        elif t.text == "(" and t.kind == "Punct":
            node = self._paren()
        elif t.text == "{" and t.kind == "Punct":
            node = self._lambda()
        else:
            self.error("expected an expression", ["expression"])
        while self.at("[", "Punct"):
            args = self._bracket_args()
            if len(args) == 1:
                node = self._finish(App(None, fn=node, arg=args[0], arity=1, bracket=True), first)
            else:
                pack = ListLit(None, items=args)
                if args:
                    pack.first_tok, pack.last_tok = args[0].first_tok, args[-1].last_tok
                    a, b = args[0].span, args[-1].span
                    pack.span = SourceSpan(self.file, a.start_line, a.start_col, b.end_line, b.end_col)
                else:
                    self._copy_span(pack, node)
                node = self._finish(
                    App(None, fn=node, arg=pack, arity=len(args), bracket=True), first)
        return node

    def _numbers(self):
        first = self.i
        toks = [self.advance()]
        while self.peek() is not None and self.peek().kind in NUMERIC_KINDS:
            toks.append(self.advance())
        if len(toks) == 1 and toks[0].kind != "BoolLit":
            t = toks[0]
            return self._finish(Literal(None, atype=t.atype, lexeme=t.text), first)
        if len(toks) == 1 and len(toks[0].value) == 1:
            t = toks[0]
            return self._finish(Literal(None, atype="boolean", lexeme=t.text), first)
        if any(t.kind == "BoolLit" for t in toks):
            if len(toks) > 1:
                raise ParseError("boolean vector mixed with numbers", toks[0].span)
            items = tuple(f"{d}b" for d in toks[0].value)
            return self._finish(VectorLit(None, atype="boolean", items=items), first)
        atype = toks[0].atype
        for t in toks[1:]:
            atype = tl.promote(atype, t.atype) or atype
        return self._finish(VectorLit(None, atype=atype, items=tuple(t.text for t in toks)), first)

    def _symbols(self):
        first = self.i
        toks = [self.advance()]
        while self.peek() is not None and self.peek().kind == "SymbolLit":
            toks.append(self.advance())
        if len(toks) == 1:
            return self._finish(Literal(None, atype="symbol", lexeme=toks[0].text), first)
        return self._finish(
            VectorLit(None, atype="symbol", items=tuple(t.value for t in toks)), first)

    def _seq_until(self, close):
        """Expressions separated by ';' up to the closing bracket; empty slots allowed."""
        items = []
        cur = None
        while True:
            t = self.peek()
            if t is None:
                self.error(f"expected {close!r}", [close, ";"])
            if t.text == close and t.kind == "Punct":
                items.append(cur)
                self.advance()
                return items
            if t.text == ";" and t.kind == "Punct":
                items.append(cur)
                cur = None
                self.advance()
                continue
            if cur is not None:
                self.error("expected ';' or " + repr(close), [";", close])
            cur = self.expr()

    def _bracket_args(self):
        self.expect("[")
        items = self._seq_until("]")
        if items == [None]:
            return []
        if any(x is None for x in items):
            raise ParseError("elided arguments are not supported", self.tokens[self.i - 1].span)
        return items

    def _paren(self):
        first = self.i
        self.expect("(")
        items = self._seq_until(")")
        if items == [None]:
            return self._finish(ListLit(None, items=[]), first)
        if len(items) == 1:
            # the parenthesized expression owns its brackets, so an annotation
            # after ")" attaches to it
            return self._finish(items[0], first)
        if any(x is None for x in items):
            raise ParseError("empty list item", self.tokens[self.i - 1].span, ["expression"])
        return self._finish(ListLit(None, items=items), first)

    def _lambda(self):
        first = self.i
        self.expect("{")
        params, explicit = [], False
        if self.at("[", "Punct"):
            explicit = True
            self.advance()
            while not self.at("]", "Punct"):
                t = self.peek()
                if t is None or t.kind != "Name":
                    self.error("expected a parameter name", ["name"])
                params.append(self.advance().text)
                if self.at(";", "Punct"):
                    self.advance()
                elif not self.at("]", "Punct"):
                    self.error("expected ';' or ']'", [";", "]"])
            self.advance()
        body = [x for x in self._seq_until("}") if x is not None]
        return self._finish(Lambda(None, params=params, body=body, explicit=explicit), first)

    def _cond(self):
        first = self.i
        self.advance()
        self.expect("[")
        items = self._seq_until("]")
        if len(items) != 3 or any(x is None for x in items):
            raise ParseError("conditional takes exactly three parts", self.tokens[first].span,
                             ["$[test;then;else]"])
        return self._finish(Cond(None, test=items[0], then=items[1], orelse=items[2]), first)

    def _do(self):
        first = self.i
        self.advance()
        self.expect("[")
        items = self._seq_until("]")
        if len(items) < 2 or items[0] is None:
            raise ParseError("do needs a count and a body", self.tokens[first].span,
                             ["do[count;body]"])
        body = [x for x in items[1:] if x is not None]
        return self._finish(DoLoop(None, count=items[0], body=body), first)


def number_nodes(root: Node) -> int:
    """Assign dense pre-order ids; the root program node is 0."""
    counter = itertools.count(0)
    for node in root.walk():
        node.id = next(counter)
    return root.id


def parse(tokens: list, file: str = "<input>") -> tuple:
    p = Parser(tokens, file)
    root = p.parse_program()
    number_nodes(root)
    return root, p.annotations


# -- post-processing ---------------------------------------------------------

IMPLICIT = ("x", "y", "z")


def own_nodes(body):
    """Nodes of a lambda body, not descending into nested lambdas."""
    stack = list(reversed(body))
    while stack:
        n = stack.pop()
        yield n
        if not isinstance(n, Lambda):
            stack.extend(reversed(n.children()))


def postprocess(root: Seq, annots: list, file: str = "<input>", errors=None) -> tuple:
    """Resolve names and attach annotations.

    Annotation problems are appended to ``errors`` (and the annotation is
    dropped) when a list is given; otherwise they are raised.
    """
    counter = itertools.count(1)

    def resolve(nodes, scope):
        for n in nodes:
            if isinstance(n, Var):
                if n.operator:
                    n.key, n.is_global = n.name, True
                elif n.name in scope:
                    n.key, n.is_global = scope[n.name], False
                else:
                    n.key, n.is_global = f"{n.name}#0", True
            elif isinstance(n, Lambda):
                do_lambda(n)

    def do_lambda(lam):
        own = list(own_nodes(lam.body))
        if not lam.explicit:
            used = {n.name for n in own if isinstance(n, Var) and n.name in IMPLICIT}
            k = 0
            while k < 3 and IMPLICIT[k] in used:
                k += 1
            extra = used - set(IMPLICIT[:k])
            if extra:
                missing = IMPLICIT[k]
                bad = next(n for n in own if isinstance(n, Var) and n.name in extra)
                raise ScopeError(
                    f"implicit parameter {bad.name!r} used without {missing!r}", bad.span)
            lam.params = list(IMPLICIT[:k])
        idx = next(counter)
        scope = {p: f"{p}#{idx}" for p in lam.params}
        for n in own:
            if isinstance(n, Assign) and isinstance(n.target, Var):
                scope.setdefault(n.target.name, f"{n.target.name}#{idx}")
        lam.param_keys = [scope[p] for p in lam.params]
        resolve(own, scope)

    resolve(own_nodes([root]), {})

    nodes = list(root.walk())
    depth = {n.id: d for d, n in _depths(root)}
    kept = []
    for a in annots:
        try:
            candidates = [n for n in nodes if n.last_tok == a.anchor and n is not root]
            if not candidates:
                raise ScopeError("type annotation does not follow an expression", a.span)
            best = min(candidates, key=lambda n: (n.last_tok - n.first_tok, -depth[n.id]))
            a.target = best.id
            a.decl = parse_type_decl(a.text, span=a.span)
        except QSyntaxError as e:
            if errors is None:
                raise
            errors.append(e)
            continue
        kept.append(a)
    return root, kept


def _depths(root):
    stack = [(0, root)]
    while stack:
        d, n = stack.pop()
        yield d, n
        stack.extend((d + 1, c) for c in n.children())


def parse_source(source: str, file: str = "<input>", errors=None) -> tuple:
    """tokenize + parse + postprocess."""
    root, annots = parse(tokenize(source, file), file)
    return postprocess(root, annots, file, errors)


# -- type declarations -------------------------------------------------------

_DECL_TOKEN = re.compile(r"\s*(->|[(),|]|[A-Za-z_][A-Za-z0-9_]*)")


class _DeclParser:
    def __init__(self, text, fresh, span):
        self.text = text
        self.fresh = fresh
        self.span = span
        self.vars = {}
        self.toks = []
        pos = 0
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                break
            m = _DECL_TOKEN.match(text, pos)
            if not m:
                raise DeclParseError(f"unexpected character {text[pos]!r} in declaration",
                                     span, pos)
            self.toks.append((m.group(1), m.start(1)))
            pos = m.end()
        self.i = 0

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def fail(self, msg):
        off = self.toks[self.i][1] if self.i < len(self.toks) else len(self.text)
        raise DeclParseError(f"{msg} at offset {off} in declaration {self.text!r}",
                             self.span, off)

    def take(self, tok=None):
        t = self.peek()
        if t is None or (tok is not None and t != tok):
            self.fail(f"expected {tok!r}" if tok else "unexpected end")
        self.i += 1
        return t

    def decl(self):
        alts = [self.fn()]
        while self.peek() == "|":
            self.take()
            alts.append(self.fn())
        return alts

    def fn(self):
        base = self.base()
        if self.peek() == "->":
            self.take()
            return tl.Func(base, self.fn())
        return base

    def base(self):
        t = self.peek()
        if t is None:
            self.fail("expected a type")
        if t == "(":
            self.take()
            alts = self.decl()
            self.take(")")
            if len(alts) != 1:
                self.fail("alternatives are only allowed at the top of a declaration")
            return alts[0]
        if t in ("->", ")", ",", "|"):
            self.fail("expected a type")
        self.take()
        if t in tl.ATOMIC_TYPES:
            return tl.atom(t)
        if t == "any":
            return tl.Var(self.fresh())
        if t == "hlist":
            return tl.HLIST
        if t[0].isupper():
            if t not in self.vars:
                self.vars[t] = tl.Var(self.fresh())
            return self.vars[t]
        if t == "list":
            self.take("(")
            alts = self.decl()
            self.take(")")
            if len(alts) != 1:
                self.fail("list takes a single element type")
            return tl.List(alts[0])
        if t == "tuple":
            self.take("(")
            elems = []
            if self.peek() != ")":
                elems.append(self.fn())
                while self.peek() == ",":
                    self.take()
                    elems.append(self.fn())
            self.take(")")
            return tl.Tuple(tuple(elems))
        if t == "stuple":
            self.take("(")
            names = [self._name()]
            while self.peek() == ",":
                self.take()
                names.append(self._name())
            self.take(")")
            return tl.STuple(tuple(names))
        if t == "dict":
            self.take("(")
            k = self.fn()
            self.take(",")
            v = self.fn()
            self.take(")")
            return tl.Dict(k, v)
        self.i -= 1
        self.fail(f"unknown type name {t!r}")

    def _name(self):
        t = self.peek()
        if t is None or not (t[0].isalpha() or t[0] == "_"):
            self.fail("expected a symbol name")
        return self.take()


def parse_type_decl(text: str, fresh: Optional[Callable[[], int]] = None,
                    span: Optional[SourceSpan] = None) -> tuple:
    """Parse a declaration such as ``int -> boolean`` or ``list(X) | dict(A,B)``.

    Uppercase names are type variables, shared within the declaration; each
    ``any`` is a distinct fresh variable.
    """
    if fresh is None:
        fresh = itertools.count(1).__next__
    p = _DeclParser(text, fresh, span)
    if not p.toks:
        raise DeclParseError("empty declaration", span, 0)
    alts = p.decl()
    if p.peek() is not None:
        p.fail("unexpected trailing input")
    return tuple(alts)
