"""Loading the built-in signature table.

Format, one entry per line (``#`` starts a comment)::

    name : Decl [ext [left|right|both]] [rel relation-name]

``ext`` without a direction means ``both``.
"""
from __future__ import annotations

import itertools
import os
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from . import typelang as tl
from .relations import registry
from .syntax import DeclParseError, parse_type_decl

DEFAULT_PATH = Path(__file__).with_name("builtins.sig")
EXT_DIRECTIONS = ("left", "right", "both")


class SignatureError(Exception):
    def __init__(self, message, line: Optional[int] = None, path: Optional[str] = None):
        where = f"{path or '<signatures>'}" + (f":{line}" if line else "")
        super().__init__(f"{where}: {message}")
        self.line = line
        self.path = path


@dataclass(frozen=True)
class Signature:
    name: str
    domain: tuple  # alternatives, each a Func
    ext: Optional[str] = None
    rel: Optional[str] = None
    line: int = 0

    @property
    def arity(self) -> int:
        f = self.domain[0]
        if isinstance(f, tl.Func) and isinstance(f.arg, tl.Tuple) and len(f.arg.elems) > 1:
            return len(f.arg.elems)
        return 1

    @property
    def relation(self) -> Optional[str]:
        if self.rel:
            return self.rel
        return "generic" if self.ext else None


class SignatureTable(dict):
    """Mapping built-in name -> Signature; read-only by convention."""

    path: Optional[str] = None


_ENTRY = re.compile(r"^\s*(\S+)\s*:\s*(.*)$")


def _split_tail(body: str):
    words = body.split()
    ext = rel = None
    # peel trailing keywords: "... ext [dir] [rel name]"
    if len(words) >= 2 and words[-2] == "rel":
        rel = words[-1]
        words = words[:-2]
    if words and words[-1] in EXT_DIRECTIONS and len(words) >= 2 and words[-2] == "ext":
        ext = words[-1]
        words = words[:-2]
    elif words and words[-1] == "ext":
        ext = "both"
        words = words[:-1]
    return " ".join(words), ext, rel


def parse_signatures(text: str, path: Optional[str] = None) -> SignatureTable:
    table = SignatureTable()
    table.path = path
    fresh = itertools.count(1).__next__
    rules = registry()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _ENTRY.match(line)
        if not m:
            raise SignatureError("expected 'name : declaration'", lineno, path)
        name, body = m.group(1), m.group(2)
        decl_text, ext, rel = _split_tail(body)
        if not decl_text:
            raise SignatureError(f"missing declaration for {name!r}", lineno, path)
        try:
            domain = parse_type_decl(decl_text, fresh)
        except DeclParseError as e:
            raise SignatureError(e.message, lineno, path) from None
        if not all(isinstance(t, tl.Func) for t in domain):
            raise SignatureError(f"{name!r} must have a function type", lineno, path)
        if rel is not None and rel not in rules:
            raise SignatureError(f"unknown relation {rel!r}", lineno, path)
        if name in table:
            raise SignatureError(
                f"duplicate entry for {name!r} (first on line {table[name].line})", lineno, path)
        table[name] = Signature(name, domain, ext, rel, lineno)
    return table


def load_signatures(path=None) -> SignatureTable:
    """Load from ``path``, else $QTYPE_SIGNATURES, else the shipped table."""
    if path is None:
        path = os.environ.get("QTYPE_SIGNATURES") or DEFAULT_PATH
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise SignatureError(f"cannot read signature file: {e.strerror or e}", None, str(path))
    return parse_signatures(text, str(path))
