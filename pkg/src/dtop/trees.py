"""Ranked trees, patterns, substitution, common prefixes and node addressing.

All node objects are hash-consed: two structurally equal trees are the same
Python object, so equality is identity and hashing is O(1).  Output trees of
copying transducers are DAGs in memory and stay cheap to compare.

Height convention: a leaf has height 1, ``a(t1..tk)`` has height
``1 + max(height(ti))``.  Every bound in the package (aheadness bound,
difference bound) is computed with this convention.
"""
from __future__ import annotations

import itertools
import re
import threading
import weakref
from functools import reduce
from typing import Iterable, Iterator, Mapping, Sequence, Union

__all__ = [
    "Tree", "Var", "Call", "LaLeaf", "Node", "Path",
    "DtopError", "NotAPrefix", "EmptySet", "ParseError",
    "RankedAlphabet", "format_path", "parse_path", "parse_term",
    "lcp", "lcp_all", "decompose", "substitute", "lca", "is_ancestor",
    "subtree", "replace_at", "walk", "leaves", "variables", "is_pattern",
    "calls", "call_states", "rename_calls", "sort_key",
]

Path = tuple  # tuple of positive ints; () is the root


class DtopError(Exception):
    """Base class for errors raised by this package."""


class NotAPrefix(DtopError, ValueError):
    pass


class EmptySet(DtopError, ValueError):
    pass


class ParseError(DtopError, ValueError):
    pass


_lock = threading.Lock()


class _Node:
    __slots__ = ()

    def __setattr__(self, name, value):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __delattr__(self, name):
        raise AttributeError(f"{type(self).__name__} is immutable")

    def __repr__(self):
        return f"{type(self).__name__}({str(self)!r})"

    def __reduce__(self):
        return (type(self), self._args())


def _intern(cls, key, build):
    table = cls._table
    node = table.get(key)
    if node is None:
        with _lock:
            node = table.get(key)
            if node is None:
                node = object.__new__(cls)
                build(node)
                table[key] = node
    return node


class Tree(_Node):
    """A node labelled by an alphabet symbol with an ordered tuple of children."""

    __slots__ = ("label", "children", "height", "size", "ground", "__weakref__")
    _table = weakref.WeakValueDictionary()

    def __new__(cls, label: str, children: Iterable["Node"] = ()):
        children = tuple(children)

        def build(node):
            s = object.__setattr__
            s(node, "label", label)
            s(node, "children", children)
            s(node, "height", 1 + max((c.height for c in children), default=0))
            s(node, "size", 1 + sum(c.size for c in children))
            s(node, "ground", all(c.ground for c in children))

        return _intern(cls, (label, children), build)

    def _args(self):
        return (self.label, self.children)

    @property
    def rank(self) -> int:
        return len(self.children)

    def __str__(self):
        if not self.children:
            return self.label
        return f"{self.label}({','.join(map(str, self.children))})"


class Var(_Node):
    """Variable leaf ``x<index>``."""

    __slots__ = ("index", "__weakref__")
    _table = weakref.WeakValueDictionary()
    height = 1
    size = 1
    ground = False
    children = ()

    def __new__(cls, index: int):
        if index < 0:
            raise ValueError("variable index must be nonnegative")
        return _intern(cls, index, lambda n: object.__setattr__(n, "index", index))

    def _args(self):
        return (self.index,)

    def __str__(self):
        return f"x{self.index}"


class Call(_Node):
    """State-call leaf ``q(x_i)`` or ``q(u)`` with ``u`` an input node address."""

    __slots__ = ("state", "arg", "__weakref__")
    _table = weakref.WeakValueDictionary()
    height = 1
    size = 1
    ground = False
    children = ()

    def __new__(cls, state: str, arg: Union[Var, tuple]):
        if not isinstance(arg, (Var, tuple)):
            raise TypeError("call argument must be a Var or a node path")

        def build(node):
            object.__setattr__(node, "state", state)
            object.__setattr__(node, "arg", arg)

        return _intern(cls, (state, arg), build)

    def _args(self):
        return (self.state, self.arg)

    @property
    def var(self) -> int | None:
        return self.arg.index if isinstance(self.arg, Var) else None

    def __str__(self):
        if isinstance(self.arg, Var):
            return f"{self.state}({self.arg})"
        return f"{self.state}({format_path(self.arg)})"


class LaLeaf(_Node):
    """Look-ahead state used as a leaf of an input tree (a hole of known la-state)."""

    __slots__ = ("state", "__weakref__")
    _table = weakref.WeakValueDictionary()
    height = 1
    size = 1
    ground = False
    children = ()

    def __new__(cls, state: str):
        return _intern(cls, state, lambda n: object.__setattr__(n, "state", state))

    def _args(self):
        return (self.state,)

    def __str__(self):
        return self.state


Node = Union[Tree, Var, Call, LaLeaf]


def format_path(path: Sequence[int]) -> str:
    return ".".join(map(str, path)) if path else "ε"


def parse_path(text: str) -> tuple:
    text = text.strip()
    if text in ("ε", "", "λ"):
        return ()
    return tuple(int(p) for p in text.split("."))


class RankedAlphabet(dict):
    """Mapping symbol -> rank.  Names ``x1``, ``x2``, ... are reserved."""

    _reserved = re.compile(r"x\d+$")
    _ident = re.compile(r"[A-Za-z_][A-Za-z0-9_']*$")

    def __init__(self, symbols: Mapping[str, int] | Iterable[tuple[str, int]] = ()):
        super().__init__(symbols)
        for name, rank in self.items():
            if not self._ident.match(name) or self._reserved.match(name):
                raise ValueError(f"invalid symbol name {name!r}")
            if not isinstance(rank, int) or rank < 0:
                raise ValueError(f"invalid rank {rank!r} for {name!r}")

    def of_rank(self, k: int) -> list[str]:
        return [a for a, r in self.items() if r == k]

    @property
    def max_rank(self) -> int:
        return max(self.values(), default=0)

    def __str__(self):
        return " ".join(f"{a}:{r}" for a, r in self.items())


# ---------------------------------------------------------------------------
# traversal

def walk(t: Node, path: tuple = ()) -> Iterator[tuple[tuple, Node]]:
    """Yield ``(path, subtree)`` in pre-order."""
    yield path, t
    for i, c in enumerate(t.children, 1):
        yield from walk(c, path + (i,))


def leaves(t: Node) -> Iterator[tuple[tuple, Node]]:
    for p, n in walk(t):
        if not n.children:
            yield p, n


def subtree(t: Node, path: Sequence[int]) -> Node:
    for i in path:
        if not 1 <= i <= len(t.children):
            raise IndexError(f"invalid node {format_path(path)}")
        t = t.children[i - 1]
    return t


def replace_at(t: Node, repl: Mapping[tuple, Node]) -> Node:
    """Replace the subtrees at the given (pairwise disjoint) paths."""
    if not repl:
        return t

    def go(n, path):
        if path in repl:
            return repl[path]
        if not any(p[:len(path)] == path for p in repl):
            return n
        return Tree(n.label, [go(c, path + (i,)) for i, c in enumerate(n.children, 1)])

    return go(t, ())


def variables(t: Node) -> list[int]:
    """Indices of variable leaves in left-to-right order (bare variables only)."""
    return [n.index for _, n in leaves(t) if isinstance(n, Var)]


def is_pattern(t: Node) -> bool:
    vs = variables(t)
    return vs == list(range(1, len(vs) + 1))


def calls(t: Node) -> list[tuple[tuple, Call]]:
    return [(p, n) for p, n in leaves(t) if isinstance(n, Call)]


def call_states(t: Node) -> set[str]:
    return {n.state for _, n in calls(t)}


def rename_calls(t: Node, fn) -> Node:
    """Rebuild ``t`` with every call leaf ``c`` replaced by ``fn(c)``."""
    cache = {}

    def go(n):
        if n.ground:
            return n
        if isinstance(n, Call):
            return fn(n)
        if isinstance(n, Tree):
            r = cache.get(n)
            if r is None:
                r = cache[n] = Tree(n.label, [go(c) for c in n.children])
            return r
        return n

    return go(t)


def sort_key(t: Node):
    """Total order on nodes: by height, then label, then children."""
    if isinstance(t, Tree):
        return (t.height, 0, t.label, tuple(sort_key(c) for c in t.children))
    if isinstance(t, Var):
        return (1, 1, str(t.index), ())
    if isinstance(t, Call):
        return (1, 2, t.state, (str(t.arg),))
    return (1, 3, t.state, ())


# ---------------------------------------------------------------------------
# substitution, prefixes, lca

def substitute(t: Node, bindings: Mapping[Node, Node]) -> Node:
    """Simultaneously replace bound leaves of ``t``.

    Keys are leaves (variables, state calls, la-leaves or nullary symbols).
    Inserted trees are not substituted into again.
    """
    if not bindings:
        return t
    cache = {}

    def go(n):
        r = bindings.get(n)
        if r is not None:
            return r
        if not n.children:
            return n
        r = cache.get(n)
        if r is None:
            r = cache[n] = Tree(n.label, [go(c) for c in n.children])
        return r

    return go(t)


def lcp(t1: Node, t2: Node) -> Node:
    """Maximal pattern that is a prefix of both trees.

    Variables are fresh constants: a variable leaf never matches anything,
    not even the same variable, so folding over open trees stays sound.
    """
    counter = itertools.count(1)

    def go(a, b):
        if a is b and a.ground:
            return a
        if isinstance(a, Tree) and isinstance(b, Tree):
            if a.label == b.label and len(a.children) == len(b.children):
                return Tree(a.label, [go(x, y) for x, y in zip(a.children, b.children)])
        elif a is b and not isinstance(a, Var):
            return a
        return Var(next(counter))

    return go(t1, t2)


def lcp_all(trees: Iterable[Node]) -> Node:
    trees = list(trees)
    if not trees:
        raise EmptySet("lcp of an empty set")
    if len(trees) == 1:
        return lcp(trees[0], trees[0])
    return reduce(lcp, trees)


def decompose(p: Node, t: Node) -> list[Node]:
    """Residuals ``r1..rk`` with ``p[x_i <- r_i] == t``.

    Raises NotAPrefix if ``p`` is not a prefix of ``t``.
    """
    found: dict[int, Node] = {}

    def go(a, b, path):
        if isinstance(a, Var):
            if a.index in found and found[a.index] is not b:
                raise NotAPrefix(f"variable x{a.index} bound twice inconsistently")
            found[a.index] = b
            return
        if a.ground and a is b:
            return
        if isinstance(a, Tree):
            if (isinstance(b, Tree) and a.label == b.label
                    and len(a.children) == len(b.children)):
                for i, (x, y) in enumerate(zip(a.children, b.children), 1):
                    go(x, y, path + (i,))
                return
        elif a is b:
            return
        raise NotAPrefix(f"mismatch at node {format_path(path)}: {a} vs {b}")

    go(p, t, ())
    k = max(found, default=0)
    if sorted(found) != list(range(1, k + 1)):
        raise NotAPrefix("pattern variables are not x1..xk")
    return [found[i] for i in range(1, k + 1)]


def lca(nodes: Iterable[Sequence[int]]) -> tuple:
    nodes = [tuple(n) for n in nodes]
    if not nodes:
        raise EmptySet("lca of an empty set of nodes")
    prefix = nodes[0]
    for n in nodes[1:]:
        i = 0
        while i < min(len(prefix), len(n)) and prefix[i] == n[i]:
            i += 1
        prefix = prefix[:i]
    return prefix


def is_ancestor(v: Sequence[int], w: Sequence[int]) -> bool:
    return tuple(w[:len(v)]) == tuple(v)


# ---------------------------------------------------------------------------
# term syntax

_TOKEN = re.compile(r"\s*(?:([A-Za-z_][A-Za-z0-9_']*)|(\()|(\))|(,)|(:))")
_VAR = re.compile(r"x([1-9][0-9]?)$")


def _tokenize(text: str) -> list[str]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r} in {text!r}")
        out.append(m.group(m.lastindex))
        pos = m.end()
    return out


def parse_term(text: str, states: Iterable[str] = (), la_states: Iterable[str] = (),
               symbols: Mapping[str, int] | None = None) -> Node:
    """Parse ``name``, ``name(t1,...,tk)``, ``x1..x99`` and ``q(x_i)`` state calls.

    ``name(x_i)`` becomes a Call when ``name`` is in ``states``; a nullary
    name in ``la_states`` that is not a symbol becomes an LaLeaf.  When
    ``symbols`` is given, arities are checked.
    """
    states = set(states)
    la_states = set(la_states)
    toks = _tokenize(text)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else None

    def take(expected=None):
        nonlocal pos
        if pos >= len(toks):
            raise ParseError(f"unexpected end of term {text!r}")
        tok = toks[pos]
        if expected is not None and tok != expected:
            raise ParseError(f"expected {expected!r}, got {tok!r} in {text!r}")
        pos += 1
        return tok

    def term():
        name = take()
        if name in "(),:":
            raise ParseError(f"unexpected {name!r} in {text!r}")
        m = _VAR.match(name)
        if m and peek() != "(":
            return Var(int(m.group(1)))
        if peek() != "(":
            if name in la_states and (symbols is None or name not in symbols):
                return LaLeaf(name)
            if name in states:
                raise ParseError(f"state {name!r} used without argument")
            return _mk(name, [])
        take("(")
        kids = [term()]
        while peek() == ",":
            take(",")
            kids.append(term())
        take(")")
        if name in states:
            if len(kids) != 1 or not isinstance(kids[0], Var):
                raise ParseError(f"state call {name}(...) needs one variable argument")
            return Call(name, kids[0])
        return _mk(name, kids)

    def _mk(name, kids):
        if symbols is not None:
            if name not in symbols:
                raise ParseError(f"unknown symbol {name!r}")
            if symbols[name] != len(kids):
                raise ParseError(f"symbol {name!r} has rank {symbols[name]}, got {len(kids)} children")
        return Tree(name, kids)

    t = term()
    if pos != len(toks):
        raise ParseError(f"trailing input in {text!r}")
    return t
