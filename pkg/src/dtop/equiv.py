"""Equivalence checks: bounded enumeration and canonical-form isomorphism."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

from .earliest import canonical_earliest
from .transducer import UNDEFINED, Dtop, DtopError, evaluate
from .trees import Call, Tree

DEFAULT_BUDGET = 10 ** 6


class NoNullary(DtopError):
    pass


class IncompatibleLookAhead(DtopError):
    pass


def enumerate_trees(sigma, max_height: int) -> Iterator[Tree]:
    """All ground trees of height <= max_height, by height, then symbol order,
    then children in enumeration order (left child varies slowest)."""
    sigma = dict(sigma)
    if not any(k == 0 for k in sigma.values()):
        raise NoNullary("alphabet has no nullary symbol")
    if max_height < 1:
        return
    layers: list[list[Tree]] = []  # layers[h-1] = trees of height exactly h
    for h in range(1, max_height + 1):
        below = [t for layer in layers for t in layer]
        cur = []
        for a, k in sigma.items():
            if h == 1:
                if k == 0:
                    cur.append(Tree(a))
                continue
            if k == 0:
                continue
            for kids in itertools.product(below, repeat=k):
                if any(c.height == h - 1 for c in kids):
                    cur.append(Tree(a, kids))
        for t in cur:
            yield t
        layers.append(cur)


@dataclass(frozen=True)
class EquivResult:
    equal: bool
    counterexample: Tree | None = None
    out1: object = None
    out2: object = None
    checked: int = 0
    complete: bool = True

    def __bool__(self):
        return self.equal


def brute_force_equiv(T1: Dtop, T2: Dtop, max_height: int,
                      budget: int = DEFAULT_BUDGET) -> EquivResult:
    """Compare definedness and output on every input up to ``max_height``.

    ``Equal`` only means agreement on the inputs checked; ``complete`` is
    False when the budget stopped the enumeration early.  The first
    disagreement in enumeration order is returned.
    """
    sigma = dict(T1.input_alphabet)
    for a, k in T2.input_alphabet.items():
        if sigma.setdefault(a, k) != k:
            raise DtopError(f"symbol {a} has different ranks in the two transducers")
    n = 0
    for s in enumerate_trees(sigma, max_height):
        if n >= budget:
            return EquivResult(True, checked=n, complete=False)
        n += 1
        o1 = _eval(T1, s)
        o2 = _eval(T2, s)
        if o1 is not o2:
            return EquivResult(False, s, o1, o2, n)
    return EquivResult(True, checked=n)


def _eval(T, s):
    try:
        return evaluate(T, s)
    except (DtopError, KeyError):
        return UNDEFINED


def _same_la(T1: Dtop, T2: Dtop) -> bool:
    a, b = T1.la, T2.la
    if a.is_trivial and b.is_trivial:
        return True
    return (set(a.states) == set(b.states) and a.final == b.final
            and dict(a.delta) == dict(b.delta))


def isomorphic(T1: Dtop, T2: Dtop) -> dict | None:
    """State bijection mapping T1 onto T2 (axioms and rules), or None."""
    if set(T1.axioms) != set(T2.axioms) or len(T1.states) != len(T2.states):
        return None
    m: dict = {}
    inv: dict = {}
    work = []

    def match(t1, t2):
        if t1 is t2 and t1.ground:
            return True
        if isinstance(t1, Call) and isinstance(t2, Call):
            if t1.arg is not t2.arg and t1.arg != t2.arg:
                return False
            if m.setdefault(t1.state, t2.state) != t2.state:
                return False
            if inv.setdefault(t2.state, t1.state) != t1.state:
                return False
            work.append(t1.state)
            return True
        if isinstance(t1, Tree) and isinstance(t2, Tree):
            return (t1.label == t2.label and len(t1.children) == len(t2.children)
                    and all(match(x, y) for x, y in zip(t1.children, t2.children)))
        return False

    for l in T1.axioms:
        if not match(T1.axioms[l], T2.axioms[l]):
            return None
    done = set()
    by1, by2 = T1._by_state, T2._by_state
    while work:
        q = work.pop()
        if q in done:
            continue
        done.add(q)
        r1 = {(a, p): t for a, p, t in by1.get(q, ())}
        r2 = {(a, p): t for a, p, t in by2.get(m[q], ())}
        if r1.keys() != r2.keys():
            return None
        for key in r1:
            if not match(r1[key], r2[key]):
                return None
    if len(m) != len(T1.states):
        return None
    return m


def canonical_equiv(T1: Dtop, T2: Dtop) -> bool:
    """Exact equivalence for transducers sharing one look-ahead automaton."""
    if not _same_la(T1, T2):
        raise IncompatibleLookAhead("canonical comparison needs identical look-ahead automata")
    if set(T1.input_alphabet.items()) != set(T2.input_alphabet.items()):
        raise IncompatibleLookAhead("input alphabets differ")
    C1, C2 = canonical_earliest(T1), canonical_earliest(T2)
    return isomorphic(C1, C2) is not None
