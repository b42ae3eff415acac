"""Deciding whether a total transducer computes a tree homomorphism."""
from __future__ import annotations

from .earliest import canonical_earliest
from .lineardef import Verdict
from .transducer import Dtop, DtopError, apply, missing_rules
from .trees import Call, Tree, Var, calls, rename_calls

HOM = "homomorphism"
HSTATE = "h"


class NotTotal(DtopError):
    pass


def is_simeq(t1, t2) -> bool:
    """True iff a bijection of variables turns t1 into t2 (calls keep their states)."""
    fwd: dict = {}
    bwd: dict = {}

    def go(a, b):
        if a is b and a.ground:
            return True
        if isinstance(a, Call) and isinstance(b, Call):
            if a.state != b.state:
                return False
            x, y = a.arg, b.arg
            if fwd.setdefault(x, y) != y or bwd.setdefault(y, x) != x:
                return False
            return True
        if isinstance(a, Tree) and isinstance(b, Tree):
            return (a.label == b.label and len(a.children) == len(b.children)
                    and all(go(x, y) for x, y in zip(a.children, b.children)))
        if isinstance(a, Var) and isinstance(b, Var):
            return fwd.setdefault(a, b) is b and bwd.setdefault(b, a) is a
        return False

    return go(t1, t2)


def is_subtree_conform_naive(t, A) -> bool:
    if t.ground or is_simeq(t, A):
        return True
    return isinstance(t, Tree) and bool(t.children) and all(
        is_subtree_conform_naive(c, A) for c in t.children)


def is_subtree_conform(t, A) -> bool:
    """Ground, or ≃ A, or every child is subtree conform to A.

    Only nodes whose height equals height(A) are tested for ≃; lower
    non-ground subtrees can never conform.
    """
    h = A.height

    def go(n):
        if n.ground:
            return True
        if n.height < h:
            return False
        if n.height == h:
            return is_simeq(n, A)
        return isinstance(n, Tree) and all(go(c) for c in n.children)

    return go(t)


def _hom_rhs(t, A):
    """t with every subtree ≃ A replaced by h(x_j), or None if not conform."""
    h = A.height

    def go(n):
        if n.ground:
            return n
        if n.height == h and is_simeq(n, A):
            return Call(HSTATE, calls(n)[0][1].arg)
        if n.height <= h or not isinstance(n, Tree):
            raise _NoConform
        return Tree(n.label, [go(c) for c in n.children])

    try:
        return go(t)
    except _NoConform:
        return None


class _NoConform(Exception):
    pass


def _make_hom(T: Dtop, rules: dict) -> Dtop:
    rules = {(HSTATE, a): rhs for a, rhs in rules.items()}
    return Dtop.make([HSTATE], T.input_alphabet, T.output_alphabet, rules,
                     Call(HSTATE, Var(1)))


def decide_hom(T: Dtop) -> Verdict:
    """YES with a one-state transducer h (state ``h``), or NO with a witness letter."""
    if T.has_lookahead:
        raise NotTotal("homomorphism decision needs a transducer without look-ahead")
    missing = missing_rules(T)
    if missing:
        q, a = missing[0]
        raise NotTotal(f"transducer is not total: no rule for {q}({a})")
    C = canonical_earliest(T)
    A = C.axiom
    sigma = C.input_alphabet
    if A.ground:
        return Verdict(True, result=_make_hom(C, {a: A for a in sigma}),
                       info={"canonical": C, "case": "ground axiom"})
    if isinstance(A, Call):
        if len(C.states) == 1:
            q = C.states[0]
            rules = {a: _rename(C.rhs(q, a), HSTATE) for a in sigma}
            return Verdict(True, result=_make_hom(C, rules),
                           info={"canonical": C, "case": "single state"})
        return Verdict(False, HOM, f"axiom {A} with {len(C.states)} states",
                       info={"canonical": C, "case": "several states"})
    rules = {}
    for a, k in sigma.items():
        s = Tree(a, [Var(i) for i in range(1, k + 1)])
        t = apply(C, s)
        r = _hom_rhs(t, A)
        if r is None:
            return Verdict(False, HOM, f"{t} is not subtree conform to {A} on letter {a}",
                           info={"canonical": C, "letter": a, "output": t})
        rules[a] = r
    return Verdict(True, result=_make_hom(C, rules), info={"canonical": C, "case": "conform"})


def _rename(t, name):
    return rename_calls(t, lambda c: Call(name, c.arg))
