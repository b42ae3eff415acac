"""Earliest normal form: output prefixes, prefix pushing, state merging."""
from __future__ import annotations

from .lookahead import ensure_uniform, minimal_trees
from .transducer import Dtop, DtopError, apply_state, fresh_name, rename_states, trim
from .trees import Call, NotAPrefix, Tree, Var, decompose, lcp, rename_calls, substitute


class EmptyDomain(DtopError):
    pass


class AlignmentFailure(DtopError):
    """A rule could not be decomposed along its state's prefix (a bug)."""


def output_prefix(T: Dtop) -> dict:
    """P(q) = the largest pattern that is a prefix of every [[q]](s).

    Seeded with the output on a minimal tree of q's la-class, then shrunk
    by P(q) := P(q) ⊔ rhs[q'(x_i) <- P(q')] over all rules of q until stable.
    """
    rho = T.la_map
    if rho is None:
        raise DtopError("output_prefix needs an la-uniform transducer")
    mins = minimal_trees(T.la, T.input_alphabet)
    P = {}
    for q in T.states:
        if q not in rho:
            continue
        if rho[q] not in mins:
            raise EmptyDomain(f"state {q} has an empty domain")
        P[q] = apply_state(T, q, mins[rho[q]])
    by_state = T._by_state
    changed = True
    while changed:
        changed = False
        for q in P:
            cur = P[q]
            if isinstance(cur, Var):
                continue
            new = cur
            for a, prof, rhs in by_state.get(q, ()):
                inst = rename_calls(rhs, lambda c: P[c.state])
                new = lcp(new, inst)
                if isinstance(new, Var):
                    break
            if new is not cur:
                P[q] = new
                changed = True
    return P


def _plug(P, names, q, var):
    """P(q) with its j-th variable replaced by <q,j>(var)."""
    p = P[q]
    vs = [n for n in _var_leaves(p)]
    return substitute(p, {Var(j): Call(names[(q, j)], var) for j in vs})


def _var_leaves(t):
    out = []
    stack = [t]
    while stack:
        n = stack.pop()
        if isinstance(n, Var):
            out.append(n.index)
        elif isinstance(n, Tree):
            stack.extend(reversed(n.children))
    return out


def to_earliest(T: Dtop, P: dict | None = None) -> Dtop:
    """Push every state's common output prefix up to its callers."""
    if P is None:
        P = output_prefix(T)
    taken = set(T.output_alphabet)
    names = {}
    new_states = []
    for q in T.states:
        if q not in P:
            continue
        m = len(_var_leaves(P[q]))
        for j in range(1, m + 1):
            base = q if P[q] is Var(1) else f"{q}_{j}"
            names[(q, j)] = fresh_name(base, taken)
            taken.add(names[(q, j)])
            new_states.append(names[(q, j)])

    def push(t):
        return rename_calls(t, lambda c: _plug(P, names, c.state, c.arg))

    axioms = {l: push(ax) for l, ax in T.axioms.items()}
    rules = {}
    for (q, a, prof), rhs in T.rules.items():
        if q not in P or not _var_leaves(P[q]):
            continue
        u = push(rhs)
        try:
            parts = decompose(P[q], u)
        except NotAPrefix as e:
            raise AlignmentFailure(f"rule {q}({a}): {e}") from None
        for j, r in enumerate(parts, 1):
            rules[(names[(q, j)], a, prof)] = r
    return T.with_(states=tuple(new_states), rules=rules, axioms=axioms)


def canonicalize(T: Dtop) -> Dtop:
    """Merge equivalent states of an earliest la-uniform transducer.

    Partition refinement starting from blocks of equal la-state; each block
    is represented by its least state name.
    """
    rho = T.la_map or {}
    firsts = {}
    block = {q: firsts.setdefault(rho.get(q), len(firsts)) for q in T.states}
    by_state = T._by_state
    while True:
        sigs = {}
        for q in T.states:
            entries = []
            for a, prof, rhs in by_state.get(q, ()):
                shape = rename_calls(rhs, lambda c: Call(f"#{block[c.state]}", c.arg))
                entries.append((a, prof, shape))
            entries.sort(key=lambda e: (e[0], e[1]))
            sigs[q] = (block[q], tuple(entries))
        ids = {}
        refined = {q: ids.setdefault(sigs[q], len(ids)) for q in T.states}
        stable = len(ids) == len(set(block.values()))
        block = refined
        if stable:
            break
    groups = {}
    for q in T.states:
        groups.setdefault(block[q], []).append(q)
    mapping = {q: min(qs) for qs in groups.values() for q in qs}
    return rename_states(T, mapping)


def canonical_earliest(T: Dtop) -> Dtop:
    """Trim, la-uniformize if needed, push prefixes, merge equivalent states."""
    U = ensure_uniform(T)
    E = trim(to_earliest(U))
    return trim(canonicalize(E))


def is_earliest(T: Dtop) -> bool:
    return all(p is Var(1) for p in output_prefix(T).values())
