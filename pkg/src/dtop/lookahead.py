"""Look-ahead utilities: uniformization, minimal trees, domains, difference bounds."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .transducer import (
    Dtop, DtopError, LaAutomaton, Undefined, apply, compute_la_map, fresh_name, trim,
)
from .trees import Call, RankedAlphabet, Tree, calls, rename_calls


class NotUniformizable(DtopError):
    """The domain is not a union of look-ahead classes, so no la-uniform
    transducer with this automaton can have it.  ``defined`` and
    ``undefined`` are inputs from one class on either side of the domain."""

    def __init__(self, msg, defined=None, undefined=None):
        super().__init__(msg)
        self.defined = defined
        self.undefined = undefined


class Unreachable(DtopError):
    def __init__(self, states):
        self.states = tuple(states)
        super().__init__(f"la-states with empty domain: {', '.join(self.states)}")


class MinimalTrees(dict):
    """l -> a minimal-height tree reaching l; ``unreachable`` lists the rest."""

    unreachable: tuple = ()

    def require(self, l):
        if l not in self:
            raise Unreachable([l])
        return self[l]


def _symbol_order(B: LaAutomaton, alphabet=None):
    if alphabet is not None:
        return list(alphabet)
    seen = []
    for a, _ in B.delta:
        if a not in seen:
            seen.append(a)
    return seen


def minimal_trees(B: LaAutomaton, alphabet=None) -> MinimalTrees:
    """Shortest tree per la-state by bottom-up rounds.

    Round k assigns every state reachable by a tree of height k.  Ties are
    broken by symbol order, then by the child states in state order.
    """
    order = _symbol_order(B, alphabet)
    by_symbol: dict = {}
    for (a, prof), l in B.delta.items():
        by_symbol.setdefault(a, []).append((prof, l))
    lpos = {l: i for i, l in enumerate(B.states)}
    for a in by_symbol:
        by_symbol[a].sort(key=lambda pl: [lpos.get(p, len(lpos)) for p in pl[0]])
    found = MinimalTrees()
    while True:
        new = {}
        for a in order:
            for prof, l in by_symbol.get(a, ()):
                if l in found or l in new:
                    continue
                if all(p in found for p in prof):
                    new[l] = Tree(a, [found[p] for p in prof])
        if not new:
            break
        found.update(new)
    result = MinimalTrees((l, found[l]) for l in B.states if l in found)
    result.unreachable = tuple(l for l in B.states if l not in found)
    return result


# ---------------------------------------------------------------------------
# domain automaton

@dataclass(frozen=True)
class DomainAutomaton:
    """Bottom-up automaton over pairs ``(l, D)`` with D the set of states of
    the transducer that are defined on the subtree.  It accepts dom([[M]])."""

    pairs: tuple
    transitions: dict   # (a, (pair..)) -> pair
    accepting: frozenset

    def run(self, s):
        def go(n):
            prof = tuple(go(c) for c in n.children)
            r = self.transitions.get((n.label, prof))
            if r is None:
                raise Undefined(f"no domain transition at {n.label}")
            return r
        return go(s)

    def accepts(self, s) -> bool:
        try:
            return self.run(s) in self.accepting
        except Undefined:
            return False


def domain_automaton(M: Dtop, symbols=None) -> DomainAutomaton:
    """Saturate reachable ``(l, D)`` pairs, optionally over a sub-alphabet."""
    sigma = M.input_alphabet if symbols is None else {a: M.input_alphabet[a] for a in symbols}
    rhs_calls = {key: [(c.state, c.var) for _, c in calls(t)] for key, t in M.rules.items()}
    pairs: list = []
    index: set = set()
    trans: dict = {}
    changed = True
    while changed:
        changed = False
        snapshot = list(pairs)
        for a, k in sigma.items():
            for kids in itertools.product(snapshot, repeat=k):
                if (a, kids) in trans:
                    continue
                prof = tuple(p[0] for p in kids)
                l = M.la.delta.get((a, prof))
                if l is None:
                    continue
                D = frozenset(
                    q for q in M.states
                    if (q, a, prof) in M.rules
                    and all(q2 in kids[i - 1][1] for q2, i in rhs_calls[(q, a, prof)]))
                pair = (l, D)
                trans[(a, kids)] = pair
                if pair not in index:
                    index.add(pair)
                    pairs.append(pair)
                    changed = True
    acc = set()
    for l, D in pairs:
        ax = M.axioms.get(l)
        if l in M.la.final and ax is not None and all(c.state in D for _, c in calls(ax)):
            acc.add((l, D))
    return DomainAutomaton(tuple(pairs), trans, frozenset(acc))


@dataclass(frozen=True)
class SubAlphabet:
    """On NO, ``symbols`` is the only candidate (the symbols used by domain
    trees) and ``witness`` is a tree over it outside the domain."""

    ok: bool
    symbols: RankedAlphabet | None = None
    restricted: Dtop | None = None
    reason: str = ""
    witness: object = None


def domain_subalphabet(M: Dtop) -> SubAlphabet:
    """Decide whether dom([[M]]) = T_Σ' for some Σ' ⊆ Σ."""
    DA = domain_automaton(M)
    # co-reachability: pairs that can be completed to an accepted tree
    useful = set(DA.accepting)
    changed = True
    while changed:
        changed = False
        for (a, kids), tgt in DA.transitions.items():
            if tgt in useful:
                for p in kids:
                    if p not in useful:
                        useful.add(p)
                        changed = True
    keep = {a for (a, kids), tgt in DA.transitions.items() if tgt in useful}
    sub = RankedAlphabet((a, k) for a, k in M.input_alphabet.items() if a in keep)
    # every tree over Σ' must be accepted
    D2 = domain_automaton(M, sub)
    bad = [p for p in D2.pairs if p not in D2.accepting]
    if bad:
        witness = _tree_for(D2, bad[0])
        return SubAlphabet(False, sub, reason="domain is not the tree language of a sub-alphabet",
                           witness=witness)
    la = LaAutomaton(M.la.states, M.la.final,
                     {(a, p): l for (a, p), l in M.la.delta.items() if a in sub})
    rules = {k: v for k, v in M.rules.items() if k[1] in sub}
    restricted = trim(M.with_(input_alphabet=sub, rules=rules, la=la))
    return SubAlphabet(True, sub, restricted)


def _tree_for(DA: DomainAutomaton, target):
    """Smallest-height tree leading to ``target`` in the domain automaton."""
    best: dict = {}
    while target not in best:
        new = {}
        for (a, kids), tgt in DA.transitions.items():
            if tgt not in best and tgt not in new and all(k in best for k in kids):
                new[tgt] = Tree(a, [best[k] for k in kids])
        if not new:
            return None
        best.update(new)
    return best[target]


# ---------------------------------------------------------------------------
# uniformization

def la_uniformize(M: Dtop) -> Dtop:
    """Equivalent la-uniform transducer with the same look-ahead automaton.

    States are split into copies ``(q, l)``; a copy keeps the rules of ``q``
    for profiles consistent with ``l``.  Axioms whose domain is empty are
    dropped.  If some axiom is defined on part but not all of its la-class,
    no la-uniform transducer over this automaton exists and
    NotUniformizable is raised.
    """
    la = M.la
    prod = la.productive
    DA = domain_automaton(M)
    axioms_keep = {}
    for l, ax in M.axioms.items():
        if l not in prod:
            continue
        need = {c.state for _, c in calls(ax)}
        split = {need <= D: (l2, D) for (l2, D) in DA.pairs if l2 == l}
        if True not in split:
            continue
        if False not in split:
            axioms_keep[l] = ax
            continue
        raise NotUniformizable(
            f"axiom for {l} is defined on only part of its la-class",
            _tree_for(DA, split[True]), _tree_for(DA, split[False]))

    # states (q, l) reachable from the kept axioms
    order: list = []
    seen: set = set()
    work = [(c.state, l) for l, ax in axioms_keep.items() for _, c in calls(ax)]
    new_rules: dict = {}
    while work:
        ql = work.pop(0)
        if ql in seen:
            continue
        seen.add(ql)
        order.append(ql)
        q, l = ql
        for (a, prof), target in la.delta.items():
            if target != l or not all(p in prod for p in prof):
                continue
            rhs = M.rules.get((q, a, prof))
            if rhs is None:
                # cannot happen for a kept axiom: the domain analysis above
                # guarantees every reached copy is defined on its whole class
                raise NotUniformizable(f"state {q} has no rule for {a}{prof}")
            new_rules[(ql, a, prof)] = rhs
            for _, c in calls(rhs):
                work.append((c.state, prof[c.var - 1]))

    ls_of: dict = {}
    for q, l in order:
        ls_of.setdefault(q, []).append(l)
    taken = set(M.output_alphabet)
    names: dict = {}
    for q in M.states:
        for l in ls_of.get(q, ()):
            base = q if len(ls_of[q]) == 1 else f"{q}_{l}"
            names[(q, l)] = fresh_name(base, taken)
            taken.add(names[(q, l)])

    def ren(t, prof):
        return rename_calls(t, lambda c: Call(names[(c.state, prof[c.var - 1])], c.arg))

    rules = {(names[ql], a, prof): ren(rhs, prof) for (ql, a, prof), rhs in new_rules.items()}
    axioms = {l: rename_calls(ax, lambda c, l=l: Call(names[(c.state, l)], c.arg))
              for l, ax in axioms_keep.items()}
    states = tuple(names[ql] for ql in sorted(order, key=lambda ql: (M.states.index(ql[0]),
                                                                     la.states.index(ql[1]))))
    N = M.with_(states=states, rules=rules, axioms=axioms)
    assert compute_la_map(N) is not None
    return N


def ensure_uniform(M: Dtop) -> Dtop:
    M = trim(M)
    if M.is_la_uniform:
        return M
    return la_uniformize(M)


# ---------------------------------------------------------------------------
# difference bound

def difference_bound(M: Dtop) -> int:
    """max over la-states l of height(M(s_l)) for minimal trees s_l."""
    mins = minimal_trees(M.la, M.input_alphabet)
    if mins.unreachable:
        raise Unreachable(mins.unreachable)
    best = 0
    for l, s in mins.items():
        try:
            best = max(best, apply(M, s).height)
        except Undefined:
            continue
    return best


def difference_trees(t1, t2):
    """Residuals of two outputs below their common prefix, pairwise."""
    from .trees import decompose, lcp
    p = lcp(t1, t2)
    return list(zip(decompose(p, t1), decompose(p, t2)))
