"""Linear definability: pairwise-occurring states, the zero-output-twinned
test, lca-conformity, and the aheadness construction of a linear transducer.

All functions expect a canonical earliest, la-uniform, trimmed transducer
unless stated otherwise; ``decide_linear`` runs the whole pipeline.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from .earliest import canonical_earliest
from .lookahead import minimal_trees
from .transducer import Dtop, DtopError, fresh_name
from .trees import (
    Call, Tree, Var, calls, format_path, is_ancestor, lca, rename_calls, replace_at, subtree,
)

ZOT = "zero-output-twinned"
LCA = "lca-conformity"


class NotLinearizable(DtopError):
    pass


class HeightBoundExceeded(DtopError):
    pass


@dataclass
class Verdict:
    ok: bool
    property: str | None = None
    witness: object = None
    result: Dtop | None = None
    info: dict = field(default_factory=dict)

    def __bool__(self):
        return self.ok


def _profiles(T: Dtop):
    """(a, profile) slots with k >= 1 that rules can use."""
    prod = T.la.productive
    return [(a, prof) for (a, prof) in T.la.delta
            if prof and all(p in prod for p in prof)]


def _calls_by_var(rhs):
    out: dict = {}
    for path, c in calls(rhs):
        out.setdefault(c.var, []).append((path, c.state))
    return out


# ---------------------------------------------------------------------------
# pairwise occurring states

def pairwise_occurring(T: Dtop) -> set:
    """Ordered pairs (q1, q2), closed under symmetry, of states that label
    two distinct call nodes on the same input node in some output."""
    po: set = set()

    def add_leaves(t):
        for group in _calls_by_var(t).values():
            for (p1, s1), (p2, s2) in itertools.permutations(group, 2):
                po.add((s1, s2))

    for ax in T.axioms.values():
        add_leaves(ax)
    for rhs in T.rules.values():
        add_leaves(rhs)
    cv = {key: _calls_by_var(rhs) for key, rhs in T.rules.items()}
    work = deque(po)
    while work:
        q1, q2 = work.popleft()
        for a, prof in _profiles(T):
            c1 = cv.get((q1, a, prof))
            c2 = cv.get((q2, a, prof))
            if c1 is None or c2 is None:
                continue
            for i in c1.keys() & c2.keys():
                for _, s1 in c1[i]:
                    for _, s2 in c2[i]:
                        for pair in ((s1, s2), (s2, s1)):
                            if pair not in po:
                                po.add(pair)
                                work.append(pair)
    return po


# ---------------------------------------------------------------------------
# zero output twinned

@dataclass(frozen=True)
class ZotGraph:
    po: frozenset
    edges: dict  # vertex -> list of (vertex, (a, profile, j))

    def path(self, src, dst):
        """Shortest edge path from src to dst, or None."""
        prev = {src: None}
        queue = deque([src])
        while queue:
            v = queue.popleft()
            if v == dst and v != src:
                break
            for w, lab in self.edges.get(v, ()):
                if w not in prev:
                    prev[w] = (v, lab)
                    queue.append(w)
        if dst not in prev:
            return None
        out = []
        v = dst
        while prev[v] is not None:
            v, lab = prev[v]
            out.append(lab)
        return out[::-1]


def zot_graph(T: Dtop, po: set | None = None) -> ZotGraph:
    """Round vertices ("r", q1, q2) and square vertices ("s", q1, q2)."""
    if po is None:
        po = pairwise_occurring(T)
    edges: dict = {}
    for q1, q2 in po:
        for a, prof in _profiles(T):
            t1 = T.rules.get((q1, a, prof))
            t2 = T.rules.get((q2, a, prof))
            if t1 is None or t2 is None:
                continue
            c1, c2 = _calls_by_var(t1), _calls_by_var(t2)
            for j in sorted(c1.keys() & c2.keys()):
                for _, b1 in c1[j]:
                    for _, b2 in c2[j]:
                        lab = (a, prof, j)
                        edges.setdefault(("s", q1, q2), []).append((("s", b1, b2), lab))
                        quiet = t1 is Call(b1, Var(j)) and t2 is Call(b2, Var(j))
                        kind = "r" if quiet else "s"
                        edges.setdefault(("r", q1, q2), []).append(((kind, b1, b2), lab))
    return ZotGraph(frozenset(po), edges)


def decode_context(T: Dtop, labels) -> Tree:
    """Turn an edge path into a context; other children get minimal trees."""
    mins = minimal_trees(T.la, T.input_alphabet)
    c = Var(1)
    for a, prof, j in reversed(labels):
        kids = [c if i == j else mins[l] for i, l in enumerate(prof, 1)]
        c = Tree(a, kids)
    return c


@dataclass(frozen=True)
class ZotWitness:
    pair: tuple
    edges: tuple
    context: Tree
    la_state: str

    def __str__(self):
        return f"states ({self.pair[0]}, {self.pair[1]}) loop on context {self.context}"


def is_zero_output_twinned(T: Dtop, po: set | None = None):
    """(True, None) or (False, ZotWitness) for a looping, output-generating pair."""
    G = zot_graph(T, po)
    rho = T.la_map or {}
    for q1, q2 in sorted(G.po):
        p = G.path(("r", q1, q2), ("s", q1, q2))
        if p is not None:
            ctx = decode_context(T, p)
            return False, ZotWitness((q1, q2), tuple(p), ctx, rho.get(q1))
    return True, None


# ---------------------------------------------------------------------------
# triplets and lca-conformity

def triplets(T: Dtop, po: set | None = None) -> set:
    """((q1, q2), q3): three distinct call nodes on one input node where the
    lca of the first two is an ancestor of the third."""
    if po is None:
        po = pairwise_occurring(T)
    out: set = set()

    def add(tr, work=None):
        (a, b), c = tr
        for x in (((a, b), c), ((b, a), c)):
            if x not in out:
                out.add(x)
                if work is not None:
                    work.append(x)

    def seed(t):
        for group in _calls_by_var(t).values():
            for (v1, s1), (v2, s2), (v3, s3) in itertools.permutations(group, 3):
                if is_ancestor(lca([v1, v2]), v3):
                    add(((s1, s2), s3))

    for ax in T.axioms.values():
        seed(ax)
    for rhs in T.rules.values():
        seed(rhs)
    cv = {key: _calls_by_var(rhs) for key, rhs in T.rules.items()}
    profiles = _profiles(T)
    # one parent contributes two nodes, a pairwise partner the third
    for q, q2 in po:
        for a, prof in profiles:
            c1, c2 = cv.get((q, a, prof)), cv.get((q2, a, prof))
            if c1 is None or c2 is None:
                continue
            for i in c1.keys() & c2.keys():
                for (_, s1), (_, s3) in itertools.permutations(c1[i], 2):
                    for _, s2 in c2[i]:
                        add(((s1, s2), s3))
    work = deque(out)
    while work:
        (p1, p2), p3 = work.popleft()
        for a, prof in profiles:
            cs = [cv.get((p, a, prof)) for p in (p1, p2, p3)]
            if any(c is None for c in cs):
                continue
            for i in cs[0].keys() & cs[1].keys() & cs[2].keys():
                for _, s1 in cs[0][i]:
                    for _, s2 in cs[1][i]:
                        for _, s3 in cs[2][i]:
                            add(((s1, s2), s3), work)
    return out


@dataclass(frozen=True)
class LcaWitness:
    letter: str
    profile: tuple
    kind: str
    states: tuple          # the parent state(s) whose rules are involved
    rhs: tuple             # their right-hand sides
    leaves: tuple          # (q1(x_i), q2(x_i), q3(x_j))

    def __str__(self):
        rhs = "; ".join(str(r) for r in self.rhs)
        return f"letter {self.letter} ({self.kind}): {rhs}"


def is_lca_conform(T: Dtop, po: set | None = None, trips: set | None = None):
    """(True, None) or (False, LcaWitness), checking single letters of rank >= 2."""
    if po is None:
        po = pairwise_occurring(T)
    if trips is None:
        trips = triplets(T, po)
    cv = {key: _calls_by_var(rhs) for key, rhs in T.rules.items()}
    sym_order = {a: i for i, a in enumerate(T.input_alphabet)}
    profiles = sorted((ap for ap in _profiles(T) if len(ap[1]) >= 2),
                      key=lambda ap: (sym_order[ap[0]], ap[1]))
    states = T.states

    def others(c, i):
        return [(j, v, s) for j, group in sorted(c.items()) if j != i for v, s in group]

    for a, prof in profiles:
        # (i) one right-hand side
        for q in states:
            c = cv.get((q, a, prof))
            if c is None:
                continue
            for i, group in sorted(c.items()):
                for (v1, s1), (v2, s2) in itertools.combinations(group, 2):
                    anc = lca([v1, v2])
                    for j, v3, s3 in others(c, i):
                        if is_ancestor(anc, v3):
                            leaves = (Call(s1, Var(i)), Call(s2, Var(i)), Call(s3, Var(j)))
                            return False, LcaWitness(a, prof, "single", (q,),
                                                     (T.rules[(q, a, prof)],), leaves)
        # (ii) pairwise occurring parents
        for q, q2 in sorted(po):
            c1, c2 = cv.get((q, a, prof)), cv.get((q2, a, prof))
            if c1 is None or c2 is None:
                continue
            for i in sorted(c1.keys() & c2.keys()):
                for _, s1 in c1[i]:
                    for j, _, s3 in others(c1, i):
                        s2 = c2[i][0][1]
                        leaves = (Call(s1, Var(i)), Call(s2, Var(i)), Call(s3, Var(j)))
                        return False, LcaWitness(
                            a, prof, "pair", (q, q2),
                            (T.rules[(q, a, prof)], T.rules[(q2, a, prof)]), leaves)
        # (iii) triplets of parents
        for (p1, p2), p3 in sorted(trips):
            cs = [cv.get((p, a, prof)) for p in (p1, p2, p3)]
            if any(c is None for c in cs):
                continue
            for i in sorted(cs[0].keys() & cs[1].keys()):
                for j in sorted(cs[2].keys()):
                    if j != i:
                        leaves = (Call(cs[0][i][0][1], Var(i)), Call(cs[1][i][0][1], Var(i)),
                                  Call(cs[2][j][0][1], Var(j)))
                        return False, LcaWitness(
                            a, prof, "triplet", (p1, p2, p3),
                            tuple(T.rules[(p, a, prof)] for p in (p1, p2, p3)), leaves)
    return True, None


# ---------------------------------------------------------------------------
# linearization

def _hole(t):
    """Replace every call q(x_i) by q(x1)."""
    return rename_calls(t, lambda c: Call(c.state, Var(1)))


def _split(u, k):
    """Cut ``u`` at the lca of the calls on each variable.

    Returns (p', {j: t_j[<-x1]}) or raises NotLinearizable when two cut
    points overlap.
    """
    by_var = _calls_by_var(u)
    cuts = {}
    for j in range(1, k + 1):
        if j in by_var:
            cuts[j] = lca([p for p, _ in by_var[j]])
    for j1, j2 in itertools.combinations(cuts, 2):
        if is_ancestor(cuts[j1], cuts[j2]) or is_ancestor(cuts[j2], cuts[j1]):
            raise NotLinearizable(
                f"calls on x{j1} and x{j2} overlap at node {format_path(cuts[j1])}")
    parts = {j: _hole(subtree(u, v)) for j, v in cuts.items()}
    return cuts, parts


def linearize(T: Dtop, check_bound: bool = True):
    """Build the linear transducer whose states store the output of ``T``
    that is produced ahead of it.

    Returns ``(N, ahead)`` where ``ahead`` maps each new state to its tree
    t[<-x1] (calls written q(x1)).
    """
    eta = T.max_rhs_height()
    bound = (len(T.states) ** 2 + 1) * eta
    taken = set(T.output_alphabet)
    names: dict = {}
    ahead: dict = {}
    order: list = []
    rho = T.la_map or {}

    def state_for(t):
        n = names.get(t)
        if n is None:
            if check_bound and t.height > bound:
                raise HeightBoundExceeded(
                    f"aheadness tree of height {t.height} exceeds bound {bound}")
            n = fresh_name(f"t{len(order)}", taken)
            taken.add(n)
            names[t] = n
            ahead[n] = t
            order.append(t)
        return n

    axioms = {}
    for l, ax in T.axioms.items():
        if ax.ground:
            axioms[l] = ax
            continue
        cuts, parts = _split(ax, 1)
        axioms[l] = replace_at(ax, {cuts[1]: Call(state_for(parts[1]), Var(1))})

    rules = {}
    i = 0
    while i < len(order):
        t = order[i]
        name = names[t]
        i += 1
        qs = [c.state for _, c in calls(t)]
        ls = {rho.get(q) for q in qs}
        if len(ls) > 1:
            raise NotLinearizable(f"aheadness tree {t} mixes look-ahead states")
        target = ls.pop()
        for (a, prof), l in T.la.delta.items():
            if rho and l != target:
                continue
            rhss = [T.rules.get((q, a, prof)) for q in qs]
            if any(r is None for r in rhss):
                continue
            by_state = dict(zip(qs, rhss))
            u = _substitute_calls(t, by_state)
            cuts, parts = _split(u, len(prof))
            repl = {cuts[j]: Call(state_for(parts[j]), Var(j)) for j in cuts}
            rules[(name, a, prof)] = replace_at(u, repl)
    N = T.with_(states=tuple(names[t] for t in order), rules=rules, axioms=axioms)
    return N, ahead


def _substitute_calls(t, by_state):
    return rename_calls(t, lambda c: by_state[c.state])


def aheadness_bound(T: Dtop) -> int:
    return (len(T.states) ** 2 + 1) * T.max_rhs_height()


def decide_linear(T: Dtop) -> Verdict:
    """Canonical earliest form, then both checks, then the construction."""
    C = canonical_earliest(T)
    po = pairwise_occurring(C)
    ok, w = is_zero_output_twinned(C, po)
    if not ok:
        return Verdict(False, ZOT, w, info={"canonical": C})
    ok, w = is_lca_conform(C, po)
    if not ok:
        return Verdict(False, LCA, w, info={"canonical": C})
    N, ahead = linearize(C)
    return Verdict(True, result=N,
                   info={"canonical": C, "ahead": ahead, "bound": aheadness_bound(C)})
