"""Random transducer generators and brute-force oracles used by the tests."""
from __future__ import annotations

import itertools
import random
from collections import deque
from pathlib import Path

from dtop.syntax import load
from dtop.transducer import TRIVIAL, Dtop, LaAutomaton, apply, apply_state
from dtop.trees import Call, LaLeaf, RankedAlphabet, Tree, Var, calls, lcp

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

# input alphabets small enough for exhaustive enumeration to height 5
SMALL_ALPHABETS = [
    {"a": 1, "e": 0},
    {"a": 1, "b": 1, "e": 0},
    {"f": 2, "e": 0},
    {"f": 2, "g": 1, "e": 0},
]
OUTPUT = {"f": 2, "g": 1, "a": 0, "b": 0}


def corpus(name: str) -> Dtop:
    return load(CORPUS / f"{name}.dtop")


def random_rhs(rng, states, k, delta=OUTPUT, height=3, p_call=0.45):
    nullary = [d for d, r in delta.items() if r == 0]
    inner = [d for d, r in delta.items() if r > 0]

    def go(h):
        if k and rng.random() < p_call:
            return Call(rng.choice(states), Var(rng.randint(1, k)))
        if h <= 1 or rng.random() < 0.35:
            if k and rng.random() < 0.5:
                return Call(rng.choice(states), Var(rng.randint(1, k)))
            return Tree(rng.choice(nullary))
        d = rng.choice(inner)
        return Tree(d, [go(h - 1) for _ in range(delta[d])])

    return go(height)


def random_dtop(rng, sigma=None, n_states=None, axiom=None, height=3, p_call=0.45,
                delta=OUTPUT) -> Dtop:
    """A random total transducer without look-ahead."""
    sigma = dict(sigma or rng.choice(SMALL_ALPHABETS))
    n = n_states or rng.randint(1, 4)
    states = [f"q{i}" for i in range(n)]
    rules = {(q, a): random_rhs(rng, states, k, delta, height, p_call)
             for q in states for a, k in sigma.items()}
    if axiom is None:
        axiom = random_rhs(rng, states, 1, delta, 2, 0.6)
    return Dtop.make(states, sigma, delta, rules, axiom)


def random_acyclic_dtop(rng, sigma=None, n_states=None, delta=OUTPUT) -> Dtop:
    """Monadic input, state q_i only calls q_j with j > i: copying happens a
    bounded number of times, so the result is linearizable."""
    sigma = dict(sigma or rng.choice([{"a": 1, "e": 0}, {"a": 1, "b": 1, "e": 0}]))
    n = n_states or rng.randint(2, 4)
    states = [f"q{i}" for i in range(n)]
    rules = {}
    for i, q in enumerate(states):
        later = states[i + 1:]
        for a, k in sigma.items():
            rules[(q, a)] = random_rhs(rng, later, k if later else 0, delta, 3, 0.5)
    return Dtop.make(states, sigma, delta, rules, Call("q0", Var(1)))


def random_la_dtop(rng, sigma=None, n_la=None, n_states=None, total_rules=True) -> Dtop:
    """A random transducer with a total look-ahead automaton and rules for
    every (state, symbol, profile) slot (so it is la-uniformizable)."""
    sigma = dict(sigma or rng.choice([{"f": 2, "a": 0, "b": 0}, {"a": 1, "b": 1, "e": 0}]))
    L = [f"l{i}" for i in range(n_la or rng.randint(1, 3))]
    delta = {}
    for a, k in sigma.items():
        for prof in itertools.product(L, repeat=k):
            delta[(a, prof)] = rng.choice(L)
    final = frozenset(rng.sample(L, rng.randint(1, len(L))))
    la = LaAutomaton(tuple(L), final, delta)
    n = n_states or rng.randint(1, 3)
    states = [f"q{i}" for i in range(n)]
    rules = {}
    for q in states:
        for (a, prof) in delta:
            if total_rules or rng.random() < 0.8:
                rules[(q, a, prof)] = random_rhs(rng, states, len(prof), OUTPUT, 2)
    axioms = {l: random_rhs(rng, states, 1, OUTPUT, 2, 0.6) for l in sorted(final)}
    return Dtop(tuple(states), RankedAlphabet(sigma), RankedAlphabet(OUTPUT), rules, axioms, la)


def random_hom(rng, sigma) -> Dtop:
    rules = {("h", a): random_rhs(rng, ["h"], k, OUTPUT, 3, 0.4) for a, k in sigma.items()}
    return Dtop.make(["h"], sigma, OUTPUT, rules, Call("h", Var(1)))


def annotate_with_lookahead(h: Dtop, rng, n_la=2) -> Dtop:
    """The homomorphism h run under a random total look-ahead automaton."""
    L = [f"l{i}" for i in range(n_la)]
    while True:
        delta = {(a, prof): rng.choice(L) for a, k in h.input_alphabet.items()
                 for prof in itertools.product(L, repeat=k)}
        la = LaAutomaton(tuple(L), frozenset(L), delta)
        if la.productive == frozenset(L):
            break
    rules = {("h", a, prof): h.rhs("h", a) for (a, prof) in delta}
    return Dtop(("h",), h.input_alphabet, h.output_alphabet, rules,
                {l: Call("h", Var(1)) for l in L}, la)


# ---------------------------------------------------------------------------
# independent interpreter

def naive_apply(T: Dtop, s):
    """Direct recursive evaluation, without any caching."""
    def run(n):
        if isinstance(n, LaLeaf):
            return n.state
        prof = tuple(run(c) for c in n.children)
        return T.la.delta[(n.label, prof)]

    def sem(q, n):
        prof = tuple(run(c) for c in n.children)
        rhs = T.rules[(q, n.label, prof)]

        def inst(t):
            if isinstance(t, Call):
                return sem(t.state, n.children[t.var - 1])
            if isinstance(t, Tree):
                return Tree(t.label, [inst(c) for c in t.children])
            return t
        return inst(rhs)

    ax = T.axioms[run(s)]

    def top(t):
        if isinstance(t, Call):
            return sem(t.state, s)
        return Tree(t.label, [top(c) for c in t.children]) if isinstance(t, Tree) else t
    return top(ax)


def full_binary(height, leaf="e", label="f"):
    t = Tree(leaf)
    for _ in range(height - 1):
        t = Tree(label, [t, t])
    return t


# ---------------------------------------------------------------------------
# bounded-context oracles (trivial look-ahead)

def _norm(kids):
    """Skeleton node over the given children: empty parts dropped, unary
    nodes collapsed, children sorted, at most three identical siblings."""
    kids = sorted((k for k in kids if k is not None), key=id)
    capped = []
    for k in kids:
        if capped.count(k) < 3:
            capped.append(k)
    if not capped:
        return None
    if len(capped) == 1:
        return capped[0]
    return Tree("N", capped)


def _restrict(t, j):
    """Skeleton of the calls on x_j inside t, with labels erased."""
    if isinstance(t, Call):
        return Call(t.state, Var(1)) if t.var == j else None
    return _norm(_restrict(c, j) for c in t.children)


def _summary(skel, memo):
    """(states, pairs, triplets) over distinct call leaves of a skeleton."""
    got = memo.get(skel)
    if got is not None:
        return got
    if isinstance(skel, Call):
        got = (frozenset([skel.state]), frozenset(), frozenset())
    else:
        parts = [_summary(c, memo) for c in skel.children]
        S = frozenset().union(*(p[0] for p in parts))
        pairs = set().union(*(p[1] for p in parts))
        trips = set().union(*(p[2] for p in parts))
        for (i, (S1, P1, _)), (j, (S2, P2, _)) in itertools.permutations(enumerate(parts), 2):
            rest = frozenset().union(*(p[0] for k, p in enumerate(parts) if k not in (i, j)))
            for a in S1:
                thirds = set(rest) | {c for (x, c) in P1 if x == a}
                for b in S2:
                    pairs.add((a, b))
                    third_b = thirds | {c for (x, c) in P2 if x == b}
                    for c in third_b:
                        trips.add(((a, b), c))
        got = (S, frozenset(pairs), frozenset(trips))
    memo[skel] = got
    return got


def context_oracle(T: Dtop, depth: int, budget: int = 20000):
    """PO and triplets observed in T(c) over contexts c with spines up to
    ``depth`` letters (trivial look-ahead).

    Outputs are reduced to skeletons of the hole calls; summaries are read
    off the concrete skeleton trees.
    """
    steps = [(a, j, k) for a, k in T.input_alphabet.items() for j in range(1, k + 1)]
    memo, ext = {}, {}
    frontier = {_restrict(ax, 1) for ax in T.axioms.values()} - {None}
    seen = set(frontier)
    for _ in range(depth):
        nxt = set()
        for sk in frontier:
            for a, j, k in steps:
                e = _extend(sk, T, a, j, k, ext)
                if e is not None and e not in seen:
                    seen.add(e)
                    nxt.add(e)
        frontier = nxt
        if not frontier or len(seen) > budget:
            break
    po, trips = set(), set()
    for sk in seen:
        _, p, t = _summary(sk, memo)
        po |= p
        trips |= t
    return po, trips


def _extend(skel, T, a, j, k, memo):
    """Replace every hole call q(x1) by the calls of rhs(q, a) on x_j."""
    key = (skel, a, j)
    if key not in memo:
        if isinstance(skel, Call):
            memo[key] = _restrict(T.rhs(skel.state, a, (TRIVIAL,) * k), j)
        else:
            memo[key] = _norm(_extend(c, T, a, j, k, memo) for c in skel.children)
    return memo[key]


def turnstile_oracle(T: Dtop, po):
    """{(q1, q2, r1, r2)}: (q1,q2) |-^c (r1,r2) for some context c != x1.

    Searches (S1, S2, generated) configurations exhaustively.
    """
    steps = [(a, j, k) for a, k in T.input_alphabet.items() for j in range(1, k + 1)]
    result = set()
    for q1, q2 in po:
        start = (frozenset([q1]), frozenset([q2]), False, True)
        seen = {start}
        queue = deque([start])
        while queue:
            S1, S2, gen, root = queue.popleft()
            for a, j, k in steps:
                n1, g1 = _advance(T, S1, a, j, k)
                n2, g2 = _advance(T, S2, a, j, k)
                g = gen or g1 or g2 or len(S1) != 1 or len(S2) != 1
                if not n1 or not n2:
                    continue
                if g:
                    for r1 in n1:
                        for r2 in n2:
                            result.add((q1, q2, r1, r2))
                cfg = (n1, n2, g, False)
                if cfg not in seen:
                    seen.add(cfg)
                    queue.append(cfg)
    return result


def _advance(T, S, a, j, k):
    """States on the hole after one more letter, and whether any state in S
    produced more than a single call on x_j."""
    out, gen = set(), False
    for q in S:
        rhs = T.rhs(q, a, (TRIVIAL,) * k)
        if not (isinstance(rhs, Call) and rhs.var == j):
            gen = True
        for _, c in calls(rhs):
            if c.var == j:
                out.add(c.state)
    return frozenset(out), gen


# ---------------------------------------------------------------------------
# homomorphism oracle

def hom_candidates(T: Dtop, a: str, max_height: int = 3, limit: int = 10000):
    """All h(a) (with calls h(x_j)) such that h(a)[h(x_j) <- T(s_j)] = T(a(s))
    for every argument tuple s of trees of height <= max_height."""
    from dtop.equiv import enumerate_trees
    k = T.input_alphabet[a]
    trees = list(enumerate_trees(T.input_alphabet, max_height))
    outs = {s: apply(T, s) for s in trees}
    samples = []
    for args in itertools.product(trees, repeat=k):
        samples.append((apply(T, Tree(a, args)), [outs[s] for s in args]))
    targets = tuple(t for t, _ in samples)
    plugs = [p for _, p in samples]

    def cands(nodes):
        res = []
        for j in range(1, k + 1):
            if all(n is p[j - 1] for n, p in zip(nodes, plugs)):
                res.append(Call("h", Var(j)))
        first = nodes[0]
        if all(isinstance(n, Tree) and n.label == first.label
               and len(n.children) == len(first.children) for n in nodes):
            per_child = [cands(tuple(n.children[i] for n in nodes))
                         for i in range(len(first.children))]
            for combo in itertools.product(*per_child):
                res.append(Tree(first.label, combo))
                if len(res) > limit:
                    raise OverflowError("too many candidates")
        return res

    return cands(targets)


def lcp_fold(trees):
    it = iter(trees)
    acc = next(it)
    acc = lcp(acc, acc)
    for t in it:
        acc = lcp(acc, t)
        if isinstance(acc, Var):
            break
    return acc


def state_outputs(T: Dtop, q, inputs):
    rho = T.la_map
    for s in inputs:
        if T.la.run(s) == rho[q]:
            yield apply_state(T, q, s)


def random_context(rng, sigma, max_depth=4, side_height=2):
    """A context (one x1 hole) built from a random spine and random sides."""
    from dtop.equiv import enumerate_trees
    sides = list(enumerate_trees(sigma, side_height))
    branching = [(a, k) for a, k in sigma.items() if k > 0]
    c = Var(1)
    for _ in range(rng.randint(0, max_depth)):
        a, k = rng.choice(branching)
        j = rng.randint(1, k)
        c = Tree(a, [c if i == j else rng.choice(sides) for i in range(1, k + 1)])
    return c


def ground_outputs_differ(T, q1, q2, max_height):
    from dtop.equiv import enumerate_trees
    for s in enumerate_trees(T.input_alphabet, max_height):
        if T.la.run(s) != T.la_map[q1]:
            continue
        if apply_state(T, q1, s) is not apply_state(T, q2, s):
            return s
    return None


def rng_for(seed):
    return random.Random(seed)
