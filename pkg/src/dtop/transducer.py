"""Deterministic top-down transducers with (optional) regular look-ahead.

A transducer without look-ahead is stored with the trivial one-state,
all-accepting automaton, so every algorithm only deals with the look-ahead
representation.  Rules are keyed by ``(state, symbol, profile)`` where the
profile is the tuple of la-states of the children.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Mapping

from .trees import (
    Call, DtopError, LaLeaf, Node, RankedAlphabet, Tree, Var, calls, format_path,
    rename_calls, substitute,
)

TRIVIAL = "*"


class Undefined(DtopError):
    """The transducer (or its look-ahead automaton) is undefined on the input."""


class MissingRule(Undefined):
    pass


class _Undef:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "UNDEFINED"

    def __bool__(self):
        return False


UNDEFINED = _Undef()


@dataclass(frozen=True, eq=False)
class LaAutomaton:
    """Deterministic bottom-up automaton ``(L, delta, F)``."""

    states: tuple
    final: frozenset
    delta: Mapping  # (symbol, (l1..lk)) -> l

    @classmethod
    def trivial(cls, alphabet: Mapping[str, int]) -> "LaAutomaton":
        delta = {(a, (TRIVIAL,) * k): TRIVIAL for a, k in alphabet.items()}
        return cls((TRIVIAL,), frozenset([TRIVIAL]), delta)

    @property
    def is_trivial(self) -> bool:
        return self.states == (TRIVIAL,)

    @property
    def is_total(self) -> bool:
        return self.final == frozenset(self.states) and self._complete

    @cached_property
    def _complete(self) -> bool:
        ranks = {a: len(p) for a, p in self.delta}
        for a, k in ranks.items():
            for prof in itertools.product(self.states, repeat=k):
                if (a, prof) not in self.delta:
                    return False
        return True

    def is_complete_for(self, alphabet: Mapping[str, int]) -> bool:
        return all((a, prof) in self.delta
                   for a, k in alphabet.items()
                   for prof in itertools.product(self.states, repeat=k))

    def run(self, t: Node, _cache: dict | None = None) -> str:
        """delta* of ``t``; la-leaves evaluate to themselves."""
        cache = {} if _cache is None else _cache

        def go(n):
            if isinstance(n, LaLeaf):
                return n.state
            if isinstance(n, Var):
                if self.is_trivial:
                    return TRIVIAL
                raise Undefined(f"variable {n} has no look-ahead state")
            r = cache.get(n)
            if r is None:
                prof = tuple(go(c) for c in n.children)
                r = self.delta.get((n.label, prof))
                if r is None:
                    raise Undefined(f"look-ahead undefined at {n.label}{prof}")
                cache[n] = r
            return r

        return go(t)

    def accepts(self, t: Node) -> bool:
        try:
            return self.run(t) in self.final
        except Undefined:
            return False

    @cached_property
    def productive(self) -> frozenset:
        """la-states with nonempty domain."""
        prod: set = set()
        changed = True
        while changed:
            changed = False
            for (a, prof), l in self.delta.items():
                if l not in prod and all(p in prod for p in prof):
                    prod.add(l)
                    changed = True
        return frozenset(prod)


@dataclass(frozen=True, eq=False)
class Dtop:
    """A deterministic top-down transducer with regular look-ahead.

    ``rules`` maps ``(q, a, profile)`` to a right-hand side over the output
    alphabet with call leaves ``q'(x_i)``; ``axioms`` maps final la-states to
    trees whose calls are all on ``x1``.
    """

    states: tuple
    input_alphabet: RankedAlphabet
    output_alphabet: RankedAlphabet
    rules: Mapping
    axioms: Mapping
    la: LaAutomaton
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def make(cls, states, input_alphabet, output_alphabet, rules, axiom=None, *,
             axioms=None, la: LaAutomaton | None = None) -> "Dtop":
        """Convenience constructor.

        Without ``la`` the trivial automaton is used and ``rules`` may be keyed
        by ``(q, a)``; ``axiom`` is then the single axiom.
        """
        sigma = RankedAlphabet(input_alphabet)
        delta = RankedAlphabet(output_alphabet)
        if la is None:
            la = LaAutomaton.trivial(sigma)
            fixed = {}
            for key, rhs in rules.items():
                if len(key) == 2:
                    q, a = key
                    key = (q, a, (TRIVIAL,) * sigma[a])
                fixed[key] = rhs
            rules = fixed
            if axioms is None:
                axioms = {TRIVIAL: axiom}
        elif axioms is None:
            raise ValueError("look-ahead transducers need an axiom per final state")
        return cls(tuple(states), sigma, delta, dict(rules), dict(axioms), la)

    # -- accessors ---------------------------------------------------------

    @property
    def has_lookahead(self) -> bool:
        return not self.la.is_trivial

    @property
    def axiom(self) -> Node:
        """The single axiom of a transducer without look-ahead."""
        if len(self.axioms) != 1:
            raise DtopError("transducer has several axioms")
        return next(iter(self.axioms.values()))

    def rhs(self, q: str, a: str, profile: tuple | None = None):
        if profile is None:
            profile = (TRIVIAL,) * self.input_alphabet[a]
        return self.rules.get((q, a, tuple(profile)))

    def rules_of(self, q: str):
        return [(a, prof, rhs) for (p, a, prof), rhs in self.rules.items() if p == q]

    @cached_property
    def _by_state(self) -> dict:
        out: dict = {q: [] for q in self.states}
        for (q, a, prof), rhs in self.rules.items():
            out.setdefault(q, []).append((a, prof, rhs))
        return out

    def size(self) -> int:
        return sum(t.size for t in self.rules.values()) + sum(t.size for t in self.axioms.values())

    def max_rhs_height(self) -> int:
        return max((t.height for t in self.rules.values()), default=1)

    def is_linear(self) -> bool:
        trees = list(self.rules.values()) + list(self.axioms.values())
        for t in trees:
            vs = [c.var for _, c in calls(t)]
            if len(vs) != len(set(vs)):
                return False
        return True

    def is_total(self) -> bool:
        return not self.has_lookahead and not missing_rules(self)

    def with_(self, **changes) -> "Dtop":
        changes.setdefault("_cache", {})
        return replace(self, **changes)

    @cached_property
    def la_map(self) -> dict | None:
        """The la-map rho when the transducer is la-uniform, else None."""
        return compute_la_map(self)

    @property
    def is_la_uniform(self) -> bool:
        return self.la_map is not None


# ---------------------------------------------------------------------------
# validation

def missing_rules(T: Dtop) -> list[tuple[str, str]]:
    if T.has_lookahead:
        return []
    return [(q, a) for q in T.states for a in T.input_alphabet
            if T.rhs(q, a) is None]


def validate(T: Dtop, total: bool = False) -> list[str]:
    """Well-formedness diagnostics; an empty list means ``T`` is well formed.

    With ``total=True`` a transducer without look-ahead must also have a
    rule for every state and input symbol.
    """
    diags = []
    sigma, delta, la = T.input_alphabet, T.output_alphabet, T.la
    states = set(T.states)
    if len(states) != len(T.states):
        diags.append("duplicate state names")
    for q in states & set(delta):
        diags.append(f"state {q} clashes with an output symbol")
    lstates = set(la.states)
    for l in la.final:
        if l not in lstates:
            diags.append(f"final la-state {l} is not an la-state")
    for (a, prof), l in la.delta.items():
        if a not in sigma:
            diags.append(f"la_delta uses unknown symbol {a}")
        elif len(prof) != sigma[a]:
            diags.append(f"la_delta {a}{prof}: wrong number of arguments")
        if l not in lstates or any(p not in lstates for p in prof):
            diags.append(f"la_delta {a}{prof} -> {l}: unknown la-state")

    def check_tree(t, where, k):
        for _, n in _all_nodes(t):
            if isinstance(n, Tree):
                if n.label not in delta:
                    diags.append(f"{where}: unknown output symbol {n.label}")
                elif delta[n.label] != len(n.children):
                    diags.append(f"{where}: output symbol {n.label} has rank {delta[n.label]}")
            elif isinstance(n, Call):
                if n.state not in states:
                    diags.append(f"{where}: unknown state {n.state}")
                if n.var is None or not 1 <= n.var <= k:
                    diags.append(f"{where}: variable out of range in {n}")
            else:
                diags.append(f"{where}: bare leaf {n} is not allowed")

    for (q, a, prof), rhs in T.rules.items():
        where = f"rule {q}({a})"
        if q not in states:
            diags.append(f"{where}: unknown state {q}")
        if a not in sigma:
            diags.append(f"{where}: unknown input symbol {a}")
            continue
        if len(prof) != sigma[a]:
            diags.append(f"{where}: look-ahead profile has wrong length")
        if any(p not in lstates for p in prof):
            diags.append(f"{where}: unknown la-state in profile")
        check_tree(rhs, where, sigma[a])
    for l, ax in T.axioms.items():
        if l not in la.final:
            diags.append(f"axiom for non-final la-state {l}")
        check_tree(ax, f"axiom {l}", 1)
    if la.is_trivial:
        if not la.is_complete_for(sigma):
            diags.append("trivial look-ahead automaton is incomplete")
        if total:
            for q, a in missing_rules(T):
                diags.append(f"missing rule {q}({a})")
    return diags


def _all_nodes(t):
    stack = [((), t)]
    while stack:
        p, n = stack.pop()
        yield p, n
        for i, c in enumerate(n.children, 1):
            stack.append((p + (i,), c))


def reachable_states(T: Dtop) -> list[str]:
    seen: list = []
    work = [c.state for ax in T.axioms.values() for _, c in calls(ax)]
    by = T._by_state
    while work:
        q = work.pop()
        if q in seen:
            continue
        seen.append(q)
        for a, prof, rhs in by.get(q, ()):
            if all(p in T.la.productive for p in prof):
                work.extend(c.state for _, c in calls(rhs))
    return [q for q in T.states if q in seen]


def trim(T: Dtop) -> Dtop:
    """Drop unreachable states and rules on unproductive look-ahead profiles."""
    keep = set(reachable_states(T))
    prod = T.la.productive
    rules = {k: v for k, v in T.rules.items()
             if k[0] in keep and all(p in prod for p in k[2])}
    axioms = {l: ax for l, ax in T.axioms.items() if l in prod}
    if len(keep) == len(T.states) and len(rules) == len(T.rules) and len(axioms) == len(T.axioms):
        return T
    return T.with_(states=tuple(q for q in T.states if q in keep), rules=rules, axioms=axioms)


def compute_la_map(T: Dtop) -> dict | None:
    """rho: Q -> L for an la-uniform transducer, or None.

    Profiles with an unproductive la-state are ignored when checking that
    rules exist for every consistent profile.  Unreachable states get no
    entry and are not checked.
    """
    rho: dict = {}
    work = []
    for l, ax in T.axioms.items():
        for _, c in calls(ax):
            if rho.setdefault(c.state, l) != l:
                return None
            work.append(c.state)
    by = T._by_state
    done = set()
    while work:
        q = work.pop()
        if q in done:
            continue
        done.add(q)
        for a, prof, rhs in by.get(q, ()):
            if T.la.delta.get((a, prof)) != rho[q]:
                return None
            for _, c in calls(rhs):
                if rho.setdefault(c.state, prof[c.var - 1]) != prof[c.var - 1]:
                    return None
                work.append(c.state)
    prod = T.la.productive
    for q, l in rho.items():
        for (a, prof), target in T.la.delta.items():
            if target == l and all(p in prod for p in prof) and (q, a, prof) not in T.rules:
                return None
    return rho


# ---------------------------------------------------------------------------
# semantics

def la_annotate(B: LaAutomaton, s: Node) -> tuple[Node, str]:
    """Relabel every symbol node by ``<a,l1..lk>``; la-leaves become ``x1``."""
    cache: dict = {}

    def go(n):
        if isinstance(n, LaLeaf):
            return Var(1)
        if not n.children:
            return n
        prof = [B.run(c, cache) for c in n.children]
        return Tree(f"⟨{','.join([n.label] + prof)}⟩", [go(c) for c in n.children])

    state = B.run(s, cache)
    return go(s), state


class _Evaluator:
    def __init__(self, T: Dtop):
        self.T = T
        self.la_cache = T._cache.setdefault("la", {})
        self.ground = T._cache.setdefault("ground", {})
        self.open: dict = {}

    def state_of(self, n):
        return self.T.la.run(n, self.la_cache)

    def eval(self, q, s, path):
        if isinstance(s, Var):
            return Call(q, s)
        if isinstance(s, LaLeaf):
            return Call(q, path)
        if s.ground:
            key, memo = (q, s), self.ground
        else:
            key, memo = (q, path), self.open
        r = memo.get(key)
        if r is not None:
            return r
        prof = tuple(self.state_of(c) for c in s.children)
        rhs = self.T.rules.get((q, s.label, prof))
        if rhs is None:
            raise MissingRule(f"no rule for {q}({s.label}) with look-ahead {prof}")
        kids = s.children
        r = rename_calls(rhs, lambda c: self.eval(c.state, kids[c.var - 1], path + (c.var,)))
        memo[key] = r
        return r


def apply_state(T: Dtop, q: str, s: Node, origin: tuple = ()) -> Node:
    """The tree [[q]](s); variables x give q(x), la-leaves at address u give q(u)."""
    return _Evaluator(T).eval(q, s, tuple(origin))


def apply(T: Dtop, s: Node) -> Node:
    """[[T]](s): the axiom of delta*(s) with every q(x1) replaced by [[q]](s)."""
    ev = _Evaluator(T)
    l = ev.state_of(s)
    ax = T.axioms.get(l)
    if ax is None:
        raise Undefined(f"no axiom for la-state {l}")
    return rename_calls(ax, lambda c: ev.eval(c.state, s, ()))


def evaluate(T: Dtop, s: Node):
    """Like apply, but returns UNDEFINED instead of raising."""
    try:
        return apply(T, s)
    except Undefined:
        return UNDEFINED


def state_names(T: Dtop) -> set[str]:
    return set(T.states)


def fresh_name(base: str, taken: Iterable[str]) -> str:
    taken = set(taken)
    if base not in taken:
        return base
    for i in itertools.count(1):
        cand = f"{base}_{i}"
        if cand not in taken:
            return cand


def rename_states(T: Dtop, mapping: Mapping[str, str]) -> Dtop:
    """Rename (and possibly merge) states; rules of merged states must agree."""
    def ren(t):
        return rename_calls(t, lambda c: Call(mapping.get(c.state, c.state), c.arg))

    rules = {}
    for (q, a, prof), rhs in T.rules.items():
        key = (mapping.get(q, q), a, prof)
        new = ren(rhs)
        if key in rules and rules[key] is not new:
            raise DtopError(f"merging states with different rules at {key}")
        rules[key] = new
    states = []
    for q in T.states:
        q2 = mapping.get(q, q)
        if q2 not in states:
            states.append(q2)
    axioms = {l: ren(ax) for l, ax in T.axioms.items()}
    return T.with_(states=tuple(states), rules=rules, axioms=axioms)


def describe_call(c: Call) -> str:
    return f"{c.state}({c.arg if isinstance(c.arg, Var) else format_path(c.arg)})"


__all__ = [
    "TRIVIAL", "Undefined", "MissingRule", "UNDEFINED", "LaAutomaton", "Dtop",
    "validate", "missing_rules", "reachable_states", "trim", "compute_la_map",
    "la_annotate", "apply_state", "apply", "evaluate", "fresh_name", "rename_states",
    "substitute",
]
