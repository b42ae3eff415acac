"""Reading and writing the line-oriented ``.dtop`` transducer format.

::

    input_alphabet a:1 e:0
    output_alphabet f:2 e:0
    states q
    axiom: f(q(x1), q(x1))
    rule q(a(x1)) -> f(q(x1), q(x1))
    rule q(e) -> e

Look-ahead transducers add ``la_states``, ``la_final`` and ``la_delta``
lines, write one ``axiom l: ...`` per final state, and annotate rule
variables with la-states: ``rule q(a(x1:l0, x2:l1)) -> ...``.
"""
from __future__ import annotations

import re

from .transducer import TRIVIAL, Dtop, LaAutomaton
from .trees import Call, ParseError, RankedAlphabet, Tree, parse_term

_IDENT = r"[A-Za-z_][A-Za-z0-9_']*"
_LHS = re.compile(rf"^({_IDENT})\s*\(\s*({_IDENT})\s*(?:\((.*)\))?\s*\)$")
_DELTA = re.compile(rf"^({_IDENT})\s*(?:\((.*)\))?\s*->\s*({_IDENT})$")
_AXIOM = re.compile(rf"^axiom(?:\s+({_IDENT}))?\s*:(.*)$")

KEYWORDS = ("input_alphabet", "output_alphabet", "states", "la_states",
            "la_final", "la_delta", "axiom", "rule")


def _alphabet(text, lineno):
    out = {}
    for item in text.split():
        name, sep, rank = item.partition(":")
        if not sep or not rank.isdigit():
            raise ParseError(f"line {lineno}: expected name:rank, got {item!r}")
        if name in out:
            raise ParseError(f"line {lineno}: duplicate symbol {name}")
        out[name] = int(rank)
    try:
        return RankedAlphabet(out)
    except ValueError as e:
        raise ParseError(f"line {lineno}: {e}") from None


def parse_dtop(text: str) -> Dtop:
    """Parse a transducer; raises ParseError with a line number on bad input."""
    decl: dict = {}
    deltas, axioms, rules = [], [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, rest = line.partition(" ")
        if key.startswith("axiom"):
            axioms.append((lineno, line))
            continue
        rest = rest.strip()
        if key in ("input_alphabet", "output_alphabet", "states", "la_states", "la_final"):
            if key in decl:
                raise ParseError(f"line {lineno}: duplicate {key} declaration")
            decl[key] = (lineno, rest)
        elif key == "la_delta":
            deltas.append((lineno, rest))
        elif key == "rule":
            rules.append((lineno, rest))
        else:
            raise ParseError(f"line {lineno}: unknown declaration {key!r}")

    for need in ("input_alphabet", "output_alphabet"):
        if need not in decl:
            raise ParseError(f"missing {need} declaration")
    sigma = _alphabet(decl["input_alphabet"][1], decl["input_alphabet"][0])
    delta = _alphabet(decl["output_alphabet"][1], decl["output_alphabet"][0])
    states = tuple(decl.get("states", (0, ""))[1].split())
    if len(set(states)) != len(states):
        raise ParseError("duplicate state names")

    has_la = "la_states" in decl
    if has_la:
        lstates = tuple(decl["la_states"][1].split())
        if "la_final" not in decl:
            raise ParseError("la_states declared without la_final")
        final = frozenset(decl["la_final"][1].split())
        dmap = {}
        for lineno, rest in deltas:
            m = _DELTA.match(rest)
            if not m:
                raise ParseError(f"line {lineno}: malformed la_delta {rest!r}")
            a, args, target = m.groups()
            prof = tuple(x.strip() for x in args.split(",")) if args else ()
            if a not in sigma:
                raise ParseError(f"line {lineno}: unknown input symbol {a}")
            if len(prof) != sigma[a]:
                raise ParseError(f"line {lineno}: {a} has rank {sigma[a]}")
            for l in prof + (target,):
                if l not in lstates:
                    raise ParseError(f"line {lineno}: unknown la-state {l}")
            if (a, prof) in dmap:
                raise ParseError(f"line {lineno}: duplicate la_delta for {a}{prof}")
            dmap[(a, prof)] = target
        la = LaAutomaton(lstates, final, dmap)
    else:
        if deltas or "la_final" in decl:
            raise ParseError("la_delta/la_final need an la_states declaration")
        la = LaAutomaton.trivial(sigma)

    def term(src, lineno, arity=None):
        try:
            t = parse_term(src, states=states, symbols=delta)
        except ParseError as e:
            raise ParseError(f"line {lineno}: {e}") from None
        for n in _call_leaves(t):
            if arity is not None and not 1 <= n.var <= arity:
                raise ParseError(f"line {lineno}: variable out of range in {n}")
        return t

    ax_map = {}
    for lineno, line in axioms:
        m = _AXIOM.match(line)
        if not m:
            raise ParseError(f"line {lineno}: malformed axiom")
        l = m.group(1) or TRIVIAL
        if has_la and m.group(1) is None:
            raise ParseError(f"line {lineno}: look-ahead axioms need an la-state")
        if not has_la and m.group(1) is not None:
            raise ParseError(f"line {lineno}: axiom names an la-state but no la_states declared")
        if has_la and l not in la.final:
            raise ParseError(f"line {lineno}: {l} is not a final la-state")
        if l in ax_map:
            raise ParseError(f"line {lineno}: duplicate axiom")
        ax_map[l] = term(m.group(2), lineno, 1)
    if not ax_map:
        raise ParseError("missing axiom")

    rmap = {}
    for lineno, rest in rules:
        lhs, sep, rhs = rest.partition("->")
        if not sep:
            raise ParseError(f"line {lineno}: rule needs '->'")
        m = _LHS.match(lhs.strip())
        if not m:
            raise ParseError(f"line {lineno}: malformed rule left-hand side {lhs.strip()!r}")
        q, a, args = m.groups()
        if q not in states:
            raise ParseError(f"line {lineno}: unknown state {q}")
        if a not in sigma:
            raise ParseError(f"line {lineno}: unknown input symbol {a}")
        k = sigma[a]
        items = [x.strip() for x in args.split(",")] if args is not None else []
        if len(items) != k:
            raise ParseError(f"line {lineno}: {a} has rank {k}")
        prof = []
        for i, item in enumerate(items, 1):
            var, colon, l = item.partition(":")
            if var.strip() != f"x{i}":
                raise ParseError(f"line {lineno}: expected x{i}, got {var.strip()!r}")
            l = l.strip()
            if has_la:
                if not colon or l not in la.states:
                    raise ParseError(f"line {lineno}: x{i} needs a look-ahead state annotation")
                prof.append(l)
            else:
                if colon:
                    raise ParseError(f"line {lineno}: annotation without la_states")
                prof.append(TRIVIAL)
        key = (q, a, tuple(prof))
        if key in rmap:
            raise ParseError(f"line {lineno}: duplicate rule for {q}({a})")
        rmap[key] = term(rhs.strip(), lineno, k)

    return Dtop(states, sigma, delta, rmap, ax_map, la)


def _call_leaves(t):
    stack = [t]
    while stack:
        n = stack.pop()
        if isinstance(n, Call):
            yield n
        elif isinstance(n, Tree):
            stack.extend(n.children)


def format_dtop(T: Dtop) -> str:
    """Deterministic text rendering; ``parse_dtop`` inverts it."""
    lines = [
        f"input_alphabet {T.input_alphabet}".rstrip(),
        f"output_alphabet {T.output_alphabet}".rstrip(),
        f"states {' '.join(T.states)}".rstrip(),
    ]
    la = T.la
    trivial = la.is_trivial
    sym_order = {a: i for i, a in enumerate(T.input_alphabet)}
    if not trivial:
        lorder = {l: i for i, l in enumerate(la.states)}
        lines.append(f"la_states {' '.join(la.states)}")
        lines.append(f"la_final {' '.join(l for l in la.states if l in la.final)}")
        for (a, prof), l in sorted(la.delta.items(),
                                   key=lambda kv: (sym_order.get(kv[0][0], 1 << 30), kv[0][0],
                                                   [lorder[p] for p in kv[0][1]])):
            args = f"({', '.join(prof)})" if prof else ""
            lines.append(f"la_delta {a}{args} -> {l}")
        for l in la.states:
            if l in T.axioms:
                lines.append(f"axiom {l}: {T.axioms[l]}")
    else:
        lines.append(f"axiom: {T.axiom}")
    qorder = {q: i for i, q in enumerate(T.states)}
    lorder = {l: i for i, l in enumerate(la.states)}

    def key(item):
        (q, a, prof), _ = item
        return (qorder.get(q, 1 << 30), q, sym_order.get(a, 1 << 30), a, [lorder.get(p, 0) for p in prof])

    for (q, a, prof), rhs in sorted(T.rules.items(), key=key):
        if prof:
            if trivial:
                args = ", ".join(f"x{i}" for i in range(1, len(prof) + 1))
            else:
                args = ", ".join(f"x{i}:{l}" for i, l in enumerate(prof, 1))
            lhs = f"{q}({a}({args}))"
        else:
            lhs = f"{q}({a})"
        lines.append(f"rule {lhs} -> {rhs}")
    return "\n".join(lines) + "\n"


def load(path) -> Dtop:
    with open(path, encoding="utf-8") as fh:
        return parse_dtop(fh.read())
