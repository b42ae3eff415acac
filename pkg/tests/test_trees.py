import pytest
from hypothesis import given, settings, strategies as st

from dtop.trees import (
    Call, EmptySet, LaLeaf, NotAPrefix, ParseError, RankedAlphabet, Tree, Var,
    decompose, format_path, is_ancestor, is_pattern, lca, lcp, lcp_all, parse_path,
    parse_term, replace_at, substitute, subtree, variables,
)

P = parse_term


def test_hash_consing_and_immutability():
    assert P("f(a,g(b))") is Tree("f", [Tree("a"), Tree("g", [Tree("b")])])
    with pytest.raises(AttributeError):
        P("a").label = "b"


def test_height_and_size():
    t = P("f(a,g(b))")
    assert t.height == 3 and t.size == 4
    assert P("a").height == 1


def test_lcp_examples():
    assert str(lcp(P("f(a,g(a))"), P("f(b,b)"))) == "f(x1,x2)"
    assert str(lcp(P("g(g(b))"), P("g(a)"))) == "g(x1)"
    t = P("f(a,g(b))")
    assert lcp(t, t) is t


def test_lcp_variables_are_fresh_constants():
    assert lcp(Var(1), Var(1)) is Var(1)
    assert str(lcp(P("f(x1,a)"), P("f(x1,a)"))) == "f(x1,a)"
    assert str(lcp(P("f(x2,x1)"), P("f(x2,x1)"))) == "f(x1,x2)"


def test_lcp_all():
    assert str(lcp_all([P("f(a,a)"), P("f(a,b)"), P("f(a,c)")])) == "f(a,x1)"
    with pytest.raises(EmptySet):
        lcp_all([])


def test_decompose_examples():
    assert decompose(P("f(x1,x2)"), P("f(a,g(b))")) == [P("a"), P("g(b)")]
    t = P("g(a)")
    assert decompose(Var(1), t) == [t]
    with pytest.raises(NotAPrefix):
        decompose(P("g(x1)"), P("f(a,b)"))


def test_substitute_examples():
    assert substitute(P("f(x1,x1)"), {Var(1): P("e")}) is P("f(e,e)")
    t = P("f(a,b)")
    assert substitute(t, {}) is t
    q = Call("q", Var(1))
    r = P("g(q(x2))", states={"q"})
    assert substitute(q, {q: r}) is r
    # simultaneous: inserted trees are not rewritten again
    assert substitute(P("f(a,b)"), {P("a"): P("b"), P("b"): P("a")}) is P("f(b,a)")


def test_lca_examples():
    assert lca([(2, 1), (2, 2)]) == (2,)
    assert lca([(), (1,)]) == ()
    assert lca([(1, 1)]) == (1, 1)
    with pytest.raises(EmptySet):
        lca([])


def test_paths():
    assert format_path(()) == "ε"
    assert format_path((2, 1)) == "2.1"
    assert parse_path("2.1") == (2, 1) and parse_path("ε") == ()
    assert is_ancestor((), (1,)) and is_ancestor((1,), (1,)) and not is_ancestor((1,), (2,))
    t = P("f(a,g(b))")
    assert subtree(t, (2, 1)) is P("b")
    assert replace_at(t, {(2,): P("c")}) is P("f(a,c)")
    with pytest.raises(IndexError):
        subtree(t, (3,))


def test_parse_term():
    t = P("f( q(x1) , e)", states={"q"})
    assert t.children[0] is Call("q", Var(1))
    assert P("l0", la_states={"l0"}) is LaLeaf("l0")
    assert variables(P("f(x1,g(x2))")) == [1, 2]
    assert is_pattern(P("f(x1,g(x2))")) and not is_pattern(P("f(x2,x1)"))
    assert str(Call("q", (2, 1))) == "q(2.1)" and str(Call("q", ())) == "q(ε)"
    for bad in ["f(a", "f(a,)", "f a", "q", "q(a)", "f(a))"]:
        with pytest.raises(ParseError):
            P(bad, states={"q"})
    with pytest.raises(ParseError):
        P("f(a)", symbols={"f": 2, "a": 0})


def test_ranked_alphabet():
    s = RankedAlphabet({"a": 1, "e": 0})
    assert s.of_rank(0) == ["e"] and s.max_rank == 1 and str(s) == "a:1 e:0"
    for bad in [{"x1": 0}, {"1a": 0}, {"a": -1}]:
        with pytest.raises(ValueError):
            RankedAlphabet(bad)


# ---------------------------------------------------------------------------
# properties

SYMS = {"f": 2, "g": 1, "a": 0, "b": 0}


def trees(max_leaves=12, with_vars=False):
    leaves = [st.sampled_from([Tree("a"), Tree("b")])]
    if with_vars:
        leaves.append(st.integers(1, 3).map(Var))
    base = st.one_of(*leaves)
    return st.recursive(
        base,
        lambda kids: st.one_of(
            kids.map(lambda c: Tree("g", [c])),
            st.tuples(kids, kids).map(lambda cs: Tree("f", cs))),
        max_leaves=max_leaves)


def is_prefix(p, t):
    try:
        decompose(p, t)
        return True
    except NotAPrefix:
        return False


@given(trees(with_vars=True), trees(with_vars=True))
def test_lcp_commutative_and_prefix(t1, t2):
    p = lcp(t1, t2)
    assert p is lcp(t2, t1)
    assert is_pattern(p)
    assert is_prefix(p, t1) and is_prefix(p, t2)


@given(trees(), trees(), trees())
def test_lcp_associative(t1, t2, t3):
    assert lcp(lcp(t1, t2), t3) is lcp(t1, lcp(t2, t3))


@given(trees(with_vars=True))
def test_lcp_idempotent(t):
    p = lcp(t, t)
    assert lcp(p, p) is p
    assert is_prefix(p, t)


@given(trees(), trees())
def test_lcp_is_maximal(t1, t2):
    # growing the common prefix by one node breaks the prefix property
    p = lcp(t1, t2)
    res1, res2 = decompose(p, t1), decompose(p, t2)
    for r1, r2 in zip(res1, res2):
        assert not (isinstance(r1, Tree) and isinstance(r2, Tree) and r1.label == r2.label
                    and (r1 is r2 or r1.children))


@given(trees(with_vars=True), st.lists(trees(), min_size=3, max_size=3))
def test_substitute_decompose_roundtrip(t, residuals):
    p = lcp(t, t)  # pattern with variables renumbered x1..xk
    k = len(variables(p))
    rs = (residuals * 5)[:k]
    full = substitute(p, {Var(i): r for i, r in enumerate(rs, 1)})
    assert decompose(p, full) == rs


@settings(max_examples=200)
@given(st.lists(st.lists(st.integers(1, 3), max_size=4).map(tuple), min_size=1, max_size=5))
def test_lca_is_longest_common_prefix(paths):
    v = lca(paths)
    assert all(is_ancestor(v, p) for p in paths)
    for i in (1, 2, 3):
        assert not all(is_ancestor(v + (i,), p) for p in paths)
