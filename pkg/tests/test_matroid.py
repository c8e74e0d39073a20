import itertools
import random

import pytest

from rootedpack.errors import ContractError
from rootedpack.graphs import RootedGraph
from rootedpack.matroid import (
    find_disjoint_bases,
    has_two_disjoint_spanning_trees,
    is_completable_pair,
    tree_mapping,
)

from conftest import connected_graph, random_graph


def spanning_trees_brute(g: RootedGraph):
    """Every spanning tree as a frozenset of edge ids (test-local)."""
    ids = sorted(g.edge_ids)
    n = g.n
    out = []
    for combo in itertools.combinations(ids, n - 1):
        uf = list(range(n))

        def find(x):
            while uf[x] != x:
                uf[x] = uf[uf[x]]
                x = uf[x]
            return x

        ok = True
        for eid in combo:
            u, v = g.edge(eid)
            ru, rv = find(u), find(v)
            if ru == rv:
                ok = False
                break
            uf[ru] = rv
        if ok:
            out.append(frozenset(combo))
    return out


def completable_brute(g, ids1, ids2):
    for t1 in spanning_trees_brute(g):
        if not ids1 <= t1:
            continue
        for t2 in spanning_trees_brute(g):
            if ids2 <= t2 and not (t1 & t2):
                return True
    return False


def is_spanning_tree(g, ids):
    if len(ids) != g.n - 1:
        return False
    uf = list(range(g.n))

    def find(x):
        while uf[x] != x:
            uf[x] = uf[uf[x]]
            x = uf[x]
        return x

    for eid in ids:
        u, v = g.edge(eid)
        ru, rv = find(u), find(v)
        if ru == rv:
            return False
        uf[ru] = rv
    return True


def test_completable_examples():
    g = RootedGraph(3, 0, [(0, 1), (0, 1), (0, 2), (0, 2)])
    assert is_completable_pair(g, g.selection([0]), g.selection([3]))
    triangle = RootedGraph(3, 0, [(0, 1), (1, 2), (0, 2)])
    assert not is_completable_pair(triangle, triangle.selection([]), triangle.selection([]))


def test_completable_empty_equals_two_trees(rng):
    for _ in range(60):
        g = random_graph(rng, max_n=6)
        assert is_completable_pair(g, g.selection([]), g.selection([])) == \
            has_two_disjoint_spanning_trees(g)


def test_completable_requires_disjoint_forests():
    g = RootedGraph(3, 0, [(0, 1), (1, 2)])
    with pytest.raises(ContractError):
        is_completable_pair(g, g.selection([0]), g.selection([0]))
    cyc = RootedGraph(3, 0, [(0, 1), (1, 2), (0, 2)])
    with pytest.raises(ContractError):
        is_completable_pair(cyc, cyc.selection([0, 1, 2]), cyc.selection([]))


def test_completable_matches_brute(rng):
    done = 0
    while done < 80:
        g = random_graph(rng, max_n=5, max_m=10)
        ids = sorted(g.edge_ids)
        if g.n == 1 or not ids:
            trees = has_two_disjoint_spanning_trees(g)
            assert trees == (g.n == 1)
            done += 1
            continue
        a = set(rng.sample(ids, rng.randint(0, min(2, len(ids)))))
        rest = [e for e in ids if e not in a]
        b = set(rng.sample(rest, rng.randint(0, min(2, len(rest)))))

        def forest(s):
            uf = list(range(g.n))

            def find(x):
                while uf[x] != x:
                    uf[x] = uf[uf[x]]
                    x = uf[x]
                return x

            for eid in s:
                u, v = g.edge(eid)
                ru, rv = find(u), find(v)
                if ru == rv:
                    return False
                uf[ru] = rv
            return True

        if not (forest(a) and forest(b)):
            continue
        done += 1
        got = is_completable_pair(g, g.selection(a), g.selection(b))
        want = completable_brute(g, frozenset(a), frozenset(b))
        assert got == want, (list(g.edges()), a, b)


def test_find_disjoint_bases_positive_example():
    g = RootedGraph(3, 0, [(0, 1), (0, 1), (0, 2), (0, 2)])
    t1, t2 = find_disjoint_bases(g, g.selection([0]), g.selection([3]))
    assert 0 in t1.ids and 3 in t2.ids
    assert not (t1.ids & t2.ids)
    assert is_spanning_tree(g, t1.ids) and is_spanning_tree(g, t2.ids)


def test_find_disjoint_bases_properties(rng):
    found = 0
    while found < 40:
        g = connected_graph(rng, max_n=6, extra=8)
        res = find_disjoint_bases(g, g.selection([]), g.selection([]))
        if res is None:
            assert not has_two_disjoint_spanning_trees(g)
            continue
        found += 1
        t1, t2 = res
        assert not (t1.ids & t2.ids)
        assert is_spanning_tree(g, t1.ids)
        assert is_spanning_tree(g, t2.ids)


def test_find_disjoint_bases_k4():
    k4 = RootedGraph(4, 0, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
    t1, t2 = find_disjoint_bases(k4, k4.selection([]), k4.selection([]))
    assert is_spanning_tree(k4, t1.ids) and is_spanning_tree(k4, t2.ids)
    assert not (t1.ids & t2.ids)


def test_containment_respected(rng):
    done = 0
    while done < 40:
        g = connected_graph(rng, max_n=6, extra=10)
        if g.edge_count == 0 or not has_two_disjoint_spanning_trees(g):
            continue
        ids = sorted(g.edge_ids)
        e = ids[rng.randrange(len(ids))]
        sel = g.selection([e])
        res = find_disjoint_bases(g, sel, g.selection([]))
        want = completable_brute(g, frozenset({e}), frozenset())
        assert (res is not None) == want
        if res:
            assert e in res[0].ids
        done += 1


def test_two_disjoint_trees_examples():
    doubled = RootedGraph(3, 0, [(0, 1), (0, 1), (1, 2), (1, 2)])
    assert has_two_disjoint_spanning_trees(doubled)
    simple_tree = RootedGraph(3, 0, [(0, 1), (1, 2)])
    assert not has_two_disjoint_spanning_trees(simple_tree)
    cycle = RootedGraph(4, 0, [(0, 1), (1, 2), (2, 3), (0, 3)])
    assert not has_two_disjoint_spanning_trees(cycle)
    assert has_two_disjoint_spanning_trees(RootedGraph(1, 0, []))


def test_union_rank_matches_brute_pairs(rng):
    for _ in range(40):
        g = random_graph(rng, max_n=5, max_m=8)
        got = has_two_disjoint_spanning_trees(g)
        want = g.n == 1 or any(
            not (t1 & t2)
            for t1 in spanning_trees_brute(g)
            for t2 in spanning_trees_brute(g)
        )
        assert got == want


def test_union_rank_formula_exhaustive(rng):
    """max |I1| + |I2| equals min over F of |E - F| + 2 * rank(F), the
    matroid-union rank formula with two graphic-matroid copies."""
    from rootedpack.matroid import max_forest_pair

    def graphic_rank(g, subset):
        uf = list(range(g.n))

        def find(x):
            while uf[x] != x:
                uf[x] = uf[uf[x]]
                x = uf[x]
            return x

        rank = 0
        for eid in subset:
            u, v = g.edge(eid)
            ru, rv = find(u), find(v)
            if ru != rv:
                uf[ru] = rv
                rank += 1
        return rank

    done = 0
    while done < 60:
        g = random_graph(rng, max_n=5, max_m=8)
        ids = sorted(g.edge_ids)
        if len(ids) > 8:
            continue
        done += 1
        t1, t2 = max_forest_pair(g, (), ())
        got = len(t1) + len(t2)
        want = min(
            (len(ids) - len(sub)) + 2 * graphic_rank(g, sub)
            for r in range(len(ids) + 1)
            for sub in itertools.combinations(ids, r)
        )
        want = min(want, 2 * (g.n - 1))
        assert got == want, (list(g.edges()), got, want)


def sigma_is_valid(g, t1_ids, t2_ids, mapping):
    for e, f in mapping.items():
        ex1 = (t1_ids - {e}) | {f}
        ex2 = (t2_ids - {f}) | {e}
        if not is_spanning_tree(g, ex1) or not is_spanning_tree(g, ex2):
            return False
    return True


def test_tree_mapping_identity():
    g = RootedGraph(3, 0, [(0, 1), (1, 2)])
    tm = tree_mapping(g, g.selection([0, 1]), g.selection([0, 1]))
    assert dict(tm.mapping) == {0: 0, 1: 1}


def test_tree_mapping_triangle():
    tri = RootedGraph(3, 0, [(0, 1), (0, 2), (1, 2)])
    tm = tree_mapping(tri, tri.selection([0, 1]), tri.selection([0, 2]))
    assert tm.mapping[0] == 0
    assert tm.mapping[1] == 2
    assert sigma_is_valid(tri, frozenset([0, 1]), frozenset([0, 2]), tm.mapping)


def test_tree_mapping_random_validated(rng):
    done = 0
    while done < 200:
        g = connected_graph(rng, max_n=7, extra=8)
        if g.n < 2:
            continue
        trees = spanning_trees_brute(g)
        if len(trees) < 2:
            continue
        t1 = sorted(trees[rng.randrange(len(trees))])
        t2 = sorted(trees[rng.randrange(len(trees))])
        done += 1
        tm = tree_mapping(g, g.selection(t1), g.selection(t2))
        assert sigma_is_valid(g, frozenset(t1), frozenset(t2), tm.mapping)
        assert set(tm.mapping) == set(t1)
        by_vertex = {}
        for e in t1:
            u, v = g.edge(e)
            by_vertex.setdefault(u, []).append(e)
            by_vertex.setdefault(v, []).append(e)
        for v, edges in by_vertex.items():
            for triple in itertools.combinations(edges, 3):
                images = {tm.mapping[e] for e in triple}
                assert len(images) >= 2


def test_tree_mapping_rejects_non_tree():
    g = RootedGraph(3, 0, [(0, 1), (1, 2), (0, 2)])
    with pytest.raises(ContractError):
        tree_mapping(g, g.selection([0]), g.selection([0, 1]))
