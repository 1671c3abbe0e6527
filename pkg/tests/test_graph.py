import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sltree import (Edge, MetricTree, TreeStructureError, load_problem, reassemble,
                    save_problem, split_at_vertex, split_edge_environment,
                    validate_tree)
from sltree import benchmark as bm
from sltree.potentials import Potential, PotentialSet

from conftest import random_tree


def test_five_edge_tree_is_valid(five_edge):
    assert validate_tree(five_edge).ok


def test_single_edge_is_valid():
    assert validate_tree(bm.single_edge_tree()).ok


def test_degree_two_path_invalid():
    t = MetricTree((Edge(1, 1, 3), Edge(2, 2, 3)), root=1)
    # vertex 3 has degree 2
    rep = validate_tree(t)
    assert not rep.ok
    assert any("degree 2" in v for v in rep.violations)


def test_validate_flags_misoriented_boundary_edge():
    t = MetricTree((Edge(1, 3, 1), Edge(2, 2, 3), Edge(3, 4, 3)), root=2)
    rep = validate_tree(t)
    assert any("x=0" in v for v in rep.violations)


def test_validate_disconnected():
    t = MetricTree((Edge(1, 1, 2), Edge(2, 3, 4), Edge(3, 5, 4)), root=1)
    rep = validate_tree(t)
    assert not rep.ok


def test_split_five_edge_at_first_internal(five_edge):
    sp = split_at_vertex(five_edge, 3)
    sizes = sorted(len(p.edges) for p in sp.parts)
    assert sizes == [1, 1, 3]
    for p in sp.parts:
        assert validate_tree(p).ok
        assert 3 in p.boundary_vertices
    all_ids = sorted(e.id for p in sp.parts for e in p.edges)
    assert all_ids == [1, 2, 3, 4, 5]


def test_split_three_star_center():
    t = bm.three_star_tree()
    sp = split_at_vertex(t, 4)
    assert [len(p.edges) for p in sp.parts] == [1, 1, 1]
    for p in sp.parts:
        assert validate_tree(p).ok


def test_split_single_edge_errors():
    t = bm.single_edge_tree()
    with pytest.raises(TreeStructureError):
        split_at_vertex(t, 1)


def test_reassemble_round_trip(five_edge):
    sp = split_at_vertex(five_edge, 6)
    back = reassemble(sp)
    assert {(e.id, e.v0, e.v1, e.length) for e in back.edges} == \
        {(e.id, e.v0, e.v1, e.length) for e in five_edge.edges}
    assert validate_tree(back).ok


def test_split_edge_environment_five_edge(five_edge):
    d = split_edge_environment(five_edge, 3)
    assert [e.id for e in d.g1.edges] == [1]
    assert [e.id for e in d.g2.edges] == [2]
    assert [e.id for e in d.g3.edges] == [3]
    assert [e.id for e in d.g4.edges] == [4]
    assert [e.id for e in d.g5.edges] == [5]
    assert (d.near, d.far) == (3, 6)
    for p in d.parts:
        assert validate_tree(p).ok


def test_split_edge_environment_respects_designation(five_edge):
    d = split_edge_environment(five_edge, 3, r1=1, r2=4)
    assert 1 in d.g2.vertices
    assert 4 in d.g5.vertices


def test_split_edge_environment_boundary_edge_errors(five_edge):
    with pytest.raises(TreeStructureError):
        split_edge_environment(five_edge, 1)


def test_split_edge_environment_high_degree_errors():
    # internal edge whose far endpoint has degree 4
    t = MetricTree((Edge(1, 1, 7), Edge(2, 2, 7), Edge(3, 7, 8),
                    Edge(4, 4, 8), Edge(5, 5, 8), Edge(6, 6, 8)), root=1)
    with pytest.raises(TreeStructureError, match="unsupported degree"):
        split_edge_environment(t, 3)


def test_split_edge_environment_seven_edge_partition():
    t = MetricTree((Edge(1, 1, 8), Edge(2, 2, 8), Edge(3, 8, 9), Edge(4, 4, 9),
                    Edge(5, 5, 9, 0.7), Edge(6, 6, 5, 0.9), Edge(7, 7, 5, 1.2)),
                   root=1)
    # vertex 5 is internal (edges 5, 6, 7); endpoints of edge 3 have degree 3
    d = split_edge_environment(t, 3)
    ids = sorted(e.id for p in d.parts for e in p.edges)
    assert ids == [1, 2, 3, 4, 5, 6, 7]
    assert [e.id for e in d.g3.edges] == [3]
    for p in d.parts:
        assert validate_tree(p).ok


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(3, 11))
def test_random_tree_split_partition_and_validity(seed, n):
    t = random_tree(seed, n)
    assert validate_tree(t).ok
    internal = t.internal_vertices
    if not internal:
        return
    w = internal[seed % len(internal)]
    sp = split_at_vertex(t, w)
    assert sum(len(p.edges) for p in sp.parts) == len(t.edges)
    assert len(sp.parts) == t.degree[w]
    for p in sp.parts:
        assert validate_tree(p).ok
    back = reassemble(sp)
    assert {(e.id, e.v0, e.v1) for e in back.edges} == \
        {(e.id, e.v0, e.v1) for e in t.edges}


def test_problem_file_round_trip(tmp_path, five_edge):
    pots = PotentialSet.of({1: Potential("const", (0.5,)),
                            3: Potential("pw", (0.2, -0.1)),
                            4: Potential("poly", (0.0, 1.0)),
                            5: Potential("grid", (0.0, 0.3, 0.1), order=1)})
    bc = {v: "D" for v in five_edge.boundary_vertices}
    bc[1] = "N"
    path = tmp_path/"tree.json"
    save_problem(path, five_edge, pots, bc)
    t2, p2, bc2 = load_problem(path)
    assert {(e.id, e.v0, e.v1, e.length) for e in t2.edges} == \
        {(e.id, e.v0, e.v1, e.length) for e in five_edge.edges}
    assert p2.get(1).params == (0.5,)
    assert p2.get(3).kind == "pw"
    assert p2.get(2).kind == "zero"
    assert bc2[1] == "N" and bc2[2] == "D"
