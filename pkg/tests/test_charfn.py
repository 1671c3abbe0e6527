import numpy as np
import pytest

from sltree import (Edge, MetricTree, PoleProximityError, Potential, PotentialSet,
                    ProblemSpec, all_dirichlet, assemble_char_fn, char_fn_by_split,
                    split_equivalence, subtree_weyl_ratio, weyl_function,
                    with_neumann)
from sltree import benchmark as bm
from sltree.charfn import subtree_char_pair

from conftest import random_const_pots, random_grid_pots, random_tree


def test_single_edge_dirichlet_dirichlet(rho_grid, lam_grid):
    t = bm.single_edge_tree()
    cf = assemble_char_fn(ProblemSpec.of(t, PotentialSet.zero(), all_dirichlet(t)))
    want = np.sin(rho_grid)/rho_grid
    assert np.max(np.abs(cf(lam_grid) - want)) < 1e-12


def test_three_star_all_dirichlet(rho_grid, lam_grid):
    t = bm.three_star_tree()
    cf = assemble_char_fn(ProblemSpec.of(t, PotentialSet.zero(), all_dirichlet(t)))
    want = 3*np.sin(rho_grid)**2*np.cos(rho_grid)/rho_grid**2
    assert np.max(np.abs(cf(lam_grid) - want)) < 1e-12


def test_five_edge_closed_forms(five_edge, rho_grid, lam_grid):
    pots = PotentialSet.zero()
    bc = all_dirichlet(five_edge)
    d0 = assemble_char_fn(ProblemSpec.of(five_edge, pots, bc))(lam_grid)
    d1 = assemble_char_fn(ProblemSpec.of(five_edge, pots, with_neumann(bc, 1)))(lam_grid)
    d4 = assemble_char_fn(ProblemSpec.of(five_edge, pots, with_neumann(bc, 4)))(lam_grid)
    assert np.max(np.abs(d0 - bm.delta0(rho_grid))/np.abs(bm.delta0(rho_grid))) < 1e-12
    assert np.max(np.abs(d1 - bm.delta1(rho_grid))/np.abs(bm.delta1(rho_grid))) < 1e-12
    np.testing.assert_allclose(d4, d1, rtol=1e-12)


def test_conjugate_symmetry(five_edge):
    pots = random_const_pots(five_edge, 5)
    spec = ProblemSpec.of(five_edge, pots, all_dirichlet(five_edge))
    cf = assemble_char_fn(spec)
    lam = np.array([2.0 + 1.3j, 7.5 - 0.4j])
    np.testing.assert_allclose(cf(np.conj(lam)), np.conj(cf(lam)), rtol=1e-10)


def test_split_matches_direct_three_star(lam_grid):
    t = bm.three_star_tree()
    spec = ProblemSpec.of(t, PotentialSet.zero(), all_dirichlet(t))
    rep = split_equivalence(spec, 4, lam_grid)
    assert rep["max_relative_deviation"] < 1e-10
    assert rep["ratio"] == pytest.approx(1.0, abs=1e-9)


def test_split_matches_direct_five_edge_both_vertices(five_edge, lam_grid):
    pots = random_const_pots(five_edge, 11)
    spec = ProblemSpec.of(five_edge, pots, all_dirichlet(five_edge))
    for w in (3, 6):
        rep = split_equivalence(spec, w, lam_grid)
        assert rep["max_relative_deviation"] < 1e-9


@pytest.mark.parametrize("seed,n", [(3, 7), (12, 9)])
def test_split_matches_direct_random_trees(seed, n, lam_grid):
    t = random_tree(seed, n)
    for pots in (random_const_pots(t, seed + 1), random_grid_pots(t, seed + 2, n=7)):
        spec = ProblemSpec.of(t, pots, all_dirichlet(t))
        for w in t.internal_vertices:
            rep = split_equivalence(spec, w, lam_grid)
            assert rep["max_relative_deviation"] < 1e-8


def test_weyl_single_edge_closed_form(rho_grid, lam_grid):
    t = bm.single_edge_tree()
    spec = ProblemSpec.of(t, PotentialSet.zero(), all_dirichlet(t))
    got = weyl_function(spec, 1, lam_grid)
    want = -rho_grid*np.cos(rho_grid)/np.sin(rho_grid)
    np.testing.assert_allclose(got.M, want, rtol=1e-10)


def test_weyl_five_edge_matches_closed_forms(five_edge, rho_grid, lam_grid):
    spec = ProblemSpec.of(five_edge, PotentialSet.zero(), all_dirichlet(five_edge))
    got = weyl_function(spec, 1, lam_grid)
    want = -bm.delta1(rho_grid)/bm.delta0(rho_grid)
    np.testing.assert_allclose(got.M, want, rtol=1e-10)


def test_weyl_continuity_off_poles(five_edge):
    pots = random_const_pots(five_edge, 21)
    spec = ProblemSpec.of(five_edge, pots, all_dirichlet(five_edge))
    lam = np.array([2.0, 2.001, 2.002], dtype=complex)
    m = weyl_function(spec, 4, lam).M
    d1 = abs(m[1] - m[0])
    d2 = abs(m[2] - m[1])
    assert d1 < 1.0 and d2 < 1.0


def test_weyl_pole_floor_raises(five_edge):
    spec = ProblemSpec.of(five_edge, PotentialSet.zero(), all_dirichlet(five_edge))
    # lam = pi^2 is an eigenvalue of the base problem: a pole of the Weyl function
    lam = np.array([np.pi**2 + 1e-13, 2.0], dtype=complex)
    with pytest.raises(PoleProximityError):
        weyl_function(spec, 1, lam)
    got = weyl_function(spec, 1, lam, on_pole="skip")
    assert len(got.grid) == 1


def test_subtree_ratio_single_edge(rho_grid, lam_grid):
    # dangling edge seen from its far end: derivative/value of the S solution
    part = MetricTree((Edge(2, 2, 3, 1.0),), root=2, split_copies=frozenset({3}))
    spec = ProblemSpec.of(part, PotentialSet.zero(), {2: "D", 3: "D"})
    got = subtree_weyl_ratio(spec, 3, lam_grid)
    want = rho_grid*np.cos(rho_grid)/np.sin(rho_grid)
    np.testing.assert_allclose(got.M, want, rtol=1e-10)


def test_subtree_ratio_two_edge_against_direct_pair(lam_grid):
    part = MetricTree((Edge(1, 1, 5, 0.8), Edge(2, 2, 5, 1.1), Edge(3, 5, 9, 0.9)),
                      root=9, split_copies=frozenset({9}))
    pots = PotentialSet.of({1: Potential("const", (0.5,)),
                            2: Potential("const", (-0.3,)),
                            3: Potential("const", (0.2,))})
    spec = ProblemSpec.of(part, pots, {1: "D", 2: "D", 9: "D"})
    got = subtree_weyl_ratio(spec, 9, lam_grid)
    fD, fN = subtree_char_pair(part, pots, {1: "D", 2: "D"}, 9)
    np.testing.assert_allclose(got.M, fN(lam_grid)/fD(lam_grid), rtol=1e-12)
