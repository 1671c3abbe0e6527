import numpy as np
import pytest

from sltree import Edge, MetricTree, Potential, PotentialSet, ProblemSpec, all_dirichlet
from sltree import benchmark as bm


@pytest.fixture
def five_edge():
    return bm.five_edge_tree()


@pytest.fixture
def five_edge_spec(five_edge):
    return ProblemSpec.of(five_edge, PotentialSet.zero(), all_dirichlet(five_edge))


@pytest.fixture
def rho_grid():
    return np.array([0.61, 1.13, 1.62, 2.17, 2.66, 3.19, 3.68, 4.21, 4.74, 5.08])


@pytest.fixture
def lam_grid(rho_grid):
    return (rho_grid**2).astype(complex)


def random_tree(seed, n_edges):
    """Random admissible tree: no degree-2 vertices, boundary edges oriented
    with x=0 at the boundary vertex."""
    rng = np.random.default_rng(seed)
    edges = [Edge(1, 1, 2, float(rng.uniform(0.6, 1.4)))]
    next_v, next_e = 3, 2
    leaves = {1, 2}
    internal = set()
    while len(edges) < n_edges:
        grow_leaf = leaves and (not internal or rng.random() < 0.6)
        if grow_leaf and len(edges) + 2 <= n_edges + 1:
            v = sorted(leaves)[rng.integers(0, len(leaves))]
            for _ in range(2):
                edges.append(Edge(next_e, next_v, v, float(rng.uniform(0.6, 1.4))))
                leaves.add(next_v)
                next_v += 1
                next_e += 1
            leaves.discard(v)
            internal.add(v)
        elif internal:
            v = sorted(internal)[rng.integers(0, len(internal))]
            edges.append(Edge(next_e, next_v, v, float(rng.uniform(0.6, 1.4))))
            leaves.add(next_v)
            next_v += 1
            next_e += 1
        else:
            continue
    edges = edges[:max(n_edges, 1)]
    t = MetricTree(tuple(edges), root=1)
    if t.degree[t.root] != 1:
        t = MetricTree(t.edges, root=t.boundary_vertices[0])
    from sltree import validate_tree
    if len(t.edges) != n_edges or not validate_tree(t).ok:
        return random_tree(seed + 101, n_edges)
    return t


def random_const_pots(tree, seed, scale=0.8):
    rng = np.random.default_rng(seed)
    return PotentialSet.of({e.id: Potential("const", (float(rng.uniform(-scale, scale)),))
                            for e in tree.edges})


def random_grid_pots(tree, seed, scale=0.7, n=9):
    rng = np.random.default_rng(seed)
    return PotentialSet.of({
        e.id: Potential("grid", tuple(rng.uniform(-scale, scale, size=n)), order=1)
        for e in tree.edges})
