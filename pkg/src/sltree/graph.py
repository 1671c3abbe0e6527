"""Compact metric trees: structure, validation, and vertex/edge splitting.

Every edge is a segment [0, T] with a fixed orientation.  Boundary vertices of a
user-built tree sit at the x = 0 end of their single edge; subtrees produced by
splitting keep the parent orientation, so a split copy may sit at the x = T end
(tracked in `split_copies` and exempted from the orientation rule).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import TreeStructureError
from .potentials import Potential, PotentialSet


@dataclass(frozen=True)
class Edge:
    id: int
    v0: int          # vertex at x = 0
    v1: int          # vertex at x = T
    length: float = 1.0

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError(f"edge {self.id}: length must be positive")
        if self.v0 == self.v1:
            raise ValueError(f"edge {self.id}: endpoints must be distinct")

    def other(self, v):
        return self.v1 if v == self.v0 else self.v0


@dataclass(frozen=True)
class MetricTree:
    edges: tuple
    root: int
    split_copies: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(sorted(self.edges, key=lambda e: e.id)))
        object.__setattr__(self, "split_copies", frozenset(self.split_copies))

    @property
    def vertices(self):
        return tuple(sorted({v for e in self.edges for v in (e.v0, e.v1)}))

    @property
    def degree(self):
        deg = {}
        for e in self.edges:
            deg[e.v0] = deg.get(e.v0, 0) + 1
            deg[e.v1] = deg.get(e.v1, 0) + 1
        return deg

    @property
    def boundary_vertices(self):
        deg = self.degree
        return tuple(v for v in self.vertices if deg[v] == 1)

    @property
    def internal_vertices(self):
        deg = self.degree
        return tuple(v for v in self.vertices if deg[v] > 1)

    def edges_at(self, v):
        return tuple(e for e in self.edges if v in (e.v0, e.v1))

    def edge(self, edge_id):
        for e in self.edges:
            if e.id == edge_id:
                return e
        raise TreeStructureError(f"no edge with id {edge_id}")

    @property
    def total_length(self):
        return sum(e.length for e in self.edges)

    def to_dict(self, potentials=None, bc=None):
        d = {
            "vertices": [{"id": v} for v in self.vertices],
            "edges": [{"id": e.id, "from": e.v0, "to": e.v1, "length": e.length,
                       "potential": (potentials.get(e.id).to_dict() if potentials
                                     else {"kind": "zero"})}
                      for e in self.edges],
            "root": self.root,
        }
        if bc is not None:
            d["boundary_conditions"] = {str(v): bc[v] for v in self.boundary_vertices}
        return d

    @classmethod
    def from_dict(cls, d):
        edges = tuple(Edge(int(e["id"]), int(e["from"]), int(e["to"]), float(e["length"]))
                      for e in d["edges"])
        return cls(edges, int(d["root"]))


def load_problem(path):
    """Read a tree description file; returns (tree, potentials, boundary conditions)."""
    with open(path) as fh:
        d = json.load(fh)
    tree = MetricTree.from_dict(d)
    pots = PotentialSet.of({int(e["id"]): Potential.from_dict(e.get("potential", {"kind": "zero"}))
                            for e in d["edges"]})
    bc = {int(k): v for k, v in d.get("boundary_conditions", {}).items()}
    return tree, pots, bc


def save_problem(path, tree, potentials=None, bc=None):
    with open(path, "w") as fh:
        json.dump(tree.to_dict(potentials, bc), fh, indent=1)
        fh.write("\n")


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple

    @property
    def ok(self):
        return not self.violations

    def __str__(self):
        return "valid" if self.ok else "; ".join(self.violations)


def validate_tree(tree: MetricTree) -> ValidationReport:
    """Check the standing structural assumptions; report every violation found."""
    bad = []
    vs = tree.vertices
    if not tree.edges:
        return ValidationReport(("tree has no edges",))
    if len(tree.edges) != len(vs) - 1:
        bad.append(f"edge count {len(tree.edges)} != vertex count {len(vs)} - 1")
    # connectivity
    seen = {vs[0]}
    frontier = [vs[0]]
    while frontier:
        v = frontier.pop()
        for e in tree.edges_at(v):
            w = e.other(v)
            if w not in seen:
                seen.add(w)
                frontier.append(w)
    if len(seen) != len(vs):
        bad.append("graph is not connected")
    deg = tree.degree
    for v in vs:
        if deg[v] == 2:
            bad.append(f"vertex {v} has degree 2")
    for v in tree.boundary_vertices:
        e = tree.edges_at(v)[0]
        if v == e.v1 and v not in tree.split_copies and deg.get(e.v0, 0) > 1:
            bad.append(f"boundary vertex {v} is not at the x=0 end of edge {e.id}")
    if tree.root not in vs:
        bad.append(f"root {tree.root} is not a vertex")
    elif deg.get(tree.root, 0) != 1:
        bad.append(f"root {tree.root} is not a boundary vertex")
    return ValidationReport(tuple(bad))


@dataclass(frozen=True)
class VertexSplit:
    vertex: int
    parts: tuple     # MetricTree per subtree; each contains `vertex` as a boundary copy


def _edge_components(tree, w):
    """Group tree edges into the connected components obtained by detaching w."""
    at_w = list(tree.edges_at(w))
    rest = [e for e in tree.edges if e not in at_w]
    comps = []
    for e in at_w:
        comp = [e]
        frontier = {e.other(w)}
        moved = True
        while moved:
            moved = False
            for r in list(rest):
                if r.v0 in frontier or r.v1 in frontier:
                    comp.append(r)
                    rest.remove(r)
                    frontier.update((r.v0, r.v1))
                    moved = True
        comps.append(tuple(sorted(comp, key=lambda e: e.id)))
    return comps


def split_at_vertex(tree: MetricTree, w: int) -> VertexSplit:
    """Detach the internal vertex w, producing one subtree per incident edge."""
    deg = tree.degree
    if w not in deg:
        raise TreeStructureError(f"no vertex {w}")
    if deg[w] == 1:
        raise TreeStructureError(f"cannot split boundary vertex {w}")
    parts = []
    for comp in _edge_components(tree, w):
        parts.append(MetricTree(comp, root=w,
                                split_copies=(tree.split_copies | {w}) & _vset(comp)))
    return VertexSplit(w, tuple(parts))


def _vset(edges):
    return frozenset(v for e in edges for v in (e.v0, e.v1))


def reassemble(split: VertexSplit) -> MetricTree:
    """Merge the copies of the split vertex back; recovers the original edge set."""
    edges = tuple(sorted((e for p in split.parts for e in p.edges), key=lambda e: e.id))
    copies = frozenset().union(*(p.split_copies for p in split.parts)) - {split.vertex}
    tree = MetricTree(edges, root=split.parts[0].root, split_copies=copies)
    # pick any boundary vertex as root if the split vertex became internal
    if tree.degree.get(tree.root, 0) != 1:
        tree = MetricTree(edges, root=tree.boundary_vertices[0], split_copies=copies)
    return tree


@dataclass(frozen=True)
class FivePartDecomposition:
    """Both endpoints of an internal edge split; parts follow the labeling contract:
    g3 = {the edge}, g1/g2 attach at its x=0 endpoint, g4/g5 at the x=T endpoint."""

    edge: Edge
    near: int        # endpoint at x = 0 (carries g1, g2)
    far: int         # endpoint at x = T (carries g4, g5)
    g1: MetricTree
    g2: MetricTree
    g3: MetricTree
    g4: MetricTree
    g5: MetricTree

    @property
    def parts(self):
        return (self.g1, self.g2, self.g3, self.g4, self.g5)


def split_edge_environment(tree: MetricTree, f: int, r1=None, r2=None) -> FivePartDecomposition:
    """Split both endpoints of internal edge f into the five-part decomposition.

    r1 (resp. r2) optionally designates a boundary vertex that must land in g2
    (resp. g5) -- the data-free subtrees.  Defaults: the part with the larger
    minimal edge id on each side.
    """
    e = tree.edge(f)
    deg = tree.degree
    if deg[e.v0] == 1 or deg[e.v1] == 1:
        raise TreeStructureError(f"edge {f} is a boundary edge")
    if deg[e.v0] != 3 or deg[e.v1] != 3:
        raise TreeStructureError(
            f"unsupported degree: endpoints of edge {f} must have degree 3")
    near, far = e.v0, e.v1

    def side_parts(w):
        comps = [c for c in _edge_components(tree, w) if e not in c]
        parts = [MetricTree(c, root=w, split_copies=(tree.split_copies | {w}) & _vset(c))
                 for c in comps]
        parts.sort(key=lambda p: p.edges[0].id)
        return parts

    a, b = side_parts(near)
    c, d = side_parts(far)
    if r1 is not None:
        vs_a = set(a.vertices)
        vs_cd = set(c.vertices) | set(d.vertices)
        if r1 in vs_cd:
            # designated vertices are on the x=T side; swap the side roles of r1/r2
            r1, r2 = r2, r1
        if r1 is not None and r1 in vs_a:
            a, b = b, a
    if r2 is not None and r2 in set(c.vertices):
        c, d = d, c
    g3 = MetricTree((e,), root=near, split_copies=(tree.split_copies | {near, far}))
    return FivePartDecomposition(e, near, far, a, b, g3, c, d)
