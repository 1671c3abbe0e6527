"""Structural identity checks: splitting equivalence, product identities of
paired boundary conditions, and the zero-potential factorization suite.

All characteristic functions here come from the sign-normalized assembler, so
the identities hold with definite signs regardless of id layout.
"""
from __future__ import annotations

import numpy as np

from .charfn import (ProblemSpec, all_dirichlet, assemble_char_fn, char_fn_by_split,
                     subtree_char_pair)
from .errors import TreeStructureError
from .graph import MetricTree, split_at_vertex
from .ode import principal_sqrt
from .potentials import PotentialSet


def split_equivalence(spec: ProblemSpec, w: int, grid, tol=1e-11):
    """Ratio of the bordered-determinant evaluation to direct assembly over the
    grid; the ratio must be lam-independent (zeros and multiplicities agree)."""
    lam = np.asarray(grid, dtype=complex)
    direct = assemble_char_fn(spec, tol=tol)(lam)
    split = char_fn_by_split(spec, w, tol=tol)(lam)
    ratio = split/direct
    dev = float(np.max(np.abs(ratio - ratio[0])/np.max(np.abs(ratio))))
    return {"ratio": complex(ratio[0]), "max_relative_deviation": dev}


def _part_pairs(tree, potentials, bc, w, tol):
    split = split_at_vertex(tree, w)
    pairs = []
    for part in split.parts:
        outer = {v: bc[v] for v in part.boundary_vertices if v != w}
        pairs.append(subtree_char_pair(part, potentials, outer, w, tol=tol))
    return split, pairs


def pair_product_identity(tree: MetricTree, potentials, v1: int, v2: int, grid,
                          bc=None, tol=1e-11):
    """Common-vertex case: v1, v2 boundary vertices attached to the same internal
    vertex v.  Checks DD*NN - DN*ND = -(product of the other parts' Dirichlet
    functions)^2 on the grid; returns the max relative residual."""
    bc = dict(bc) if bc else all_dirichlet(tree)
    e1 = tree.edges_at(v1)[0]
    e2 = tree.edges_at(v2)[0]
    v = e1.other(v1)
    if e2.other(v2) != v:
        raise TreeStructureError(f"{v1} and {v2} must share their interior vertex")
    lam = np.asarray(grid, dtype=complex)

    def full(c1, c2):
        b = dict(bc)
        b[v1], b[v2] = c1, c2
        return assemble_char_fn(ProblemSpec.of(tree, potentials, b), tol=tol)(lam)

    lhs = full("D", "D")*full("N", "N") - full("D", "N")*full("N", "D")
    split, pairs = _part_pairs(tree, potentials, bc, v, tol)
    prod = np.ones_like(lam)
    for part, (fD, _) in zip(split.parts, pairs):
        if e1 in part.edges or e2 in part.edges:
            continue
        prod = prod*fD(lam)
    rhs = -prod**2
    return float(np.max(np.abs(lhs - rhs)/np.max(np.abs(rhs))))


def two_vertex_factorization(tree: MetricTree, potentials, v1: int, v2: int, grid,
                             bc=None, tol=1e-11):
    """Two-vertex case: v1 attaches at v3, v2 at v4, v3 != v4.  The four
    middle-graph functions (joined vs pinned at v3/v4) must satisfy
    PP*KK - PK*KP = (DD*NN - DN*ND)*(P1*P2)^2 with every factor computed
    independently from part assemblies.  Returns the max relative residual."""
    bc = dict(bc) if bc else all_dirichlet(tree)
    e1 = tree.edges_at(v1)[0]
    e2 = tree.edges_at(v2)[0]
    v3, v4 = e1.other(v1), e2.other(v2)
    if v3 == v4:
        raise TreeStructureError("use pair_product_identity for a common vertex")
    lam = np.asarray(grid, dtype=complex)
    middle = [e for e in tree.edges if e not in (e1, e2)]

    def comp_of(start_edges, detach):
        # connected components of `middle` after detaching the vertex `detach`
        comps = []
        rest = [e for e in middle if e not in start_edges]
        for e in start_edges:
            comp = [e]
            frontier = {e.other(detach)}
            moved = True
            while moved:
                moved = False
                for r in list(rest):
                    if r.v0 in frontier or r.v1 in frontier:
                        comp.append(r)
                        rest.remove(r)
                        frontier.update((r.v0, r.v1))
                        moved = True
            comps.append(comp)
        return comps

    # parts hanging off v3 (resp. v4) not containing the path to the other vertex
    def side_parts(vx, other_vx):
        starts = [e for e in middle if vx in (e.v0, e.v1)]
        comps = comp_of(starts, vx)
        side, core = [], None
        for comp in comps:
            vs = {x for e in comp for x in (e.v0, e.v1)}
            if other_vx in vs:
                core = comp
            else:
                side.append(comp)
        return side, core

    side1, core13 = side_parts(v3, v4)
    side2, _ = side_parts(v4, v3)
    core = [e for e in core13 if True]

    def tree_of(edges, copies, root_hint):
        t = MetricTree(tuple(edges), root=root_hint,
                       split_copies=frozenset(copies) & {x for e in edges for x in (e.v0, e.v1)})
        return t

    def det_of(edges, copies, bcond):
        t = tree_of(edges, copies, root_hint=bcond and sorted(bcond)[0] or v3)
        return assemble_char_fn(ProblemSpec.of(t, potentials, bcond), tol=tol)(lam)

    def outer_bc(edges, extra):
        t = tree_of(edges, set(extra), v3)
        out = {}
        for v in t.boundary_vertices:
            if v in extra:
                out[v] = extra[v]
            else:
                out[v] = bc.get(v, "D")
        return out

    # middle-core functions with the four condition combinations at (v3, v4)
    g0 = {}
    for c3 in "DN":
        for c4 in "DN":
            bcond = outer_bc(core, {v3: c3, v4: c4})
            g0[c3 + c4] = det_of(core, {v3, v4}, bcond)

    def prod_D(parts, vx):
        out = np.ones_like(lam)
        for comp in parts:
            bcond = outer_bc(comp, {vx: "D"})
            out = out*det_of(comp, {vx}, bcond)
        return out

    p1 = prod_D(side1, v3)
    p2 = prod_D(side2, v4)

    # joined middle graph(s): both vertices interior / one pinned via part product
    mid_all = middle
    kk = det_of(mid_all, set(), outer_bc(mid_all, {}))
    pk = p1*det_of(core + [e for c in side2 for e in c], {v3},
                   outer_bc(core + [e for c in side2 for e in c], {v3: "D"}))
    kp = p2*det_of(core + [e for c in side1 for e in c], {v4},
                   outer_bc(core + [e for c in side1 for e in c], {v4: "D"}))
    pp = p1*p2*g0["DD"]
    lhs = pp*kk - pk*kp
    rhs = (g0["DD"]*g0["NN"] - g0["DN"]*g0["ND"])*(p1*p2)**2
    return float(np.max(np.abs(lhs - rhs)/np.max(np.abs(rhs))))


def identity_suite_q0(decomp, grid, tol=1e-11):
    """Zero-potential factorization suite on a five-part decomposition with a
    unit-length middle edge.  Computes every factor independently and checks the
    closed middle-edge functions, the three coefficient factorizations, the
    bracket identity, and the discriminant factorization; returns residuals."""
    from .inverse import build_coefficient_table  # local import to avoid a cycle

    if abs(decomp.edge.length - 1.0) > 1e-12:
        raise TreeStructureError("suite requires a unit-length middle edge")
    pots = PotentialSet.zero()
    lam = np.asarray(grid, dtype=complex)
    rho = principal_sqrt(lam)
    s = np.sin(rho)/rho

    full_edges = tuple(e for p in decomp.parts for e in p.edges)
    full = MetricTree(full_edges, root=min(
        v for v in MetricTree(full_edges, root=decomp.near).boundary_vertices))
    bc0 = all_dirichlet(full)
    d0 = assemble_char_fn(ProblemSpec.of(full, pots, bc0), tol=tol)(lam)

    near, far = decomp.near, decomp.far

    def pair(part, at, outer_override=None):
        outer = {v: "D" for v in part.boundary_vertices if v != at}
        if outer_override:
            outer.update(outer_override)
        return subtree_char_pair(part, pots, outer, at, tol=tol)

    u_dd, u_dn = (f(lam) for f in pair(decomp.g1, near))
    u4_dd, u4_dn = (f(lam) for f in pair(decomp.g4, far))
    w_d = pair(decomp.g3, far, outer_override={near: "D"})
    w_n = pair(decomp.g3, far, outer_override={near: "N"})
    w = {"DD": w_d[0](lam), "DN": w_d[1](lam), "ND": w_n[0](lam), "NN": w_n[1](lam)}
    g2_d, g2_n = (f(lam) for f in pair(decomp.g2, near))
    g5_d, g5_n = (f(lam) for f in pair(decomp.g5, far))

    v1 = min(v for v in decomp.g1.boundary_vertices if v != near)
    v4 = min(v for v in decomp.g4.boundary_vertices if v != far)
    u_nd, u_nn = (f(lam) for f in pair(decomp.g1, near, outer_override={v1: "N"}))
    u4_nd, u4_nn = (f(lam) for f in pair(decomp.g4, far, outer_override={v4: "N"}))

    f1 = u_dd*u_nn - u_dn*u_nd
    f4 = u4_dd*u4_nn - u4_dn*u4_nd
    pi = 2*u_dd*g2_d*u4_dd

    # unions: g1+g2+g3 with the far copy as a Dirichlet boundary vertex; plus g4
    # with the far vertex interior (degree 2 allowed in assembly)
    chi_edges = decomp.g1.edges + decomp.g2.edges + decomp.g3.edges
    chi_tree = MetricTree(chi_edges, root=min(
        v for v in MetricTree(chi_edges, root=far).boundary_vertices if v != far),
        split_copies=frozenset({far}))
    chi_bc = {v: "D" for v in chi_tree.boundary_vertices}
    chi = assemble_char_fn(ProblemSpec.of(chi_tree, pots, chi_bc), tol=tol)(lam)
    xi_edges = chi_edges + decomp.g4.edges
    xi_tree = MetricTree(xi_edges, root=min(
        v for v in MetricTree(xi_edges, root=far).boundary_vertices))
    xi_bc = {v: "D" for v in xi_tree.boundary_vertices}
    xi = assemble_char_fn(ProblemSpec.of(xi_tree, pots, xi_bc), tol=tol)(lam)

    table = build_coefficient_table(decomp, pots, None, None, None, lam, v1=v1, v4=v4,
                                    data_values=(d0,
                                                 _delta_k(full, pots, bc0, v1, lam, tol),
                                                 _delta_k(full, pots, bc0, v4, lam, tol)),
                                    tol=tol)
    A, B, C = table.A, table.B, table.C

    def rel(x, y):
        return float(np.max(np.abs(x - y)/np.max(np.abs(y))))

    report = {
        "middle_DD": rel(w["DD"], s),
        "middle_ND": rel(w["ND"], np.cos(rho)),
        "middle_DN": rel(w["DN"], np.cos(rho)),
        "middle_NN": rel(w["NN"], -rho*np.sin(rho)),
        "form_A": rel(A, f1*f4*d0*s**2*u4_dd*g5_d*chi),
        "form_B": rel(B, f1*f4*s*d0*(g5_d*pi + g5_d*s*xi - u4_dd*g5_n*s*chi)),
        "form_C": rel(C, -f1*f4*d0*s*g5_n*(pi + s*xi)),
        "bracket": rel(g5_d*pi + g5_d*s*xi + u4_dd*g5_n*s*chi, g5_d*pi + s*d0),
        "discriminant": rel(B*B - 4*A*C, f1**2*f4**2*s**2*d0**2*(g5_d*pi + s*d0)**2),
    }
    return report


def _delta_k(tree, pots, bc, k, lam, tol):
    b = dict(bc)
    b[k] = "N"
    return assemble_char_fn(ProblemSpec.of(tree, pots, b), tol=tol)(lam)


def growth_comparison(decomp, r_values, tol=1e-11):
    """Ratio |s*Delta_0 / (Delta_5^D * Pi)| down the negative lam axis; must be
    increasing (the data term outgrows the product term)."""
    pots = PotentialSet.zero()
    full_edges = tuple(e for p in decomp.parts for e in p.edges)
    full = MetricTree(full_edges, root=min(
        v for v in MetricTree(full_edges, root=decomp.near).boundary_vertices))
    d0_fn = assemble_char_fn(ProblemSpec.of(full, pots, all_dirichlet(full)), tol=tol)
    near, far = decomp.near, decomp.far

    def pd(part, at):
        outer = {v: "D" for v in part.boundary_vertices if v != at}
        return subtree_char_pair(part, pots, outer, at, tol=tol)[0]

    g1_d = pd(decomp.g1, near)
    g2_d = pd(decomp.g2, near)
    g4_d = pd(decomp.g4, far)
    g5_d = pd(decomp.g5, far)
    out = []
    for r in r_values:
        lam = np.array([-(r*r) + 0j])
        rho = principal_sqrt(lam)
        s = np.sin(rho)/rho
        pi = 2*g1_d(lam)*g2_d(lam)*g4_d(lam)
        out.append(float(np.abs(s*d0_fn(lam))[0]/np.abs(g5_d(lam)*pi)[0]))
    return out
