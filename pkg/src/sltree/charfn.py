"""Characteristic functions of boundary value problems on metric trees.

The matching system is assembled canonically: per edge j the coefficient columns
(M_j^0, M_j^1) in ascending edge id; a Dirichlet (Neumann) condition at a
boundary vertex sitting at x = 0 drops the M^0 (M^1) column; a boundary vertex
at x = T contributes a value or derivative row; an internal vertex contributes
its continuity chain (edges in ascending id) and an outgoing-derivative Kirchhoff
row.  The determinant is then sign-normalized to be positive far down the
negative real lam axis, which makes all splitting identities hold with exact
signs independently of vertex/edge id layout.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (CertificationError, PoleProximityError, TreeStructureError)
from .graph import MetricTree, split_at_vertex
from .ode import DEFAULT_TOL, edge_values, principal_sqrt
from .potentials import PotentialSet


def all_dirichlet(tree: MetricTree) -> dict:
    return {v: "D" for v in tree.boundary_vertices}


def with_neumann(bc: dict, *vertices) -> dict:
    out = dict(bc)
    for v in vertices:
        out[v] = "N"
    return out


@dataclass(frozen=True)
class ProblemSpec:
    tree: MetricTree
    potentials: PotentialSet
    bc: tuple   # sorted tuple of (vertex, "D"|"N")

    @classmethod
    def of(cls, tree, potentials, bc) -> "ProblemSpec":
        if isinstance(potentials, dict):
            potentials = PotentialSet.of(potentials)
        bcm = dict(bc)
        missing = [v for v in tree.boundary_vertices if v not in bcm]
        extra = [v for v in bcm if v not in tree.boundary_vertices]
        if missing or extra:
            raise TreeStructureError(
                f"boundary conditions must cover exactly the boundary vertices "
                f"(missing {missing}, extra {extra})")
        bad = [v for v, c in bcm.items() if c not in ("D", "N")]
        if bad:
            raise TreeStructureError(f"conditions must be 'D' or 'N' at {bad}")
        return cls(tree, potentials, tuple(sorted(bcm.items())))

    @property
    def bc_map(self):
        return dict(self.bc)

    def with_bc(self, **overrides) -> "ProblemSpec":
        bc = self.bc_map
        bc.update({int(k.lstrip("v")): v for k, v in overrides.items()})
        return ProblemSpec.of(self.tree, self.potentials, bc)


def _assemble_matrix(spec: ProblemSpec, lam, tol=DEFAULT_TOL):
    """Matching-system matrices, stacked over lam; also the column index map."""
    tree, bc = spec.tree, spec.bc_map
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    n = lam.shape[0]
    vals = {e.id: edge_values(e.length, spec.potentials.get(e.id), lam, tol=tol)
            for e in tree.edges}
    deg = tree.degree
    cols = []
    for e in tree.edges:
        keep = [0, 1]
        if deg[e.v0] == 1:
            keep.remove(0 if bc[e.v0] == "D" else 1)
        for k in keep:
            cols.append((e.id, k))
    colix = {ck: i for i, ck in enumerate(cols)}
    K = len(cols)

    def value_coeffs(e, v):
        if v == e.v0:
            return (np.ones(n, complex), np.zeros(n, complex))
        C, S, Cp, Sp = vals[e.id]
        return (C, S)

    def outgoing_coeffs(e, v):
        if v == e.v0:
            return (np.zeros(n, complex), np.ones(n, complex))
        C, S, Cp, Sp = vals[e.id]
        return (-Cp, -Sp)

    rows = []

    def put(row, e, pair, sign=1.0):
        for k, c in zip((0, 1), pair):
            j = colix.get((e.id, k))
            if j is not None:
                row[:, j] += sign*c

    for v in tree.vertices:
        if deg[v] == 1:
            e = tree.edges_at(v)[0]
            if v == e.v0:
                continue  # handled by the column drop
            C, S, Cp, Sp = vals[e.id]
            row = np.zeros((n, K), complex)
            put(row, e, (C, S) if bc[v] == "D" else (Cp, Sp))
            rows.append(row)
        else:
            es = tree.edges_at(v)
            for a, b in zip(es, es[1:]):
                row = np.zeros((n, K), complex)
                put(row, a, value_coeffs(a, v), +1.0)
                put(row, b, value_coeffs(b, v), -1.0)
                rows.append(row)
            row = np.zeros((n, K), complex)
            for e in es:
                put(row, e, outgoing_coeffs(e, v), +1.0)
            rows.append(row)

    M = np.stack(rows, axis=1)
    if M.shape[1] != K:
        raise TreeStructureError(f"system is not square: {M.shape[1]} rows, {K} columns")
    return M, colix


def _reference_lambda(spec) -> complex:
    qb = spec.potentials.bound(spec.tree)
    r = max(3.0, np.sqrt(qb) + 2.0)
    r = min(r, 550.0/max(spec.tree.total_length, 1e-6))
    return complex(-(r*r))


class CharFn:
    """Evaluable characteristic function lam -> Delta(lam), sign-normalized."""

    def __init__(self, spec: ProblemSpec, tag="", tol=DEFAULT_TOL, _raw=None):
        self.spec = spec
        self.tag = tag
        self.tol = tol
        self._raw = _raw if _raw is not None else (
            lambda lam: np.linalg.det(_assemble_matrix(spec, lam, tol=tol)[0]))
        self._sign = self._normalization_sign()

    def _normalization_sign(self):
        lam_ref = _reference_lambda(self.spec)
        for _ in range(6):
            v = complex(self._raw(np.array([lam_ref]))[0])
            if np.isfinite(v.real) and abs(v) > 0:
                return 1.0 if v.real > 0 else -1.0
            lam_ref *= 1.21
        return 1.0

    def __call__(self, lam):
        scalar = np.isscalar(lam) or getattr(lam, "ndim", 1) == 0
        out = self._sign*self._raw(np.atleast_1d(np.asarray(lam, dtype=complex)))
        return complex(out[0]) if scalar else out


def assemble_char_fn(spec: ProblemSpec, tag="", tol=DEFAULT_TOL) -> CharFn:
    return CharFn(spec, tag=tag, tol=tol)


def subtree_char_pair(part: MetricTree, potentials, outer_bc, at, tol=DEFAULT_TOL):
    """(Dirichlet, Neumann)-at-`at` characteristic functions of a subtree part."""
    bcD = dict(outer_bc)
    bcD[at] = "D"
    bcN = dict(outer_bc)
    bcN[at] = "N"
    fD = assemble_char_fn(ProblemSpec.of(part, potentials, bcD), tag=f"D@{at}", tol=tol)
    fN = assemble_char_fn(ProblemSpec.of(part, potentials, bcN), tag=f"N@{at}", tol=tol)
    return fD, fN


def char_fn_by_split(spec: ProblemSpec, w: int, tol=DEFAULT_TOL) -> CharFn:
    """Characteristic function via the bordered determinant over the subtrees at w."""
    split = split_at_vertex(spec.tree, w)
    bc = spec.bc_map
    pairs = []
    for part in split.parts:
        outer = {v: bc[v] for v in part.boundary_vertices if v != w}
        pairs.append(subtree_char_pair(part, spec.potentials, outer, w, tol=tol))
    npart = len(pairs)

    def raw(lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        m = np.zeros((lam.shape[0], npart, npart), complex)
        dvals = [fD(lam) for fD, _ in pairs]
        nvals = [fN(lam) for _, fN in pairs]
        for i in range(npart - 1):
            m[:, i, i] = dvals[i]
            m[:, i, i + 1] = -dvals[i + 1]
        for i in range(npart):
            m[:, npart - 1, i] = nvals[i]
        return np.linalg.det(m)

    return CharFn(spec, tag=f"split@{w}", tol=tol, _raw=raw)


# ---------------------------------------------------------------------------
# eigenvalues: certified argument-principle search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectrumSet:
    problem: str
    pairs: tuple          # ((lam, mult), ...) ascending
    window: tuple         # (lam_min, lam_max)
    reference_count: int = -1   # zero-potential count in the window, if computed

    @property
    def flat(self):
        out = []
        for lam, m in self.pairs:
            out.extend([lam]*m)
        return np.array(out)

    def truncated(self, n):
        flat = self.flat[:n]
        return flat


def _contour(a, b, h, nodes):
    corners = [a - 1j*h, b - 1j*h, b + 1j*h, a + 1j*h]
    zs = []
    for i in range(4):
        z0, z1 = corners[i], corners[(i + 1) % 4]
        t = np.linspace(0, 1, nodes, endpoint=False)
        zs.append(z0 + (z1 - z0)*t)
    z = np.concatenate(zs)
    return z, np.roll(z, -1) - z


def _box_moments(f, a, b, h, nodes):
    """Winding count and scaled zero moments over the rectangle [a,b] x [-h,h].

    The derivative in the argument-principle integrand is taken by centered
    differences; trapezoid quadrature over the contour nodes.
    """
    z, dz = _contour(a, b, h, nodes)
    d = 1e-5*max(b - a, 2*h)
    fz = f(z)
    if not np.all(np.isfinite(fz)) or np.any(fz == 0):
        return False, -1, [], 0.5*(a + b), 0.5*(b - a)
    fp = (f(z + d) - f(z - d))/(2*d)
    g = fp/fz*dz/(2j*np.pi)
    if not np.all(np.isfinite(g)):
        return False, -1, [], 0.5*(a + b), 0.5*(b - a)
    c, s = 0.5*(a + b), 0.5*(b - a)
    w = (z - c)/s
    p0 = np.sum(g)
    n = int(round(p0.real))
    ok = abs(p0 - n) < 0.1 and abs(p0.imag) < 0.1 and n >= 0
    mom = [p0] + [np.sum(w**j*g) for j in range(1, max(n, 1) + 1)]
    if not all(np.isfinite(m) for m in mom):
        return False, -1, [], c, s
    return ok, n, mom, c, s


def _certified_box(f, a, b, h, nodes):
    for _ in range(6):
        ok, n, mom, c, s = _box_moments(f, a, b, h, nodes)
        if ok:
            return n, mom, c, s
        a -= 0.0131*(b - a)
        b += 0.0173*(b - a)
        h *= 1.11
        nodes = min(2*nodes, 512)
    raise CertificationError(f"cannot certify zero count on [{a}, {b}]",
                             interval=(a, b))


def _roots_from_moments(mom, c, s):
    """Zero locations from power sums via Newton's identities."""
    n = int(round(mom[0].real))
    if n <= 0:
        return []
    e = [1.0 + 0j]
    for k in range(1, n + 1):
        acc = 0.0 + 0j
        for m in range(1, k + 1):
            acc += (-1)**(m - 1)*e[k - m]*mom[m]
        e.append(acc/k)
    coeffs = [(-1)**k*e[k] for k in range(n + 1)]
    if not all(np.isfinite(co) for co in coeffs):
        return None
    return sorted((c + s*np.roots(coeffs)).real)


def _newton_real(f, x, scale, step_cap):
    for _ in range(5):
        h = 1e-7*scale
        f0 = f(np.array([x + 0j]))[0].real
        fp = (f(np.array([x + h + 0j]))[0].real - f(np.array([x - h + 0j]))[0].real)/(2*h)
        if fp == 0:
            break
        step = f0/fp
        if abs(step) > step_cap:
            break
        x -= step
    return x


def _resolve_box(f, a, b, depth=0, merge_tol=1e-7, nodes=64):
    """All zeros in [a, b] as [(lam, mult)], certified by per-box winding counts."""
    h = 0.35*(b - a) + 1e-9
    n, mom, c, s = _certified_box(f, a, b, h, nodes)
    if n == 0:
        return []
    scale = max(1.0, abs(c))
    roots = _roots_from_moments(mom, c, s)
    if n == 1:
        x = roots[0] if roots else 0.5*(a + b)
        return [(_newton_real(f, x, scale, 0.6*(b - a) + 10*merge_tol), 1)]
    if roots is None or not roots:
        mid = 0.5*(a + b) + 0.029*(b - a)
        return (_resolve_box(f, a, mid, depth + 1, merge_tol, nodes)
                + _resolve_box(f, mid, b, depth + 1, merge_tol, nodes))
    spread = roots[-1] - roots[0]
    if spread < merge_tol*scale or (b - a) < 4*merge_tol*scale or depth > 40:
        return [(float(np.mean(roots)), n)]
    lo = roots[0] - 0.08*spread - 2*merge_tol*scale
    hi = roots[-1] + 0.08*spread + 2*merge_tol*scale
    mid = 0.5*(lo + hi)
    if any(abs(r - mid) < 0.03*(hi - lo) for r in roots):
        mid += 0.07*(hi - lo)
    out = (_resolve_box(f, lo, mid, depth + 1, merge_tol, nodes)
           + _resolve_box(f, mid, hi, depth + 1, merge_tol, nodes))
    if sum(m for _, m in out) != n:
        mid2 = 0.5*(a + b) + 0.031*(b - a)
        out = (_resolve_box(f, a, mid2, depth + 1, merge_tol, nodes)
               + _resolve_box(f, mid2, b, depth + 1, merge_tol, nodes))
    return out


def find_eigenvalues(cf, window, count_hint=None, drho=0.35, nodes=64,
                     reference=None, tag=None) -> SpectrumSet:
    """All real zeros of cf in the window, with multiplicities, each certified
    by a local argument-principle count.

    `reference` (a zero-potential CharFn for the same problem) enables the
    count-consistency diagnostic stored on the result.
    """
    lam_lo, lam_hi = window
    if not lam_lo < lam_hi:
        raise ValueError("window must satisfy lam_min < lam_max")
    boxes = []
    if lam_lo < 0:
        boxes.append((lam_lo, min(1e-9, lam_hi)))
    if lam_hi > 0:
        rg = np.arange(np.sqrt(max(lam_lo, 1e-9)), np.sqrt(lam_hi) + drho, drho)
        boxes += [(rg[i]**2, min(rg[i + 1]**2, lam_hi)) for i in range(len(rg) - 1)
                  if rg[i]**2 < lam_hi]
    found = []
    for a, b in boxes:
        if b > a:
            found += _resolve_box(cf, a, b, nodes=nodes)
    found.sort()
    pairs = tuple((lam, m) for lam, m in found)
    ref_count = -1
    if reference is not None:
        ref_pairs = find_eigenvalues(reference, window, drho=drho, nodes=nodes).pairs
        ref_count = sum(m for _, m in ref_pairs)
    out = SpectrumSet(tag or getattr(cf, "tag", ""), pairs, (lam_lo, lam_hi), ref_count)
    if count_hint is not None and ref_count >= 0:
        if abs(len(out.flat) - ref_count) > 2:
            raise CertificationError(
                f"count {len(out.flat)} deviates from zero-potential count "
                f"{ref_count} by more than 2", interval=window)
    return out


def eigenvalues_near(cf, guesses, max_iter=6):
    """Vectorized Newton refinement from given guesses (simple zeros)."""
    x = np.asarray(guesses, dtype=float).copy()
    gaps = np.diff(np.sort(x))
    pos = gaps[gaps > 1e-8]
    cap = 0.45*np.min(pos) if pos.size else 0.5
    for _ in range(max_iter):
        h = 1e-7*np.maximum(1.0, np.abs(x))
        f0 = cf(x.astype(complex)).real
        fp = (cf((x + h).astype(complex)).real - cf((x - h).astype(complex)).real)/(2*h)
        step = np.where(fp != 0, f0/np.where(fp == 0, 1.0, fp), 0.0)
        x = x - np.clip(step, -cap, cap)
    return x


# ---------------------------------------------------------------------------
# Weyl functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WeylSample:
    vertex: int
    grid: tuple     # lam values
    values: tuple   # M(lam) values

    @property
    def lam(self):
        return np.array(self.grid, dtype=complex)

    @property
    def M(self):
        return np.array(self.values, dtype=complex)


def _solve_weyl_direct(spec: ProblemSpec, k: int, lam, tol=DEFAULT_TOL):
    """psi'(0) at boundary vertex k by solving the matching system with the
    normalization psi_k(0) = 1 and zero data at the other boundary vertices."""
    tree = spec.tree
    bc = spec.bc_map
    ek = tree.edges_at(k)[0]
    if k != ek.v0:
        raise TreeStructureError(f"vertex {k} is not at the x=0 end of its edge")
    free_spec = ProblemSpec.of(tree, spec.potentials, with_neumann(bc, k))
    # the N condition drops column (ek, 1); rebuild keeping it and dropping (ek, 0),
    # then move the (ek, 0) column to the right-hand side with coefficient 1.
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    bc_d = dict(bc)
    bc_d[k] = "D"
    spec_D = ProblemSpec.of(tree, spec.potentials, bc_d)
    M, colix = _assemble_matrix(spec_D, lam, tol=tol)          # columns without (ek,0)
    Mn, colix_n = _assemble_matrix(free_spec, lam, tol=tol)    # columns without (ek,1)
    rhs = -Mn[:, :, colix_n[(ek.id, 0)]]
    j = colix[(ek.id, 1)]
    sol = np.linalg.solve(M, rhs[:, :, None])
    return sol[:, j, 0]


def weyl_function(spec: ProblemSpec, k: int, grid, tol=DEFAULT_TOL,
                  check_tol=1e-6, pole_floor=1e-8, on_pole="raise") -> WeylSample:
    """Weyl function at boundary vertex k: -Delta_k/Delta_0, verified against
    the directly solved normalized-solution derivative."""
    bc = spec.bc_map
    if bc.get(k) != "D":
        raise TreeStructureError(f"base problem must have a Dirichlet condition at {k}")
    lam = np.atleast_1d(np.asarray(grid, dtype=complex))
    d0 = assemble_char_fn(spec, tag="base", tol=tol)
    dk = assemble_char_fn(ProblemSpec.of(spec.tree, spec.potentials, with_neumann(bc, k)),
                          tag=f"N@{k}", tol=tol)
    v0 = d0(lam)
    scale = np.max(np.abs(v0))
    bad = np.abs(v0) < pole_floor*scale
    if np.any(bad):
        if on_pole == "raise":
            raise PoleProximityError("grid points too close to a pole",
                                     points=lam[bad].tolist())
        lam = lam[~bad]
        v0 = v0[~bad]
    m = -dk(lam)/v0
    direct = _solve_weyl_direct(spec, k, lam, tol=tol)
    mism = np.abs(m - direct)/np.maximum(np.abs(direct), 1.0)
    if np.max(mism) > check_tol:
        raise CertificationError(
            f"Weyl ratio and direct solve disagree (max {np.max(mism):.2e})")
    return WeylSample(k, tuple(lam.tolist()), tuple(m.tolist()))


def subtree_weyl_ratio(spec: ProblemSpec, at: int, grid, tol=DEFAULT_TOL,
                       pole_floor=1e-8, on_pole="raise") -> WeylSample:
    """Ratio (Neumann fn)/(Dirichlet fn) of a rooted subtree, seen from `at`."""
    if at not in spec.tree.boundary_vertices:
        raise TreeStructureError(f"{at} is not a boundary vertex of the subtree")
    outer = {v: c for v, c in spec.bc_map.items() if v != at}
    fD, fN = subtree_char_pair(spec.tree, spec.potentials, outer, at, tol=tol)
    lam = np.atleast_1d(np.asarray(grid, dtype=complex))
    d = fD(lam)
    scale = np.max(np.abs(d))
    bad = np.abs(d) < pole_floor*scale
    if np.any(bad):
        if on_pole == "raise":
            raise PoleProximityError("grid points too close to a pole",
                                     points=lam[bad].tolist())
        lam = lam[~bad]
        d = d[~bad]
    return WeylSample(at, tuple(lam.tolist()), tuple((fN(lam)/d).tolist()))
