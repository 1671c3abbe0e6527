"""Partial-inverse machinery: coefficient tables for the unknown-subtree product
system, the quadratic for the unknown Weyl ratio with tracked branch selection,
boundary-edge cutting, potential recovery by Weyl matching, and the end-to-end
pipeline driven by systems of spectra.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .charfn import (CharFn, ProblemSpec, SpectrumSet, WeylSample, all_dirichlet,
                     assemble_char_fn, eigenvalues_near, find_eigenvalues,
                     subtree_char_pair, with_neumann)
from .errors import (FitError, PairingError, PipelineError, TrackingError,
                     TreeStructureError)
from .graph import FivePartDecomposition, MetricTree, split_edge_environment
from .hadamard import reconstruct_char_fn
from .ode import DEFAULT_TOL, edge_values, principal_sqrt
from .potentials import Potential, PotentialSet


# ---------------------------------------------------------------------------
# coefficient tables
# ---------------------------------------------------------------------------

def _outer_dirichlet(part, at, override=None):
    out = {v: "D" for v in part.boundary_vertices if v != at}
    if override:
        out.update(override)
    return out


def default_data_vertices(decomp):
    """Lowest-id outer boundary vertex of each known-side part."""
    v1 = min(v for v in decomp.g1.boundary_vertices if v != decomp.near)
    v4 = min(v for v in decomp.g4.boundary_vertices if v != decomp.far)
    return v1, v4


@dataclass
class CoefficientTable:
    grid: np.ndarray
    a: np.ndarray          # (3, 4, n)
    b: np.ndarray          # (2, 4, n)
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    degenerate: np.ndarray  # bool mask over the grid
    v1: int
    v4: int
    evaluate: object = field(repr=False, default=None)   # lam -> same fields

    def consistency_residual(self, g2_pair, g5_pair, data_values):
        """Residual of the three product equations given forward-computed
        unknown-side function pairs; relative to each data value."""
        g2d, g2n = g2_pair
        g5d, g5n = g5_pair
        prods = np.array([g2d*g5d, g2n*g5d, g2d*g5n, g2n*g5n])
        out = []
        for i, data in enumerate(data_values):
            lhs = sum(self.a[i, j]*prods[j] for j in range(4))
            out.append(np.abs(lhs - data)/np.maximum(np.abs(data), 1e-300))
        return np.array(out)


def build_coefficient_table(decomp: FivePartDecomposition, potentials,
                            delta0, delta1, delta4, grid, v1=None, v4=None,
                            data_values=None, degeneracy_floor=1e-12,
                            tol=DEFAULT_TOL) -> CoefficientTable:
    """Coefficient table of the three-equation system in the four products of
    the unknown-side functions.  The known-side potentials (parts g1, g3, g4)
    enter through their subtree characteristic pairs; the data functions
    delta0/1/4 are any callables (direct or reconstructed)."""
    near, far = decomp.near, decomp.far
    if v1 is None or v4 is None:
        d1, d4 = default_data_vertices(decomp)
        v1 = v1 if v1 is not None else d1
        v4 = v4 if v4 is not None else d4
    pair = subtree_char_pair
    uD = pair(decomp.g1, potentials, _outer_dirichlet(decomp.g1, near), near, tol=tol)
    uN = pair(decomp.g1, potentials, _outer_dirichlet(decomp.g1, near, {v1: "N"}),
              near, tol=tol)
    wD = pair(decomp.g3, potentials, {near: "D"}, far, tol=tol)
    wN = pair(decomp.g3, potentials, {near: "N"}, far, tol=tol)
    vD = pair(decomp.g4, potentials, _outer_dirichlet(decomp.g4, far), far, tol=tol)
    vN = pair(decomp.g4, potentials, _outer_dirichlet(decomp.g4, far, {v4: "N"}),
              far, tol=tol)

    def evaluate(lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        u = {"DD": uD[0](lam), "DN": uD[1](lam), "ND": uN[0](lam), "NN": uN[1](lam)}
        w = {"DD": wD[0](lam), "DN": wD[1](lam), "ND": wN[0](lam), "NN": wN[1](lam)}
        v = {"DD": vD[0](lam), "DN": vD[1](lam), "ND": vN[0](lam), "NN": vN[1](lam)}

        def a_row(UD, UN, VD, VN):
            return (UN*(w["DN"]*VD + w["DD"]*VN) + UD*(w["NN"]*VD + w["ND"]*VN),
                    UD*(w["DN"]*VD + w["DD"]*VN),
                    (UN*w["DD"] + UD*w["ND"])*VD,
                    UD*w["DD"]*VD)

        a = np.array([a_row(u["DD"], u["DN"], v["DD"], v["DN"]),
                      a_row(u["ND"], u["NN"], v["DD"], v["DN"]),
                      a_row(u["DD"], u["DN"], v["ND"], v["NN"])])
        if data_values is not None and lam.shape[0] == len(np.atleast_1d(grid)):
            d0v, d1v, d4v = data_values
        else:
            d0v, d1v, d4v = delta0(lam), delta1(lam), delta4(lam)
        b = np.array([[a[0, j]*d1v - a[1, j]*d0v for j in range(4)],
                      [a[0, j]*d4v - a[2, j]*d0v for j in range(4)]])
        A = b[0, 1]*b[1, 3] - b[1, 1]*b[0, 3]
        B = b[0, 0]*b[1, 3] + b[0, 1]*b[1, 2] - b[1, 0]*b[0, 3] - b[1, 1]*b[0, 2]
        C = b[0, 0]*b[1, 2] - b[1, 0]*b[0, 2]
        return a, b, A, B, C, B*B - 4*A*C

    lam0 = np.atleast_1d(np.asarray(grid, dtype=complex))
    a, b, A, B, C, D = evaluate(lam0)
    lead = np.abs(a[:, 0, :]).max(axis=0)
    degenerate = lead < degeneracy_floor*np.max(lead)
    return CoefficientTable(lam0, a, b, A, B, C, D, degenerate, v1, v4, evaluate)


@dataclass
class ReferenceTable:
    table: CoefficientTable
    root_physical: object     # lam -> unknown-side ratio for zero potential
    root_secondary: object
    a_max: float
    d_max: float


def reference_table(decomp: FivePartDecomposition, grid, v1=None, v4=None,
                    tol=DEFAULT_TOL) -> ReferenceTable:
    """Zero-potential specialization: closed-form data functions plus the two
    reference roots used for branch anchoring."""
    pots = PotentialSet.zero()
    full_edges = tuple(e for p in decomp.parts for e in p.edges)
    full = MetricTree(full_edges, root=min(
        v for v in MetricTree(full_edges, root=decomp.near).boundary_vertices))
    bc0 = all_dirichlet(full)
    if v1 is None or v4 is None:
        d1, d4 = default_data_vertices(decomp)
        v1 = v1 if v1 is not None else d1
        v4 = v4 if v4 is not None else d4
    f0 = assemble_char_fn(ProblemSpec.of(full, pots, bc0), tag="ref0", tol=tol)
    f1 = assemble_char_fn(ProblemSpec.of(full, pots, with_neumann(bc0, v1)),
                          tag="ref1", tol=tol)
    f4 = assemble_char_fn(ProblemSpec.of(full, pots, with_neumann(bc0, v4)),
                          tag="ref4", tol=tol)
    table = build_coefficient_table(decomp, pots, f0, f1, f4, grid,
                                    v1=v1, v4=v4, tol=tol)
    g2D, g2N = subtree_char_pair(decomp.g2, pots,
                                 _outer_dirichlet(decomp.g2, decomp.near),
                                 decomp.near, tol=tol)

    def root_physical(lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        return g2N(lam)/g2D(lam)

    def root_secondary(lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        _, _, A, _, C, _ = table.evaluate(lam)
        return C/(A*root_physical(lam))

    a_max = float(np.max(np.abs(table.A)))
    d_max = float(np.max(np.abs(table.D)))
    return ReferenceTable(table, root_physical, root_secondary, a_max, d_max)


# ---------------------------------------------------------------------------
# quadratic roots with branch tracking
# ---------------------------------------------------------------------------

@dataclass
class RootTrack:
    path: np.ndarray
    m2: np.ndarray
    m5: np.ndarray
    took_first: np.ndarray   # branch flags per path point
    excluded: np.ndarray     # discriminant-floor exclusions (interpolated over)
    floor: float
    cross_max: float


def _stable_roots(A, B, C, D):
    sq = np.sqrt(D)
    # pick the sign that avoids cancellation in -B -/+ sq
    plus = np.abs(B + sq) >= np.abs(B - sq)
    q = np.where(plus, -(B + sq)/2, -(B - sq)/2)
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.where(q != 0, q/np.where(A == 0, 1, A), 0.0)
        r2 = np.where(q != 0, C/np.where(q == 0, 1, q), 0.0)
    return r1, r2


def solve_quadratic_track(table: CoefficientTable, ref: ReferenceTable, path,
                          disc_floor=1e-6, cross_tol=1e-6,
                          max_excluded_run=6) -> RootTrack:
    """Select and track the physical root of the quadratic along a path that
    starts in the asymptotic region; the secondary branch is rejected at the
    anchor by distance to the zero-potential reference root, and continuity
    tracking takes over afterwards."""
    path = np.atleast_1d(np.asarray(path, dtype=complex))
    a, b, A, B, C, D = table.evaluate(path)
    scale = np.abs(B)**2 + 4*np.abs(A)*np.abs(C)
    excluded = np.abs(D) < disc_floor*scale
    r1, r2 = _stable_roots(A, B, C, D)
    if excluded[0]:
        raise TrackingError("discriminant below floor at the anchor point; "
                            "start the path deeper in the asymptotic region")
    ref_anchor = ref.root_physical(path[:1])[0]
    took_first = np.zeros(path.shape, dtype=bool)
    m2 = np.full(path.shape, np.nan + 0j, dtype=complex)
    run = 0
    cur = r1[0] if abs(r1[0] - ref_anchor) <= abs(r2[0] - ref_anchor) else r2[0]
    took_first[0] = abs(r1[0] - ref_anchor) <= abs(r2[0] - ref_anchor)
    m2[0] = cur
    for i in range(1, path.shape[0]):
        if excluded[i]:
            run += 1
            if run > max_excluded_run:
                raise TrackingError(
                    f"root collision near lam={path[i]:.6g}: discriminant under "
                    f"floor on {run} consecutive points; detour the path there")
            continue
        run = 0
        take1 = abs(r1[i] - cur) <= abs(r2[i] - cur)
        cur = r1[i] if take1 else r2[i]
        took_first[i] = take1
        m2[i] = cur
    # interpolate the excluded points from tracked neighbors (never extrapolate)
    good = ~np.isnan(m2.real)
    if np.any(~good):
        idx = np.arange(path.shape[0])
        m2[~good] = np.interp(idx[~good], idx[good], m2[good].real) + \
            1j*np.interp(idx[~good], idx[good], m2[good].imag)
    den1 = b[0, 2] + b[0, 3]*m2
    den2 = b[1, 2] + b[1, 3]*m2
    den_scale = np.max(np.abs(np.concatenate([den1, den2])))
    healthy = (np.abs(den1) > 1e-12*den_scale) & (np.abs(den2) > 1e-12*den_scale) & good
    m5a = np.where(np.abs(den1) > 0, -(b[0, 0] + b[0, 1]*m2)/np.where(den1 == 0, 1, den1), 0)
    m5b = np.where(np.abs(den2) > 0, -(b[1, 0] + b[1, 1]*m2)/np.where(den2 == 0, 1, den2), 0)
    cross = np.abs(m5a - m5b)/np.maximum(np.abs(m5a), 1.0)
    cross_max = float(np.max(cross[healthy])) if np.any(healthy) else 0.0
    if cross_max > cross_tol:
        raise TrackingError(
            f"cross-check between the two unknown-ratio eliminations failed "
            f"(max {cross_max:.2e} > {cross_tol:.0e})")
    m5 = np.where(healthy, 0.5*(m5a + m5b), m5a)
    return RootTrack(path, m2, m5, took_first, excluded | ~healthy,
                     disc_floor, cross_max)


# ---------------------------------------------------------------------------
# cutting boundary edges (Weyl transfer across a known edge)
# ---------------------------------------------------------------------------

def cut_boundary_edges(tree: MetricTree, potentials, v: int, weyl: WeylSample,
                       grid=None, den_floor=1e-12, tol=DEFAULT_TOL) -> WeylSample:
    """Weyl ratio of the reduced graph at v, from one boundary Weyl function and
    the known potentials on all boundary edges at v.

    The sample is transferred across its edge by the linear-fractional map in
    the edge's fundamental values and the remaining known Dirichlet branches
    are subtracted through the derivative balance at v.
    """
    deg = tree.degree
    if deg.get(v, 0) <= 1:
        raise TreeStructureError(f"{v} is not an internal vertex")
    vprime = [u for u in (e.other(v) for e in tree.edges_at(v)) if deg[u] == 1]
    if not vprime:
        return weyl
    others = [u for u in (e.other(v) for e in tree.edges_at(v)) if deg[u] > 1]
    if len(others) != 1:
        raise TreeStructureError(
            f"{v} must connect the boundary set to exactly one other vertex")
    k = weyl.vertex
    if k not in vprime:
        raise TreeStructureError(f"the Weyl sample vertex {k} is not boundary at {v}")
    lam = weyl.lam if grid is None else np.atleast_1d(np.asarray(grid, dtype=complex))
    if grid is not None and not np.array_equal(lam, weyl.lam):
        raise ValueError("grid must match the sample grid")
    ek = tree.edges_at(k)[0]
    C, S, Cp, Sp = edge_values(ek.length, potentials.get(ek.id), lam, tol=tol)
    M = weyl.M
    den = C + M*S
    keep = np.abs(den) > den_floor*np.max(np.abs(den))
    m = -(Cp + M*Sp)/np.where(keep, den, 1.0)
    for j in vprime:
        if j == k:
            continue
        ej = tree.edges_at(j)[0]
        Cj, Sj, Cjp, Sjp = edge_values(ej.length, potentials.get(ej.id), lam, tol=tol)
        keep &= np.abs(Sj) > den_floor*np.max(np.abs(Sj))
        m = m - Sjp/np.where(np.abs(Sj) > 0, Sj, 1.0)
    return WeylSample(v, tuple(lam[keep].tolist()), tuple(m[keep].tolist()))


# ---------------------------------------------------------------------------
# potential recovery by Weyl matching
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PotentialBasis:
    """Finite potential family for recovery: pw (default), const, or poly."""

    kind: str = "pw"
    dim: int = 2

    def potential(self, params) -> Potential:
        params = tuple(float(p) for p in params)
        if self.kind == "pw":
            return Potential("pw", params)
        if self.kind == "const":
            return Potential("const", params[:1])
        if self.kind == "poly":
            return Potential("poly", params)
        raise ValueError(f"unknown basis kind {self.kind!r}")


@dataclass
class RecoveredPotential:
    edge_id: int
    params: np.ndarray
    potential: Potential
    residual_history: tuple
    final_mismatch: float


def split_end_ratio_model(edge, tol=DEFAULT_TOL):
    """Weyl ratio of a single dangling edge seen from its far end (Dirichlet at
    the near end): derivative/value of the vanishing-end solution."""

    def model(pot, lam):
        C, S, Cp, Sp = edge_values(edge.length, pot, lam, tol=tol)
        return Sp/S

    return model


def recover_edge_potential(target: WeylSample, edge, basis: PotentialBasis,
                           model=None, x0=None, bounds=3.0, tol=1e-6,
                           raise_on_fail=True, ode_tol=DEFAULT_TOL) -> RecoveredPotential:
    """Least-squares fit of a parametrized potential so that the model Weyl
    ratio matches the target samples (damped Gauss-Newton via trust region,
    finite-difference Jacobians)."""
    if len(target.grid) < 3*basis.dim:
        raise FitError(f"need at least {3*basis.dim} samples, got {len(target.grid)}")
    model = model or split_end_ratio_model(edge, tol=ode_tol)
    lam = target.lam
    data = target.M
    wgt = 1.0/(1.0 + np.abs(data))
    history = []

    def residuals(p):
        vals = model(basis.potential(p), lam)
        r = (vals - data)*wgt
        out = np.concatenate([r.real, r.imag])
        history.append(float(np.linalg.norm(out)))
        return out

    x0 = np.zeros(basis.dim) if x0 is None else np.asarray(x0, dtype=float)
    res = least_squares(residuals, x0, method="trf", bounds=(-bounds, bounds),
                        xtol=1e-15, ftol=1e-15, gtol=1e-15)
    mism = float(np.max(np.abs(res.fun)))
    running = np.minimum.accumulate(history)
    out = RecoveredPotential(edge.id, res.x, basis.potential(res.x),
                             tuple(running.tolist()), mism)
    if raise_on_fail and mism > tol:
        raise FitError(f"optimizer stagnated at weighted mismatch {mism:.3e} "
                       f"(tolerance {tol:.0e}) on edge {edge.id}", residual=mism)
    return out


# ---------------------------------------------------------------------------
# the pipeline
# ---------------------------------------------------------------------------

@dataclass
class InverseOptions:
    truncation: int = 40
    params_per_edge: int = 2
    q_bound: float = 3.0
    grid_rho: tuple = (0.6, 12.0)
    anchor_rho: float = 16.0
    ramp_points: int = 40
    spec_tol: float = 1e-6
    stage_fit_tol: float = 0.9
    cross_tol: float = 1e-6
    disc_floor: float = 1e-6
    pole_floor: float = 1e-8
    polish: bool = True
    integration_tol: float = DEFAULT_TOL


@dataclass
class InverseResult:
    potentials: PotentialSet
    certificate: dict
    stages: dict


def _problem_char_fn(tree, pots, neumann_at=None, tol=DEFAULT_TOL):
    bc = all_dirichlet(tree)
    if neumann_at is not None:
        bc = with_neumann(bc, neumann_at)
    tag = "L0" if neumann_at is None else f"L{neumann_at}"
    return assemble_char_fn(ProblemSpec.of(tree, pots, bc), tag=tag, tol=tol)


def _drho_for(tree):
    return max(0.05, min(0.5, 2.0/tree.total_length))


def _reference_spectrum(tree, neumann_at, n, hint_hi, tol):
    ref_fn = _problem_char_fn(tree, PotentialSet.zero(), neumann_at, tol=tol)
    hi = hint_hi
    for _ in range(6):
        spec = find_eigenvalues(ref_fn, (-0.5, hi), drho=_drho_for(tree),
                                tag=ref_fn.tag)
        if len(spec.flat) >= n:
            return ref_fn, spec
        hi *= 1.4
    raise PairingError(f"could not collect {n} reference eigenvalues", window=(-0.5, hi))


def _growth_fit_boundary_edge(tree, edge, d0_hat, dk_hat, basis, opts):
    """Initialize a boundary-edge potential from the two reconstructed data
    functions: the load-eliminated combination C_e*d0 - S_e*dk keeps the reduced
    exponential type only for the true potential.  Probes sit deep enough on the
    negative axis that bounded candidates stay in the monotone regime."""
    qb = opts.q_bound
    r = np.linspace(np.sqrt(qb) + 1.3, np.sqrt(qb) + 4.0, 14)
    lneg = -(r*r) + 0j
    ref = _problem_char_fn(tree, PotentialSet.zero(), None, tol=opts.integration_tol)
    s0 = np.abs(np.sinh(r*edge.length)/r)
    scale2 = np.abs(ref(lneg))/s0
    scale1 = scale2*r
    d0v, dkv = d0_hat(lneg), dk_hat(lneg)

    def residuals(p):
        C, S, Cp, Sp = edge_values(edge.length, basis.potential(p), lneg,
                                   tol=opts.integration_tol)
        w2 = (C*d0v - S*dkv)/scale2
        w1 = (Sp*dkv - Cp*d0v)/scale1
        return np.concatenate([w2.real, w2.imag, w1.real, w1.imag])

    res = least_squares(residuals, np.zeros(basis.dim), method="trf",
                        bounds=(-qb, qb))
    return res.x


def _part_ratio_model(part, at, unknown_ids, fixed_pots, basis, tol):
    """Model: the part's Weyl ratio at the split copy, as a function of the
    stacked parameters of its unknown edges."""
    outer = _outer_dirichlet(part, at)

    def model(params, lam):
        pots = fixed_pots
        ofs = 0
        for eid in unknown_ids:
            pots = pots.with_edge(eid, basis.potential(params[ofs:ofs + basis.dim]))
            ofs += basis.dim
        fD, fN = subtree_char_pair(part, pots, outer, at, tol=tol)
        return fN(lam)/fD(lam)

    return model


def _fit_part_against_ratio(part, at, track_lam, track_m, fixed_pots, basis,
                            bounds, x0, tol):
    unknown_ids = [e.id for e in part.edges]
    model = _part_ratio_model(part, at, unknown_ids, fixed_pots, basis, tol)
    data = np.asarray(track_m, dtype=complex)
    wgt = 1.0/(1.0 + np.abs(data))

    def residuals(p):
        r = (model(p, track_lam) - data)*wgt
        return np.concatenate([r.real, r.imag])

    res = least_squares(residuals, x0, method="trf", bounds=(-bounds, bounds))
    out = {}
    ofs = 0
    for eid in unknown_ids:
        out[eid] = basis.potential(res.x[ofs:ofs + basis.dim])
        ofs += basis.dim
    return out, float(np.max(np.abs(res.fun)))


def run_partial_inverse(tree: MetricTree, known_edge: int, known_potential: Potential,
                        spectra: dict, opts: InverseOptions = None,
                        basis: PotentialBasis = None) -> InverseResult:
    """Recover the potential on the whole tree from the known potential on one
    edge and the given system of spectra.

    spectra: {"L0": SpectrumSet, "L<k>": SpectrumSet, ...} for every boundary
    vertex k except the two data-free vertices (internal known edge) or except
    the known edge's vertex and the root (boundary known edge).
    """
    opts = opts or InverseOptions()
    basis = basis or PotentialBasis("pw", opts.params_per_edge)
    tol = opts.integration_tol
    if "L0" not in spectra:
        raise PipelineError("input", "spectra must include the all-Dirichlet problem L0")
    have = {int(tag[1:]) for tag in spectra if tag != "L0"}
    boundary = set(tree.boundary_vertices)
    missing = sorted(boundary - have)
    e_f = tree.edge(known_edge)
    deg = tree.degree
    internal_known = deg[e_f.v0] > 1 and deg[e_f.v1] > 1
    n = opts.truncation
    stages = {}

    known_pots = PotentialSet.of({known_edge: known_potential})
    unknown_ids = [e.id for e in tree.edges if e.id != known_edge]

    def reconstruct(tag, neumann_at):
        data = spectra[tag]
        if len(data.flat) < n:
            raise PipelineError("reconstruct",
                                f"spectrum {tag} holds {len(data.flat)} < {n} eigenvalues",
                                cause=PairingError("insufficient spectra", data.window))
        hint_hi = float(data.flat[n - 1])*1.1 + 5.0
        ref_fn, ref_spec = _reference_spectrum(tree, neumann_at, n, hint_hi, tol)
        return reconstruct_char_fn(data, ref_fn, ref_spec, n)

    current = known_pots
    if internal_known:
        if len(missing) != 2:
            raise PipelineError("input",
                                f"expected exactly two data-free boundary vertices, "
                                f"found {missing}")
        decomp = split_edge_environment(tree, known_edge, r1=missing[0], r2=missing[1])
        free = set(decomp.g2.vertices) | set(decomp.g5.vertices)
        if not set(missing) <= free:
            raise PipelineError("input",
                                f"data-free vertices {missing} must lie in the "
                                f"unknown-side parts")
        v1 = min(v for v in decomp.g1.boundary_vertices
                 if v != decomp.near and v in have)
        v4 = min(v for v in decomp.g4.boundary_vertices
                 if v != decomp.far and v in have)
        d0_hat = reconstruct("L0", None)
        d1_hat = reconstruct(f"L{v1}", v1)
        d4_hat = reconstruct(f"L{v4}", v4)
        stages["reconstruct"] = {"truncation": n}

        # step 2: initialize the known-side parts from their boundary data
        for part in (decomp.g1, decomp.g4):
            at = decomp.near if part is decomp.g1 else decomp.far
            for v in part.boundary_vertices:
                if v == at or v not in have:
                    continue
                e = tree.edges_at(v)[0]
                dk_hat = (d1_hat if v == v1 else
                          d4_hat if v == v4 else reconstruct(f"L{v}", v))
                p = _growth_fit_boundary_edge(tree, e, d0_hat, dk_hat, basis, opts)
                current = current.with_edge(e.id, basis.potential(p))
        stages["boundary_init"] = {e.id: current.get(e.id).params
                                   for p_ in (decomp.g1, decomp.g4) for e in p_.edges}

        # steps 3-7: coefficient table from the data, quadratic, tracked roots
        d0_flat = spectra["L0"].flat
        mids = np.sqrt(np.maximum(0.5*(d0_flat[:-1] + d0_flat[1:]), 1e-6))
        lo, hi = opts.grid_rho
        mids = mids[(mids > lo) & (mids < hi)]
        if len(mids) < 3*basis.dim:
            raise PipelineError("tables", "inversion grid too small; extend grid_rho")
        grid = (mids**2).astype(complex)
        table = build_coefficient_table(decomp, current, d0_hat, d1_hat, d4_hat,
                                        grid, v1=v1, v4=v4, tol=tol)
        ref = reference_table(decomp, grid, v1=v1, v4=v4, tol=tol)
        ramp = np.linspace(opts.anchor_rho, mids[-1], opts.ramp_points,
                           endpoint=False)
        path = np.concatenate([(ramp**2).astype(complex), grid[::-1]])
        track = solve_quadratic_track(table, ref, path,
                                      disc_floor=opts.disc_floor,
                                      cross_tol=opts.cross_tol)
        npath = len(path)
        m2 = track.m2[npath - len(mids):][::-1]
        m5 = track.m5[npath - len(mids):][::-1]
        ok = ~track.excluded[npath - len(mids):][::-1]
        stages["track"] = {"excluded": int(np.sum(~ok)), "cross_max": track.cross_max}

        # step 8: fit the unknown-side parts against the tracked ratios
        for part, at, vals in ((decomp.g2, decomp.near, m2),
                               (decomp.g5, decomp.far, m5)):
            x0 = np.zeros(basis.dim*len(part.edges))
            fits, mism = _fit_part_against_ratio(
                part, at, grid[ok], vals[ok], current, basis,
                opts.q_bound, x0, tol)
            for eid, pot in fits.items():
                current = current.with_edge(eid, pot)
            stages.setdefault("unknown_side_fit", {})[at] = mism
    else:
        # boundary known edge: initialize every data boundary edge directly
        if e_f.v0 not in missing:
            raise PipelineError("input",
                                "the known boundary edge's vertex must be data-free")
        d0_hat = reconstruct("L0", None)
        for v in sorted(have):
            e = tree.edges_at(v)[0]
            dk_hat = reconstruct(f"L{v}", v)
            p = _growth_fit_boundary_edge(tree, e, d0_hat, dk_hat, basis, opts)
            current = current.with_edge(e.id, basis.potential(p))
        stages["boundary_init"] = {v: True for v in sorted(have)}

    for eid in unknown_ids:
        if current.get(eid).kind == "zero" and eid != known_edge:
            current = current.with_edge(eid, basis.potential(np.zeros(basis.dim)))

    # polish: joint damped Gauss-Newton on the forward eigenvalues
    targets = {tag: spectra[tag].truncated(n) for tag in spectra}
    order = sorted(targets)

    def pots_of(x):
        pots = known_pots
        ofs = 0
        for eid in unknown_ids:
            pots = pots.with_edge(eid, basis.potential(x[ofs:ofs + basis.dim]))
            ofs += basis.dim
        return pots

    def forward_residual(x):
        pots = pots_of(x)
        out = []
        for tag in order:
            kvert = None if tag == "L0" else int(tag[1:])
            fn = _problem_char_fn(tree, pots, kvert, tol=tol)
            e = eigenvalues_near(fn, targets[tag])
            out.append(e - targets[tag])
        return np.concatenate(out)

    x_stage = np.concatenate([np.asarray(current.get(eid).params)[:basis.dim]
                              if len(current.get(eid).params) >= basis.dim
                              else np.zeros(basis.dim)
                              for eid in unknown_ids])
    x_stage = np.clip(x_stage, -opts.q_bound, opts.q_bound)
    if opts.polish:
        r0 = np.linalg.norm(forward_residual(x_stage))
        rz = np.linalg.norm(forward_residual(np.zeros_like(x_stage)))
        x0 = x_stage if r0 <= rz else np.zeros_like(x_stage)
        res = least_squares(forward_residual, x0, method="trf",
                            bounds=(-opts.q_bound - 1, opts.q_bound + 1),
                            xtol=3e-16, ftol=3e-16, gtol=3e-16, diff_step=1e-6)
        final = pots_of(res.x)
        stages["polish"] = {"max_residual": float(np.max(np.abs(res.fun))),
                            "init": "stage" if r0 <= rz else "zero"}
    else:
        final = pots_of(x_stage)

    # certificate: certified forward spectra against the inputs
    certificate = {"tolerance": opts.spec_tol, "problems": {}}
    worst = 0.0
    for tag in order:
        kvert = None if tag == "L0" else int(tag[1:])
        fn = _problem_char_fn(tree, final, kvert, tol=tol)
        window_hi = float(targets[tag][-1])*1.05 + 2.0
        spec = find_eigenvalues(fn, (-opts.q_bound - 1.5, window_hi),
                                drho=_drho_for(tree), tag=tag)
        got = spec.flat[:len(targets[tag])]
        if len(got) < len(targets[tag]):
            mism = np.inf
        else:
            mism = float(np.max(np.abs(got - targets[tag])))
        certificate["problems"][tag] = mism
        worst = max(worst, mism)
    certificate["max_mismatch"] = worst
    certificate["passed"] = bool(worst <= opts.spec_tol)
    result = InverseResult(final, certificate, stages)
    if not certificate["passed"]:
        err = PipelineError("certificate",
                            f"forward spectra mismatch {worst:.3e} exceeds "
                            f"{opts.spec_tol:.0e}")
        err.result = result
        raise err
    return result
