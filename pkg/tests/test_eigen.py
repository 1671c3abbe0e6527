import numpy as np
import pytest
from scipy.optimize import brentq

from sltree import (PotentialSet, ProblemSpec, all_dirichlet, assemble_char_fn,
                    find_eigenvalues)
from sltree import benchmark as bm
from sltree.io import spectra_from_csv, spectra_to_csv


def test_single_edge_eigenvalues():
    t = bm.single_edge_tree()
    cf = assemble_char_fn(ProblemSpec.of(t, PotentialSet.zero(), all_dirichlet(t)))
    spec = find_eigenvalues(cf, (0.5, 110.0))
    want = np.array([(n*np.pi)**2 for n in (1, 2, 3)])
    np.testing.assert_allclose(spec.flat, want, atol=1e-9)
    assert all(m == 1 for _, m in spec.pairs)


def test_three_star_multiplicities():
    # zeros of sin^2 * cos: doubles at (n*pi)^2, simples at ((n+1/2)*pi)^2
    t = bm.three_star_tree()
    cf = assemble_char_fn(ProblemSpec.of(t, PotentialSet.zero(), all_dirichlet(t)))
    spec = find_eigenvalues(cf, (0.5, 48.0))
    want = [((np.pi/2)**2, 1), (np.pi**2, 2), ((3*np.pi/2)**2, 1), ((2*np.pi)**2, 2)]
    assert len(spec.pairs) == len(want)
    for (lam, mult), (wl, wm) in zip(spec.pairs, want):
        assert lam == pytest.approx(wl, abs=1e-7)
        assert mult == wm


def _scan_zero_oracle(f, lo, hi, n=60_000):
    """Independent oracle: dense scan + bisection for sign-change zeros."""
    xs = np.linspace(lo, hi, n)
    vals = f(xs)
    out = []
    for i in range(n - 1):
        if vals[i] == 0.0:
            out.append(xs[i])
        elif vals[i]*vals[i + 1] < 0:
            out.append(brentq(f, xs[i], xs[i + 1], xtol=1e-13))
    return np.array(out)


def test_five_edge_zero_potential_vs_trig_oracle(five_edge):
    cf = assemble_char_fn(ProblemSpec.of(five_edge, PotentialSet.zero(),
                                         all_dirichlet(five_edge)))
    spec = find_eigenvalues(cf, (0.05, 100.0))

    def trig(rho):
        return -9*np.sin(5*rho) + 13*np.sin(3*rho) + 6*np.sin(rho)

    simple = _scan_zero_oracle(trig, 0.22, 10.0)
    # the scan sees sign changes only; rho = n*pi are triple zeros of the
    # polynomial (value, first and second derivative vanish there)
    for n in (1, 2, 3):
        r = n*np.pi
        assert abs(trig(r)) < 1e-9
        d1 = (trig(r + 1e-6) - trig(r - 1e-6))/2e-6
        d2 = trig(r + 1e-5) - 2*trig(r) + trig(r - 1e-5)
        assert abs(d1) < 1e-4 and abs(d2) < 1e-4
    # odd multiplicity means the scan also reports a sign change at n*pi;
    # replace those hits by the analytically confirmed triples
    simple = simple[np.min(np.abs(simple[:, None] - np.pi*np.arange(1, 4)[None, :]),
                           axis=1) > 1e-4]
    expected = sorted(list(simple**2) + [(n*np.pi)**2 for n in (1, 2, 3)]*3)
    expected = [x for x in expected if 0.05 <= x <= 100.0]
    got = spec.flat
    assert len(got) == len(expected)
    np.testing.assert_allclose(got, expected, atol=2e-6)
    # triple multiplicity recorded
    triples = [m for lam, m in spec.pairs if abs(lam - np.pi**2) < 1e-6]
    assert triples == [3]


def test_count_against_reference(five_edge):
    pots = PotentialSet.of({1: {"kind": "const", "value": 0.4},
                            4: {"kind": "const", "value": -0.3}})
    spec_p = ProblemSpec.of(five_edge, pots, all_dirichlet(five_edge))
    cf = assemble_char_fn(spec_p)
    ref = assemble_char_fn(ProblemSpec.of(five_edge, PotentialSet.zero(),
                                          all_dirichlet(five_edge)))
    s = find_eigenvalues(cf, (0.05, 60.0), count_hint=10, reference=ref)
    assert s.reference_count >= 0
    assert abs(len(s.flat) - s.reference_count) <= 2


def test_spectra_csv_round_trip(tmp_path, five_edge):
    cf = assemble_char_fn(ProblemSpec.of(five_edge, PotentialSet.zero(),
                                         all_dirichlet(five_edge)))
    spec = find_eigenvalues(cf, (0.05, 40.0), tag="L0")
    path = tmp_path/"spectra.csv"
    spectra_to_csv(path, spec)
    back = spectra_from_csv(path)["L0"]
    np.testing.assert_allclose(back.flat, spec.flat, rtol=1e-15)
