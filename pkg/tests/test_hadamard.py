import numpy as np
import pytest

from sltree import (PairingError, Potential, PotentialSet, ProblemSpec,
                    all_dirichlet, assemble_char_fn, find_eigenvalues,
                    reconstruct_char_fn)
from sltree import benchmark as bm


def _problem(tree, pots):
    return assemble_char_fn(ProblemSpec.of(tree, pots, all_dirichlet(tree)))


def test_identical_spectra_reproduce_reference_bitwise(lam_grid):
    t = bm.single_edge_tree()
    ref = _problem(t, PotentialSet.zero())
    spec = find_eigenvalues(ref, (0.5, 1700.0), tag="L0")
    rec = reconstruct_char_fn(spec, ref, spec, 12)
    np.testing.assert_array_equal(rec(lam_grid), ref(lam_grid))


def test_single_edge_const_convergence():
    t = bm.single_edge_tree()
    pots = PotentialSet.of({1: Potential("const", (1.0,))})
    direct = _problem(t, pots)
    ref = _problem(t, PotentialSet.zero())
    hi = (41.5*np.pi)**2
    spec = find_eigenvalues(direct, (0.0, hi), tag="L0")
    ref_spec = find_eigenvalues(ref, (0.5, hi), tag="L0")
    rho = np.linspace(1.0, 5.0, 141)
    lam = (rho**2).astype(complex)
    want = direct(lam)
    errs = []
    for n in (10, 20, 40):
        rec = reconstruct_char_fn(spec, ref, ref_spec, n)
        errs.append(np.max(np.abs(rec(lam) - want))/np.max(np.abs(want)))
    assert errs[1] <= 1.1*errs[0]
    assert errs[2] <= 1.1*errs[1]
    assert errs[2] <= 1e-2


def test_five_edge_bump_reconstruction(five_edge):
    # bump-like perturbation on the first edge (piecewise profile, exact paths)
    bump = Potential("pw", (0.02, 0.18, 0.5, 0.5, 0.18, 0.02))
    pots = PotentialSet.of({1: bump})
    direct = _problem(five_edge, pots)
    ref = _problem(five_edge, PotentialSet.zero())
    hi = 1.12*(53*np.pi/5)**2
    spec = find_eigenvalues(direct, (0.0, hi), tag="L0")
    ref_spec = find_eigenvalues(ref, (0.5, hi), tag="L0")
    rec = reconstruct_char_fn(spec, ref, ref_spec, 50)
    rho = np.linspace(0.5, 4.0, 101)
    lam = (rho**2).astype(complex)
    want = direct(lam)
    err = np.max(np.abs(rec(lam) - want))/np.max(np.abs(want))
    assert err <= 1e-3


def test_doubling_is_monotone_with_slack(five_edge):
    pots = PotentialSet.of({2: Potential("const", (0.6,)),
                            5: Potential("pw", (0.1, -0.3))})
    direct = _problem(five_edge, pots)
    ref = _problem(five_edge, PotentialSet.zero())
    hi = 1.12*(45*np.pi/5)**2
    spec = find_eigenvalues(direct, (-1.0, hi), tag="L0")
    ref_spec = find_eigenvalues(ref, (0.5, hi), tag="L0")
    rho = np.linspace(0.6, 3.5, 80)
    lam = (rho**2).astype(complex)
    want = direct(lam)
    errs = [np.max(np.abs(reconstruct_char_fn(spec, ref, ref_spec, n)(lam) - want))
            for n in (10, 20, 40)]
    assert errs[1] <= 1.1*errs[0]
    assert errs[2] <= 1.1*errs[1]


def test_real_on_real_axis(five_edge):
    pots = PotentialSet.of({3: Potential("const", (0.5,))})
    direct = _problem(five_edge, pots)
    ref = _problem(five_edge, PotentialSet.zero())
    hi = 1.2*(25*np.pi/5)**2
    spec = find_eigenvalues(direct, (-1.0, hi), tag="L0")
    ref_spec = find_eigenvalues(ref, (0.5, hi), tag="L0")
    rec = reconstruct_char_fn(spec, ref, ref_spec, 20)
    lam = np.linspace(1.0, 9.0, 17).astype(complex)
    assert np.max(np.abs(rec(lam).imag)) < 1e-12


def test_pairing_count_mismatch_raises(five_edge):
    ref = _problem(five_edge, PotentialSet.zero())
    spec = find_eigenvalues(ref, (0.5, 30.0), tag="L0")
    with pytest.raises(PairingError) as err:
        reconstruct_char_fn(spec, ref, spec, len(spec.flat) + 5)
    assert err.value.window is not None
