"""Characteristic-function reconstruction from finite spectra.

The infinite-product representation is used in ratio form against the
zero-potential reference of the same problem: the unknown multiplicative
constant and the convergence factors cancel because both functions share their
leading asymptotics, leaving a finite product of eigenvalue ratios.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PairingError
from .charfn import CharFn, SpectrumSet


@dataclass(frozen=True)
class TruncatedProduct:
    reference: CharFn
    paired_zeros: tuple   # ((lam_n, lam_n_ref), ...) ascending, multiplicity expanded
    truncation: int

    def __call__(self, lam):
        scalar = np.isscalar(lam) or getattr(lam, "ndim", 1) == 0
        z = np.atleast_1d(np.asarray(lam, dtype=complex))
        out = np.asarray(self.reference(z), dtype=complex).copy()
        for a, b in self.paired_zeros:
            if a == b:
                continue
            out *= (a - z)/(b - z)
        return complex(out[0]) if scalar else out

    @property
    def excluded_points(self):
        """Reference zeros: simple poles of individual factors; keep grids away."""
        return tuple(b for _, b in self.paired_zeros)


def reconstruct_char_fn(spectrum: SpectrumSet, zero_potential_ref: CharFn,
                        ref_spectrum: SpectrumSet, truncation: int) -> TruncatedProduct:
    """Ratio-form reconstruction from the leading `truncation` eigenvalues.

    Pairing is order-preserving: both zero lists ascending (multiplicities
    expanded), paired by index.  A count shortfall inside the search window is
    surfaced, never patched.
    """
    zt = spectrum.flat
    zr = ref_spectrum.flat
    if len(zt) < truncation or len(zr) < truncation:
        raise PairingError(
            f"need {truncation} eigenvalues, got {len(zt)} (data) and "
            f"{len(zr)} (reference) in window", window=spectrum.window)
    pairs = tuple((float(a), float(b)) for a, b in zip(zt[:truncation], zr[:truncation]))
    return TruncatedProduct(zero_potential_ref, pairs, truncation)
