"""CSV interchange for spectra and Weyl samples.

Spectra: header `problem,lambda,multiplicity`, one row per distinct eigenvalue.
Weyl samples: header `vertex,re_lambda,im_lambda,re_M,im_M`.
Values are written with 17 significant digits (round-trip safe for doubles).
"""
from __future__ import annotations

import csv

from .charfn import SpectrumSet, WeylSample

FMT = "%.17g"


def spectra_to_csv(path, spectra):
    """Write one or more SpectrumSet objects to a CSV file."""
    if isinstance(spectra, SpectrumSet):
        spectra = [spectra]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["problem", "lambda", "multiplicity"])
        for s in spectra:
            for lam, mult in s.pairs:
                w.writerow([s.problem, FMT % lam, mult])


def spectra_from_csv(path):
    """Read a spectra CSV; returns {problem tag: SpectrumSet}."""
    groups = {}
    with open(path, newline="") as fh:
        r = csv.DictReader(fh)
        for row in r:
            groups.setdefault(row["problem"], []).append(
                (float(row["lambda"]), int(row["multiplicity"])))
    out = {}
    for tag, pairs in groups.items():
        pairs.sort()
        lo = min(l for l, _ in pairs)
        hi = max(l for l, _ in pairs)
        out[tag] = SpectrumSet(tag, tuple(pairs), (lo, hi))
    return out


def weyl_to_csv(path, sample: WeylSample):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["vertex", "re_lambda", "im_lambda", "re_M", "im_M"])
        for lam, m in zip(sample.grid, sample.values):
            lam = complex(lam)
            m = complex(m)
            w.writerow([sample.vertex, FMT % lam.real, FMT % lam.imag,
                        FMT % m.real, FMT % m.imag])


def weyl_from_csv(path) -> WeylSample:
    grid, values, vertex = [], [], None
    with open(path, newline="") as fh:
        r = csv.DictReader(fh)
        for row in r:
            vertex = int(row["vertex"])
            grid.append(complex(float(row["re_lambda"]), float(row["im_lambda"])))
            values.append(complex(float(row["re_M"]), float(row["im_M"])))
    if vertex is None:
        raise ValueError(f"no rows in {path}")
    return WeylSample(vertex, tuple(grid), tuple(values))
