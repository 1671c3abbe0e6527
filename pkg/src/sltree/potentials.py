"""Edge potentials: closed-form families plus sampled grids.

A potential lives on one edge, parametrized by x in [0, T].  Closed-form kinds
(zero, const, pw) admit exact propagation of the fundamental solutions; poly and
grid kinds are integrated numerically.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


VALID_KINDS = ("zero", "const", "poly", "grid", "pw")


@dataclass(frozen=True)
class Potential:
    """Potential q on a single edge.

    kind/params:
      zero   -- ()
      const  -- (c,)
      poly   -- ascending coefficients (c0, c1, ...): q(x) = sum c_k x^k
      pw     -- values on len(params) uniform pieces of [0, T]
      grid   -- uniform samples at x = k*T/(n-1), k = 0..n-1; `order` is the
                interpolation order (0 or 1)
    """

    kind: str = "zero"
    params: tuple = ()
    order: int = 1

    def __post_init__(self):
        if self.kind not in VALID_KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.kind == "grid" and len(self.params) < 2:
            raise ValueError("grid potential needs at least 2 samples")
        if self.kind == "pw" and len(self.params) < 1:
            raise ValueError("pw potential needs at least 1 piece")
        if self.kind == "const" and len(self.params) != 1:
            raise ValueError("const potential takes exactly 1 parameter")
        if self.kind == "grid" and self.order not in (0, 1):
            raise ValueError("grid interpolation order must be 0 or 1")

    @property
    def closed_form(self):
        return self.kind in ("zero", "const", "pw")

    def __call__(self, x, length):
        """Evaluate q at x (scalar or array), for an edge of the given length."""
        x = np.asarray(x, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(x)
        if self.kind == "const":
            return np.full_like(x, self.params[0])
        if self.kind == "poly":
            return np.polyval(self.params[::-1], x)
        if self.kind == "pw":
            k = len(self.params)
            idx = np.minimum((x/length*k).astype(int), k - 1)
            return np.asarray(self.params)[idx]
        # grid
        xs = np.linspace(0.0, length, len(self.params))
        if self.order == 0:
            idx = np.minimum((x/length*(len(self.params) - 1) + 0.5).astype(int),
                             len(self.params) - 1)
            return np.asarray(self.params)[idx]
        return np.interp(x, xs, self.params)

    def bound(self, length):
        """Crude sup-norm bound of |q| on [0, length]."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "poly":
            xs = np.linspace(0.0, length, 64)
            return float(np.max(np.abs(self(xs, length))))
        return float(np.max(np.abs(self.params)))

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == "const":
            d["value"] = self.params[0]
        elif self.kind == "poly":
            d["coeffs"] = list(self.params)
        elif self.kind == "pw":
            d["values"] = list(self.params)
        elif self.kind == "grid":
            d["samples"] = list(self.params)
            d["order"] = self.order
        return d

    @classmethod
    def from_dict(cls, d):
        kind = d.get("kind", "zero")
        if kind == "zero":
            return cls("zero")
        if kind == "const":
            return cls("const", (d["value"],))
        if kind == "poly":
            return cls("poly", tuple(d["coeffs"]))
        if kind == "pw":
            return cls("pw", tuple(d["values"]))
        if kind == "grid":
            return cls("grid", tuple(d["samples"]), order=int(d.get("order", 1)))
        raise ValueError(f"unknown potential kind {kind!r}")


ZERO = Potential("zero")


@dataclass(frozen=True)
class PotentialSet:
    """Immutable mapping edge id -> Potential; missing edges default to zero."""

    by_edge: tuple = field(default_factory=tuple)   # tuple of (edge_id, Potential)

    @classmethod
    def of(cls, mapping):
        items = tuple(sorted((int(k), v if isinstance(v, Potential) else Potential.from_dict(v))
                             for k, v in mapping.items()))
        return cls(items)

    @classmethod
    def zero(cls):
        return cls(())

    def get(self, edge_id):
        for k, v in self.by_edge:
            if k == edge_id:
                return v
        return ZERO

    def with_edge(self, edge_id, pot):
        d = dict(self.by_edge)
        d[int(edge_id)] = pot
        return PotentialSet.of(d)

    def bound(self, tree):
        return max((self.get(e.id).bound(e.length) for e in tree.edges), default=0.0)

    def to_dict(self):
        return {str(k): v.to_dict() for k, v in self.by_edge}

    @classmethod
    def from_dict(cls, d):
        return cls.of({int(k): Potential.from_dict(v) for k, v in d.items()})
