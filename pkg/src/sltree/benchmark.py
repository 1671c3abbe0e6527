"""Bundled five-edge benchmark tree and its zero-potential closed forms.

The tree: two internal vertices joined by an internal edge, two boundary edges
hanging off each internal vertex, all lengths 1.  With zero potential everything
below evaluates in closed form (verified symbolically); these are the golden
values for the forward pipeline and the coefficient tables.
"""
from __future__ import annotations

import numpy as np

from .graph import Edge, MetricTree
from .potentials import PotentialSet


def five_edge_tree(T=1.0) -> MetricTree:
    edges = (Edge(1, 1, 3, T), Edge(2, 2, 3, T), Edge(3, 3, 6, T),
             Edge(4, 4, 6, T), Edge(5, 5, 6, T))
    return MetricTree(edges, root=2)


def three_star_tree(T=(1.0, 1.0, 1.0)) -> MetricTree:
    edges = tuple(Edge(i + 1, i + 1, 4, T[i]) for i in range(3))
    return MetricTree(edges, root=1)


def single_edge_tree(T=1.0) -> MetricTree:
    return MetricTree((Edge(1, 1, 2, T),), root=1)


def zero_potentials() -> PotentialSet:
    return PotentialSet.zero()


# ---------------------------------------------------------------------------
# closed forms for the five-edge tree with zero potential, unit lengths
# (functions of rho; lam = rho^2)
# ---------------------------------------------------------------------------

def delta0(rho):
    rho = np.asarray(rho, dtype=float)
    return (-9*np.sin(5*rho) + 13*np.sin(3*rho) + 6*np.sin(rho))/(16*rho**3)


def delta1(rho):
    rho = np.asarray(rho, dtype=float)
    return (-9*np.cos(5*rho) + 7*np.cos(3*rho) + 2*np.cos(rho))/(16*rho**2)


def a_table(rho):
    """3x4 coefficient table of the product system."""
    rho = np.asarray(rho, dtype=float)
    s, c = np.sin(rho), np.cos(rho)
    s2, c2 = np.sin(2*rho), np.cos(2*rho)
    s3, c3 = np.sin(3*rho), np.cos(3*rho)
    return np.array([
        [s3/rho, s2*s/rho**2, s2*s/rho**2, s**3/rho**3],
        [c3, s2*c/rho, c2*s/rho, c*s**2/rho**2],
        [c3, c2*s/rho, s2*c/rho, c*s**2/rho**2],
    ])


def b_table(rho):
    """2x4 table obtained by eliminating the data column."""
    rho = np.asarray(rho, dtype=float)
    b11 = (-3*np.sin(6*rho) - 2*np.sin(4*rho) + 13*np.sin(2*rho))/(16*rho**3)
    b12 = (-3*np.cos(6*rho) + 6*np.cos(4*rho) + 3*np.cos(2*rho) - 6)/(16*rho**4)
    b13 = (3*np.cos(6*rho) - 10*np.cos(4*rho) + 13*np.cos(2*rho) - 6)/(32*rho**4)
    b14 = (-3*np.sin(6*rho) + 12*np.sin(4*rho) - 15*np.sin(2*rho))/(32*rho**5)
    return np.array([[b11, b12, b13, b14], [b11, b13, b12, b14]])


def quad_A(rho):
    rho = np.asarray(rho, dtype=float)
    return (27*np.sin(12*rho) - 174*np.sin(10*rho) + 420*np.sin(8*rho)
            - 378*np.sin(6*rho) - 153*np.sin(4*rho) + 468*np.sin(2*rho))/(2048*rho**9)


def quad_B(rho):
    rho = np.asarray(rho, dtype=float)
    return (27*np.cos(12*rho) - 84*np.cos(10*rho) - 106*np.cos(8*rho) + 764*np.cos(6*rho)
            - 1099*np.cos(4*rho) + 344*np.cos(2*rho) + 154)/(2048*rho**8)


def quad_C(rho):
    rho = np.asarray(rho, dtype=float)
    return (27*np.sin(12*rho) - 48*np.sin(10*rho) - 140*np.sin(8*rho) + 336*np.sin(6*rho)
            + 71*np.sin(4*rho) - 512*np.sin(2*rho))/(1024*rho**7)


def quad_D(rho):
    rho = np.asarray(rho, dtype=float)
    return (6561*np.cos(24*rho) - 52488*np.cos(22*rho) + 128628*np.cos(20*rho)
            + 83592*np.cos(18*rho) - 987134*np.cos(16*rho) + 1543976*np.cos(14*rho)
            + 702372*np.cos(12*rho) - 4646312*np.cos(10*rho) + 3755087*np.cos(8*rho)
            + 3053616*np.cos(6*rho) - 4805144*np.cos(4*rho) - 4176688*np.cos(2*rho)
            + 5393934)/(8388608*rho**16)


def root_main(rho):
    """The physical branch of the zero-potential quadratic: rho*cos/sin."""
    rho = np.asarray(rho, dtype=float)
    return rho*np.cos(rho)/np.sin(rho)


def root_secondary(rho):
    """The other branch (exact for zero potential)."""
    rho = np.asarray(rho, dtype=float)
    return -rho*(1 + 6*np.cos(rho)**2)/(3*np.sin(rho)*np.cos(rho))
