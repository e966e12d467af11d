"""Composite Gauss-Legendre rules on explicit panel partitions."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=16)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_rule(edges: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of an ``n``-point rule on every panel ``[edges[k], edges[k+1]]``."""
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(n)
    mid = (edges[1:] + edges[:-1]) / 2
    half = (edges[1:] - edges[:-1]) / 2
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def merge_edges(points: np.ndarray, lo: float = 0.0, hi: float = 1.0, tol: float = 1e-15) -> np.ndarray:
    """Sorted partition of ``[lo, hi]`` through ``points`` with near-duplicates removed."""
    p = np.concatenate([[lo, hi], np.asarray(points, dtype=float).ravel()])
    p = np.unique(p[(p >= lo) & (p <= hi)])
    keep = np.concatenate([[True], np.diff(p) > tol * max(1.0, hi - lo)])
    p = p[keep]
    p[-1] = hi
    return p


def cumulative(f, edges: np.ndarray, targets: np.ndarray, n: int) -> np.ndarray:
    """``int_{edges[0]}^{t} f`` for every ``t`` in ``targets`` (inside the partition range).

    The partition is refined by the targets so each target sits on a panel edge.
    """
    targets = np.asarray(targets, dtype=float)
    lo, hi = float(edges[0]), float(edges[-1])
    fine = np.unique(np.concatenate([edges, np.clip(targets.ravel(), lo, hi)]))
    nodes, weights = panel_rule(fine, n)
    vals = (f(nodes) * weights).reshape(-1, n).sum(axis=1)
    running = np.concatenate([[0.0], np.cumsum(vals)])
    idx = np.searchsorted(fine, np.clip(targets, lo, hi))
    return running[idx]
