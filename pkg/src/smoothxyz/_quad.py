"""Composite Gauss-Legendre rules shared by the quadrature-backed modules."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def _gl(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def composite_gl(breaks, panels, order: int = 10):
    """Nodes and weights on [breaks[0], breaks[-1]].

    Each interval between consecutive breakpoints is split into `panels`
    equal pieces (an int, or one int per interval) carrying an order-point
    Gauss-Legendre rule.
    """
    breaks = np.asarray(sorted(set(float(b) for b in breaks)))
    if np.isscalar(panels):
        panels = [int(panels)] * (len(breaks) - 1)
    x0, w0 = _gl(order)
    xs, ws = [], []
    for (lo, hi), n in zip(zip(breaks[:-1], breaks[1:]), panels):
        edges = np.linspace(lo, hi, max(1, int(n)) + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[:-1] + edges[1:])
        xs.append((mid[:, None] + half[:, None] * x0[None, :]).ravel())
        ws.append((half[:, None] * w0[None, :]).ravel())
    return np.concatenate(xs), np.concatenate(ws)
