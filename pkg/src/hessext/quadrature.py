"""Composite Gauss-Legendre rules for the smooth one-dimensional integrals
that appear in the instanton computations.

Integrands are vectorised callables ``f(r) -> ndarray``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _legendre(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_panels(f, edges, order: int = 24) -> float:
    """Sum of Gauss-Legendre rules over consecutive ``edges``."""
    edges = np.asarray(edges, dtype=float)
    x, w = _legendre(order)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    pts = (a + b) * 0.5 + half * x[None, :]
    vals = f(pts.ravel()).reshape(pts.shape)
    return float(np.sum(half * w[None, :] * vals))


def log_rule(a: float, b: float, per_decade: int = 3, order: int = 24, breaks=()) -> tuple:
    """Nodes and weights of a composite Gauss-Legendre rule on ``[a, b]``
    with panels uniform in ``log r``; ``breaks`` inside ``(a, b)`` become
    panel edges."""
    la, lb = np.log(a), np.log(b)
    m = max(1, int(np.ceil((lb - la) / np.log(10.0) * per_decade)))
    u = np.linspace(la, lb, m + 1)
    extra = [np.log(c) for c in breaks if a < c < b]
    u = np.unique(np.concatenate((u, extra)))
    x, w = _legendre(order)
    lo, hi = u[:-1, None], u[1:, None]
    half = 0.5 * (hi - lo)
    s = (lo + hi) * 0.5 + half * x[None, :]
    r = np.exp(s)
    return r.ravel(), (half * w[None, :] * r).ravel()


def integrate_log(f, a: float, b: float, per_decade: int = 3, order: int = 24,
                  breaks=()) -> float:
    """``int_a^b f(r) dr`` for ``0 < a < b`` with panels uniform in ``log r``.

    Extra ``breaks`` inside ``(a, b)`` become panel edges.
    """
    if b <= a:
        return 0.0
    r, w = log_rule(a, b, per_decade, order, breaks)
    return float(np.dot(w, f(r)))


def integrate_to_infinity(f, a: float, panels: int = 160, order: int = 24) -> float:
    """``int_a^inf f(r) dr`` for ``a > 0`` through ``r = a / u``.

    Panels in ``u`` are geometric towards ``u = 0`` so algebraic tails with
    non-integer exponents keep full accuracy.
    """
    def g(u):
        return f(a / u) * a / (u * u)

    edges = np.concatenate(([0.0], np.geomspace(1e-40, 1.0, panels)))
    return gauss_panels(g, edges, order)


def integrate_halfline(f, scale: float = 1.0, panels: int = 16, order: int = 24) -> float:
    """``int_0^inf f(r) dr`` split at ``scale``: uniform panels on
    ``[0, scale]`` and the reciprocal map beyond."""
    head = gauss_panels(f, np.linspace(0.0, scale, panels + 1), order)
    return head + integrate_to_infinity(f, scale, order=order)
