"""Shooting solver for the radial supercritical k-Hessian problem

    C(N,k) (r^(N-k) (w')^k)' = N r^(N-1) (-w)^(k*+r^alpha-1),   w(1) = 0,

written for ``v = -w >= 0`` in integrated form

    (-v')^k = tau r^(k-N) int_0^r s^(N-1) (v^+)^(k*+s^alpha-1) ds.

The pair ``(v, J)`` with ``J`` the cumulative integral is marched outward
with classical RK4 on the graded grid; ``v(0)`` is fixed by bisection on
the sign of ``v(1)``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import BracketError, DomainError, InvalidInputError, NumericalDegeneracyError
from .radial_core import Params, RadialFunction, RadialGrid, abs_pow, exponent

log = logging.getLogger(__name__)

__all__ = [
    "OutwardProfile",
    "ShootResult",
    "integrate_outward",
    "find_bracket",
    "shoot",
    "shoot_all",
    "k_admissibility_check",
    "admissibility_margins",
    "integral_residual",
    "hessian_residual",
    "energy_identity_defect",
]


@dataclass
class OutwardProfile:
    """Initial-value solution on the whole grid.

    Past a zero crossing the march continues with ``v^+ = 0`` in the source
    term, so ``v`` keeps decreasing linearly in the flux; ``end_value`` is
    the shooting function ``v(1)``.
    """

    grid: RadialGrid
    a0: float
    values: np.ndarray
    derivative: np.ndarray
    crossing: Optional[float]
    flux: np.ndarray = field(repr=False)

    @property
    def end_value(self) -> float:
        return float(self.values[-1])

    def profile(self) -> RadialFunction:
        return RadialFunction(self.grid, self.values, self.derivative, x1=False)

    def truncated(self) -> tuple:
        """``(r, v)`` up to the zero crossing (the whole grid without one)."""
        r = self.grid.nodes
        if self.crossing is None:
            return r.copy(), self.values.copy()
        keep = r < self.crossing
        return (np.concatenate((r[keep], [self.crossing])),
                np.concatenate((self.values[keep], [0.0])))


@dataclass
class ShootResult:
    v: RadialFunction
    a0: float
    residual: float
    admissible_j: list
    boundary_defect: float
    strong_residual: float
    bisection_steps: int
    bracket: tuple

    @property
    def converged(self) -> bool:
        return self.boundary_defect < 1e-8

    def summary(self) -> dict:
        return {"a0": self.a0, "residual": self.residual, "strong_residual": self.strong_residual,
                "boundary_defect": self.boundary_defect, "admissible_j": list(self.admissible_j),
                "bisection_steps": self.bisection_steps, "bracket": list(self.bracket),
                "converged": self.converged}


def _slope_coefficient(a0: float, p: Params) -> float:
    """``lim -v'(r)/r = (tau a0^(k*-1) / N)^(1/k)``."""
    return (p.tau * a0 ** (p.kstar - 1) / p.N) ** (1.0 / p.k)


def integrate_outward(a0: float, p: Params, grid: Optional[RadialGrid] = None) -> OutwardProfile:
    """March ``(v, J)`` from ``v(0) = a0`` to ``r = 1``."""
    if not a0 > 0 or not math.isfinite(a0):
        raise DomainError(f"a0 must be positive and finite (got {a0})")
    grid = RadialGrid() if grid is None else grid
    N, k, tau, kstar, alpha = p.N, p.k, p.tau, p.kstar, p.alpha
    inv_k = 1.0 / k

    def rhs(r, v, J):
        if v > 0:
            e = kstar - 1 + (r ** alpha if alpha > 0 else 0.0)
            src = r ** (N - 1) * math.exp(e * math.log(v))
        else:
            src = 0.0
        dv = -(tau * max(J, 0.0) / r ** (N - k)) ** inv_k
        return dv, src

    r = grid.nodes
    n = r.size
    vals = np.empty(n)
    J = np.empty(n)
    vals[0], J[0] = a0, 0.0
    # series start across the first element, away from the 0/0 at r = 0
    c = _slope_coefficient(a0, p)
    r1 = r[1]
    vals[1] = a0 - 0.5 * c * r1 * r1
    J[1] = a0 ** (kstar - 1) * r1 ** N / N
    for i in range(1, n - 1):
        h = r[i + 1] - r[i]
        ri, vi, Ji = r[i], vals[i], J[i]
        k1v, k1J = rhs(ri, vi, Ji)
        k2v, k2J = rhs(ri + 0.5 * h, vi + 0.5 * h * k1v, Ji + 0.5 * h * k1J)
        k3v, k3J = rhs(ri + 0.5 * h, vi + 0.5 * h * k2v, Ji + 0.5 * h * k2J)
        k4v, k4J = rhs(ri + h, vi + h * k3v, Ji + h * k3J)
        vals[i + 1] = vi + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        J[i + 1] = Ji + h / 6.0 * (k1J + 2 * k2J + 2 * k3J + k4J)
    dv = np.zeros(n)
    dv[1:] = -(tau * np.maximum(J[1:], 0.0) / r[1:] ** (N - k)) ** inv_k
    crossing = None
    neg = np.nonzero(vals <= 0)[0]
    if neg.size:
        j = int(neg[0])
        # linear interpolation between the last positive node and the first nonpositive one
        crossing = float(r[j - 1] + (r[j] - r[j - 1]) * vals[j - 1] / (vals[j - 1] - vals[j]))
    return OutwardProfile(grid, float(a0), vals, dv, crossing, tau * J)


def find_bracket(p: Params, grid: RadialGrid, a_lo: float = 0.1, a_hi: float = 1.0,
                 max_steps: int = 60) -> tuple:
    """Halve ``a_lo`` until undershoot and double ``a_hi`` until overshoot."""
    for _ in range(max_steps):
        if integrate_outward(a_lo, p, grid).end_value > 0:
            break
        a_lo *= 0.5
    else:
        raise BracketError("no undershoot found", {"a_lo": a_lo})
    a_hi = max(a_hi, a_lo)
    for _ in range(max_steps):
        if integrate_outward(a_hi, p, grid).end_value < 0:
            break
        a_hi *= 2.0
    else:
        raise BracketError("no overshoot found", {"a_hi": a_hi})
    return a_lo, a_hi


def shoot(p: Params, grid: Optional[RadialGrid] = None, bracket: Optional[tuple] = None,
          tol: float = 1e-12, max_steps: int = 200) -> ShootResult:
    """Bisection on ``a0`` for ``v(1) = 0``.

    ``bracket`` must give an undershoot (``v(1) > 0``) at ``a_lo`` and an
    overshoot at ``a_hi``; without it one is searched for.  Bisection stops at
    ``|v(1)| < tol`` or when the bracket collapses to adjacent floats.
    """
    grid = RadialGrid() if grid is None else grid
    if bracket is None:
        bracket = find_bracket(p, grid)
    a_lo, a_hi = map(float, bracket)
    lo, hi = integrate_outward(a_lo, p, grid), integrate_outward(a_hi, p, grid)
    if not (lo.end_value > 0 > hi.end_value):
        raise BracketError(
            f"invalid bracket: v(1) = {lo.end_value:.3e} at a_lo, {hi.end_value:.3e} at a_hi",
            {"lo": lo, "hi": hi})
    best = lo if abs(lo.end_value) < abs(hi.end_value) else hi
    steps = 0
    while abs(best.end_value) >= tol and steps < max_steps:
        mid = 0.5 * (a_lo + a_hi)
        if not a_lo < mid < a_hi:
            break
        prof = integrate_outward(mid, p, grid)
        steps += 1
        if prof.end_value > 0:
            a_lo = mid
        else:
            a_hi = mid
        if abs(prof.end_value) < abs(best.end_value):
            best = prof
    return _finish(best, p, bracket, steps)


def _finish(prof: OutwardProfile, p: Params, bracket, steps) -> ShootResult:
    defect = abs(prof.end_value)
    scale = max(1.0, float(np.max(np.abs(prof.values))))
    vals = prof.values.copy()
    x1 = defect <= 1e-12 * scale
    v = RadialFunction(prof.grid, vals, prof.derivative, x1=x1)
    res = integral_residual(v, p)
    strong = hessian_residual(v, p)
    try:
        adm = k_admissibility_check(v, p)
    except NumericalDegeneracyError:
        adm = [False] * p.k
    log.info("shoot a0=%.15g |v(1)|=%.2e residual=%.2e", prof.a0, defect, res)
    return ShootResult(v, prof.a0, res, adm, defect, strong, steps, tuple(bracket))


def shoot_all(p: Params, grid: Optional[RadialGrid] = None,
              a_values: Sequence[float] = tuple(np.geomspace(1e-2, 1e3, 41)),
              tol: float = 1e-12) -> list:
    """Every sign change of ``v(1)`` along a ladder of ``a0`` values, each
    refined by bisection; distinct solutions are all returned."""
    grid = RadialGrid() if grid is None else grid
    ends = [integrate_outward(a, p, grid).end_value for a in a_values]
    out = []
    for a, b, fa, fb in zip(a_values[:-1], a_values[1:], ends[:-1], ends[1:]):
        if fa > 0 > fb:
            out.append(shoot(p, grid, (a, b), tol))
        elif fa < 0 < fb:
            out.append(_shoot_reversed(p, grid, (a, b), tol))
    return out


def _shoot_reversed(p, grid, bracket, tol, max_steps=200):
    a_lo, a_hi = bracket
    f_lo = integrate_outward(a_lo, p, grid)
    best, steps = f_lo, 0
    while abs(best.end_value) >= tol and steps < max_steps:
        mid = 0.5 * (a_lo + a_hi)
        if not a_lo < mid < a_hi:
            break
        prof = integrate_outward(mid, p, grid)
        steps += 1
        if prof.end_value < 0:
            a_lo = mid
        else:
            a_hi = mid
        if abs(prof.end_value) < abs(best.end_value):
            best = prof
    return _finish(best, p, bracket, steps)


# --------------------------------------------------------------------------
# Residuals and certificates


def _diff4(grid: RadialGrid, f) -> np.ndarray:
    """``df/dr`` from fourth-order differences in the grading variable."""
    f = np.asarray(f, dtype=float)
    h = 1.0 / grid.n
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
    d[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * h)
    d[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * h)
    t = np.arange(grid.size) / grid.n
    jac = grid.g * t ** (grid.g - 1)
    out = np.zeros_like(d)
    out[1:] = d[1:] / jac[1:]
    return out


def _cumulative4(grid: RadialGrid, f) -> np.ndarray:
    """``int_0^{r_i} f dr`` with a fourth-order rule in the grading variable."""
    t = np.arange(grid.size) / grid.n
    y = grid.g * t ** (grid.g - 1) * np.asarray(f, dtype=float)
    h = 1.0 / grid.n
    seg = np.empty(grid.n)
    seg[1:-1] = (-y[:-3] + 13 * y[1:-2] + 13 * y[2:-1] - y[3:]) * (h / 24)
    seg[0] = (9 * y[0] + 19 * y[1] - 5 * y[2] + y[3]) * (h / 24)
    seg[-1] = (9 * y[-1] + 19 * y[-2] - 5 * y[-3] + y[-4]) * (h / 24)
    out = np.zeros(grid.size)
    out[1:] = np.cumsum(seg)
    return out


def _source(v: RadialFunction, p: Params) -> np.ndarray:
    r = v.grid.nodes
    return r ** (p.N - 1) * abs_pow(np.maximum(v.values, 0.0), exponent(r, p) - 1)


def integral_residual(v: RadialFunction, p: Params, relative: bool = True) -> float:
    """Sup-norm defect of the integrated equation in flux form,
    ``r^(N-k) (-v')^k - tau int_0^r s^(N-1) (v^+)^(p-1) ds``.

    ``v'`` comes from fourth-order differences of the nodal values and the
    integral from a fourth-order cumulative rule, so the check does not reuse
    the marching scheme.  With ``relative`` the defect is divided by the
    largest flux.
    """
    grid, r = v.grid, v.grid.nodes
    dv = _diff4(grid, v.values)
    lhs = r ** (p.N - p.k) * np.abs(dv) ** p.k
    rhs = p.tau * _cumulative4(grid, _source(v, p))
    defect = float(np.max(np.abs(lhs - rhs)))
    if relative:
        scale = float(np.max(np.abs(rhs)))
        return defect / scale if scale > 0 else defect
    return defect


def hessian_residual(v: RadialFunction, p: Params, relative: bool = True) -> float:
    """Sup-norm strong-form defect ``(r^(N-k)(-v')^k)' - tau r^(N-1) (v^+)^(p-1)``
    at interior nodes.  The flux uses the profile's derivative (explicit when
    the profile carries one) and is differentiated with second-order
    differences on the graded grid.

    ``relative`` divides by ``max tau r^(N-1) (v^+)^(p-1)`` when positive.
    """
    r = v.grid.nodes
    dv = v.derivative
    flux = r ** (p.N - p.k) * np.abs(dv) ** p.k
    dflux = np.gradient(flux, r, edge_order=2)
    src = p.tau * _source(v, p)
    defect = np.abs(dflux - src)[1:-1]
    out = float(np.max(defect)) if defect.size else 0.0
    if relative:
        scale = float(np.max(src))
        return out / scale if scale > 0 else out
    return out


def admissibility_margins(v: RadialFunction, p: Params) -> np.ndarray:
    """Rows ``j = 1..k`` of the sign expression
    ``(N-k)/r [(N-j)/(N-k) - j/k] + (j/k) r^(N-1)|v|^(p-1) / int_0^r s^(N-1)|v|^(p-1)``
    at interior nodes."""
    grid, r = v.grid, v.grid.nodes
    q = abs_pow(v.values, exponent(r, p) - 1)
    src = r ** (p.N - 1) * q
    # exact moments of r^(N-1) against the linear interpolant of q keep the
    # cumulative integral positive and accurate near the origin
    m0 = grid.element_moments(p.N - 1)
    m1 = grid.element_moments(p.N)
    h = grid.spacing
    lo, hi = r[:-1], r[1:]
    seg = (q[:-1] * (hi * m0 - m1) + q[1:] * (m1 - lo * m0)) / h
    cum = np.concatenate(([0.0], np.cumsum(seg)))
    ri, si, ci, vi = r[1:-1], src[1:-1], cum[1:-1], v.values[1:-1]
    bad = (ci <= 0) & (vi != 0)
    if np.any(bad):
        raise NumericalDegeneracyError(
            f"vanishing cumulative integral at r = {ri[bad][0]:.3e} with v != 0")
    ratio = np.divide(si, ci, out=np.zeros_like(si), where=ci > 0)
    N, k = p.N, p.k
    rows = [(N - k) / ri * ((N - j) / (N - k) - j / k) + (j / k) * ratio for j in range(1, k + 1)]
    return np.array(rows)


def k_admissibility_check(v: RadialFunction, p: Params, tol: float = 1e-10) -> list:
    """Per-``j`` flags: the sign expression is ``>= -tol`` at every interior
    node and the profile is nonincreasing."""
    rel = 1e-12 * max(1.0, float(np.max(np.abs(v.values))))
    monotone = bool(np.all(np.diff(v.values) <= rel))
    margins = admissibility_margins(v, p)
    return [bool(monotone and np.all(row >= -tol)) for row in margins]


def energy_identity_defect(v: RadialFunction, p: Params) -> float:
    """Relative gap between ``int r^(N-k)|v'|^(k+1)`` and ``tau int r^(N-1)(v^+)^p``."""
    grid, r = v.grid, v.grid.nodes
    lhs = grid.integrate(r ** (p.N - p.k) * np.abs(v.derivative) ** (p.k + 1))
    rhs = p.tau * grid.integrate(r ** (p.N - 1) * abs_pow(np.maximum(v.values, 0.0), exponent(r, p)))
    return abs(lhs - rhs) / max(abs(lhs), 1e-300)
