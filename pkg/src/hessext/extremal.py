"""Maximisers of the supercritical functional on the unit sphere of X1.

The discrete problem lives on continuous piecewise-linear profiles over a
:class:`RadialGrid`: the constraint ``omega_{N,k} int r^(N-k)|v'|^(k+1) = 1``
is evaluated exactly and the functional by nodal quadrature.  The ascent
is a nonlinear power iteration

    v  <-  A^{-1}(grad G(v)) / ||A^{-1}(grad G(v))||,

where ``A`` is the discrete (k+1)-Laplacian.  For radial profiles ``A`` is
inverted exactly by one cumulative sum, and because ``G`` is convex the
objective never decreases along the iteration.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import InvalidInputError
from .instanton import InstantonSpec, sobolev_constant_S, w_eps, w_eps_function
from .radial_core import (Params, RadialFunction, RadialGrid, abs_pow, exponent,
                          gradient_energy, radial_bound, supercritical_functional, x1_norm)

log = logging.getLogger(__name__)

__all__ = [
    "SolverConfig",
    "OptimResult",
    "ConcentrationReport",
    "best_subcritical_constant",
    "instanton_witness",
    "maximize_supercritical",
    "el_residual",
    "interpolant_quadrature_error",
    "step1_gap",
    "u_from_v",
    "concentration_diagnostic",
    "nonattainment_run",
    "step2_bound_check",
    "brezis_lieb_defect",
]


@dataclass(frozen=True)
class SolverConfig:
    """Options for :func:`maximize_supercritical`.

    ``init`` is ``"instanton"`` (normalised ``w_eps`` at ``eps0``) or
    ``"random"`` (a random positive nonincreasing profile drawn with ``seed``).
    """

    tol: float = 1e-6
    max_iter: int = 100_000
    init: str = "instanton"
    eps0: float = 1e-2
    seed: Optional[int] = None
    log_every: int = 5000

    def __post_init__(self):
        if self.init not in ("instanton", "random"):
            raise InvalidInputError(f"unknown init {self.init!r}")
        if not self.tol > 0 or self.max_iter < 1:
            raise InvalidInputError("tol must be positive and max_iter >= 1")


@dataclass
class OptimResult:
    v: RadialFunction
    value: float
    lam: float
    el_residual: float
    iterations: int
    converged: bool
    trace: np.ndarray = field(repr=False)
    attainable_regime: bool = True

    def summary(self) -> dict:
        return {"value": self.value, "lambda": self.lam, "el_residual": self.el_residual,
                "iterations": self.iterations, "converged": self.converged,
                "attainable_regime": self.attainable_regime}


@dataclass
class ConcentrationReport:
    tail_energies: dict
    threshold: float
    concentrated: bool


def best_subcritical_constant(p: Params, S: Optional[float] = None) -> float:
    """``V_{k,N} = (omega_{N,k} S)^(-k*/(k+1))``."""
    S = sobolev_constant_S(p) if S is None else S
    return (p.omega_nk * S) ** (-p.kstar / (p.k + 1))


def instanton_witness(eps: float, p: Params, grid: Optional[RadialGrid] = None) -> float:
    """Pure-critical functional of ``w_eps / ||w_eps||``."""
    grid = RadialGrid() if grid is None else grid
    w = w_eps_function(grid, InstantonSpec(eps), p)
    return supercritical_functional(w.scaled(1.0 / x1_norm(w, p)), p.pure_critical())


# --------------------------------------------------------------------------
# Discrete operators


class _Discrete:
    """Precomputed grid quantities for one (Params, grid) pair."""

    def __init__(self, p: Params, grid: RadialGrid):
        self.p, self.grid = p, grid
        r = grid.nodes
        self.h = grid.spacing
        self.m = grid.element_moments(p.N - p.k)
        self.ex = exponent(r, p)
        self.wr = grid.weights * r ** (p.N - 1)

    def norm(self, v) -> float:
        s = np.diff(v) / self.h
        return (self.p.omega_nk * np.dot(self.m, np.abs(s) ** (self.p.k + 1))) ** (1.0 / (self.p.k + 1))

    def value(self, v) -> float:
        return float(np.dot(self.wr, abs_pow(v, self.ex)))

    def grad(self, v):
        """Gradient of the functional: ``w_j r_j^(N-1) p_j |v_j|^(p_j-2) v_j``."""
        return self.wr * self.ex * abs_pow(v, self.ex - 1) * np.sign(v)

    def solve(self, b):
        """The profile ``u`` with ``A(u) = b`` and ``u(1) = 0``."""
        k = self.p.k
        B = np.cumsum(b)[:-1]
        s = -np.sign(B) * (np.abs(B) * self.h / self.m) ** (1.0 / k)
        u = np.zeros_like(b)
        u[:-1] = np.cumsum((-s * self.h)[::-1])[::-1]
        return u

    def apply(self, v):
        """``A(v)_j``: coefficient of ``h_j`` in ``int r^(N-k)|v'|^(k-1) v' h'``."""
        k = self.p.k
        s = np.diff(v) / self.h
        flux = self.m * np.abs(s) ** (k - 1) * s / self.h
        out = np.zeros_like(v)
        out[1:] += flux
        out[:-1] -= flux
        return out

    def dual_norm(self, R) -> float:
        """Dual X1 norm of a nodal residual with the node ``r = 1`` clamped."""
        k, om = self.p.k, self.p.omega_nk
        lam = np.cumsum(R[:-1])
        q = (k + 1) / k
        return om ** (-1.0 / (k + 1)) * float(
            np.sum(np.abs(lam * self.h) ** q * self.m ** (-1.0 / k)) ** (1.0 / q))

    def multiplier(self, v) -> float:
        return 1.0 / (self.p.omega_nk * float(np.dot(self.wr * self.ex, abs_pow(v, self.ex))))

    def residual(self, v) -> tuple:
        """``(lambda, relative dual-norm residual)``; ``||A(v)||_* = 1/omega``
        on the unit sphere, so the relative residual is ``omega * ||R||_*``."""
        lam = self.multiplier(v)
        R = self.apply(v) - lam * self.grad(v)
        return lam, self.p.omega_nk * self.dual_norm(R)


def el_residual(v: RadialFunction, p: Params) -> tuple:
    """Multiplier and relative dual-norm Euler-Lagrange residual of a P1 profile."""
    d = _Discrete(p, v.grid)
    return d.residual(v.values)


def _initial(d: _Discrete, cfg: SolverConfig):
    r = d.grid.nodes
    if cfg.init == "instanton":
        v = w_eps(r, InstantonSpec(cfg.eps0), d.p)
    else:
        rng = np.random.default_rng(cfg.seed)
        # positive nonincreasing: a random instanton scale plus random ramps
        eps = 10.0 ** rng.uniform(-3.0, -1.0)
        inc = rng.exponential(size=r.size - 1) * d.h
        ramp = np.zeros(r.size)
        ramp[:-1] = np.cumsum(inc[::-1])[::-1]
        v = rng.uniform(0.2, 1.0) * w_eps(r, InstantonSpec(eps), d.p) / w_eps(0.0, InstantonSpec(eps), d.p)
        v = v + rng.uniform(0.2, 1.0) * ramp / ramp[0]
    v = np.asarray(v, dtype=float).copy()
    v[-1] = 0.0
    return v / d.norm(v)


def maximize_supercritical(p: Params, grid: Optional[RadialGrid] = None,
                           cfg: Optional[SolverConfig] = None,
                           callback: Optional[Callable] = None) -> OptimResult:
    """Maximise ``int r^(N-1)|v|^(k*+r^alpha)`` over unit-norm P1 profiles.

    ``callback(iteration, v_values)`` is invoked after every step when given.
    Non-convergence within ``cfg.max_iter`` returns ``converged = False``.
    """
    grid = RadialGrid() if grid is None else grid
    cfg = SolverConfig() if cfg is None else cfg
    if not p.attainable and not p.test_mode:
        log.warning("alpha=%g outside (0, (N-2k)/k): experimental regime", p.alpha)
    d = _Discrete(p, grid)
    v = _initial(d, cfg)
    trace = [d.value(v)]
    converged = False
    it = 0
    lam, res = d.residual(v)
    while True:
        if res < cfg.tol:
            converged = True
            break
        if it >= cfg.max_iter:
            log.warning("no convergence after %d iterations (residual %.3e)", it, res)
            break
        u = d.solve(d.grad(v))
        v = u / d.norm(u)
        it += 1
        trace.append(d.value(v))
        if callback is not None:
            callback(it, v)
        lam, res = d.residual(v)
        if cfg.log_every and it % cfg.log_every == 0:
            log.info("iter %d value %.15g residual %.3e", it, trace[-1], res)
    vf = RadialFunction(grid, np.abs(v))
    return OptimResult(vf, supercritical_functional(vf, p), lam, res, it, converged,
                       np.asarray(trace), p.attainable)


def interpolant_quadrature_error(v: RadialFunction, p: Params, order: int = 8) -> float:
    """Difference between the nodal value of the functional and its value on
    the piecewise-linear interpolant, integrated element by element with
    Gauss-Legendre."""
    from .quadrature import _legendre

    x, w = _legendre(order)
    r, vals = v.grid.nodes, v.values
    a, b = r[:-1, None], r[1:, None]
    t = 0.5 * (x[None, :] + 1.0)
    pts = a + (b - a) * t
    vv = vals[:-1, None] + (vals[1:, None] - vals[:-1, None]) * t
    dens = pts ** (p.N - 1) * abs_pow(vv, exponent(pts, p))
    exact = float(np.sum(0.5 * (b - a) * w[None, :] * dens))
    return abs(supercritical_functional(v, p) - exact)


def step1_gap(res: OptimResult, p: Params, S: Optional[float] = None) -> dict:
    """Strict-gap report: ``value - V_{k,N}`` against the quadrature error."""
    V = best_subcritical_constant(p, S)
    err = interpolant_quadrature_error(res.v, p)
    gap = res.value - V
    return {"value": res.value, "V_kN": V, "gap": gap, "quad_error": err,
            "certified": bool(gap > 10.0 * err)}


def u_from_v(res: OptimResult, p: Params) -> dict:
    """Transfer to the ball: ``U = omega_{N-1} V`` and ``||u_0|| = ||v_0||``."""
    return {"U_value": p.omega_sphere * res.value, "norm": x1_norm(res.v, p)}


# --------------------------------------------------------------------------
# Concentration diagnostics


DEFAULT_PROBES = (0.5, 0.25, 0.1, 0.05)


def concentration_diagnostic(v: RadialFunction, p: Params,
                             probes: Sequence[float] = DEFAULT_PROBES,
                             threshold: float = 1e-3) -> ConcentrationReport:
    """Tail energies ``int_{r0}^1 r^(N-k)|v'|^(k+1)`` at each probe radius."""
    nrm = x1_norm(v, p)
    if abs(nrm - 1.0) > 1e-6:
        raise InvalidInputError(f"concentration diagnostic needs a unit profile (norm {nrm})")
    tails = {float(r0): float(gradient_energy(v, p, r0)) for r0 in sorted(probes, reverse=True)}
    return ConcentrationReport(tails, threshold, all(t < threshold for t in tails.values()))


def nonattainment_run(p: Params, grid: Optional[RadialGrid] = None, iterations: int = 2000,
                      every: int = 200, probes: Sequence[float] = (0.1, 0.01)) -> list:
    """Ascent at the exact critical exponent; records the functional and the
    tail energies every ``every`` steps.  Without a maximiser the mass keeps
    moving towards the origin."""
    q = p.pure_critical()
    grid = RadialGrid() if grid is None else grid
    d = _Discrete(q, grid)
    rows = []

    def cb(it, v):
        if it % every == 0:
            f = RadialFunction(grid, v)
            rows.append({"iteration": it, "value": d.value(v),
                         "tails": {r0: gradient_energy(f, q, r0) for r0 in probes}})

    maximize_supercritical(q, grid, SolverConfig(tol=1e-300, max_iter=iterations, log_every=0),
                           callback=cb)
    return rows


def step2_bound_check(v: RadialFunction, p: Params, eps_tol: float,
                      S: Optional[float] = None) -> dict:
    """Split ``int_0^1 r^(N-1)|v|^(k*+r^alpha)`` at a radius ``delta``.

    ``delta`` is the largest dyadic radius (snapped to a grid node) with
    ``V_{k,N} * (sup_{r<=delta} M(r)^(r^alpha) - 1) <= eps_tol/2``, where ``M``
    is the pointwise bound for unit profiles (floored at 1).  The inner piece
    is then at most ``V_{k,N} + eps_tol/2``; ``bound_ok`` also asks the outer
    piece to be at most ``eps_tol/2``.
    """
    V = best_subcritical_constant(p, S)
    grid = v.grid
    r = grid.nodes
    inner_r = r[1:]
    M = np.maximum(1.0, radial_bound(inner_r, p))
    growth = np.exp(inner_r ** p.alpha * np.log(M)) if p.alpha > 0 else np.ones_like(inner_r)
    excess = np.maximum.accumulate(growth) - 1.0
    delta_idx = 1
    for j in range(1, 60):
        cand = 2.0 ** -j
        idx = int(np.searchsorted(r, cand, side="right")) - 1
        if idx < 1:
            break
        if V * excess[idx - 1] <= 0.5 * eps_tol:
            delta_idx = idx
            break
    delta = float(r[delta_idx])
    dens = r ** (p.N - 1) * abs_pow(v.values, exponent(r, p))
    cum = grid.cumulative(dens)
    total = grid.integrate(dens)
    inner = float(cum[delta_idx])
    outer = total - inner
    return {"delta": delta, "inner": inner, "outer": outer, "V_kN": V,
            "bound_ok": bool(inner <= V + 0.5 * eps_tol and outer <= 0.5 * eps_tol)}


def brezis_lieb_defect(v: RadialFunction, w: RadialFunction, p: Params) -> float:
    """``|G(v + w) - G(v) - G(w)|`` for the supercritical functional ``G``;
    small when ``w`` concentrates away from the bulk of ``v``."""
    s = RadialFunction(v.grid, v.values + w.values, x1=v.x1)
    return abs(supercritical_functional(s, p) - supercritical_functional(v, p)
               - supercritical_functional(w, p))
