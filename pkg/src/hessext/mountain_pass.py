"""Energy functional of the supercritical problem and its level estimates
along the instanton ray ``t -> t w_eps``.

    I(v) = 1/(k+1) int r^(N-k)|v'|^(k+1) - tau int r^(N-1) (v^+)^p / p,
    p(r) = k* + r^alpha.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import DomainError
from .instanton import (InstantonSpec, a_eps, mountain_pass_amplitude, sobolev_constant_S,
                        w_eps, w_eps_derivative)
from .quadrature import log_rule
from .radial_core import Params, RadialFunction, abs_pow, exponent, gradient_energy

__all__ = [
    "LevelReport",
    "RayProfile",
    "functional_I",
    "noncompactness_level",
    "ray_profile",
    "t_eps_solve",
    "mp_upper_bound",
    "ar_check",
]


def functional_I(v: RadialFunction, p: Params) -> float:
    """``I(v)`` by grid quadrature (the positive-part convention in the
    second term)."""
    r = v.grid.nodes
    pr = exponent(r, p)
    pot = v.grid.integrate(r ** (p.N - 1) / pr * abs_pow(np.maximum(v.values, 0.0), pr))
    return gradient_energy(v, p) / (p.k + 1) - p.tau * pot


def noncompactness_level(p: Params, S: Optional[float] = None) -> float:
    """``(1/(k+1) - 1/k*) tau^(-(k+1)/(k*-k-1)) S^(N/(2k))``."""
    S = sobolev_constant_S(p) if S is None else S
    return ((1.0 / (p.k + 1) - 1.0 / p.kstar) * p.tau ** (-(p.k + 1) / (p.kstar - p.k - 1))
            * S ** (p.N / (2 * p.k)))


class RayProfile:
    """``w_eps`` sampled on a fixed Gauss rule so that ``I(t w_eps)`` is cheap
    for many ``t``.

    ``per_decade`` sets the panel density of the rule; two densities give the
    quadrature error estimate.
    """

    def __init__(self, spec: InstantonSpec, p: Params, per_decade: int = 6, order: int = 24):
        self.spec, self.p = spec, p
        breaks = [spec.eps, spec.r0]
        try:
            breaks.append(a_eps(spec, p))
        except DomainError:
            pass
        r, wq = log_rule(spec.eps * 1e-10, 2 * spec.r0, per_decade, order, breaks)
        self.r = r
        w = w_eps(r, spec, p)
        self.pr = exponent(r, p)
        self.energy = float(np.dot(wq, r ** (p.N - p.k) * np.abs(w_eps_derivative(r, spec, p)) ** (p.k + 1)))
        keep = w > 0
        # log of r^(N-1) |w|^p and the exponents, on the support of w
        self._lw = np.log(w[keep])
        self._lbase = (p.N - 1) * np.log(r[keep]) + self.pr[keep] * self._lw
        self._pk = self.pr[keep]
        self._wq = wq[keep]

    def potential(self, t: float) -> float:
        """``int r^(N-1) (t w)^p / p``."""
        return float(np.dot(self._wq, np.exp(self._lbase + self._pk * math.log(t)) / self._pk))

    def I(self, t: float) -> float:
        if t == 0:
            return 0.0
        return t ** (self.p.k + 1) / (self.p.k + 1) * self.energy - self.p.tau * self.potential(t)

    def stationarity(self, t: float) -> float:
        """``E - tau int t^(p-1-k) r^(N-1) w^p``; its root is the ray maximiser."""
        k = self.p.k
        return self.energy - self.p.tau * float(
            np.dot(self._wq, np.exp(self._lbase + (self._pk - 1 - k) * math.log(t))))

    def dI(self, t: float) -> float:
        return t ** self.p.k * self.stationarity(t)


def ray_profile(eps: float, p: Params, C: Optional[float] = None, per_decade: int = 6) -> RayProfile:
    C = mountain_pass_amplitude(p) if C is None else C
    return RayProfile(InstantonSpec(eps, C), p, per_decade)


def t_eps_solve(eps: float, p: Params, C: Optional[float] = None,
                ray: Optional[RayProfile] = None) -> float:
    """Root ``t`` of ``d/dt I(t w_eps) = 0`` in ``(0, 10)``."""
    ray = ray_profile(eps, p, C) if ray is None else ray
    lo, hi = 1e-8, 10.0
    if not ray.stationarity(lo) > 0 > ray.stationarity(hi):
        raise DomainError(f"no stationary point of the ray in (0, 10) at eps={eps}")
    return brentq(ray.stationarity, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


@dataclass
class LevelReport:
    threshold: float
    i_max_curve: dict
    t_eps: dict
    quad_error: dict
    unimodal: dict
    margin: float
    i_at_one: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        keyed = lambda d: {repr(float(k)): v for k, v in sorted(d.items(), reverse=True)}
        return {"threshold": self.threshold, "margin": self.margin,
                "i_max_curve": keyed(self.i_max_curve), "t_eps": keyed(self.t_eps),
                "quad_error": keyed(self.quad_error), "unimodal": keyed(self.unimodal),
                "i_at_one": keyed(self.i_at_one)}


def _ray_max(ray: RayProfile, samples: int = 400) -> tuple:
    """Dense sampling on ``(0, T]`` with ``I(T) < 0``, then golden-section."""
    T = 1.0
    for _ in range(60):
        if ray.I(T) < 0:
            break
        T *= 2.0
    ts = np.linspace(T / samples, T, samples)
    vals = np.array([ray.I(t) for t in ts])
    d = np.array([ray.dI(t) for t in ts])
    changes = int(np.count_nonzero(np.diff(np.sign(d)) != 0))
    i = int(np.argmax(vals))
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, samples - 1)]
    opt = minimize_scalar(lambda t: -ray.I(t), bracket=(lo, ts[i], hi), method="golden",
                          tol=1e-12)
    return float(opt.x), float(-opt.fun), changes == 1


def mp_upper_bound(eps_ladder: Sequence[float], p: Params, C: Optional[float] = None,
                   S: Optional[float] = None) -> LevelReport:
    """``max_t I(t w_eps)`` along an eps ladder against the noncompactness level."""
    level = noncompactness_level(p, S)
    imax, targ, qerr, uni, i1 = {}, {}, {}, {}, {}
    for eps in eps_ladder:
        ray = ray_profile(eps, p, C)
        t, val, one = _ray_max(ray)
        coarse = ray_profile(eps, p, C, per_decade=3)
        imax[eps] = val
        targ[eps] = t
        qerr[eps] = abs(coarse.I(t) - val)
        uni[eps] = one
        i1[eps] = ray.I(1.0)
    margin = level - max(imax.values())
    return LevelReport(level, imax, targ, qerr, uni, margin, i1)


def ar_check(p: Params, n_r: int = 100, n_s: int = 100, s_max: float = 10.0) -> dict:
    """Ambrosetti-Rabinowitz inequality ``xi F(r,s) <= s f(r,s)`` with
    ``xi = (k+1+k*)/2``, ``f = tau (s^+)^(p-1)`` and ``F = tau (s^+)^p / p``,
    on an ``n_r x n_s`` product grid of ``(0,1] x [0, s_max]``."""
    xi = 0.5 * (p.k + 1 + p.kstar)
    r = np.linspace(1.0 / n_r, 1.0, n_r)[:, None]
    s = np.linspace(0.0, s_max, n_s)[None, :]
    pr = exponent(r, p) * np.ones_like(s)
    sp = np.broadcast_to(s, pr.shape)
    f = p.tau * abs_pow(sp, pr - 1)
    F = p.tau * abs_pow(sp, pr) / pr
    lhs, rhs = xi * F, sp * f
    slack = rhs - lhs
    ok = bool(np.all(slack >= -4 * np.finfo(float).eps * np.abs(rhs)))
    strict = bool(np.all(slack[:, 1:] > 0)) and bool(np.all(slack[:, 0] == 0))
    return {"xi": xi, "holds": ok, "strict_away_from_zero": strict,
            "min_slack": float(np.min(slack))}
