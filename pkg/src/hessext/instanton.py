"""The instanton family, its cut-off version and the asymptotic expansions
of the weighted integrals built from it.

The instanton of scale ``eps`` is

    v*_eps(r) = chat * (eps^(2/(k+1)) / (eps^2 + r^2))^((N-2k)/(2k)),

and ``w_eps = C * eta * v*_eps`` with a smooth cut-off ``eta`` equal to 1 on
``(0, r0]`` and 0 on ``[2 r0, 1]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np

from .errors import ConsistencyError, DomainError
from .quadrature import integrate_halfline, integrate_log, integrate_to_infinity
from .radial_core import Params, RadialFunction, RadialGrid, abs_pow, exponent

__all__ = [
    "InstantonSpec",
    "ExpansionReport",
    "instanton_value",
    "instanton_derivative",
    "sobolev_integrals",
    "sobolev_constant_S",
    "cutoff",
    "cutoff_derivative",
    "w_eps",
    "w_eps_derivative",
    "w_eps_function",
    "a_eps",
    "s_integral",
    "expansion_near_zero",
    "expansion_midrange",
    "expansion_far_tail",
    "far_tail_oracle",
    "sharper_estimates",
    "fit_loglog_slope",
    "normalizing_amplitude",
    "mountain_pass_amplitude",
]

S_RTOL = 1e-8


@dataclass(frozen=True)
class InstantonSpec:
    eps: float
    C: float = 1.0
    r0: float = 0.25
    gamma: Optional[float] = None

    def __post_init__(self):
        if not self.eps > 0:
            raise DomainError(f"eps must be positive (got {self.eps})")
        if not self.C > 0:
            raise DomainError(f"amplitude C must be positive (got {self.C})")
        if not 0 < self.r0 < 0.5:
            raise DomainError(f"r0 must lie in (0, 1/2) (got {self.r0})")
        if self.gamma is not None and not 0 < self.gamma < 0.5:
            raise DomainError(f"gamma must lie in (0, 1/2) (got {self.gamma})")

    def matching_exponent(self, p: Params) -> float:
        return self.gamma if self.gamma is not None else 1.0 / (2 * (p.k + 1))

    def amplitude(self, p: Params) -> float:
        """``A = C * chat``."""
        return self.C * p.chat


@dataclass
class ExpansionReport:
    lemma: str
    branch: str
    eps: float
    numeric: float
    leading: float
    ratio: float

    def as_dict(self) -> dict:
        return asdict(self)


# --------------------------------------------------------------------------
# The profiles


def _crit_power(p: Params) -> float:
    """Exponent ``(k+1) N / (2k)`` of ``(1 + s^2)`` in ``|v*|^(k*)``."""
    return (p.k + 1) * p.N / (2 * p.k)


def _scale(eps) -> float:
    return eps.eps if isinstance(eps, InstantonSpec) else float(eps)


def _log_instanton(r, eps, p: Params):
    eps = _scale(eps)
    h = (p.N - 2 * p.k) / (2 * p.k)
    return math.log(p.chat) + h * (2.0 / (p.k + 1) * math.log(eps) - np.log(eps * eps + r * r))


def instanton_value(r, eps, p: Params):
    """``v*_eps(r)`` without the amplitude ``C``; ``r`` may be an array and
    ``eps`` a scale or an :class:`InstantonSpec`."""
    r = np.asarray(r, dtype=float)
    out = np.exp(_log_instanton(r, eps, p))
    return float(out) if out.ndim == 0 else out


def instanton_derivative(r, eps, p: Params):
    r = np.asarray(r, dtype=float)
    eps = _scale(eps)
    out = -p.decay * r / (eps * eps + r * r) * instanton_value(r, eps, p)
    return float(out) if np.ndim(out) == 0 else out


def sobolev_integrals(p: Params, eps: float = 1.0) -> tuple:
    """The gradient-side and critical-side integrals of ``v*_eps`` over
    ``(0, inf)``; both equal ``S^(N/(2k))``."""
    k, N = p.k, p.N

    # log form keeps the far tail free of overflow
    def grad(r):
        lr = np.log(r)
        ld = math.log(p.decay) + lr - np.log(eps * eps + r * r) + _log_instanton(r, eps, p)
        return np.exp((N - k) * lr + (k + 1) * ld)

    def crit(r):
        return np.exp((N - 1) * np.log(r) + p.kstar * _log_instanton(r, eps, p))

    with np.errstate(divide="ignore"):
        return integrate_halfline(grad), integrate_halfline(crit)


def sobolev_constant_S(p: Params, eps: float = 1.0) -> float:
    """Best constant ``S`` from the two instanton integrals.

    Raises :class:`ConsistencyError` when the integrals disagree beyond
    ``1e-8`` relative.
    """
    g, c = sobolev_integrals(p, eps)
    if abs(g - c) > S_RTOL * abs(c):
        raise ConsistencyError(
            f"S integrals disagree for (N,k)=({p.N},{p.k}): gradient {g!r} vs critical {c!r}")
    return (0.5 * (g + c)) ** (2 * p.k / p.N)


def _h(t):
    t = np.asarray(t, dtype=float)
    e = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    return e


def _h_prime(t):
    t = np.asarray(t, dtype=float)
    safe = np.where(t > 0, t, 1.0)
    return np.where(t > 0, np.exp(-1.0 / safe) / (safe * safe), 0.0)


def cutoff(r, r0: float):
    """Smooth step: 1 on ``[0, r0]``, 0 on ``[2 r0, inf)``."""
    t = (2 * r0 - np.asarray(r, dtype=float)) / r0
    a, b = _h(t), _h(1.0 - t)
    return a / (a + b)


def cutoff_derivative(r, r0: float):
    t = (2 * r0 - np.asarray(r, dtype=float)) / r0
    a, b = _h(t), _h(1.0 - t)
    da, db = _h_prime(t), _h_prime(1.0 - t)
    dhdt = (da * b + a * db) / (a + b) ** 2
    return -dhdt / r0


def w_eps(r, spec: InstantonSpec, p: Params):
    r = np.asarray(r, dtype=float)
    return spec.C * cutoff(r, spec.r0) * instanton_value(r, spec.eps, p)


def w_eps_derivative(r, spec: InstantonSpec, p: Params):
    r = np.asarray(r, dtype=float)
    v = instanton_value(r, spec.eps, p)
    dv = instanton_derivative(r, spec.eps, p)
    return spec.C * (cutoff_derivative(r, spec.r0) * v + cutoff(r, spec.r0) * dv)


def w_eps_function(grid: RadialGrid, spec: InstantonSpec, p: Params) -> RadialFunction:
    """``w_eps`` sampled on a grid, carrying its exact derivative."""
    r = grid.nodes
    return RadialFunction(grid, w_eps(r, spec, p), w_eps_derivative(r, spec, p))


def normalizing_amplitude(p: Params, S: Optional[float] = None) -> float:
    """``C = (omega_{N,k} S^(N/2k))^(-1/(k+1))``, making ``||w_eps|| -> 1``."""
    S = sobolev_constant_S(p) if S is None else S
    return (p.omega_nk * S ** (p.N / (2 * p.k))) ** (-1.0 / (p.k + 1))


def mountain_pass_amplitude(p: Params) -> float:
    """``C = tau^(-1/(k* - k - 1))``, the amplitude used along the mountain-pass ray."""
    return p.tau ** (-1.0 / (p.kstar - p.k - 1))


def a_eps(spec: InstantonSpec, p: Params) -> float:
    """Radius where ``C v*_eps`` crosses 1."""
    A = spec.amplitude(p)
    k, N = p.k, p.N
    gap = A ** (2 * k / (N - 2 * k)) - spec.eps ** (2 * k / (k + 1))
    if gap <= 0:
        raise DomainError("a_eps needs A^(2k/(N-2k)) > eps^(2k/(k+1))")
    return spec.eps ** (1.0 / (k + 1)) * math.sqrt(gap)


# --------------------------------------------------------------------------
# Expansions


def s_integral(beta: float, delta: float, p: Params, upper: float = math.inf) -> float:
    """``int_0^upper s^(N+beta-1) log(1+s^2)^delta / (1+s^2)^((k+1)N/(2k)) ds``."""
    q = _crit_power(p)

    def f(s):
        with np.errstate(divide="ignore"):
            body = np.exp((p.N + beta - 1) * np.log(s) - q * np.log1p(s * s))
        return body * np.log1p(s * s) ** delta

    if math.isinf(upper):
        return integrate_halfline(f)
    return integrate_log(f, 1e-12, upper, per_decade=4) if upper > 1e-12 else 0.0


def _near_zero_numeric(beta, delta, gamma, eps, p: Params) -> float:
    def f(r):
        return (r ** (p.N + beta - 1) * instanton_value(r, eps, p) ** p.kstar
                * np.log1p((r / eps) ** 2) ** delta)

    return integrate_log(f, eps * 1e-10, eps ** gamma, per_decade=4, breaks=(eps,))


def expansion_near_zero(beta: float, delta: float, gamma: float, eps: float,
                        p: Params) -> ExpansionReport:
    """Leading-order check for ``int_0^{eps^gamma} r^(N+beta-1)|v*|^k* log(1+r^2/eps^2)^delta``."""
    if not (0 < gamma < 1) or not eps ** gamma < 1:
        raise DomainError("need 0 < gamma < 1 and eps^gamma < 1")
    Nk = p.N / p.k
    numeric = _near_zero_numeric(beta, delta, gamma, eps, p)
    c = p.chat ** p.kstar
    L = -math.log(eps)
    if math.isclose(beta, Nk, rel_tol=1e-12):
        branch = "beta=N/k"
        leading = c * (2 * (1 - gamma)) ** (delta + 1) / (2 * (delta + 1)) * eps ** Nk * L ** (delta + 1)
    elif beta < Nk:
        branch = "beta<N/k"
        leading = c * eps ** beta * s_integral(beta, delta, p)
    else:
        branch = "beta>N/k"
        leading = (c * (2 * (1 - gamma)) ** delta / (beta - Nk)
                   * eps ** ((beta - Nk) * gamma + Nk) * L ** delta)
    return ExpansionReport("near_zero", branch, eps, numeric, leading, numeric / leading)


def expansion_midrange(beta: float, gamma: float, eps: float, p: Params) -> ExpansionReport:
    """``int_{eps^gamma}^1 r^(N+beta-1)|v*|^k*`` against its asserted order.

    ``leading`` is the order function without constant: ``eps^((1-gamma)N/k +
    beta gamma)``, ``eps^(N/k) |log eps|`` or ``eps^(N/k)`` by branch.
    """
    Nk = p.N / p.k

    def f(r):
        return r ** (p.N + beta - 1) * instanton_value(r, eps, p) ** p.kstar

    numeric = integrate_log(f, eps ** gamma, 1.0, per_decade=6)
    L = -math.log(eps)
    if math.isclose(beta, Nk, rel_tol=1e-12):
        branch, leading = "beta=N/k", eps ** Nk * L
    elif beta < Nk:
        branch, leading = "beta<N/k", eps ** ((1 - gamma) * Nk + beta * gamma)
    else:
        branch, leading = "beta>N/k", eps ** Nk
    return ExpansionReport("midrange", branch, eps, numeric, leading, numeric / leading)


def expansion_far_tail(gamma: float, eps: float, p: Params) -> ExpansionReport:
    """``int_1^inf r^(N-1)|v*|^k*`` compared with ``eps^((N/k)(1-gamma))``."""
    def f(r):
        return np.exp((p.N - 1) * np.log(r) + p.kstar * _log_instanton(r, eps, p))

    numeric = integrate_to_infinity(f, 1.0)
    leading = eps ** (p.N / p.k * (1 - gamma))
    return ExpansionReport("far_tail", "o(eps^((N/k)(1-gamma)))", eps, numeric, leading,
                           numeric / leading)


def far_tail_oracle(eps: float, p: Params) -> float:
    """The far tail after ``r = eps s``, reduced to a regularised incomplete
    beta function: ``chat^k* / 2 * B(x; N/(2k), N/2)`` with ``x = eps^2/(1+eps^2)``."""
    from scipy.special import beta as beta_fn, betainc

    a = p.N / (2 * p.k)
    b = _crit_power(p) - a
    x = eps * eps / (1 + eps * eps)
    return p.chat ** p.kstar * 0.5 * beta_fn(a, b) * betainc(a, b, x)


def fit_loglog_slope(eps, values) -> tuple:
    """Least-squares ``log(values) = c + slope * log(eps)``; returns (slope, c)."""
    x = np.log(np.asarray(eps, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    slope, c = np.polyfit(x, y, 1)
    return float(slope), float(c)


def sharper_estimates(spec: InstantonSpec, p: Params, S: Optional[float] = None) -> dict:
    """Variable-exponent integrals of ``w_eps`` and the constant ``C1``.

    Returns ``F_val``, ``F_over_exponent_val``, ``C1``, the base value
    ``C^k* S^(N/2k)``, the predicted ratio including the first correction
    ``D eps^alpha``, and the normalised gaps.
    """
    S = sobolev_constant_S(p) if S is None else S
    S2 = S ** (p.N / (2 * p.k))
    eps, A = spec.eps, spec.amplitude(p)
    N, k, a = p.N, p.k, p.alpha

    def F(r):
        w = w_eps(r, spec, p)
        return r ** (N - 1) * abs_pow(w, exponent(r, p))

    breaks = [eps, spec.r0]
    try:
        breaks.append(a_eps(spec, p))
    except DomainError:
        pass
    lo = eps * 1e-10
    F_val = integrate_log(F, lo, 2 * spec.r0, per_decade=6, breaks=breaks)
    F_over = integrate_log(lambda r: F(r) / exponent(r, p), lo, 2 * spec.r0,
                           per_decade=6, breaks=breaks)
    base = spec.C ** p.kstar * S2
    out = {"eps": eps, "F_val": F_val, "F_over_exponent_val": F_over, "base": base}
    L = abs(math.log(eps))
    scale = eps ** a * L if a > 0 else float("nan")
    out["gap_ratio"] = (F_val - base) / scale
    out["gap_ratio_over_exponent"] = (F_over - base / p.kstar) / scale
    if 0 < a < N / k:
        J0 = s_integral(a, 0, p)
        J1 = s_integral(a, 1, p)
        C1 = (N - 2 * k) / (k + 1) * A ** p.kstar * J0
        D = A ** p.kstar * (math.log(A) * J0 - (N - 2 * k) / (2 * k) * J1)
        out["C1"] = C1
        out["correction"] = D
        out["predicted_ratio"] = 1.0 + D / (C1 * L)
    else:
        out["C1"] = float("nan")
        out["correction"] = float("nan")
        out["predicted_ratio"] = float("nan")
    return out
