"""Problem parameters, graded radial grids, radial profiles and their norms.

A radial profile ``v`` on ``[0, 1]`` with ``v(1) = 0`` represents the radial
function ``u(x) = v(|x|)`` on the unit ball of R^N.  Everything here works with
the one-dimensional weighted integrals

    ||v||_X1^(k+1) = omega_{N,k} * int_0^1 r^(N-k) |v'|^(k+1) dr
    F(v)           = int_0^1 r^(N-1) |v|^(k* + r^alpha) dr

evaluated by quadrature on a graded mesh that clusters nodes at the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DomainError, InvalidInputError

__all__ = [
    "Params",
    "RadialGrid",
    "RadialFunction",
    "sphere_area",
    "exponent",
    "abs_pow",
    "gradient_energy",
    "x1_norm",
    "lq_norm",
    "supercritical_functional",
    "radial_bound",
    "tail_radius",
    "luxemburg_norm",
    "random_unit_profiles",
    "embedding_constant",
]


def sphere_area(N: int) -> float:
    """Surface area of the unit sphere in R^N, ``2 pi^(N/2) / Gamma(N/2)``."""
    return 2.0 * math.pi ** (N / 2) / math.gamma(N / 2)


@dataclass(frozen=True)
class Params:
    """The triple (N, k, alpha) and the constants derived from it.

    ``alpha = 0`` is only accepted with ``test_mode=True``; in that mode the
    variable exponent collapses to the critical exponent ``k*`` so closed-form
    oracles can be checked.
    """

    N: int
    k: int
    alpha: float
    test_mode: bool = False

    def __post_init__(self):
        if int(self.N) != self.N or int(self.k) != self.k:
            raise InvalidInputError("N and k must be integers")
        if self.N < 3:
            raise InvalidInputError(f"N must be >= 3 (got N={self.N})")
        if self.k < 1:
            raise InvalidInputError(f"k must be >= 1 (got k={self.k})")
        if 2 * self.k >= self.N:
            raise InvalidInputError(
                f"constraint 2k < N violated (k={self.k}, N={self.N})")
        if not math.isfinite(self.alpha) or self.alpha < 0:
            raise InvalidInputError(f"alpha must be finite and > 0 (got {self.alpha})")
        if self.alpha == 0 and not self.test_mode:
            raise InvalidInputError("alpha = 0 is only allowed in test mode")

    @property
    def kstar(self) -> float:
        return self.N * (self.k + 1) / (self.N - 2 * self.k)

    @property
    def binom(self) -> int:
        return math.comb(self.N, self.k)

    @property
    def omega_sphere(self) -> float:
        return sphere_area(self.N)

    @property
    def omega_nk(self) -> float:
        return self.omega_sphere * self.binom / self.N

    @property
    def tau(self) -> float:
        return self.N / self.binom

    @property
    def cbar(self) -> float:
        return self.k * self.omega_nk ** (-1.0 / self.k) / (self.N - 2 * self.k)

    @property
    def chat(self) -> float:
        # Amplitude for which the instanton solves the radial equation with unit
        # multiplier, i.e. both S-integrals coincide.
        N, k = self.N, self.k
        return (N * ((N - 2 * k) / k) ** k) ** ((N - 2 * k) / (2 * k * (k + 1)))

    @property
    def decay(self) -> float:
        """Instanton decay exponent ``(N - 2k) / k``."""
        return (self.N - 2 * self.k) / self.k

    @property
    def attainable(self) -> bool:
        """True when ``0 < alpha < (N - 2k)/k`` (existence regime)."""
        return 0 < self.alpha < self.decay

    def pure_critical(self) -> "Params":
        """Same (N, k) with the exponent frozen at ``k*``."""
        return Params(self.N, self.k, 0.0, test_mode=True)

    def derived(self) -> dict:
        return {
            "kstar": self.kstar,
            "omega_sphere": self.omega_sphere,
            "omega_nk": self.omega_nk,
            "tau": self.tau,
            "cbar": self.cbar,
            "chat": self.chat,
        }


def exponent(r, p: Params):
    """Variable exponent ``k* + r^alpha`` (``k*`` in test mode)."""
    r = np.asarray(r, dtype=float)
    if p.alpha == 0:
        return np.full_like(r, p.kstar)
    return p.kstar + r ** p.alpha


def abs_pow(v, s):
    """``|v|^s`` through exp/log with the convention ``0^s = 0`` for s > 0."""
    a = np.abs(np.asarray(v, dtype=float))
    s = np.broadcast_to(np.asarray(s, dtype=float), a.shape)
    out = np.zeros_like(a)
    pos = a > 0
    out[pos] = np.exp(s[pos] * np.log(a[pos]))
    return out


# Composite Boole rule on one panel of four equal intervals.
_BOOLE = np.array([7.0, 32.0, 12.0, 32.0, 7.0]) * (2.0 / 45.0)
_SIMPSON = np.array([1.0, 4.0, 1.0]) / 3.0
_SIMPSON38 = np.array([1.0, 3.0, 3.0, 1.0]) * (3.0 / 8.0)


def _uniform_weights(n: int) -> np.ndarray:
    """Weights of a composite Newton-Cotes rule on n unit intervals."""
    w = np.zeros(n + 1)
    full, rem = divmod(n, 4)
    for j in range(full):
        w[4 * j:4 * j + 5] += _BOOLE
    start = 4 * full
    if rem == 1:
        # Fold the last interval into a Simpson 3/8 panel ending at n.
        if full == 0:
            w[0:2] += 0.5
        else:
            w[start - 4:start + 1] -= _BOOLE
            w[start - 4:start - 1] += _SIMPSON
            w[start - 2:start + 2] += _SIMPSON38
    elif rem == 2:
        w[start:start + 3] += _SIMPSON
    elif rem == 3:
        w[start:start + 4] += _SIMPSON38
    return w


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Graded mesh ``r_i = (i/n)^g``, ``i = 0..n``, on ``[0, 1]``.

    ``weights`` integrate ``f(r)`` over ``[0, 1]``: a composite Boole rule in the
    grading variable ``t = r^(1/g)`` with the Jacobian ``g t^(g-1)`` folded in.
    The origin is kept as node 0 (its weight is zero for ``g > 1``) so that
    profiles carry their value ``v(0)``.
    """

    n: int = 4096
    g: float = 3.0
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 4:
            raise InvalidInputError(f"grid size n must be an integer >= 4 (got {self.n})")
        if not self.g >= 1:
            raise InvalidInputError(f"grading exponent g must be >= 1 (got {self.g})")
        t = np.arange(self.n + 1) / self.n
        r = t ** self.g
        r[-1] = 1.0
        w = _uniform_weights(self.n) / self.n * self.g * t ** (self.g - 1)
        r.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "nodes", r)
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.n + 1

    @cached_property
    def spacing(self) -> np.ndarray:
        return np.diff(self.nodes)

    def element_moments(self, m: float) -> np.ndarray:
        """Exact ``int_{r_e}^{r_{e+1}} r^m dr`` for every element."""
        r = self.nodes
        return (r[1:] ** (m + 1) - r[:-1] ** (m + 1)) / (m + 1)

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f))

    def refined(self) -> "RadialGrid":
        """Same grading with half the spacing in the grading variable."""
        return RadialGrid(2 * self.n, self.g)

    def coarsened(self) -> "RadialGrid":
        return RadialGrid(self.n // 2, self.g)

    def cumulative(self, f) -> np.ndarray:
        """``int_0^{r_i} f dr`` at every node (trapezoid in the grading variable)."""
        t = np.arange(self.n + 1) / self.n
        h = self.g * t ** (self.g - 1) * np.asarray(f, dtype=float)
        out = np.zeros(self.size)
        out[1:] = np.cumsum(0.5 * (h[1:] + h[:-1])) / self.n
        return out


class RadialFunction:
    """Nodal values of a radial profile on a :class:`RadialGrid`.

    Without an explicit ``derivative`` the profile is read as the piecewise
    linear interpolant of its nodal values: gradient integrals then use the
    exact element slopes, and :attr:`derivative` reports second-order central
    differences.  Profiles known in closed form (instantons, shooting
    solutions) pass their derivative explicitly and are integrated nodally.
    """

    def __init__(self, grid: RadialGrid, values, derivative=None, x1: bool = True):
        values = np.array(values, dtype=float)
        if values.shape != (grid.size,):
            raise InvalidInputError(
                f"expected {grid.size} nodal values, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("non-finite nodal values")
        if derivative is not None:
            derivative = np.array(derivative, dtype=float)
            if derivative.shape != values.shape or not np.all(np.isfinite(derivative)):
                raise InvalidInputError("derivative must be finite and match values")
        if x1:
            scale = max(1.0, float(np.max(np.abs(values))))
            if abs(values[-1]) > 1e-12 * scale:
                raise InvalidInputError(f"X1 profile must vanish at r = 1 (v(1) = {values[-1]})")
            values[-1] = 0.0
        values.setflags(write=False)
        if derivative is not None:
            derivative.setflags(write=False)
        self.grid = grid
        self.values = values
        self._derivative = derivative
        self.x1 = x1

    @classmethod
    def from_callable(cls, grid: RadialGrid, f, df=None, x1: bool = True):
        r = grid.nodes
        return cls(grid, f(r), None if df is None else df(r), x1=x1)

    @property
    def piecewise_linear(self) -> bool:
        return self._derivative is None

    @property
    def slopes(self) -> np.ndarray:
        """Element slopes of the piecewise-linear interpolant."""
        return np.diff(self.values) / self.grid.spacing

    @property
    def derivative(self) -> np.ndarray:
        if self._derivative is not None:
            return self._derivative
        return np.gradient(self.values, self.grid.nodes, edge_order=2)

    def scaled(self, c: float) -> "RadialFunction":
        d = None if self._derivative is None else c * self._derivative
        return RadialFunction(self.grid, c * self.values, d, x1=self.x1)

    def absolute(self) -> "RadialFunction":
        d = None if self._derivative is None else np.sign(self.values) * self._derivative
        return RadialFunction(self.grid, np.abs(self.values), d, x1=self.x1)

    def __repr__(self):
        kind = "p1" if self.piecewise_linear else "explicit-derivative"
        return f"RadialFunction(n={self.grid.n}, {kind}, v(0)={self.values[0]:.6g})"


def _check(v: RadialFunction):
    if not np.all(np.isfinite(v.values)):
        raise InvalidInputError("non-finite nodal values")


def gradient_energy(v: RadialFunction, p: Params, r0: float = 0.0) -> float:
    """``int_{r0}^1 r^(N-k) |v'|^(k+1) dr``."""
    _check(v)
    grid, m = v.grid, p.N - p.k
    if v.piecewise_linear:
        s = np.abs(v.slopes) ** (p.k + 1)
        if r0 <= 0:
            return float(np.dot(grid.element_moments(m), s))
        r = grid.nodes
        lo = np.maximum(r[:-1], r0)
        mom = np.where(r[1:] > r0, (r[1:] ** (m + 1) - lo ** (m + 1)) / (m + 1), 0.0)
        return float(np.dot(mom, s))
    dens = grid.nodes ** m * np.abs(v.derivative) ** (p.k + 1)
    total = grid.integrate(dens)
    if r0 <= 0:
        return total
    head = np.interp(r0, grid.nodes, grid.cumulative(dens))
    return max(total - head, 0.0)


def x1_norm(v: RadialFunction, p: Params) -> float:
    """Weighted gradient norm ``(omega_{N,k} int r^(N-k)|v'|^(k+1))^(1/(k+1))``."""
    if not v.x1:
        raise InvalidInputError("x1_norm requires a profile in X1 mode")
    return (p.omega_nk * gradient_energy(v, p)) ** (1.0 / (p.k + 1))


def lq_norm(v: RadialFunction, q: float, j: int, p: Params) -> float:
    """Weighted Lebesgue norm ``(int_0^1 r^(N-j) |v|^q dr)^(1/q)``."""
    _check(v)
    if not (math.isfinite(q) and q >= 1):
        raise InvalidInputError(f"q must be finite and >= 1 (got {q})")
    if not 1 <= j <= p.k:
        raise InvalidInputError(f"j must lie in [1, k] (got {j})")
    r = v.grid.nodes
    return v.grid.integrate(r ** (p.N - j) * abs_pow(v.values, q)) ** (1.0 / q)


def supercritical_functional(v: RadialFunction, p: Params) -> float:
    """``int_0^1 r^(N-1) |v|^(k* + r^alpha) dr`` by nodal quadrature."""
    _check(v)
    r = v.grid.nodes
    return v.grid.integrate(r ** (p.N - 1) * abs_pow(v.values, exponent(r, p)))


def radial_bound(r, p: Params):
    """Pointwise bound on ``|v(r)|`` for profiles of unit X1 norm."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0) or np.any(r > 1):
        raise DomainError("radial_bound needs 0 < r <= 1")
    b = (p.cbar * (r ** (-p.decay) - 1.0)) ** (p.k / (p.k + 1))
    return float(b) if b.ndim == 0 else b


def tail_radius(p: Params) -> float:
    """Radius beyond which every unit-norm profile satisfies ``|v| <= 1``."""
    return (p.cbar / (1.0 + p.cbar)) ** (p.k / (p.N - 2 * p.k))


def _modular(v: RadialFunction, p: Params, lam: float) -> float:
    r = v.grid.nodes
    return v.grid.integrate(r ** (p.N - 1) * abs_pow(v.values / lam, exponent(r, p)))


def luxemburg_norm(v: RadialFunction, p: Params) -> float:
    """Luxemburg norm in the variable-exponent space, by bisection on lambda.

    The radial profile is measured with the one-dimensional modular
    ``int_0^1 r^(N-1) |v/lambda|^(k*+r^alpha) dr``.
    """
    _check(v)
    if not np.any(v.values):
        return 0.0
    lo = hi = max(float(np.max(np.abs(v.values))), 1e-300)
    for _ in range(2100):
        if _modular(v, p, lo) > 1.0:
            break
        lo *= 0.5
    else:
        raise RuntimeError("Luxemburg bisection failed to bracket from below")
    for _ in range(2100):
        if _modular(v, p, hi) <= 1.0:
            break
        hi *= 2.0
    else:
        raise RuntimeError("Luxemburg bisection failed to bracket from above")
    # Bisection in log(lambda) down to adjacent floating-point numbers.
    while True:
        mid = math.sqrt(lo * hi)
        if not lo < mid < hi:
            return hi
        if _modular(v, p, mid) > 1.0:
            lo = mid
        else:
            hi = mid


def random_unit_profiles(grid: RadialGrid, p: Params, count: int, rng: np.random.Generator,
                         knots: int = 12):
    """Random piecewise-linear profiles of unit X1 norm.

    Each profile interpolates random values at random knots (log-uniform in
    ``[1e-4, 1)``), pinned to zero at ``r = 1``, and is then rescaled.
    """
    r = grid.nodes
    out = []
    for _ in range(count):
        kn = np.sort(10.0 ** rng.uniform(-4.0, 0.0, knots))
        kn = np.concatenate(([0.0], kn, [1.0]))
        vals = rng.normal(size=kn.size) * (1.0 + 1.0 / np.sqrt(kn + 1e-3))
        vals[-1] = 0.0
        v = RadialFunction(grid, np.interp(r, kn, vals))
        nrm = x1_norm(v, p)
        if nrm == 0:
            continue
        out.append(v.scaled(1.0 / nrm))
    return out


def embedding_constant(profiles, p: Params) -> dict:
    """Empirical cap of the functional over unit-norm profiles and the
    resulting Luxemburg embedding constant ``max(1, C^(1/k*))``."""
    values = [supercritical_functional(v, p) for v in profiles]
    cap = max(values) if values else 0.0
    return {"cap": cap, "lambda_star": max(1.0, cap ** (1.0 / p.kstar))}
