"""Sampling a positive law known only through its Laplace transform.

The CDF is recovered with the Gaver-Stehfest formula (real-axis transform
evaluations only) and inverted by bracketing plus Illinois regula falsi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DomainError, NoBracket, NonConvergence, NonFinite
from .numerics import find_root

__all__ = ["InversionSpec", "stehfest_weights", "cdf_from_lt", "quantile_from_lt", "sample_from_lt"]

LTFunction = Callable[[NDArray], NDArray]

_LN2 = math.log(2.0)
_BRACKET_LIMIT = 2.0 ** 100


@dataclass(frozen=True)
class InversionSpec:
    stehfest_terms: int = 16
    cdf_clamp: bool = True
    bracket_growth: float = 2.0
    quantile_tol: float = 1e-9

    def __post_init__(self) -> None:
        n = self.stehfest_terms
        if n % 2 or not (8 <= n <= 18):
            raise DomainError(f"stehfest_terms must be even and in [8, 18], got {n}")
        if not self.bracket_growth > 1.0:
            raise DomainError("bracket_growth must exceed 1")
        if not self.quantile_tol > 0.0:
            raise DomainError("quantile_tol must be positive")


@lru_cache(maxsize=None)
def stehfest_weights(n: int) -> tuple[float, ...]:
    """Stehfest coefficients V_1..V_n, computed in exact rational arithmetic."""
    half = n // 2
    out = []
    for k in range(1, n + 1):
        acc = Fraction(0)
        for j in range((k + 1) // 2, min(k, half) + 1):
            acc += Fraction(
                j ** half * math.factorial(2 * j),
                math.factorial(half - j) * math.factorial(j) * math.factorial(j - 1)
                * math.factorial(k - j) * math.factorial(2 * j - k),
            )
        out.append(float((-1) ** (k + half) * acc))
    return tuple(out)


def cdf_from_lt(phi: LTFunction, x: ArrayLike, spec: InversionSpec | None = None):
    """Gaver-Stehfest estimate of ``F(x)`` from the transform ``phi`` of the law.

    ``phi(s)/s`` is the transform of ``F``, so
    ``F(x) ~ (ln2/x) sum_k V_k phi(s_k)/s_k = sum_k V_k phi(k ln2 / x) / k``.
    ``phi`` must accept arrays.
    """
    spec = spec or InversionSpec()
    xs = np.asarray(x, dtype=float)
    if np.any(~(xs > 0)):
        raise DomainError("cdf_from_lt needs x > 0")
    n = spec.stehfest_terms
    k = np.arange(1, n + 1, dtype=float)
    coef = np.asarray(stehfest_weights(n)) / k
    flat = xs.ravel()
    s = np.outer(_LN2 / flat, k)
    vals = np.asarray(phi(s.ravel()), dtype=float).reshape(s.shape)
    if not np.all(np.isfinite(vals)):
        raise NonFinite("Laplace transform returned a non-finite value")
    out = vals @ coef
    if spec.cdf_clamp:
        out = np.clip(out, 0.0, 1.0)
    out = out.reshape(xs.shape)
    return float(out) if xs.ndim == 0 else out


def _bracket(F: Callable[[NDArray], NDArray], u: NDArray, spec: InversionSpec):
    """Geometric expansion from x = 1 until F(lo) < u <= F(hi) for every element.

    Elements whose CDF still exceeds u below ``quantile_tol`` sit on an atom at
    zero (or are numerically indistinguishable from one); they are flagged.
    """
    g = spec.bracket_growth
    lo = np.ones_like(u)
    hi = np.ones_like(u)
    f1 = F(lo)
    up = f1 < u
    atom = np.zeros(u.shape, dtype=bool)

    idx = np.flatnonzero(up)
    while idx.size:
        hi[idx] *= g
        if np.any(hi[idx] > _BRACKET_LIMIT):
            raise NoBracket("CDF never reaches the target level; transform is not a proper law")
        lo[idx] = hi[idx] / g
        idx = idx[F(hi[idx]) < u[idx]]

    idx = np.flatnonzero(~up)
    while idx.size:
        lo[idx] /= g
        hi[idx] = lo[idx] * g
        below = lo[idx] < spec.quantile_tol
        atom[idx[below]] = True
        idx = idx[~below]
        if idx.size:
            idx = idx[F(lo[idx]) >= u[idx]]
    return lo, hi, atom


def _illinois(F, u, lo, hi, tol, max_iter=200):
    """Vectorised regula falsi (Illinois variant) for F(x) = u on [lo, hi].

    The width test is relative above x = 1: heavy-tailed quantiles can be
    far too large for an absolute tolerance to be representable.
    """
    flo = F(lo) - u
    fhi = F(hi) - u
    x = 0.5 * (lo + hi)
    active = np.ones(u.shape, dtype=bool)
    side = np.zeros(u.shape, dtype=int)
    for it in range(max_iter):
        idx = np.flatnonzero(active)
        if not idx.size:
            return x
        a, b, fa, fb = lo[idx], hi[idx], flo[idx], fhi[idx]
        with np.errstate(invalid="ignore", divide="ignore"):
            xi = (a * fb - b * fa) / (fb - fa)
        bad = ~((xi > a) & (xi < b))
        if it % 4 == 3:
            bad[:] = True
        xi = np.where(bad, 0.5 * (a + b), xi)
        fx = F(xi) - u[idx]
        x[idx] = xi
        done = (np.abs(fx) <= tol) | (b - a <= tol * np.maximum(1.0, xi))
        left = fx < 0
        # left: root lies in [xi, b]
        lo[idx] = np.where(left, xi, a)
        flo[idx] = np.where(left, fx, np.where(side[idx] == 1, 0.5 * fa, fa))
        hi[idx] = np.where(left, b, xi)
        fhi[idx] = np.where(left, np.where(side[idx] == -1, 0.5 * fb, fb), fx)
        side[idx] = np.where(left, -1, 1)
        active[idx[done]] = False
    raise NonConvergence("quantile inversion did not converge")


def _quantiles(phi: LTFunction, u: NDArray, spec: InversionSpec) -> NDArray:
    def F(x):
        return cdf_from_lt(phi, x, spec)

    lo, hi, atom = _bracket(F, u, spec)
    out = lo.copy()
    free = ~atom
    if np.any(free):
        out[free] = _illinois(F, u[free], lo[free], hi[free], spec.quantile_tol)
    return out


def quantile_from_lt(phi: LTFunction, u: float, spec: InversionSpec | None = None) -> float:
    """Solve ``cdf_from_lt(phi, x) = u``.

    For ``u`` below an atom at zero (``F(0+) >= u``) the returned value is the
    last bracket point below ``quantile_tol``.
    """
    spec = spec or InversionSpec()
    if not (0.0 < u < 1.0):
        raise DomainError("quantile level must lie in (0, 1)")
    uu = np.array([float(u)])
    lo, hi, atom = _bracket(lambda x: cdf_from_lt(phi, x, spec), uu, spec)
    if atom[0]:
        return float(lo[0])
    return find_root(lambda x: cdf_from_lt(phi, x, spec) - u, float(lo[0]), float(hi[0]), spec.quantile_tol)


def sample_from_lt(phi: LTFunction, n: int, seed: int, spec: InversionSpec | None = None) -> NDArray:
    """``n`` inverse-CDF draws; the uniforms come from ``default_rng(seed)``."""
    spec = spec or InversionSpec()
    if n < 1:
        raise DomainError("sample size must be >= 1")
    rng = np.random.default_rng(seed)
    u = rng.random(int(n))
    while np.any(u == 0.0):
        u[u == 0.0] = rng.random(int(np.sum(u == 0.0)))
    return _quantiles(phi, u, spec)
