"""Stationary AR(1) model ``Y_t = rho Y_{t-1} + eps_t`` with ML(alpha, 1) marginals.

Stationarity forces the innovation transform
``(1 + (rho s)^alpha) / (1 + s^alpha) = rho^alpha + (1 - rho^alpha) / (1 + s^alpha)``,
i.e. an atom of mass ``rho^alpha`` at zero mixed with an ML(alpha, 1) law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from . import ml_dist
from .errors import DomainError
from .numerics import QuadratureSpec, integrate_halfline

__all__ = [
    "AR1Params",
    "Trajectory",
    "innovation_lt",
    "innovation_pdf",
    "sample_innovations",
    "simulate",
    "marginal_lt_ml_innovations",
    "joint_lt",
    "reversibility_gap",
]


@dataclass(frozen=True)
class AR1Params:
    alpha: float
    rho: float

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha < 1.0):
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not (0.0 <= self.rho < 1.0):
            raise DomainError(f"rho must lie in [0, 1), got {self.rho}")

    @property
    def atom(self) -> float:
        """Mass of the innovation atom at zero, ``rho^alpha``."""
        return self.rho ** self.alpha


@dataclass(frozen=True)
class Trajectory:
    y: NDArray
    eps: NDArray
    params: AR1Params
    seed: int
    y0: float = math.nan

    def __len__(self) -> int:
        return self.y.size


def _nonneg(s: ArrayLike, name: str = "s") -> NDArray:
    s = np.asarray(s, dtype=float)
    if np.any(~(s >= 0)):
        raise DomainError(f"{name} must be non-negative")
    return s


def _ret(val, like):
    return float(val) if np.ndim(like) == 0 else val


def innovation_lt(p: AR1Params, s: ArrayLike):
    """``(1 + (rho s)^alpha) / (1 + s^alpha)``."""
    s = _nonneg(s)
    val = (1.0 + (p.rho * s) ** p.alpha) / (1.0 + s ** p.alpha)
    return _ret(val, s)


def innovation_pdf(p: AR1Params, x: ArrayLike, spec: QuadratureSpec | None = None):
    """Density of the continuous part of the innovation law (total mass ``1 - rho^alpha``)."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("x must be positive")
    a = p.alpha
    sin_pa, cos_pa = math.sin(math.pi * a), math.cos(math.pi * a)
    scale = (1.0 - p.rho ** a) * sin_pa / math.pi
    xs = np.atleast_1d(x).ravel()

    def integrand(w):
        # y = w / x keeps the exponential factor at unit scale per column
        y = np.outer(w, 1.0 / xs)
        ya = y ** a
        return ya / (1.0 + ya * ya + 2.0 * ya * cos_pa) * (np.exp(-w)[:, None] / xs)

    val = (scale * integrate_halfline(integrand, spec)).reshape(x.shape)
    return _ret(val, x)


def _innovations(rng: np.random.Generator, p: AR1Params, n: int) -> NDArray:
    on_atom = rng.random(n) < p.atom
    draws = ml_dist._draw_unit(rng, p.alpha, n)
    return np.where(on_atom, 0.0, draws)


def sample_innovations(p: AR1Params, n: int, seed: int) -> NDArray:
    """Exact mixture draws: 0 with probability ``rho^alpha``, else ML(alpha, 1)."""
    if n < 1:
        raise DomainError("sample size must be >= 1")
    return _innovations(np.random.default_rng(seed), p, int(n))


def simulate(p: AR1Params, n: int, seed: int) -> Trajectory:
    """Simulate ``n`` steps started exactly in the stationary law.

    A pre-sample value ``Y_0 ~ ML(alpha, 1)`` is drawn and the recursion is
    applied for t = 1..n, so ``y[0]`` is already stationary and every stored
    innovation is used.
    """
    if n < 2:
        raise DomainError("trajectory length must be >= 2")
    rng = np.random.default_rng(seed)
    y0 = float(ml_dist._draw_unit(rng, p.alpha, 1)[0])
    eps = _innovations(rng, p, int(n))
    y = np.empty(int(n))
    prev = y0
    rho = p.rho
    for t in range(int(n)):
        prev = rho * prev + eps[t]
        y[t] = prev
    return Trajectory(y=y, eps=eps, params=p, seed=seed, y0=y0)


def marginal_lt_ml_innovations(p: AR1Params, s: float, terms: int = 0) -> float:
    """``1 / prod_i (1 + (rho^i s)^alpha)`` for the AR(1) driven by ML(alpha, 1) noise.

    ``terms = 0`` keeps adding factors until the next one differs from 1 by
    less than 1e-15.
    """
    if not s >= 0:
        raise DomainError("s must be non-negative")
    if terms < 0:
        raise DomainError("terms must be >= 0")
    log_prod = 0.0
    scale = float(s)
    i = 0
    while True:
        if terms and i >= terms:
            break
        inc = scale ** p.alpha
        if not terms and i > 0 and inc < 1e-15:
            break
        log_prod += math.log1p(inc)
        scale *= p.rho
        i += 1
        if not terms and scale == 0.0:
            break
    return math.exp(-log_prod)


def joint_lt(p: AR1Params, s1: ArrayLike, s2: ArrayLike):
    """Transform of ``(Y_{t-1}, Y_t)``: ``(1+(rho s2)^a) / ((1+s2^a)(1+(s1+rho s2)^a))``."""
    s1 = _nonneg(s1, "s1")
    s2 = _nonneg(s2, "s2")
    a = p.alpha
    val = (1.0 + (p.rho * s2) ** a) / ((1.0 + s2 ** a) * (1.0 + (s1 + p.rho * s2) ** a))
    return _ret(val, np.broadcast(s1, s2))


def reversibility_gap(p: AR1Params, grid) -> float:
    """``max |joint_lt(s1, s2) - joint_lt(s2, s1)|`` over all grid pairs.

    ``grid`` is an :class:`~mlelt.estimation.LTGrid` or any 1-D array of
    points; a 2-column array is read as explicit ``(s1, s2)`` pairs.
    """
    pts = np.asarray(getattr(grid, "points", grid), dtype=float)
    if pts.ndim == 2:
        s1, s2 = pts[:, 0], pts[:, 1]
    else:
        s1, s2 = np.meshgrid(pts, pts, indexing="ij")
    return float(np.max(np.abs(joint_lt(p, s1, s2) - joint_lt(p, s2, s1))))
