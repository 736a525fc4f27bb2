"""Three-parameter Mittag-Leffler (Prabhakar) distribution.

The law is the unit-time marginal of the Prabhakar subordinator with rate
parameter fixed to one. Its Laplace exponent involves ``2F1(a, b; b+1; -x)``
with ``a = gamma`` and ``b = gamma + (1 - sigma)/alpha``; the ``c = b + 1``
choice is what makes ``gamma = sigma = 1`` collapse to ML(alpha, 1).

For ``sigma > 1`` the exponent is bounded, ``Psi(inf) = Gamma((sigma-1)/alpha)``,
so the law has an atom at zero of mass ``exp(-Psi(inf))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DomainError, NonConvergence
from .lt_inversion import InversionSpec, sample_from_lt
from .numerics import hyp2f1_contiguous

__all__ = ["PrabhakarParams", "prabhakar_function", "laplace_exponent", "lt", "sample"]


@dataclass(frozen=True)
class PrabhakarParams:
    alpha: float
    sigma: float
    gamma: float

    def __post_init__(self) -> None:
        if not (0.0 < self.alpha <= 1.0):
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not (self.gamma > 0.0 and math.isfinite(self.gamma)):
            raise DomainError(f"gamma must be positive, got {self.gamma}")
        upper = 1.0 + self.alpha * self.gamma
        if not (1.0 <= self.sigma < upper):
            raise DomainError(
                f"sigma must lie in [1, 1 + alpha*gamma) = [1, {upper:g}), got {self.sigma}"
            )

    @property
    def b(self) -> float:
        """Second 2F1 parameter, ``gamma + (1 - sigma)/alpha`` in ``(0, gamma]``."""
        return self.gamma + (1.0 - self.sigma) / self.alpha

    @property
    def exponent(self) -> float:
        """Power of ``u`` in the Laplace exponent, ``alpha*gamma - sigma + 1``."""
        return self.alpha * self.gamma - self.sigma + 1.0

    @property
    def atom(self) -> float:
        """Probability of the atom at zero (0 when ``sigma = 1``)."""
        if self.sigma == 1.0:
            return 0.0
        return math.exp(-math.gamma((self.sigma - 1.0) / self.alpha))


def prabhakar_function(alpha: float, sigma: float, gamma: float, z: float,
                       rtol: float = 1e-15, max_terms: int = 10_000) -> float:
    """Series ``(1/G(gamma)) sum_k G(k+gamma) z^k / (k! G(alpha k + sigma))``.

    Reliable for moderate ``|z|``; large negative arguments cancel badly.
    """
    if not (alpha > 0 and sigma > 0 and gamma > 0):
        raise DomainError("prabhakar_function needs positive alpha, sigma, gamma")
    if z == 0:
        return 1.0 / math.gamma(sigma)
    logz = math.log(abs(z))
    neg = z < 0
    lg_gamma = math.lgamma(gamma)
    total = 0.0
    prev = math.inf
    for k in range(max_terms):
        logterm = (math.lgamma(k + gamma) - lg_gamma - math.lgamma(k + 1.0)
                   - math.lgamma(alpha * k + sigma) + k * logz)
        term = math.exp(logterm)
        if neg and k % 2:
            term = -term
        total += term
        if abs(term) < rtol * abs(total) and abs(term) <= prev:
            return total
        prev = abs(term)
    raise NonConvergence(f"Prabhakar series did not settle within {max_terms} terms (z={z})")


def laplace_exponent(p: PrabhakarParams, u: ArrayLike):
    """``Psi(u) = u^e G(gamma)/G(b+1) 2F1(gamma, b; b+1; -u^alpha)``."""
    u = np.asarray(u, dtype=float)
    if np.any(~(u > 0)):
        raise DomainError("Laplace exponent needs u > 0")
    b = p.b
    pref = math.exp(math.lgamma(p.gamma) - math.lgamma(b + 1.0))
    val = pref * u ** p.exponent * hyp2f1_contiguous(p.gamma, b, u ** p.alpha)
    return float(val) if u.ndim == 0 else val


def lt(p: PrabhakarParams, s: ArrayLike):
    """Laplace transform ``exp(-Psi(s))``; exactly 1 at ``s = 0``."""
    s = np.asarray(s, dtype=float)
    if np.any(~(s >= 0)):
        raise DomainError("Laplace variable must be non-negative")
    flat = s.ravel()
    out = np.ones_like(flat)
    pos = flat > 0
    if np.any(pos):
        out[pos] = np.exp(-np.asarray(laplace_exponent(p, flat[pos])))
    out = out.reshape(s.shape)
    return float(out) if s.ndim == 0 else out


def sample(p: PrabhakarParams, n: int, seed: int, spec: InversionSpec | None = None) -> NDArray:
    """Draws by numerical inversion of :func:`lt`.

    Draws falling on the atom at zero come back as values below
    ``spec.quantile_tol`` rather than exact zeros.
    """
    return sample_from_lt(partial(lt, p), n, seed, spec)
