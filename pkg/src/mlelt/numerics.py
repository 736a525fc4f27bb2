"""Numerical kernels: half-line quadrature, a contiguous Gauss hypergeometric
function, scalar root finding and Nelder-Mead minimization.

Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DomainError, NoBracket, NonConvergence, NonFinite

__all__ = [
    "QuadratureSpec",
    "OptimizerSpec",
    "MinimizeResult",
    "integrate_halfline",
    "hyp2f1_contiguous",
    "find_root",
    "minimize",
]


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 200

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise DomainError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise DomainError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class OptimizerSpec:
    max_iters: int = 2000
    f_tol: float = 1e-10
    x_tol: float = 1e-8
    restarts: int = 4

    def __post_init__(self) -> None:
        if not (self.f_tol > 0 and self.x_tol > 0):
            raise DomainError("optimizer tolerances must be positive")
        if self.max_iters < 1 or self.restarts < 1:
            raise DomainError("max_iters and restarts must be >= 1")


# ---------------------------------------------------------------------------
# Adaptive Gauss-Kronrod (7/15) on the half line
# ---------------------------------------------------------------------------

# QUADPACK abscissae/weights; the Gauss nodes are the odd-indexed Kronrod ones.
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

_NODES15 = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_WK15 = np.concatenate([_WGK[:-1], _WGK[::-1]])
_WG15 = np.zeros(15)
_WG15[1:7:2] = _WG[:3]
_WG15[7] = _WG[3]
_WG15[9:15:2] = _WG[2::-1]

_EPS = np.finfo(float).eps


def _gk15(f: Callable, a: float, b: float, tail: bool):
    """Kronrod/Gauss pair on one panel.

    Head panels live in y; tail panels live in u with y = 1/u, dy = du/u^2,
    so tail panels can shrink towards u = 0 without losing precision.
    """
    half = 0.5 * (b - a)
    t = 0.5 * (a + b) + half * _NODES15
    if tail:
        y, jac = 1.0 / t, 1.0 / (t * t)
    else:
        y, jac = t, np.ones_like(t)
    fy = np.asarray(f(y), dtype=float)
    scalar = fy.ndim == 1
    if scalar:
        fy = fy[:, None]
    if not np.all(np.isfinite(fy)):
        where = f"y in [{1 / b:.3g}, {1 / a if a else np.inf:.3g}]" if tail else f"y in [{a:.3g}, {b:.3g}]"
        raise NonFinite(f"integrand is not finite for {where}")
    vals = fy * jac[:, None]
    resk = half * (_WK15 @ vals)
    resg = half * (_WG15 @ vals)
    resabs = abs(half) * (_WK15 @ np.abs(vals))
    mean = 0.5 * resk / half
    resasc = abs(half) * (_WK15 @ np.abs(vals - mean))
    err = np.abs(resk - resg)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * err / resasc) ** 1.5)
    err = np.where((resasc != 0) & (err != 0), scaled, err)
    err = np.maximum(err, 50 * _EPS * resabs)
    return resk, err, scalar


def integrate_halfline(f: Callable[[NDArray], ArrayLike], spec: QuadratureSpec | None = None):
    """Integrate ``f`` over ``(0, inf)``.

    ``f`` receives a 1-D array of abscissae and returns either an array of the
    same length or a 2-D array ``(len(y), m)`` for ``m`` simultaneous
    integrands sharing one subdivision. The half line is split at 1; the tail
    is folded onto ``(0, 1]`` with ``y = 1/u`` and both pieces are refined by
    bisecting the panel with the worst error-to-tolerance ratio.

    Returns a float for scalar integrands and an ``(m,)`` array otherwise.

    Raises
    ------
    NonConvergence
        The subdivision budget ran out before every component met tolerance.
    NonFinite
        The integrand produced inf/nan at a node.
    """
    spec = spec or QuadratureSpec()
    panels, vals, errs = [], [], []
    for tail in (False, True):
        v, e, scalar = _gk15(f, 0.0, 1.0, tail)
        panels.append((0.0, 1.0, tail))
        vals.append(v)
        errs.append(e)

    splits = 0
    while True:
        total = np.sum(vals, axis=0)
        total_err = np.sum(errs, axis=0)
        tol = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(total))
        if np.all(total_err <= tol):
            break
        if splits >= spec.max_subdivisions:
            raise NonConvergence(
                f"half-line quadrature: error {float(np.max(total_err)):.3g} above "
                f"tolerance after {splits} subdivisions"
            )
        score = np.max(np.asarray(errs) / tol, axis=1)
        i = int(np.argmax(score))
        a, b, tail = panels.pop(i)
        vals.pop(i)
        errs.pop(i)
        mid = 0.5 * (a + b)
        for lo, hi in ((a, mid), (mid, b)):
            v, e, _ = _gk15(f, lo, hi, tail)
            panels.append((lo, hi, tail))
            vals.append(v)
            errs.append(e)
        splits += 1

    total = np.sum(vals, axis=0)
    return float(total[0]) if scalar else total


# ---------------------------------------------------------------------------
# 2F1(a, b; b+1; -x)
# ---------------------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)
# panel edges for log-space integrands; narrow near 0 where the rates peak
_HEAD_PANELS = np.array([0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.5, 6.5, 10.0, 16.0, 24.0, 32.0, 40.0])
_TOP_PANELS = np.concatenate([_HEAD_PANELS, [56.0, 80.0]])
_LOG_PANELS = np.concatenate([_HEAD_PANELS[:-1], [64.0, 128.0, 256.0, 512.0, 1024.0]])


def _panel_quad(g: Callable[[NDArray], NDArray], edges: NDArray, top: NDArray) -> NDArray:
    """Composite Gauss-Legendre of ``g`` over ``[0, top_i]`` for each row i.

    ``g`` maps an ``(n, k)`` node array to integrand values; panels beyond a
    row's ``top`` are skipped and the last active panel is clipped.
    """
    out = np.zeros_like(top)
    for lo, hi in zip(edges[:-1], edges[1:]):
        active = top > lo
        if not np.any(active):
            break
        end = np.minimum(top[active], hi)
        half = 0.5 * (end - lo)
        nodes = (lo + half)[:, None] + half[:, None] * _GL_X
        out[active] += half * (g(nodes, active) @ _GL_W)
    return out


def _euler_head(a: float, b: float, x: NDArray) -> NDArray:
    """b * int_0^1 t^(b-1) (1 + x t)^(-a) dt for 0 <= x <= 1, with t = exp(-r).

    The integrand beyond r = 40 differs from b*exp(-b r) by less than
    a * exp(-40), so that piece is added in closed form.
    """
    x = np.atleast_1d(x)
    reach = _HEAD_PANELS[-1]

    def g(r, active):
        return np.exp(-b * r - a * np.log1p(x[active][:, None] * np.exp(-r)))

    body = _panel_quad(g, _HEAD_PANELS, np.full(x.shape, reach))
    return b * body + math.exp(-b * reach)


def _euler_far(a: float, b: float, x: NDArray) -> NDArray:
    """b * int_0^1 t^(b-1) (1 + x t)^(-a) dt for x > 1."""
    top = np.log(x)
    if b - a >= 0.5:
        # mass sits near t = 1; integrate u = log(x) - log(x t) from the top
        def g(u, active):
            return np.exp(-b * u - a * np.logaddexp(0.0, top[active][:, None] - u))

        reach = _TOP_PANELS[-1]
        out = b * _panel_quad(g, _TOP_PANELS, np.minimum(top, reach))
        short = top < reach
        if np.any(short):
            head = _euler_head(a, b, np.array([1.0]))[0]
            out[short] += head * np.exp(-b * top[short])
        return out

    def g(v, active):
        return np.exp(b * (v - top[active][:, None]) - a * np.logaddexp(0.0, v))

    head = _euler_head(a, b, np.array([1.0]))[0]
    return head * np.exp(-b * top) + b * _panel_quad(g, _LOG_PANELS, top)


def hyp2f1_contiguous(a: float, b: float, x: ArrayLike):
    """Gauss hypergeometric function ``2F1(a, b; b+1; -x)`` for ``x >= 0``.

    Evaluated from the Euler integral ``b * int_0^1 t^(b-1) (1+xt)^(-a) dt``
    in logarithmic variables, which removes the ``t^(b-1)`` endpoint
    singularity and leaves no radius-of-convergence restriction on ``x``.
    Vectorized over ``x``.
    """
    if not (a > 0):
        raise DomainError(f"hyp2f1_contiguous needs a > 0, got {a}")
    if not (b >= 0):
        raise DomainError(f"hyp2f1_contiguous needs b >= 0, got {b}")
    xs = np.asarray(x, dtype=float)
    if np.any(~(xs >= 0)):
        raise DomainError("hyp2f1_contiguous needs x >= 0")
    flat = np.atleast_1d(xs).ravel()
    if b == 0:
        out = np.ones_like(flat)
    else:
        out = np.empty_like(flat)
        near = flat <= 1.0
        if np.any(near):
            out[near] = _euler_head(a, b, flat[near])
        if not np.all(near):
            out[~near] = _euler_far(a, b, flat[~near])
        # quadrature rounding can overshoot the exact bound 1
        np.minimum(out, 1.0, out=out)
        out[flat == 0.0] = 1.0
    if xs.ndim == 0:
        return float(out[0])
    return out.reshape(xs.shape)


# ---------------------------------------------------------------------------
# Root finding
# ---------------------------------------------------------------------------

def find_root(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12,
              max_iter: int = 500) -> float:
    """Root of ``f`` in ``[lo, hi]`` by Illinois regula falsi with bisection fallback.

    Stops when ``|f(x)| <= tol`` or the bracket is narrower than ``tol``.
    """
    flo, fhi = float(f(lo)), float(f(hi))
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if math.copysign(1.0, flo) == math.copysign(1.0, fhi):
        raise NoBracket(f"f({lo}) = {flo:.3g} and f({hi}) = {fhi:.3g} have the same sign")
    if lo > hi:
        lo, hi, flo, fhi = hi, lo, fhi, flo
    side = 0
    width = hi - lo
    for it in range(max_iter):
        x = (lo * fhi - hi * flo) / (fhi - flo)
        # every third step must have halved the bracket, otherwise bisect
        if not (lo < x < hi) or (it % 3 == 2 and hi - lo > 0.5 * width):
            x = 0.5 * (lo + hi)
        if it % 3 == 2:
            width = hi - lo
        fx = float(f(x))
        if abs(fx) <= tol or hi - lo <= max(tol, 4 * _EPS * abs(x)):
            return x
        if (fx < 0) == (flo < 0):
            lo, flo = x, fx
            if side == -1:
                fhi *= 0.5
            side = -1
        else:
            hi, fhi = x, fx
            if side == 1:
                flo *= 0.5
            side = 1
    raise NonConvergence(f"find_root did not converge in {max_iter} iterations")


# ---------------------------------------------------------------------------
# Nelder-Mead
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MinimizeResult:
    x: NDArray
    fun: float
    converged: bool
    evaluations: int

    def __iter__(self):
        # (argmin, value, converged) unpacking
        return iter((self.x, self.fun, self.converged))


def _nelder_mead(fun, x0: NDArray, step: float, spec: OptimizerSpec):
    d = x0.size
    simplex = np.vstack([x0] + [x0 + step * np.eye(d)[i] for i in range(d)])
    fvals = np.array([fun(v) for v in simplex])
    nfev = d + 1
    converged = False
    for _ in range(spec.max_iters):
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        diam = np.max(np.abs(simplex[1:] - simplex[0]))
        spread = fvals[-1] - fvals[0]
        if diam < spec.x_tol or (np.isfinite(spread) and spread < spec.f_tol):
            converged = True
            break
        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + (centroid - worst)
        fr = fun(xr)
        nfev += 1
        if fr < fvals[0]:
            xe = centroid + 2.0 * (centroid - worst)
            fe = fun(xe)
            nfev += 1
            simplex[-1], fvals[-1] = (xe, fe) if fe < fr else (xr, fr)
            continue
        if fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-1]:
            xc = centroid + 0.5 * (xr - centroid)
            fc = fun(xc)
            nfev += 1
            if fc <= fr:
                simplex[-1], fvals[-1] = xc, fc
                continue
        else:
            xc = centroid + 0.5 * (worst - centroid)
            fc = fun(xc)
            nfev += 1
            if fc < fvals[-1]:
                simplex[-1], fvals[-1] = xc, fc
                continue
        simplex[1:] = simplex[0] + 0.5 * (simplex[1:] - simplex[0])
        fvals[1:] = [fun(v) for v in simplex[1:]]
        nfev += d
    best = int(np.argmin(fvals))
    return simplex[best].copy(), float(fvals[best]), converged, nfev


def minimize(objective: Callable[[NDArray], float], start: ArrayLike,
             spec: OptimizerSpec | None = None, step: float = 0.5) -> MinimizeResult:
    """Nelder-Mead descent from ``start`` with ``spec.restarts`` runs.

    Each restart rebuilds a fresh simplex around the best point found so far;
    restarting stops early once a run no longer improves by more than
    ``f_tol``. Non-finite objective values are treated as ``+inf``.
    """
    spec = spec or OptimizerSpec()

    def fun(v):
        val = objective(v)
        return float(val) if np.isfinite(val) else math.inf

    x = np.atleast_1d(np.asarray(start, dtype=float)).copy()
    best_x, best_f, converged, total = _nelder_mead(fun, x, step, spec)
    for _ in range(spec.restarts - 1):
        rx, rf, rconv, n = _nelder_mead(fun, best_x, step, spec)
        total += n
        improved = best_f - rf
        if rf < best_f:
            best_x, best_f = rx, rf
        converged = rconv
        if not improved > spec.f_tol:
            break
    return MinimizeResult(best_x, best_f, converged, total)
