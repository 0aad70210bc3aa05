"""Numerical kernels used by the models and fitters.

Summation goes through :func:`math.fsum` (exactly rounded, hence
independent of term order); linear fits use column-pivoted QR; the scalar
minimizer is Brent's method with an absolute tolerance.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, DomainError, ObjectiveError, SingularMatrixError

_EPS = sys.float_info.epsilon
_TINY = 1e-300

MAX_SERIES_TERMS = 5_000_000


@dataclass(frozen=True)
class SeriesResult:
    value: float
    terms_used: int
    tail_bound: float


def sum_series(
    term: Callable[[int], float],
    ratio_bound: Callable[[int], float],
    rtol: float = 1e-13,
    max_terms: int = MAX_SERIES_TERMS,
) -> SeriesResult:
    """Sum ``term(1) + term(2) + ...`` until the geometric tail bound is small.

    ``ratio_bound(n)`` must bound ``|term(m+1) / term(m)|`` for every
    ``m >= n``. Summation stops once ``|term(n)| / (1 - q) < rtol * |S_n|``.
    """
    terms: list[float] = []
    partial = 0.0
    for n in range(1, max_terms + 1):
        t = term(n)
        terms.append(t)
        partial += t
        q = ratio_bound(n)
        if q < 1.0:
            tail = abs(t) / (1.0 - q)
            if tail < rtol * abs(partial) or t == 0.0 and n > 1:
                return SeriesResult(math.fsum(terms), n, tail)
    raise ConvergenceError(
        f"series did not converge within {max_terms} terms",
        partial_sum=math.fsum(terms),
        terms=max_terms,
    )


@dataclass(frozen=True)
class WlsSolution:
    params: np.ndarray
    covariance: np.ndarray
    residual_chi2: float


def weighted_linear_least_squares(design, y, sigma) -> WlsSolution:
    """Minimise ``sum(((y - design @ p) / sigma)**2)`` over ``p``.

    Columns are scaled to unit norm and factored with column-pivoted QR, so
    badly scaled bases such as ``{1, d}`` with ``d`` in metres are fine.

    Raises
    ------
    SingularMatrixError
        If the weighted design is numerically rank deficient. ``column``
        names the first dependent column.
    """
    a = np.atleast_2d(np.asarray(design, dtype=float))
    if a.shape[0] == 1 and np.ndim(design) == 1:
        a = a.T
    y = np.asarray(y, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    n, p = a.shape
    if y.shape != (n,) or sigma.shape != (n,):
        raise DomainError(f"shape mismatch: design {a.shape}, y {y.shape}, sigma {sigma.shape}")
    if n < p or p < 1:
        raise DomainError(f"need n >= p >= 1, got n={n}, p={p}")
    if np.any(~(sigma > 0)):
        raise DomainError("all sigma must be > 0")

    w = 1.0 / sigma
    aw = a * w[:, None]
    yw = y * w
    scale = np.linalg.norm(aw, axis=0)
    for j, s in enumerate(scale):
        if s == 0.0:
            raise SingularMatrixError(f"design column {j} is identically zero", column=j)
    q, r, piv = scipy.linalg.qr(aw / scale, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    cutoff = max(n, p) * _EPS * diag[0]
    for k in range(p):
        if diag[k] <= cutoff:
            raise SingularMatrixError(
                f"design column {piv[k]} is linearly dependent on the others", column=int(piv[k])
            )
    z = scipy.linalg.solve_triangular(r, q.T @ yw)
    rinv = scipy.linalg.solve_triangular(r, np.eye(p))
    cov_z = rinv @ rinv.T

    params = np.empty(p)
    params[piv] = z / scale[piv]
    cov = np.empty((p, p))
    cov[np.ix_(piv, piv)] = cov_z / np.outer(scale[piv], scale[piv])
    cov = 0.5 * (cov + cov.T)

    resid = (y - a @ params) * w
    chi2 = math.fsum(resid * resid)
    return WlsSolution(params, cov, chi2)


class ScalarMinimum(NamedTuple):
    x: float
    fun: float
    nfev: int
    converged: bool


_CGOLD = 0.5 * (3.0 - math.sqrt(5.0))


def minimize_scalar(
    objective: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-10,
    maxiter: int = 500,
) -> ScalarMinimum:
    """Brent's method: golden-section search with parabolic steps.

    Terminates when the bracket around the best point is narrower than
    ``tol`` on either side. Every evaluation lies inside ``[lo, hi]``.
    """
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo}, {hi}]")
    if not tol > 0:
        raise DomainError(f"tol must be > 0, got {tol}")

    nfev = 0

    def f(u: float) -> float:
        nonlocal nfev
        nfev += 1
        val = float(objective(u))
        if not math.isfinite(val):
            raise ObjectiveError(f"objective is {val} at x={u!r}", x=u)
        return val

    a, b = lo, hi
    x = w = v = a + _CGOLD * (b - a)
    fx = fw = fv = f(x)
    d = e = 0.0
    for _ in range(maxiter):
        m = 0.5 * (a + b)
        tol1 = 0.5 * tol + 4.0 * _EPS * abs(x)
        tol2 = 2.0 * tol1
        if abs(x - m) <= tol2 - 0.5 * (b - a):
            return ScalarMinimum(x, fx, nfev, True)
        golden = True
        if abs(e) > tol1:
            r = (x - w) * (fx - fv)
            qq = (x - v) * (fx - fw)
            p = (x - v) * qq - (x - w) * r
            qq = 2.0 * (qq - r)
            if qq > 0.0:
                p = -p
            else:
                qq = -qq
            e_prev = e
            e = d
            if abs(p) < abs(0.5 * qq * e_prev) and qq * (a - x) < p < qq * (b - x):
                d = p / qq
                u = x + d
                if u - a < tol2 or b - u < tol2:
                    d = tol1 if x < m else -tol1
                golden = False
        if golden:
            e = (b - x) if x < m else (a - x)
            d = _CGOLD * e
        u = x + (d if abs(d) >= tol1 else math.copysign(tol1, d))
        u = min(max(u, lo), hi)
        fu = f(u)
        if fu <= fx:
            if u < x:
                b = x
            else:
                a = x
            v, fv, w, fw, x, fx = w, fw, x, fx, u, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, fv, w, fw = w, fw, u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    return ScalarMinimum(x, fx, nfev, False)


def _gamma_p_series(a: float, x: float, gln: float) -> float:
    ap = a
    term = total = 1.0 / a
    for _ in range(100_000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-16:
            return total * math.exp(-x + a * math.log(x) - gln)
    raise ConvergenceError(f"gamma series did not converge for a={a}, x={x}", total)


def _gamma_q_contfrac(a: float, x: float, gln: float) -> float:
    # modified Lentz
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, 100_000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            return math.exp(-x + a * math.log(x) - gln) * h
    raise ConvergenceError(f"gamma continued fraction did not converge for a={a}, x={x}", h)


def regularized_gamma_q(a: float, x: float) -> float:
    """Upper regularized incomplete gamma function ``Q(a, x)``."""
    if not a > 0:
        raise DomainError(f"a must be > 0, got {a}")
    if not x >= 0:
        raise DomainError(f"x must be >= 0, got {x}")
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    gln = math.lgamma(a)
    if x < a + 1.0:
        q = 1.0 - _gamma_p_series(a, x, gln)
    else:
        q = _gamma_q_contfrac(a, x, gln)
    return min(max(q, 0.0), 1.0)


def chi2_p_value(chi2: float, dof: int) -> float:
    """Probability that a chi-squared variate with ``dof`` degrees of freedom exceeds ``chi2``."""
    if dof < 1:
        raise DomainError(f"dof must be >= 1, got {dof}")
    if not chi2 >= 0:
        raise DomainError(f"chi2 must be >= 0, got {chi2}")
    return regularized_gamma_q(0.5 * dof, 0.5 * chi2)


def central_derivative(f: Callable[[float], float], x: float, scale: float = 1e-6, floor: float = 1e-12) -> float:
    h = max(scale * abs(x), floor)
    return (f(x + h) - f(x - h)) / (2.0 * h)


def loglog_slope(xs, ys) -> float:
    """Ordinary least-squares slope of ``ln(ys)`` against ``ln(xs)``."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.size < 2:
        raise DomainError("need two equal-length arrays with at least 2 points")
    if np.any(~(xs > 0)) or np.any(~(ys > 0)):
        raise DomainError("loglog_slope needs strictly positive inputs")
    lx = np.log(xs)
    ly = np.log(ys)
    lx = lx - lx.mean()
    return float(np.dot(lx, ly - ly.mean()) / np.dot(lx, lx))
