"""Numerical kernels shared by the rest of the package.

* :func:`integrate_ivp` -- adaptive Dormand-Prince 5(4) integration, stored as
  knots plus state derivatives and interpolated with cubic Hermite polynomials.
* :func:`find_root` -- bracketed scalar root finding.
* :func:`quad_complex` -- adaptive quadrature of complex-valued integrands.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import CubicHermiteSpline

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12


class IntegrationError(RuntimeError):
    """Raised when an initial value problem cannot be carried to the end of its span."""

    def __init__(self, message: str, t_fail: float | None = None):
        super().__init__(message)
        self.t_fail = t_fail


class RootBracketError(ValueError):
    """The supplied bracket does not contain a sign change."""


class QuadratureError(RuntimeError):
    """Requested quadrature tolerance was not reached."""


@dataclass(frozen=True)
class DenseSolution:
    """Knot values of an ODE solution with cubic Hermite dense output.

    Attributes
    ----------
    t : (n,) array
        Strictly increasing knot times.
    y : (n, d) array
        States at the knots.
    dy : (n, d) array
        Right-hand side evaluated at the knots.
    order : int
        Polynomial order of the interpolant (3 for cubic Hermite).
    """

    t: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    order: int = 3
    _spline: CubicHermiteSpline = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.t.ndim != 1 or self.t.size < 2:
            raise ValueError("need at least two knots")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("knot times must be strictly increasing")
        object.__setattr__(self, "_spline", CubicHermiteSpline(self.t, self.y, self.dy, axis=0))

    @property
    def t_span(self) -> tuple[float, float]:
        return float(self.t[0]), float(self.t[-1])

    @property
    def dim(self) -> int:
        return self.y.shape[1]

    def _check(self, t):
        t = np.asarray(t, dtype=float)
        lo, hi = self.t_span
        if np.any(t < lo) or np.any(t > hi):
            raise ValueError(f"t outside solution span [{lo}, {hi}]")
        return t

    def __call__(self, t):
        """State at ``t`` (scalar -> (d,), array (m,) -> (m, d))."""
        t = self._check(t)
        out = self._spline(t)
        # exact knot hits return the stored value bit for bit
        idx = np.clip(np.searchsorted(self.t, t), 0, self.t.size - 1)
        hit = self.t[idx] == t
        if np.ndim(t) == 0:
            return self.y[idx].copy() if hit else out
        out[hit] = self.y[idx[hit]]
        return out

    def derivative(self, t):
        """Derivative of the Hermite interpolant (equals ``dy`` at the knots)."""
        t = self._check(t)
        return self._spline(t, 1)


def integrate_ivp(
    rhs: Callable[[float, np.ndarray], Sequence[float]],
    y0: Sequence[float],
    t_span: tuple[float, float],
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    events=None,
    max_step: float = np.inf,
) -> DenseSolution:
    """Integrate ``y' = rhs(t, y)`` on ``t_span`` with adaptive steps.

    The step sequence comes from scipy's embedded Dormand-Prince 5(4) pair;
    the returned :class:`DenseSolution` interpolates knots with cubic Hermite
    polynomials built from the stored right-hand side values.

    ``events`` is passed through to :func:`scipy.integrate.solve_ivp`. A
    terminal event that fires raises :class:`IntegrationError` carrying the
    event time, since a truncated solution is never what callers want.
    """
    if rtol <= 0 or atol <= 0:
        raise ValueError("rtol and atol must be positive")
    t0, t1 = map(float, t_span)
    if not t1 > t0:
        raise ValueError("t_span must be increasing")

    def f(t, y):
        dy = np.asarray(rhs(t, y), dtype=float)
        if not np.all(np.isfinite(dy)):
            raise IntegrationError(f"non-finite right-hand side at t={t!r}", t)
        return dy

    res = integrate.solve_ivp(
        f, (t0, t1), np.asarray(y0, dtype=float), method="RK45",
        rtol=rtol, atol=atol, events=events, max_step=max_step,
    )
    if res.status == -1:
        t_fail = float(res.t[-1]) if res.t.size else t0
        raise IntegrationError(f"integration failed at t={t_fail!r}: {res.message}", t_fail)
    if res.status == 1:
        t_ev = next(float(te[0]) for te in res.t_events if len(te))
        raise IntegrationError(f"terminal event at t={t_ev!r}", t_ev)

    ts = res.t
    ys = res.y.T.copy()
    dys = np.array([f(t, y) for t, y in zip(ts, ys)])
    return DenseSolution(ts, ys, dys)


def find_root(f: Callable[[float], float], bracket: tuple[float, float], tol: float = 1e-13) -> float:
    """Root of ``f`` inside ``bracket`` (Brent's bisection/secant hybrid)."""
    a, b = map(float, bracket)
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if np.sign(fa) == np.sign(fb):
        raise RootBracketError(f"no sign change on [{a}, {b}]: f={fa!r}, {fb!r}")
    return optimize.brentq(f, a, b, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=200)


def quad_complex(f: Callable[[float], complex], a: float, b: float, tol: float = 1e-10, limit: int = 200) -> complex:
    """Adaptive Gauss-Kronrod quadrature of a complex integrand on ``[a, b]``."""
    # scipy's warning is superseded by the QuadratureError below
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re, err_re = integrate.quad(lambda x: f(x).real, a, b, epsabs=tol / 2, epsrel=0.0, limit=limit)
        im, err_im = integrate.quad(lambda x: f(x).imag, a, b, epsabs=tol / 2, epsrel=0.0, limit=limit)
    if err_re + err_im > tol:
        raise QuadratureError(f"estimated error {err_re + err_im:.3g} exceeds tol {tol:.3g}")
    return complex(re, im)


def gauss_legendre(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, panels: int = 32, order: int = 16) -> float:
    """Composite Gauss-Legendre rule with fixed nodes.

    The node set depends only on ``(a, b, panels, order)``, so the result is a
    fixed linear functional of ``f``. The van Vleck oracle relies on that to
    difference actions without adaptive-mesh noise.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return float(np.dot(weights, f(nodes)))
