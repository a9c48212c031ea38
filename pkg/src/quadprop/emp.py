"""Ermakov-Milne-Pinney reduction to a constant-frequency oscillator.

For ``x'' + lam' x' + omega^2(t) x = 0`` the amplitude ``rho`` and fake time
``tau`` obey::

    rho'' + lam' rho' + omega^2 rho = exp(-2 lam) omega_bar^2 / rho^3
    tau' = exp(-lam) / rho^2

and in ``tau`` the oscillator has the constant frequency ``omega_bar``. Both are
integrated together as the state ``(rho, rho', tau)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .integrators import DEFAULT_ATOL, DEFAULT_RTOL, DenseSolution, IntegrationError, integrate_ivp
from .profiles import SystemProfile

# abort when rho drops below this fraction of rho(t0)
RHO_COLLAPSE = 1e-6
ERMAKOV_TOL = 1e-7
OMEGA_BAR_TOL = 1e-6
BOUNDARY_GUARD = 1e-9


class EmpError(RuntimeError):
    """EMP integration broke down or a post-solve invariant failed."""


class DomainBoundaryError(ValueError):
    """Evaluation at (or numerically at) a boundary ``r_k`` where ``cos(omega_bar tau) = 0``."""


@dataclass(frozen=True)
class EmpSolution:
    """Dense ``rho``/``tau`` for one profile and one choice of ``omega_bar``."""

    profile: SystemProfile
    omega_bar: float
    t_span: tuple[float, float]
    dense: DenseSolution
    hbar: float = 1.0

    @property
    def t0(self) -> float:
        return self.t_span[0]

    @property
    def knots(self) -> np.ndarray:
        return self.dense.t

    def rho(self, t):
        return self.dense(t)[..., 0]

    def rho_dot(self, t):
        return self.dense(t)[..., 1]

    def tau(self, t):
        return self.dense(t)[..., 2]

    def tau_dot(self, t):
        return np.exp(-self.profile.lam(t)) / self.rho(t) ** 2

    def scale(self, t):
        """Conformal factor ``exp(lam/2) tau'^(1/2)``, which equals ``1/rho``."""
        return np.exp(0.5 * self.profile.lam(t)) * np.sqrt(self.tau_dot(t))

    def derivatives(self, t) -> dict:
        """``rho`` and ``tau`` with their derivatives up to ``rho''`` and ``tau'''``.

        Higher derivatives come from the ODE right-hand side, never from
        differencing the interpolant.
        """
        p = self.profile
        y = self.dense(t)
        rho, rd, tau = y[..., 0], y[..., 1], y[..., 2]
        lam, ld, ldd = p.lam(t), p.lam_dot(t), p.lam_ddot(t)
        w2 = p.omega_sq(t)
        rdd = -ld * rd - w2 * rho + np.exp(-2 * lam) * self.omega_bar**2 / rho**3
        td = np.exp(-lam) / rho**2
        g = -ld - 2 * rd / rho
        gd = -ldd - 2 * (rdd / rho - (rd / rho) ** 2)
        return dict(
            rho=rho, rho_dot=rd, rho_ddot=rdd,
            tau=tau, tau_dot=td, tau_ddot=td * g, tau_dddot=td * (g**2 + gd),
            lam=lam, lam_dot=ld, lam_ddot=ldd, omega_sq=w2,
        )


def emp_rhs(p: SystemProfile, omega_bar: float):
    wb2 = omega_bar**2

    def rhs(t, y):
        rho, rd, _ = y
        lam = p.lam(t)
        return (
            rd,
            -p.lam_dot(t) * rd - p.omega_sq(t) * rho + np.exp(-2 * lam) * wb2 / rho**3,
            np.exp(-lam) / rho**2,
        )
    return rhs


def solve_emp(
    p: SystemProfile,
    omega_bar: float = 1.0,
    t_span: tuple[float, float] = (0.0, 10.0),
    rho0: float = 1.0,
    rho_dot0: float = 0.0,
    tau0: float = 0.0,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    hbar: float = 1.0,
    check: bool = True,
) -> EmpSolution:
    """Solve the EMP equation and integrate the fake time on ``t_span``.

    Raises :class:`EmpError` if ``rho`` collapses (below ``RHO_COLLAPSE * rho0``)
    or, with ``check=True``, if the Ermakov constraint or the constancy of
    ``omega_bar`` fails at the knots.
    """
    if rho0 <= 0:
        raise ValueError("rho0 must be positive")
    if omega_bar <= 0:
        raise ValueError("omega_bar must be positive")
    if hbar <= 0:
        raise ValueError("hbar must be positive")

    def collapse(t, y):
        return y[0] - RHO_COLLAPSE * rho0
    collapse.terminal = True
    collapse.direction = -1

    try:
        dense = integrate_ivp(
            emp_rhs(p, omega_bar), (rho0, rho_dot0, tau0), t_span, rtol=rtol, atol=atol, events=[collapse]
        )
    except IntegrationError as exc:
        raise EmpError(f"EMP integration failed: rho approaching zero or blow-up near t={exc.t_fail!r}") from exc

    sol = EmpSolution(p, float(omega_bar), (float(t_span[0]), float(t_span[1])), dense, float(hbar))
    if check:
        report = invariant_report(sol)
        if not report["ok"]:
            raise EmpError(f"EMP invariants violated: {report}")
    return sol


def invariant_report(sol: EmpSolution, n_samples: int = 500) -> dict:
    """Knot-wise checks: ``rho > 0``, ``tau' > 0``, Ermakov constraint, ``omega_bar`` constancy."""
    t = sol.knots
    rho = sol.dense.y[:, 0]
    lam = sol.profile.lam(t)
    td = sol.dense.dy[:, 2]
    ermakov = float(np.max(np.abs(td * rho**2 * np.exp(lam) - 1.0)))
    mean, dev = check_omega_bar(sol, n_samples)
    ok = bool(np.all(rho > 0) and np.all(td > 0) and ermakov < ERMAKOV_TOL and dev < OMEGA_BAR_TOL)
    return dict(
        ok=ok, rho_min=float(rho.min()), tau_dot_min=float(td.min()),
        ermakov_max_dev=ermakov, omega_bar_sq_mean=mean, omega_bar_sq_max_rel_dev=dev,
    )


def _interior_samples(sol: EmpSolution, n_samples: int) -> np.ndarray:
    interior = sol.knots[1:-1]
    if interior.size >= n_samples:
        idx = np.unique(np.linspace(0, interior.size - 1, n_samples).round().astype(int))
        return interior[idx]
    # too few knots: pad with interpolated interior times
    t0, t1 = sol.t_span
    extra = np.linspace(t0, t1, n_samples - interior.size + 2)[1:-1]
    return np.union1d(interior, extra)


def omega_bar_sq_local(sol: EmpSolution, t):
    """Right-hand side of the ``omega_bar^2`` identity in terms of ``tau`` and ``lam``."""
    d = sol.derivatives(t)
    r1 = d["tau_ddot"] / d["tau_dot"]
    return (
        d["omega_sq"] - 0.5 * d["tau_dddot"] / d["tau_dot"] + 0.75 * r1**2
        - 0.5 * d["lam_ddot"] - 0.25 * d["lam_dot"] ** 2
    ) / d["tau_dot"] ** 2


def check_omega_bar(sol: EmpSolution, n_samples: int = 500) -> tuple[float, float]:
    """Mean of the local ``omega_bar^2`` and its max relative deviation from ``sol.omega_bar^2``."""
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    vals = omega_bar_sq_local(sol, _interior_samples(sol, n_samples))
    target = sol.omega_bar**2
    return float(np.mean(vals)), float(np.max(np.abs(vals - target)) / target)


def schwarzian_decompose(sol: EmpSolution, t) -> tuple[float, float]:
    """Split ``omega^2(t)`` into ``tau'^2 omega_bar^2`` and half the Schwarzian of ``tau``.

    Only meaningful without friction.
    """
    p = sol.profile
    if not p.frictionless and (np.any(p.lam_dot(t) != 0) or np.any(p.lam_ddot(t) != 0)):
        raise EmpError("Schwarzian decomposition requires lam == 0")
    d = sol.derivatives(t)
    r1 = d["tau_ddot"] / d["tau_dot"]
    schwarzian = d["tau_dddot"] / d["tau_dot"] - 1.5 * r1**2
    return d["tau_dot"] ** 2 * sol.omega_bar**2, 0.5 * schwarzian


def _boundary_guard(sol: EmpSolution, t, tau):
    c = np.cos(sol.omega_bar * tau)
    if np.any(np.abs(c) < BOUNDARY_GUARD):
        k = np.round(sol.omega_bar * np.atleast_1d(tau) / np.pi - 0.5).astype(int)
        raise DomainBoundaryError(
            f"t={t!r} is within {BOUNDARY_GUARD} of a map boundary r_k (k={k.tolist()})"
        )
    return c


def junker_inomata_condition(sol: EmpSolution, t):
    """Residual of ``omega^2 = f''/f - 2 f'^2/f^2 + lam'^2/4 + lam''/2``.

    Here ``f = tau'^(1/2) sec(omega_bar tau)``; the residual vanishes up to
    roundoff on an accurate solution.
    """
    d = sol.derivatives(t)
    wb = sol.omega_bar
    c = _boundary_guard(sol, t, d["tau"])
    tan = np.sin(wb * d["tau"]) / c
    mu_d = d["tau_ddot"] / d["tau_dot"]
    mu_dd = d["tau_dddot"] / d["tau_dot"] - mu_d**2
    # log-derivatives of f
    h_d = 0.5 * mu_d + wb * d["tau_dot"] * tan
    h_dd = 0.5 * mu_dd + wb * d["tau_ddot"] * tan + (wb * d["tau_dot"] / c) ** 2
    rhs = h_dd - h_d**2 + 0.25 * d["lam_dot"] ** 2 + 0.5 * d["lam_ddot"]
    return d["omega_sq"] - rhs
