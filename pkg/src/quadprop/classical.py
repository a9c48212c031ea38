"""Classical trajectories, the Arnold/Niederer maps and caustic location.

Trajectories are read off the EMP solution: in fake time the motion is a
constant-frequency oscillation, and the generalized Niederer map

    T = tan(omega_bar tau) / omega_bar,   X = x exp(lam/2) tau'^(1/2) sec(omega_bar tau)

turns every trajectory into a straight line ``X = a T + b``. The map is
singular at the boundaries ``r_k`` (``omega_bar tau(r_k) = (k + 1/2) pi``) and
all trajectories starting at ``x = 0`` refocus at the caustics ``t_l``
(``omega_bar tau(t_l) = l pi``).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .emp import BOUNDARY_GUARD, DomainBoundaryError, EmpSolution
from .integrators import QuadratureError, find_root, gauss_legendre
from .profiles import ParticularSolution, SystemProfile

U2_GUARD = 1e-12


@dataclass(frozen=True)
class FundamentalPair:
    """Homogeneous solutions ``u1``, ``u2`` normalized at ``t0`` plus a particular solution.

    ``u1(t0) = u2'(t0) = 0``, ``u1'(t0) = u2(t0) = 1``; ``up`` vanishes with its
    derivative at ``t0`` (identically zero for unforced systems).
    """

    sol: EmpSolution
    t0: float
    coeffs: np.ndarray
    particular: ParticularSolution | None = None

    def _basis(self, t):
        sol = self.sol
        wb = sol.omega_bar
        rho, rd, tau = (sol.dense(t)[..., i] for i in range(3))
        td = sol.tau_dot(t)
        s, c = np.sin(wb * tau), np.cos(wb * tau)
        b = np.stack([rho * s / wb, rho * c], axis=-1)
        bd = np.stack([rd * s / wb + rho * td * c, rd * c - rho * td * wb * s], axis=-1)
        return b, bd

    def values(self, t):
        """``(u1, u2, u1', u2')`` at ``t``."""
        b, bd = self._basis(t)
        u = b @ self.coeffs
        ud = bd @ self.coeffs
        return u[..., 0], u[..., 1], ud[..., 0], ud[..., 1]

    def u1(self, t):
        return self.values(t)[0]

    def u2(self, t):
        return self.values(t)[1]

    def up(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))[()] if self.particular is None else self.particular(t)

    def up_dot(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))[()] if self.particular is None else self.particular.velocity(t)

    def wronskian(self, t):
        u1, u2, u1d, u2d = self.values(t)
        return u1d * u2 - u1 * u2d


def fundamental_pair(sol: EmpSolution, particular: ParticularSolution | None = None) -> FundamentalPair:
    """Fundamental solutions built from ``rho`` and ``tau``.

    With the standard EMP start (``rho = 1``, ``rho' = 0``, ``tau = 0``,
    ``lam = 0`` at ``t0``) these are exactly
    ``u1 = rho sin(omega_bar tau)/omega_bar`` and ``u2 = rho cos(omega_bar tau)``;
    other starts are renormalized to the same initial conditions.
    """
    t0 = sol.t0
    pair = FundamentalPair(sol, t0, np.eye(2), particular)
    b, bd = pair._basis(t0)
    basis0 = np.array([b, bd])
    coeffs = np.linalg.solve(basis0, np.array([[0.0, 1.0], [1.0, 0.0]]))
    return FundamentalPair(sol, t0, coeffs, particular)


def arnold_map(pair: FundamentalPair, x, t):
    """``(X, T) = ((x - up)/u2, u1/u2)``; raises at zeros of ``u2``."""
    u1, u2, _, _ = pair.values(t)
    if np.any(np.abs(u2) < U2_GUARD):
        raise DomainBoundaryError(f"u2 vanishes at t={t!r}: map boundary")
    return (x - pair.up(t)) / u2, u1 / u2


def niederer_forward(sol: EmpSolution, x, t):
    """Generalized Niederer map ``(x, t) -> (X, T)``."""
    wb = sol.omega_bar
    tau = sol.tau(t)
    c = np.cos(wb * tau)
    if np.any(np.abs(c) < BOUNDARY_GUARD):
        raise DomainBoundaryError(f"t={t!r} is at a map boundary r_k")
    return x * sol.scale(t) / c, np.tan(wb * tau) / wb


def tau_inverse(sol: EmpSolution, target: float, tol: float = 1e-13) -> float:
    """Solve ``tau(t) = target`` using the monotone knot values as bracket."""
    taus = sol.dense.y[:, 2]
    if not taus[0] <= target <= taus[-1]:
        raise ValueError(f"tau={target!r} outside solved range [{taus[0]}, {taus[-1]}]")
    i = int(np.searchsorted(taus, target))
    if taus[i] == target:
        return float(sol.knots[i])
    lo, hi = sol.knots[i - 1], sol.knots[i]
    return find_root(lambda t: sol.tau(t) - target, (lo, hi), tol)


def niederer_inverse(sol: EmpSolution, X: float, T: float, k: int):
    """Branch ``k`` of the inverse map: ``omega_bar tau = arctan(omega_bar T) + k pi``.

    Branch ``k`` covers ``(k - 1/2) pi < omega_bar tau < (k + 1/2) pi``, i.e.
    the times between ``r_{k-1}`` and ``r_k`` around the caustic ``t_k``.
    """
    wb = sol.omega_bar
    k = int(k)
    tau = (np.arctan(wb * T) + k * np.pi) / wb
    t = tau_inverse(sol, tau)
    cos = (-1.0) ** k / np.sqrt(1.0 + (wb * T) ** 2)
    return X * cos / sol.scale(t), t


def trajectory(sol: EmpSolution, a: float, b: float, t):
    """Position and velocity of ``x = a u1 + b u2`` written through ``rho`` and ``tau``."""
    wb = sol.omega_bar
    p = sol.profile
    rho, rd, tau = (sol.dense(t)[..., i] for i in range(3))
    td = sol.tau_dot(t)
    amp = np.exp(-0.5 * p.lam(t)) / np.sqrt(td)
    s, c = np.sin(wb * tau), np.cos(wb * tau)
    osc = a * s / wb + b * c
    x = amp * osc
    x_dot = rd * osc + rho * td * (a * c - b * wb * s)
    return x, x_dot


def lagrangian(p: SystemProfile, x, v, t):
    return 0.5 * np.exp(p.lam(t)) * (v**2 - p.omega_sq(t) * x**2)


def classical_action(p: SystemProfile, path, t1: float, t2: float, panels: int = 64, order: int = 16, rtol: float = 1e-9) -> float:
    """Integral of ``exp(lam) (x'^2 - omega^2 x^2) / 2`` along ``path``.

    ``path(t)`` returns ``(x, x_dot)`` for an array of times. Fixed-node
    composite Gauss-Legendre; the estimate is cross-checked against twice the
    panels and :class:`QuadratureError` is raised if they disagree.
    """
    if not t2 > t1:
        raise ValueError("need t1 < t2")

    def integrand(t):
        x, v = path(t)
        return lagrangian(p, np.asarray(x), np.asarray(v), t)

    coarse = gauss_legendre(integrand, t1, t2, panels, order)
    fine = gauss_legendre(integrand, t1, t2, 2 * panels, order)
    if abs(fine - coarse) > rtol * max(1.0, abs(fine)):
        raise QuadratureError(f"action quadrature not converged: {coarse!r} vs {fine!r}")
    return fine


def bargmann_lift(sol: EmpSolution, a: float, b: float, s0: float, t):
    """Null lift ``(x, t, s)`` with ``s = s0 - action`` along ``trajectory(a, b)`` from ``t0``."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr < sol.t0):
        raise ValueError("lift times must not precede t0")
    x, _ = trajectory(sol, a, b, t_arr)
    path = lambda u: trajectory(sol, a, b, u)  # noqa: E731
    # accumulate the action segment by segment over the sorted times
    order = np.argsort(t_arr, kind="stable")
    acc, prev = 0.0, sol.t0
    s = np.empty_like(t_arr)
    for i in order:
        if t_arr[i] > prev:
            acc += classical_action(sol.profile, path, prev, t_arr[i], panels=8)
            prev = t_arr[i]
        s[i] = s0 - acc
    if np.ndim(t) == 0:
        return float(x[0]), float(t), float(s[0])
    return x, t_arr, s


@dataclass(frozen=True)
class CausticChart:
    """Caustics ``t_l`` and map boundaries ``r_k`` over an EMP span."""

    omega_bar: float
    caustics: list[tuple[int, float]] = field(default_factory=list)
    boundaries: list[tuple[int, float]] = field(default_factory=list)

    @property
    def caustic_times(self) -> np.ndarray:
        return np.array([t for _, t in self.caustics])

    @property
    def boundary_times(self) -> np.ndarray:
        return np.array([r for _, r in self.boundaries])

    def caustic(self, ell: int) -> float:
        return dict(self.caustics)[ell]

    def boundary(self, k: int) -> float:
        return dict(self.boundaries)[k]

    def to_dict(self) -> dict:
        return {
            "omega_bar": self.omega_bar,
            "caustics": [{"l": l, "t": t} for l, t in self.caustics],
            "boundaries": [{"k": k, "r": r} for k, r in self.boundaries],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CausticChart":
        return cls(
            float(d["omega_bar"]),
            [(int(c["l"]), float(c["t"])) for c in d["caustics"]],
            [(int(b["k"]), float(b["r"])) for b in d["boundaries"]],
        )


def locate_caustics(sol: EmpSolution, tol: float = 1e-13) -> CausticChart:
    """All caustics and boundaries whose fake time lies inside the solved range."""
    wb = sol.omega_bar
    taus = sol.dense.y[:, 2]
    lo, hi = wb * taus[0] / np.pi, wb * taus[-1] / np.pi
    caustics = [(l, tau_inverse(sol, l * np.pi / wb, tol)) for l in range(int(np.ceil(lo)), int(np.floor(hi)) + 1)]
    boundaries = [
        (k, tau_inverse(sol, (k + 0.5) * np.pi / wb, tol))
        for k in range(int(np.ceil(lo - 0.5)), int(np.floor(hi - 0.5)) + 1)
    ]
    chart = CausticChart(wb, caustics, boundaries)
    tl, rk = dict(caustics), dict(boundaries)
    for k, r in boundaries:
        if k + 1 in tl and k + 1 in rk and not r < tl[k + 1] < rk[k + 1]:
            warnings.warn(f"caustic/boundary interlacing violated near k={k}", RuntimeWarning, stacklevel=2)
    return chart
