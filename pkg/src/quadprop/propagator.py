"""Propagators of quadratic systems, Maslov bookkeeping and wave-packet evolution.

Conventions
-----------
* Square roots are never taken of complex numbers. Every kernel is assembled
  as ``modulus * exp(i phase)`` with the half-period count
  ``l = floor(omega_bar * dtau / pi)`` entering the phase as
  ``-(pi/2)(1/2 + l)``. For ``dtau < 0`` the same floor rule yields the
  ``+pi/4`` prefactor of the time-reversed kernel.
* ``|sin(omega_bar dtau)| < CAUSTIC_THRESHOLD`` is treated as a caustic; the
  kernel is then the mirrored delta described by :class:`CausticKernel`.
* The time-dependent kernel, like the closed forms it generalizes, omits the
  boundary phase ``exp{(i/2hbar)[e^lam (rho'/rho) x^2]_1^2}``. Pass
  ``boundary_phase=True`` to include it; this is the kernel that composes
  correctly and coincides with the van Vleck expression built from the true
  classical action. Wave-packet evolution always includes it.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .classical import classical_action, trajectory
from .emp import EmpSolution
from .integrators import find_root, integrate_ivp, RootBracketError
from .profiles import SystemProfile

CAUSTIC_THRESHOLD = 1e-8
TWO_PI = 2.0 * np.pi


class CausticError(ValueError):
    """Operation undefined at a caustic (or, for the caustic kernel, away from one)."""


class GridResolutionError(ValueError):
    """The position grid does not resolve the kernel oscillation."""


class ShootingError(RuntimeError):
    """No classical path found between the endpoints."""


def wrap_phase(phi):
    """Reduce an angle to ``(-pi, pi]``."""
    return np.pi - np.mod(np.pi - np.asarray(phi, dtype=float), TWO_PI)


@dataclass(frozen=True)
class CausticKernel:
    """Delta kernel at a caustic: ``weight * phase * delta(c1 x1 - mirror_sign * c2 x2)``."""

    ell: int
    phase: complex
    mirror_sign: float
    weight: float
    scale_in: float
    scale_out: float

    def mirror(self, x2):
        """Initial position feeding ``x2``."""
        return self.mirror_sign * self.scale_out * np.asarray(x2) / self.scale_in

    def apply(self, psi, x2):
        """``int K(x2|x1) psi(x1) dx1`` for a callable ``psi``."""
        return self.weight * self.phase / self.scale_in * psi(self.mirror(x2))


@dataclass(frozen=True)
class PropagatorValue:
    """Kernel value at one pair of space-time points."""

    amplitude: complex
    maslov_index: int
    at_caustic: bool
    modulus: float
    phase: float
    caustic: CausticKernel | None = None

    @classmethod
    def regular(cls, modulus: float, phase: float, ell: int) -> "PropagatorValue":
        phase = float(wrap_phase(phase))
        return cls(modulus * cmath.exp(1j * phase), int(ell), False, float(modulus), phase)

    @classmethod
    def singular(cls, kernel: CausticKernel) -> "PropagatorValue":
        return cls(complex(np.nan, np.nan), kernel.ell, True, np.inf, np.nan, kernel)


def _caustic_kernel(ell: int, c1: float, c2: float) -> CausticKernel:
    return CausticKernel(
        ell=int(ell),
        phase=cmath.exp(-0.5j * np.pi * ell),
        mirror_sign=float((-1) ** (ell % 2)),
        weight=float(np.sqrt(c1 * c2)),
        scale_in=float(c1),
        scale_out=float(c2),
    )


def free_propagator(X2: float, T2: float, X1: float, T1: float, hbar: float = 1.0) -> PropagatorValue:
    """Free-particle kernel valid for both signs of ``T2 - T1``.

    The prefactor carries ``exp(-i pi/4 sign(T2 - T1))``; at ``T2 = T1`` the
    kernel is ``delta(X2 - X1)``.
    """
    dT = T2 - T1
    if dT == 0:
        return PropagatorValue.singular(_caustic_kernel(0, 1.0, 1.0))
    modulus = 1.0 / np.sqrt(TWO_PI * hbar * abs(dT))
    phase = -0.25 * np.pi * np.sign(dT) + (X2 - X1) ** 2 / (2.0 * hbar * dT)
    return PropagatorValue.regular(modulus, phase, 0 if dT > 0 else -1)


def constant_propagator(omega0, lambda0, x2, t2, x1, t1, hbar: float = 1.0) -> PropagatorValue:
    """Damped constant-frequency oscillator, extended past the first half-period.

    ``Omega0^2 = omega0^2 - lambda0^2/4`` must be positive.
    """
    big_omega_sq = omega0**2 - 0.25 * lambda0**2
    if big_omega_sq <= 0:
        raise ValueError("overdamped or critically damped oscillator (Omega0^2 <= 0) is not supported")
    w = np.sqrt(big_omega_sq)
    delta = w * (t2 - t1)
    s = np.sin(delta)
    if abs(s) < CAUSTIC_THRESHOLD:
        ell = int(round(delta / np.pi))
        return PropagatorValue.singular(_caustic_kernel(ell, np.exp(0.5 * lambda0 * t1), np.exp(0.5 * lambda0 * t2)))
    ell = int(np.floor(delta / np.pi))
    e1, e2 = np.exp(lambda0 * t1), np.exp(lambda0 * t2)
    modulus = np.sqrt(w * np.sqrt(e1 * e2) / (TWO_PI * hbar * abs(s)))
    action = w / (2.0 * s) * ((x2**2 * e2 + x1**2 * e1) * np.cos(delta) - 2.0 * x2 * x1 * np.sqrt(e1 * e2))
    return PropagatorValue.regular(modulus, -0.25 * np.pi * (1 + 2 * ell) + action / hbar, ell)


def dissipative_propagator(lambda0, x2, t2, x1, t1, hbar: float = 1.0) -> PropagatorValue:
    """Free motion in a medium with friction ``lambda0 > 0`` (no oscillator)."""
    if lambda0 <= 0:
        raise ValueError("lambda0 must be positive")
    if t2 == t1:
        raise ValueError("t2 == t1: kernel is a delta function")
    d = np.exp(-lambda0 * t1) - np.exp(-lambda0 * t2)
    modulus = np.sqrt(lambda0 / (TWO_PI * hbar * abs(d)))
    phase = -0.25 * np.pi * np.sign(d) + lambda0 * (x2 - x1) ** 2 / (2.0 * hbar * d)
    return PropagatorValue.regular(modulus, phase, 0 if d > 0 else -1)


def maslov_index(sol: EmpSolution, t1: float, t2: float) -> int:
    """Completed half-periods ``floor(omega_bar (tau(t2) - tau(t1)) / pi)``."""
    return int(np.floor(sol.omega_bar * (sol.tau(t2) - sol.tau(t1)) / np.pi))


def _boundary_coefficient(sol: EmpSolution, t):
    """``exp(lam) rho'/rho``: the boundary phase is ``coef * x^2 / (2 hbar)``."""
    return np.exp(sol.profile.lam(t)) * sol.rho_dot(t) / sol.rho(t)


def _kernel_parts(sol: EmpSolution, x2, t2, x1, t1, hbar, boundary_phase):
    """Broadcastable ``(modulus, phase, sin, delta)`` of the non-caustic kernel."""
    wb = sol.omega_bar
    delta = wb * (sol.tau(t2) - sol.tau(t1))
    c1, c2 = sol.scale(t1), sol.scale(t2)
    s, c = np.sin(delta), np.cos(delta)
    ell = np.floor(delta / np.pi)
    modulus = np.sqrt(wb * c1 * c2 / (TWO_PI * hbar * abs(s)))
    action = wb / (2.0 * s) * (((x2 * c2) ** 2 + (x1 * c1) ** 2) * c - 2.0 * x2 * x1 * c1 * c2)
    if boundary_phase:
        action = action + 0.5 * (_boundary_coefficient(sol, t2) * x2**2 - _boundary_coefficient(sol, t1) * x1**2)
    phase = -0.5 * np.pi * (0.5 + ell) + action / hbar
    return modulus, phase, s, delta


def general_propagator(
    sol: EmpSolution, x2, t2, x1, t1, hbar: float | None = None, boundary_phase: bool = False
) -> PropagatorValue:
    """Kernel of the time-dependent damped oscillator with Maslov correction."""
    hbar = sol.hbar if hbar is None else hbar
    if abs(np.sin(sol.omega_bar * (sol.tau(t2) - sol.tau(t1)))) < CAUSTIC_THRESHOLD:
        return PropagatorValue.singular(caustic_propagator(sol, t1, t2))
    modulus, phase, s, delta = _kernel_parts(sol, x2, t2, x1, t1, hbar, boundary_phase)
    return PropagatorValue.regular(float(modulus), float(phase), int(np.floor(delta / np.pi)))


def caustic_propagator(sol: EmpSolution, t1: float, t2: float, threshold: float = CAUSTIC_THRESHOLD) -> CausticKernel:
    """Mirrored delta kernel at ``omega_bar (tau(t2) - tau(t1)) = l pi``."""
    delta = sol.omega_bar * (sol.tau(t2) - sol.tau(t1))
    if abs(np.sin(delta)) >= threshold:
        raise CausticError(f"t1={t1!r}, t2={t2!r} are not at a caustic (sin={np.sin(delta):.3g})")
    return _caustic_kernel(int(round(delta / np.pi)), float(sol.scale(t1)), float(sol.scale(t2)))


def phase_factor(sol: EmpSolution, a: float, t: float, hbar: float | None = None) -> complex:
    """Unit phase of the kernel along the classical path leaving ``x = 0`` with slope ``a``."""
    x, _ = trajectory(sol, a, 0.0, t)
    value = general_propagator(sol, float(x), t, 0.0, sol.t0, hbar)
    if value.at_caustic:
        raise CausticError(f"t={t!r} is at caustic l={value.maslov_index}")
    return value.amplitude / value.modulus


def probability_density(sol: EmpSolution, t, hbar: float | None = None):
    """``|K(x, t | 0, t0)|^2``; position independent, ``inf`` at caustics."""
    hbar = sol.hbar if hbar is None else hbar
    t = np.asarray(t, dtype=float)
    s = np.abs(np.sin(sol.omega_bar * (sol.tau(t) - sol.tau(sol.t0))))
    c1, c2 = sol.scale(sol.t0), sol.scale(t)
    with np.errstate(divide="ignore"):
        dens = np.where(s < CAUSTIC_THRESHOLD, np.inf, sol.omega_bar * c1 * c2 / (TWO_PI * hbar * s))
    return dens[()]


@dataclass(frozen=True)
class WavePacket:
    """Wave function sampled on a uniform grid."""

    positions: np.ndarray
    amplitudes: np.ndarray
    time: float
    hbar: float = 1.0

    def __post_init__(self):
        x = np.asarray(self.positions, dtype=float)
        psi = np.asarray(self.amplitudes, dtype=complex)
        if x.ndim != 1 or x.size < 2 or x.shape != psi.shape:
            raise ValueError("positions and amplitudes must be 1-D arrays of equal length >= 2")
        dx = np.diff(x)
        if np.any(dx <= 0) or not np.allclose(dx, dx[0], rtol=1e-9, atol=0):
            raise ValueError("grid must be strictly increasing with uniform spacing")
        object.__setattr__(self, "positions", x)
        object.__setattr__(self, "amplitudes", psi)

    @property
    def dx(self) -> float:
        return float(self.positions[1] - self.positions[0])

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(trapezoid(self.density, dx=self.dx))


def gaussian_packet(x, center: float = 0.0, width: float = 1.0, momentum: float = 0.0, time: float = 0.0, hbar: float = 1.0) -> WavePacket:
    """Normalized ``(pi w^2)^(-1/4) exp(-(x-c)^2/(2 w^2) + i p x / hbar)``."""
    x = np.asarray(x, dtype=float)
    psi = (np.pi * width**2) ** -0.25 * np.exp(-((x - center) ** 2) / (2 * width**2) + 1j * momentum * x / hbar)
    return WavePacket(x, psi, time, hbar)


def _interp_complex(x, xp, fp):
    return np.interp(x, xp, fp.real, left=0.0, right=0.0) + 1j * np.interp(x, xp, fp.imag, left=0.0, right=0.0)


def evolve_wavepacket(sol: EmpSolution, psi: WavePacket, t2: float, chunk: int = 256) -> WavePacket:
    """Propagate ``psi`` from ``psi.time`` to ``t2`` by integrating against the exact kernel.

    The source integral uses the trapezoid rule on the packet grid; output is
    on the same grid. At a caustic the delta kernel maps the packet onto its
    (rescaled) mirror image instead.
    """
    hbar = psi.hbar
    t1 = psi.time
    if t2 == t1:
        return psi
    x = psi.positions
    wb = sol.omega_bar
    delta = wb * (sol.tau(t2) - sol.tau(t1))
    if abs(np.sin(delta)) < CAUSTIC_THRESHOLD:
        kern = caustic_propagator(sol, t1, t2)
        x1 = kern.mirror(x)
        out = kern.apply(lambda u: _interp_complex(u, x, psi.amplitudes), x)
        bphase = 0.5 * (_boundary_coefficient(sol, t2) * x**2 - _boundary_coefficient(sol, t1) * x1**2) / hbar
        return WavePacket(x, out * np.exp(1j * bphase), t2, hbar)

    # phase gradient in x1 is linear in (x1, x2): its maximum sits on grid corners
    c1, c2 = sol.scale(t1), sol.scale(t2)
    b1 = _boundary_coefficient(sol, t1)
    corners = np.array([[x[0], x[0]], [x[0], x[-1]], [x[-1], x[0]], [x[-1], x[-1]]])
    grad = (wb / np.sin(delta)) * (corners[:, 1] * c1**2 * np.cos(delta) - corners[:, 0] * c1 * c2) - b1 * corners[:, 1]
    worst = float(np.max(np.abs(grad)) / hbar * psi.dx)
    if worst > 0.5 * np.pi:
        raise GridResolutionError(
            f"kernel phase changes by {worst:.3g} rad between grid points (limit pi/2); refine the grid or shrink it"
        )

    w = np.full(x.size, psi.dx)
    w[[0, -1]] *= 0.5
    src = w * psi.amplitudes
    out = np.empty(x.size, dtype=complex)
    for i in range(0, x.size, chunk):
        x2 = x[i:i + chunk, None]
        modulus, phase, _, _ = _kernel_parts(sol, x2, t2, x[None, :], t1, hbar, True)
        out[i:i + chunk] = (modulus * np.exp(1j * phase)) @ src
    return WavePacket(x, out, t2, hbar)


class _Shooter:
    """Classical paths of the homogeneous equation between fixed times, by shooting."""

    def __init__(self, p: SystemProfile, t1: float, t2: float, rtol: float = 1e-12, atol: float = 1e-14):
        if p.has_force:
            raise ValueError("van Vleck oracle expects an unforced profile")
        if not t2 > t1:
            raise ValueError("oracle needs t2 > t1")
        self.p, self.t1, self.t2 = p, t1, t2

        def rhs(t, y):
            ld, w2 = p.lam_dot(t), p.omega_sq(t)
            return (y[1], -ld * y[1] - w2 * y[0], y[3], -ld * y[3] - w2 * y[2])

        # two homogeneous solutions: unit position and unit velocity at t1
        self.basis = integrate_ivp(rhs, (1.0, 0.0, 0.0, 1.0), (t1, t2), rtol=rtol, atol=atol)
        end = self.basis(t2)
        self.end_pos = (end[0], end[2])
        scale = max(1.0, abs(end[0]))
        if abs(end[2]) < 1e-10 * scale:
            raise ShootingError("endpoints are conjugate (caustic pair): no unique classical path")

    def velocity(self, x1: float, x2: float) -> float:
        miss = lambda v: x1 * self.end_pos[0] + v * self.end_pos[1] - x2  # noqa: E731
        width = 1.0 + abs(x1) + abs(x2)
        for _ in range(60):
            try:
                v = find_root(miss, (-width, width), tol=1e-15)
                break
            except RootBracketError:
                width *= 4.0
        else:
            raise ShootingError("could not bracket the initial velocity")
        # the miss distance is linear in v: one secant correction polishes the root
        return v - miss(v) / self.end_pos[1]

    def path(self, x1: float, v: float):
        def f(t):
            y = self.basis(t)
            return x1 * y[..., 0] + v * y[..., 2], x1 * y[..., 1] + v * y[..., 3]
        return f

    def action(self, x1: float, x2: float) -> float:
        v = self.velocity(x1, x2)
        return classical_action(self.p, self.path(x1, v), self.t1, self.t2, panels=128)


def vanvleck_oracle(p: SystemProfile, x2, t2, x1, t1, hbar: float = 1.0, h: float = 1e-4) -> complex:
    """Semiclassical kernel from the shot classical path (principal branch, first Maslov cell).

    The action comes from quadrature of the Lagrangian along the shot path and
    the van Vleck determinant from central differences of the action in the
    endpoints. Independent of the EMP machinery.
    """
    shoot = _Shooter(p, t1, t2)
    action = shoot.action(x1, x2)
    mixed = (
        shoot.action(x1 + h, x2 + h) - shoot.action(x1 + h, x2 - h)
        - shoot.action(x1 - h, x2 + h) + shoot.action(x1 - h, x2 - h)
    ) / (4.0 * h * h)
    return cmath.sqrt(1j * mixed / (TWO_PI * hbar)) * cmath.exp(1j * action / hbar)


def mixed_action_derivative(p: SystemProfile, x2, t2, x1, t1, h: float = 1e-4) -> float:
    """Van Vleck determinant ``d^2 A / dx1 dx2`` by central differences of the shot action."""
    shoot = _Shooter(p, t1, t2)
    return (
        shoot.action(x1 + h, x2 + h) - shoot.action(x1 + h, x2 - h)
        - shoot.action(x1 - h, x2 + h) + shoot.action(x1 - h, x2 - h)
    ) / (4.0 * h * h)


def scan(sol: EmpSolution, t_grid, x2: float = 0.0, x1: float = 0.0, t1: float | None = None) -> list[PropagatorValue]:
    """Kernel along a time grid with fixed endpoints (used for CSV scans)."""
    t1 = sol.t0 if t1 is None else t1
    return [general_propagator(sol, x2, float(t), x1, t1) for t in np.asarray(t_grid, dtype=float)]


__all__ = [
    "CAUSTIC_THRESHOLD", "CausticError", "CausticKernel", "GridResolutionError", "PropagatorValue",
    "ShootingError", "WavePacket", "caustic_propagator", "constant_propagator", "dissipative_propagator",
    "evolve_wavepacket", "free_propagator", "gaussian_packet", "general_propagator", "maslov_index",
    "mixed_action_derivative", "phase_factor", "probability_density", "scan", "vanvleck_oracle",
    "wrap_phase",
]
