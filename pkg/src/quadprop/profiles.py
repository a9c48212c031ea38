"""Quadratic systems ``x'' + lam'(t) x' + omega^2(t) x = F(t)``.

A :class:`SystemProfile` bundles the frequency-squared, friction exponent
(with its first two derivatives) and driving force as plain callables of time.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Callable, Mapping

import numpy as np

from .integrators import DEFAULT_ATOL, DEFAULT_RTOL, DenseSolution, integrate_ivp

Func = Callable[[float], float]

KINDS = ("constant", "caldirola_kanai", "mathieu", "custom")

# centered-difference step used when a custom profile does not supply lam derivatives
FD_STEP = 1e-6


class ProfileError(ValueError):
    """Bad profile kind or parameters."""


def _zero(t):
    return np.zeros_like(np.asarray(t, dtype=float))[()]


def _const(c):
    def f(t):
        return np.full_like(np.asarray(t, dtype=float), c)[()]
    return f


@dataclass(frozen=True)
class SystemProfile:
    """Frequency, friction and force of a 1-D quadratic system.

    All callables accept scalars or numpy arrays.
    """

    omega_sq: Func
    lam: Func
    lam_dot: Func
    lam_ddot: Func
    force: Func
    kind: str = "custom"
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))

    @property
    def has_force(self) -> bool:
        return self.force is not _zero

    @property
    def frictionless(self) -> bool:
        return self.lam is _zero

    def alpha(self, t):
        """Kinetic coefficient ``alpha = exp(-lam)`` of the general quadratic Lagrangian."""
        return np.exp(-self.lam(t))

    def beta(self, t):
        """Potential coefficient ``beta = 1/alpha = exp(lam)``."""
        return np.exp(self.lam(t))


def _force_from_params(params: Mapping[str, float]) -> Func:
    f0 = params.get("F0", 0.0)
    f1 = params.get("F1", 0.0)
    nu = params.get("nu", 1.0)
    if f0 == 0.0 and f1 == 0.0:
        return _zero

    def force(t):
        return f0 + f1 * np.cos(nu * np.asarray(t, dtype=float))
    return force


def _linear_friction(lambda0: float):
    if lambda0 == 0.0:
        return _zero, _zero, _zero

    def lam(t):
        return lambda0 * np.asarray(t, dtype=float)
    return lam, _const(lambda0), _zero


_REQUIRED = {
    "constant": ("omega0",),
    "caldirola_kanai": ("omega0", "lambda0"),
    "mathieu": ("a", "q"),
}
_OPTIONAL = {"lambda0", "F0", "F1", "nu"}


def make_profile(
    kind: str,
    params: Mapping[str, float] | None = None,
    *,
    omega_sq: Func | None = None,
    lam: Func | None = None,
    lam_dot: Func | None = None,
    lam_ddot: Func | None = None,
    force: Func | None = None,
) -> SystemProfile:
    """Build a profile of the given ``kind``.

    Built-in kinds and their parameters:

    ``constant``         omega0, optional lambda0 (default 0)
    ``caldirola_kanai``  omega0, lambda0
    ``mathieu``          a, q, optional lambda0 (default 0); ``omega^2 = a - 2 q cos 2t``

    Every built-in kind accepts an optional force ``F(t) = F0 + F1 cos(nu t)``.
    Friction is always ``lam = lambda0 * t``.

    ``custom`` takes the callables as keyword arguments. Missing ``lam_dot`` /
    ``lam_ddot`` fall back to centered differences with step ``FD_STEP``.
    """
    params = {k: float(v) for k, v in (params or {}).items()}
    if kind not in KINDS:
        raise ProfileError(f"unknown profile kind {kind!r}; expected one of {KINDS}")

    if kind == "custom":
        if omega_sq is None:
            raise ProfileError("custom profile needs omega_sq")
        lam = lam or _zero
        if lam is _zero:
            lam_dot = lam_dot or _zero
            lam_ddot = lam_ddot or _zero
        if lam_dot is None:
            def lam_dot(t, _l=lam):
                t = np.asarray(t, dtype=float)
                return (_l(t + FD_STEP) - _l(t - FD_STEP)) / (2 * FD_STEP)
        if lam_ddot is None:
            def lam_ddot(t, _l=lam):
                t = np.asarray(t, dtype=float)
                return (_l(t + FD_STEP) - 2 * _l(t) + _l(t - FD_STEP)) / FD_STEP**2
        return SystemProfile(omega_sq, lam, lam_dot, lam_ddot, force or _zero, "custom", params)

    missing = [k for k in _REQUIRED[kind] if k not in params]
    if missing:
        raise ProfileError(f"{kind} profile missing parameter(s): {', '.join(missing)}")
    unknown = set(params) - set(_REQUIRED[kind]) - _OPTIONAL
    if unknown:
        raise ProfileError(f"{kind} profile got unknown parameter(s): {', '.join(sorted(unknown))}")
    lambda0 = params.setdefault("lambda0", 0.0)
    if lambda0 < 0:
        raise ProfileError("lambda0 must be >= 0")

    if kind == "mathieu":
        a, q = params["a"], params["q"]

        def w2(t):
            return a - 2.0 * q * np.cos(2.0 * np.asarray(t, dtype=float))
    else:
        w2 = _const(params["omega0"] ** 2)

    l, ld, ldd = _linear_friction(lambda0)
    return SystemProfile(w2, l, ld, ldd, _force_from_params(params), kind, params)


def shifted_frequency(p: SystemProfile, t):
    """Frictionless frequency squared ``omega^2 - lam'^2/4 - lam''/2`` after ``x = y exp(-lam/2)``."""
    return p.omega_sq(t) - 0.25 * p.lam_dot(t) ** 2 - 0.5 * p.lam_ddot(t)


@dataclass(frozen=True)
class ParticularSolution:
    """Particular solution ``h`` of the forced equation with ``h(t0) = h'(t0) = 0``."""

    dense: DenseSolution | None
    t_span: tuple[float, float]

    def __call__(self, t):
        if self.dense is None:
            return _zero(t)
        return self.dense(t)[..., 0]

    def velocity(self, t):
        if self.dense is None:
            return _zero(t)
        return self.dense(t)[..., 1]


def remove_driving_force(
    p: SystemProfile, t0: float, t1: float, tol: float = DEFAULT_RTOL
) -> tuple[SystemProfile, ParticularSolution]:
    """Split off the force: returns the homogeneous profile and ``h``.

    Solutions of the forced equation are ``x_forced = x + h`` with ``x`` a
    solution of the homogeneous one.
    """
    if not t1 > t0:
        raise ValueError("need t0 < t1")
    if p.force is _zero:
        return p, ParticularSolution(None, (t0, t1))

    def rhs(t, y):
        h, hd = y
        return (hd, p.force(t) - p.lam_dot(t) * hd - p.omega_sq(t) * h)

    dense = integrate_ivp(rhs, (0.0, 0.0), (t0, t1), rtol=tol, atol=min(DEFAULT_ATOL, tol))
    params = {k: v for k, v in p.params.items() if k not in ("F0", "F1", "nu")}
    return replace(p, force=_zero, params=params), ParticularSolution(dense, (t0, t1))


def time_reparametrize(p: SystemProfile, t):
    """Friction-free time ``t~ = -exp(-lambda0 t)/lambda0`` and the frequency in it.

    Only defined for ``lam = lambda0 t`` with ``lambda0 > 0`` and constant
    ``omega0``; returns ``(t_tilde, omega0^2 / (t_tilde lambda0)^2)``.
    """
    lambda0 = p.params.get("lambda0", 0.0)
    if p.kind not in ("constant", "caldirola_kanai"):
        raise ProfileError("time reparametrization needs a constant-frequency profile")
    if lambda0 <= 0:
        raise ProfileError("time reparametrization is degenerate for lambda0 = 0")
    t = np.asarray(t, dtype=float)
    t_tilde = -np.exp(-lambda0 * t) / lambda0
    return t_tilde[()], (p.params["omega0"] ** 2 / (t_tilde * lambda0) ** 2)[()]


def parse_profile_block(block: Mapping[str, str | float]) -> SystemProfile:
    """Build a profile from a flat ``{"kind": ..., name: value}`` block.

    This is the shared parser behind ``--profile/--param`` and config files.
    """
    block = dict(block)
    kind = block.pop("kind", None)
    if kind is None:
        raise ProfileError("profile block needs 'kind'")
    try:
        params = {k: float(v) for k, v in block.items()}
    except (TypeError, ValueError) as exc:
        raise ProfileError(f"non-numeric profile parameter: {exc}") from None
    if kind == "custom":
        raise ProfileError("custom profiles cannot be built from a configuration block")
    return make_profile(str(kind), params)
