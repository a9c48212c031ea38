"""
The phase factor along classical paths
======================================

Split the kernel as K = |K| P and follow P along x(t) = a u1(t). Between
caustics P precesses around exp(-i pi/4 (1 + 2 l)); crossing a caustic it
drops by pi/2.
"""

import cmath

import numpy as np

from quadprop import locate_caustics, make_profile, maslov_index, phase_factor, solve_emp

osc = solve_emp(make_profile("constant", {"omega0": 1.0}), 1.0, (0.0, 10.0))

# hbar = omega_bar = 1 closed form for the unit oscillator
a = 1.0
for t in (0.5, 2.0, 3.5, 5.0, 7.0):
    ell = maslov_index(osc, 0.0, t)
    closed = cmath.exp(-1j * np.pi / 4 * (1 - a**2 / np.pi * np.sin(2 * t)) - 1j * np.pi / 2 * ell)
    print(f"t={t:4.1f}  l={ell}  P={phase_factor(osc, a, t):.6f}  closed form={closed:.6f}")

# the jump is -pi/2 whatever the slope, and also for the Mathieu profile
mat = solve_emp(make_profile("mathieu", {"a": 2.0, "q": 1.0}), 1.0, (0.0, 10.0))
for name, sol in (("oscillator", osc), ("mathieu", mat)):
    for ell, tl in locate_caustics(sol).caustics[1:]:
        jumps = [cmath.phase(phase_factor(sol, s, tl + 1e-6) / phase_factor(sol, s, tl - 1e-6)) for s in (0.3, 1.0, 2.5)]
        print(f"{name:10s} l={ell} t={tl:.4f} jump/(pi/2) =", np.round(np.array(jumps) / (np.pi / 2), 5))

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    tt = np.linspace(0.01, 9.99, 3000)
    tt = tt[np.abs(np.sin(mat.tau(tt))) > 1e-3]
    fig, ax = plt.subplots(figsize=(7, 3))
    for s in (0.5, 1.0):
        P = np.array([phase_factor(mat, s, t) for t in tt])
        ax.plot(tt, np.unwrap(np.angle(P)) / np.pi, ".", ms=1, label=f"a={s}")
    ax.set_xlabel("t")
    ax.set_ylabel("arg P / pi")
    ax.legend()
    fig.tight_layout()
    fig.savefig("maslov_phase.png", dpi=120)
    print("saved maslov_phase.png")
