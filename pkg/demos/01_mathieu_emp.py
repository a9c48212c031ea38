"""
Fake time for the Mathieu oscillator
====================================

x'' + (a - 2q cos 2t) x = 0 with a=2, q=1 is parametrically excited. The EMP
amplitude rho and the fake time tau turn it into a unit oscillator in tau.
"""

import numpy as np

from quadprop import check_omega_bar, locate_caustics, make_profile, solve_emp, trajectory

p = make_profile("mathieu", {"a": 2.0, "q": 1.0})
sol = solve_emp(p, omega_bar=1.0, t_span=(0.0, 10.0))
print(f"{sol.knots.size} adaptive knots on [0, 10]")

# omega_bar^2 rebuilt from tau alone must be constant
mean, dev = check_omega_bar(sol)
print(f"omega_bar^2 = {mean:.12f}, max relative deviation {dev:.1e}")

t = np.linspace(0, 10, 6)
for ti, r, tau in zip(t, sol.rho(t), sol.tau(t)):
    print(f"t={ti:5.2f}  rho={r:8.5f}  tau/pi={tau / np.pi:7.4f}")

# caustics sit where tau crosses multiples of pi, map boundaries at odd multiples of pi/2
chart = locate_caustics(sol)
print("caustics   t_l:", [f"{t:.4f}" for _, t in chart.caustics])
print("boundaries r_k:", [f"{r:.4f}" for _, r in chart.boundaries])

# every path launched from x=0 comes back to x=0 at the caustics
for a in (0.5, 1.0, 2.0):
    x, _ = trajectory(sol, a, 0.0, chart.caustic_times)
    print(f"a={a}: x(t_l) =", np.array2string(x, precision=2, suppress_small=True))

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    tt = np.linspace(0, 10, 1000)
    fig, ax = plt.subplots(figsize=(7, 3.5))
    for a in (0.5, 1.0, 1.5):
        ax.plot(tt, trajectory(sol, a, 0.0, tt)[0], lw=1)
    ax.plot(tt, sol.rho(tt), "k--", label="rho")
    ax.plot(tt, sol.tau(tt) / np.pi, "k:", label="tau / pi")
    for tl in chart.caustic_times:
        ax.axvline(tl, color="grey", lw=0.5)
    ax.set_xlabel("t")
    ax.legend()
    fig.tight_layout()
    fig.savefig("mathieu_emp.png", dpi=120)
    print("saved mathieu_emp.png")
