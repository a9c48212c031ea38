"""
Where the kernel blows up
=========================

|K(x, t | 0, 0)|^2 does not depend on x. It diverges at the caustics and stays
finite in between; at a caustic the kernel is a rescaled mirror delta.
"""

import numpy as np

from quadprop import caustic_propagator, locate_caustics, make_profile, probability_density, solve_emp

sol = solve_emp(make_profile("mathieu", {"a": 2.0, "q": 1.0}), 1.0, (0.0, 10.0))
chart = locate_caustics(sol)

for t in np.linspace(0.5, 9.5, 10):
    print(f"t={t:4.1f}  |K|^2={probability_density(sol, t):10.5f}")

for ell, tl in chart.caustics[1:]:
    near = probability_density(sol, tl - np.array([1e-2, 1e-3, 1e-4]))
    k = caustic_propagator(sol, 0.0, tl)
    print(f"l={ell}: |K|^2 approaching t_l: {np.array2string(near, precision=1)}; "
          f"phase {k.phase:.3f}, x(0) = {k.mirror(1.0):+.4f} x(t_l)")

# damped oscillator: the EMP picks omega_bar^2 = omega0^2 - lambda0^2/4 and the density grows like exp(lambda0 t / 2)
ck = solve_emp(make_profile("caldirola_kanai", {"omega0": 1.0, "lambda0": 0.2}), np.sqrt(0.99), (0.0, 10.0), rho_dot0=-0.1)
for t in (0.5 * np.pi / np.sqrt(0.99), 2.5 * np.pi / np.sqrt(0.99)):
    print(f"damped t={t:.3f}: |K|^2 = {probability_density(ck, t):.6f}")
