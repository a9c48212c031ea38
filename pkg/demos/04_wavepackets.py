"""
Gaussian packets pushed through the exact kernel
================================================

Free spreading, mirror refocusing after half a period and a squeezed packet in
the Mathieu trap.
"""

import numpy as np

from quadprop import evolve_wavepacket, gaussian_packet, locate_caustics, make_profile, solve_emp

x = np.linspace(-12, 12, 2048)

# free particle: width grows like sqrt(1 + t^2)
free = solve_emp(make_profile("constant", {"omega0": 0.0}), 1.0, (0.0, 3.0))
psi0 = gaussian_packet(x)
for t in (0.5, 1.0, 2.0):
    psi = evolve_wavepacket(free, psi0, t)
    width = np.sqrt(2 * np.sum(x**2 * psi.density) * psi.dx)
    print(f"free t={t}: width {width:.6f} expected {np.sqrt(1 + t**2):.6f} norm {psi.norm():.12f}")

# unit oscillator: after half a period the packet is its own mirror image
osc = solve_emp(make_profile("constant", {"omega0": 1.0}), 1.0, (0.0, 4.0))
psi0 = gaussian_packet(x, center=2.0, width=0.6, momentum=1.0)
half = evolve_wavepacket(osc, psi0, np.pi)
print("mirror error after half period:", np.max(np.abs(np.abs(half.amplitudes) - np.abs(psi0.amplitudes[::-1]))))

# Mathieu: the packet breathes and refocuses, rescaled, at the first caustic
mat = solve_emp(make_profile("mathieu", {"a": 2.0, "q": 1.0}), 1.0, (0.0, 10.0))
t1 = locate_caustics(mat).caustic(1)
psi0 = gaussian_packet(x, center=1.0, width=1.0)
for t in (0.5, 1.0, 1.5, t1):
    psi = evolve_wavepacket(mat, psi0, t)
    mean = np.sum(x * psi.density) * psi.dx
    print(f"mathieu t={t:.4f}: <x>={mean:+.5f} peak |psi|^2={psi.density.max():.5f} norm {psi.norm():.10f}")
