"""Eigenvalue branch of the anomalous-magnetic (Bessel) channel.

For nu = mu = 0 the channel k = 1 with lambda = -0.7 is subcritical with
gamma = 0.3.  Every self-adjoint extension theta carries at most one bound
state in the gap; the closed-form map theta(a) is compared with shooting.
"""

import math

import numpy as np

from dirac_extensions.channel_core import Coupling
from dirac_extensions.spectral import bessel_eigenvalue_exact, bessel_theta_exact, shoot_eigenvalues

COUPLING = Coupling(nu=0.0, mu=0.0, lam=-0.7, mass=1.0)

if __name__ == "__main__":
    print(f"{'a':>6} {'theta(a)':>10} {'shooting':>14} {'|da|':>10}")
    for a in np.linspace(-0.9, 0.9, 7):
        theta = bessel_theta_exact(0.3, 1.0, float(a)).theta
        found = shoot_eigenvalues(COUPLING, 1, theta, search=(max(a - 0.05, -0.99), min(a + 0.05, 0.99)), n_scan=40)
        shot = found[0].a if found else math.nan
        print(f"{a:6.2f} {theta:10.6f} {shot:14.10f} {abs(shot - a):10.2e}")

    print("\nthetas outside (0, pi/2) carry no eigenvalue:")
    for theta in (0.0, 2 * math.pi / 3, 3 * math.pi / 4):
        print(f"  theta = {theta:.4f}: closed form {bessel_eigenvalue_exact(0.3, 1.0, theta)}, "
              f"shooting {[e.a for e in shoot_eigenvalues(COUPLING, 1, theta, n_scan=60)]}")
