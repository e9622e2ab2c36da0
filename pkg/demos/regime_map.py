"""Regime map of the Coulomb-type potential in the lowest channels.

Sweeps the electric coupling nu for several anomalous-magnetic couplings and
prints where each channel leaves the essentially self-adjoint range.
"""

import numpy as np

from dirac_extensions.channel_core import Coupling, Regime, classify

NUS = np.round(np.arange(0.0, 1.501, 0.01), 10)


def first_nu(lam: float, k: int, regimes: set[Regime]) -> float | None:
    for nu in NUS:
        if classify(Coupling(nu=float(nu), lam=lam), k).regime in regimes:
            return float(nu)
    return None


if __name__ == "__main__":
    extensions = {Regime.SUBCRITICAL, Regime.CRITICAL, Regime.SUPERCRITICAL}
    print(f"{'lambda':>7} {'k':>3} {'extensions from':>16} {'critical at':>12} {'supercritical from':>19}")
    for lam in (0.0, 0.3, -0.3):
        for k in (-1, 1, -2, 2):
            onset = first_nu(lam, k, extensions)
            crit = first_nu(lam, k, {Regime.CRITICAL})
            sup = first_nu(lam, k, {Regime.SUPERCRITICAL})
            print(f"{lam:7.2f} {k:3d} {onset!s:>16} {crit!s:>12} {sup!s:>19}")
    print(f"\npure Coulomb threshold sqrt(3)/2 = {np.sqrt(3) / 2:.6f}")
