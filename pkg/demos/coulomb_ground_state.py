"""Ground state of the attractive Coulomb field in the distinguished extension.

Builds the closed-form eigenfunction for nu near and at the critical value 1,
checks the channel residual and that the boundary data satisfy the
distinguished condition, then re-finds the energy by shooting.
"""

from dirac_extensions.channel_core import classify, distinguished_theta
from dirac_extensions.radial import apply_radial_operator, membership_theta
from dirac_extensions.spectral import coulomb_eigenfunction, shoot_eigenvalues

if __name__ == "__main__":
    for nu in (0.9, 0.95, 0.99, 1.0):  # above sqrt(3)/2 the k = -1 channels need a boundary condition
        state = coulomb_eigenfunction(nu)
        channel, f = next(iter(state.channels.items()))
        report = classify(state.coupling, channel)
        theta = distinguished_theta(state.coupling, channel).theta
        residual = (apply_radial_operator(state.coupling, channel, f) - f.scaled(state.a)).l2_norm() / f.l2_norm()
        member = membership_theta(f, theta, report)
        found = shoot_eigenvalues(state.coupling, channel.k, theta, search=(state.a - 0.05, state.a + 0.05),
                                  n_scan=40)
        shot = f"{found[0].a:.12f}" if found else "-"
        print(f"nu={nu:4.2f} a={state.a:.12f} regime={report.regime.value:<22} residual={residual:.1e} "
              f"theta={theta:.4f} member={member.member} shooting={shot}")
