"""Self-adjoint extensions of Dirac operators with Coulomb-type matrix potentials.

Submodules
----------
channel_core   couplings, partial-wave channels, regime classification, transfer matrices
radial         radial grids, integrators, boundary-data extraction and the space J
spectral       Bessel and Coulomb closed forms, shooting eigenvalues
inequalities   weighted Hardy inequalities, sharpness and trace probes
partialwave    spinor harmonics, channel decomposition, commutator checks
verification   registry of the numerical checks run by ``dirac-ext verify``
"""

from .channel_core import Channel, Coupling, Regime, classify, distinguished_theta

__version__ = "0.1.0"

__all__ = ["Channel", "Coupling", "Regime", "classify", "distinguished_theta", "__version__"]
