"""Equilibria of Kuramoto oscillator networks from adjacency eigenvectors."""

__version__ = "0.1.0"

from .dynamics import (  # noqa: E402
    Trajectory,
    integrate_km,
    order_parameter,
    propagate_analytical,
    wrap_phases,
)
from .equilibria import (  # noqa: E402
    EquilibriumCertificate,
    classify_complete,
    design_random_equilibrium,
    equilibria_from_eigenvectors,
    g_circulant_equilibria,
    multilayer_certificate,
    multilayer_equilibrium,
    twisted_state,
    verify_equilibrium,
)
from .graphs import (  # noqa: E402
    AdjacencyMatrix,
    GroupSpec,
    build_circulant,
    build_complete,
    build_erdos_renyi,
    build_g_circulant,
    build_join,
    build_ring,
)
from .spectral import EigenPair, circulant_spectrum, eig, expm_action  # noqa: E402

__all__ = [
    "AdjacencyMatrix",
    "EigenPair",
    "EquilibriumCertificate",
    "GroupSpec",
    "Trajectory",
    "build_circulant",
    "build_complete",
    "build_erdos_renyi",
    "build_g_circulant",
    "build_join",
    "build_ring",
    "circulant_spectrum",
    "classify_complete",
    "design_random_equilibrium",
    "eig",
    "equilibria_from_eigenvectors",
    "expm_action",
    "g_circulant_equilibria",
    "integrate_km",
    "multilayer_certificate",
    "multilayer_equilibrium",
    "order_parameter",
    "propagate_analytical",
    "twisted_state",
    "verify_equilibrium",
    "wrap_phases",
]
