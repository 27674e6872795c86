"""mixlab: exact numerics for total-variation mixing of finite Markov chains.

Computes discrete, lazy, averaged, and continuous-time mixing profiles of
finite chains, and checks the comparison inequalities between them
(Abelian direction with explicit constants, Tauberian direction with fitted
constants), maximal-function bounds, tail bounds, and coupling identities.
"""

from .chain import (
    ChainSpec,
    ValidatedChain,
    ensure_distribution,
    lazy_kernel,
    point_mass,
    tv_distance,
    validate_chain,
)
from .distances import (
    DistanceProfile,
    MixingReport,
    distance_from,
    mixing_time,
    phi,
    profile,
    psi,
    worst_case_distance,
)
from .spectral import (
    DirectKernel,
    Spectrum,
    decompose,
    heat_series_reference,
    kernel_row,
    make_engine,
)
from .zoo import FamilySpec, make_chain, section6_even_odd_sets, section6_exact_pi

__version__ = "0.1.0"

__all__ = [
    "ChainSpec",
    "ValidatedChain",
    "ensure_distribution",
    "lazy_kernel",
    "point_mass",
    "tv_distance",
    "validate_chain",
    "DistanceProfile",
    "MixingReport",
    "distance_from",
    "mixing_time",
    "phi",
    "profile",
    "psi",
    "worst_case_distance",
    "DirectKernel",
    "Spectrum",
    "decompose",
    "heat_series_reference",
    "kernel_row",
    "make_engine",
    "FamilySpec",
    "make_chain",
    "section6_even_odd_sets",
    "section6_exact_pi",
    "__version__",
]
