"""Atomic multiport beam splitters on ring optical lattices."""

from .core_model import (
    BasisSizeError,
    ConfigurationError,
    FockBasis,
    HamiltonianMatrix,
    ImpossibleLossError,
    ManyBodyState,
    RingSpec,
    annihilate_at_site,
    build_basis,
    hopping_hamiltonian,
    interaction_hamiltonian,
    offset_hamiltonian,
    phase_imprint,
    ring_hamiltonian,
    site_populations,
)
from .dynamics import (
    Propagator,
    adiabaticity_limit,
    bogoliubov_spectrum,
    intensity_fluctuation,
    propagate,
    recoil_energy,
    tunneling_frequency,
    tunneling_rate,
)
from .splitter import (
    BalanceResult,
    SingleParticleState,
    TransferMatrix,
    balance_time,
    chi,
    even_phase_structure_check,
    evolve_single_particle,
    find_balance_time,
    inverse_splitter_fidelity,
    mode_transform,
    omegas,
    transfer_matrix,
)

__version__ = "0.1.0"
