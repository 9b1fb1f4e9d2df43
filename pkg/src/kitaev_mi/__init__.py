"""Exact vortex-free ground state of the Kitaev honeycomb model and the
mutual-information diagnostics of its gapless/gapped transition."""

__version__ = "0.1.0"

from .spectrum import (
    Couplings,
    Momentum,
    Phase,
    SpectralPoint,
    classify_phase,
    energy_gap,
    ground_energy,
    line_point,
    momentum_grid,
    spectral_point,
)
from .correlators import (
    CorrelatorConfig,
    Displacement,
    longest_displacement,
    two_bond_connected,
    two_bond_zzzz_fast,
    two_bond_zzzz_naive,
    two_site_zz,
)
from .information import (
    mutual_info_two_bond,
    mutual_info_two_bond_connected,
    mutual_info_two_site,
)

__all__ = [
    "Couplings", "Momentum", "Phase", "SpectralPoint", "classify_phase", "energy_gap",
    "ground_energy", "line_point", "momentum_grid", "spectral_point",
    "CorrelatorConfig", "Displacement", "longest_displacement", "two_bond_connected",
    "two_bond_zzzz_fast", "two_bond_zzzz_naive", "two_site_zz",
    "mutual_info_two_bond", "mutual_info_two_bond_connected", "mutual_info_two_site",
]
