"""Interference of atoms bouncing inelastically from an evanescent-wave mirror.

Three mutually validating routes compute the final momentum distribution of
atoms that undergo a spontaneous Raman transfer while reflecting from an
exponential optical potential: a semiclassical phase-space picture, the exact
stationary scattering states, and split-operator wave-packet propagation with
quantum-jump transfers.
"""

from .core import (
    IncidentState,
    MomentumDistribution,
    NormConvention,
    PotentialConfig,
    RecoilKind,
    RecoilModel,
    UnitSystem,
    UNITS,
    ValidationError,
    recoil_nodes,
    recoil_weight,
)
from .specfun import (
    BesselOrder,
    besselk_imag,
    besselk_imag_scaled,
    besselk_imag_scaled_grid,
    stationary_norm,
    stationary_norm_log,
)
from .semiclassical import (
    TransferGeometry,
    Trajectory,
    emitted_photon_frequency,
    phase_difference,
    predicted_fringe_momenta,
    recoil_phase_difference,
    transfer_speed,
)
from .stationary import (
    OverlapConfig,
    OverlapEngine,
    StationaryState,
    averaged_spectrum,
    classical_boundaries,
    eigenfunction,
    overlap_spectrum,
)
from .wavepacket import (
    JumpSchedule,
    SpatialGrid,
    WaveFunction,
    WavePacketSpec,
    apply_jump,
    build_jump_schedule,
    final_spectrum,
    propagate,
    sample_spectrum,
    transfer_rate,
)
from .analysis import FringeReport, compare_routes, extract_fringes

__version__ = "0.1.0"
