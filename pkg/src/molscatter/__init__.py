"""Scattering of lattice electrons on molecular junctions.

One library, four layers: `model` holds the physical data types and unit
conventions, `coupling` turns CI expansions into lead-molecule transfer
amplitudes, `scatter1` and `scatter2` solve the one- and two-electron
scattering problems, `oracle` re-derives both answers by independent
brute force, and `circuit` composes S-matrices into interference
circuits. The `molscatter` command line drives sweeps over all of it.
"""

from .errors import (
    BoundaryError,
    FluxError,
    GateError,
    InputError,
    MolscatterError,
    NumericalError,
    OracleError,
    PhaseRefinementError,
    PoleError,
    SchemaError,
)
from .model import (
    CIState,
    Dispersion,
    DispersionValidityWarning,
    K_COULOMB,
    K_KIN,
    KAPPA_VALID_MAX,
    LatticeParams,
    LeadConfig,
    MoleculeModel,
    OccupationVector,
    OrbitalGrid,
    OrbitalNormWarning,
    Violation,
    bundled_molecule_path,
    canonical_beta,
    dump_molecule,
    energy_to_momentum,
    integrate_orbital_factor,
    load_molecule,
    molecule_to_dict,
    momentum_to_energy,
    parse_molecule,
    validate_molecule,
)
from .coupling import (
    CouplingMatrix,
    assemble_B,
    creation_amplitudes,
    single_creation_overlap,
    state_coupling_column,
)
from .scatter1 import (
    IllConditionedWarning,
    PoleProximityWarning,
    ScatterSolution,
    SpectrumTable,
    chain_coupling,
    chain_s_matrix,
    effective_length,
    effective_length_at_energy,
    read_spectrum_csv,
    s_matrix,
    scattering_solution,
    spectrum,
    splitter_phase,
    splitter_total_transmission,
    transmission_peaks,
    write_spectrum_csv,
)
from .scatter2 import (
    PhaseSpectrum,
    TwoParticleProblem,
    TwoParticleSolution,
    assemble_system,
    coulomb_potential,
    momentum_transform,
    phase_spectrum,
    read_phase_csv,
    solve_two_particle,
    write_phase_csv,
)
from .oracle import (
    ArrivalResult,
    TransferResult,
    TruncatedLattice,
    Wavepacket,
    WavepacketResult,
    arrival_time,
    build_truncated_hamiltonian,
    chebyshev_evolve,
    momentum_averaged_transmission,
    transfer_matrix_two_particle,
    wavepacket_transmission,
)
from .circuit import (
    GateKind,
    GateOp,
    LeadState,
    SplitterGate,
    arm_phase_gate,
    circuit_ops,
    cphase_gate,
    hadamard_test,
    ideal_splitter,
    propagate,
    recombiner_matrix,
    recombiner_op,
    relabel_leads,
    splitter_gate,
)

__version__ = "0.1.0"
