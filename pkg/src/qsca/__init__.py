"""Pulse-level power side-channel toolkit for superconducting quantum circuits."""

from .attacks import (
    CandidateEntry,
    CandidateList,
    ReconstructedCircuit,
    ReconstructionParams,
    binarize,
    distinguishability,
    find_segments,
    identify_uc,
    match_gate,
    reconstruct,
    uc_accuracy,
    validate_params,
)
from .circuit import (
    Circuit,
    GateApp,
    apply_layout,
    enumerate_layouts,
    format_circuit,
    parse_circuit,
    unitary_of,
)
from .defense import equivalent_up_to_phase, strip_rz, substitute, u3_sequence
from .device import (
    BasisPulseLibrary,
    Channel,
    Device,
    LibraryEntry,
    PulsePlacement,
    PulseShape,
    drag,
    gaussian_square,
    lookup_basis_pulses,
    sample_drag,
    sample_envelope,
    sample_gaussian_square,
    validate_library,
)
from .devicegen import (
    TopologyShape,
    connected_subset,
    gen_device,
    gen_library,
    gen_random_circuit,
    gen_textbook,
    star_device,
)
from .metrics import (
    MetricKind,
    circuit_dist,
    circuit_norm,
    min_pairwise_norm_dist,
    norm_dist,
)
from .scheduler import GateRecord, Schedule, ScheduledPulse, schedule, schedule_span
from .tracegen import (
    PowerTrace,
    ScalarStats,
    add_noise,
    channel_amplitude,
    per_channel_power,
    scalar_stats,
    total_power,
)

__version__ = "0.1.0"
