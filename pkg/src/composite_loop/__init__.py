"""Composite pulse design and robust |1> -> |3> transfer in a three-state loop."""
from .design import (
    CompositeSequence,
    GateSpec,
    PhaseSchedule,
    broadband_phases,
    build_sequence,
    custom_phases,
    excitation_profile,
    flatness_order,
    phase_gate_sequence,
    universal_phases,
)
from .loop import (
    IntegrationError,
    LoopHamiltonian,
    LoopSchedule,
    PiecewiseDrive,
    TimeTrace,
    assemble_general_hamiltonian,
    carroll_hioe_hamiltonian,
    effective_sequence,
    effective_two_level,
    exact_propagate,
    final_p3,
    integrate,
)
from .su2 import (
    CayleyKlein,
    Propagator3,
    PulseSegment,
    carroll_hioe_lift,
    compose,
    loop_populations,
    resonant_propagator,
    segment_propagator,
    transition_probability,
)

__version__ = "0.1.0"
