"""Extended Pauli flag gadgets for post-selected error detection."""

from .circuit import (Circuit, Gate, compile_to_native, magic_distillation_circuit, parse,
                      serialize, to_unitary, zzzzz_rotation_circuit)
from .densesim import DensityMatrix, fidelity, output_state, postselect_flags, simulate
from .faults import (FlagScore, NoiseModel, fault_locations, output_error_set, quality,
                     rank_flags)
from .gadget import FlagGadget, NestedFlagSet, instrument, synthesize, validate_nesting
from .pauli import PauliString, commutes, multiply, multiply_phased, random_pauli, weight
from .propagation import (check_compatibility, conjugate_through_gate, disentangling_operator,
                          propagate)

__all__ = [
    "Circuit", "Gate", "compile_to_native", "magic_distillation_circuit", "parse", "serialize",
    "to_unitary", "zzzzz_rotation_circuit", "DensityMatrix", "fidelity", "output_state",
    "postselect_flags", "simulate", "FlagScore", "NoiseModel", "fault_locations",
    "output_error_set", "quality", "rank_flags", "FlagGadget", "NestedFlagSet", "instrument",
    "synthesize", "validate_nesting", "PauliString", "commutes", "multiply", "multiply_phased",
    "random_pauli", "weight", "check_compatibility", "conjugate_through_gate",
    "disentangling_operator", "propagate",
]
