"""Bi-local Clifford entanglement distillation and advantage distillation for QKD."""

from .distill import (
    acceptance_cells,
    concatenate_ed_ad,
    dejmps,
    dejmps_recursive,
    pushforward_statistics,
    repetition_ad,
)
from .f2 import BellLabel, F2Matrix, PauliVector, is_symplectic, symplectic_product
from .keyrates import (
    bb84_rate,
    binary_entropy,
    ck_condition,
    critical_qber,
    finite_envelope,
    mutual_info_difference,
)
from .protocols import SymplecticProtocol, Transversal, build_transversal, complete_to_protocol
from .search import Family, enumerate_best
from .states import BellDiagonalState, DistillationOutcome, werner, dephasing

__version__ = "0.1.0"
