"""Entanglement creation and preservation capability of two-qubit fusion processes."""

from .capability import (
    CapabilityKind,
    CapabilityReport,
    alpha,
    beta,
    capability_report,
    decompose,
    fidelity_threshold,
)
from .errors import QpcError, SolverError, ValidationError
from .estimation import PartialDataEstimate, estimate_capability, estimate_with_errors
from .quantum import ProcMat, QState, fusion_ideal, ghz_state
from .tomography import ClassicalFidelities, TomographyRecord, classical_fidelities, mle_fit

__version__ = "0.1.0"

__all__ = [
    "CapabilityKind", "CapabilityReport", "ClassicalFidelities", "PartialDataEstimate", "ProcMat",
    "QState", "QpcError", "SolverError", "TomographyRecord", "ValidationError", "alpha", "beta",
    "capability_report", "classical_fidelities", "decompose", "estimate_capability",
    "estimate_with_errors", "fidelity_threshold", "fusion_ideal", "ghz_state", "mle_fit",
]
