"""Sphere-plane capacitance models and electrostatic calibration fits."""

__version__ = "0.1.0"

from .errors import (
    CapcalError,
    ConvergenceError,
    DatasetFormatError,
    DomainError,
    EmptyObjectiveError,
    ObjectiveError,
    SingularMatrixError,
    ValidityWarning,
)
from .models import (
    EXPANSION_COEFFS,
    MTO_SPHERE,
    REFERENCE_LENS,
    CapacitanceModel,
    ExactSphere,
    Expansion,
    IdealLog,
    ModifiedLens,
    ModifiedLensGeometry,
    ParasiticParams,
    PfaLeading,
    PowerLaw,
    SmallSepLog,
    SphereGeometry,
    VoltageConfig,
    evaluate_model,
)
