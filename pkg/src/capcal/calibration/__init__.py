from .data import AbscissaKind, Dataset, Measurement, dumps_csv, loads_csv, read_csv, write_csv
from .fitting import (
    FAMILY_NAMES,
    Chi2Result,
    FitResult,
    LinearFamily,
    PiezoCalibration,
    chi_squared,
    fit_linear,
    fit_with_contact_voltage,
    make_family,
    piezo_to_separation,
    profile_chi2,
    refit_power_law_constants,
    separations,
)
from .report import dumps_report, fit_from_dict, fit_to_dict, format_report, loads_report, uncertainty_report
from .synth import (
    GENERATOR,
    LENS_CALIB,
    LENS_SIGMA,
    LENS_TRUTH,
    MTO_SIGMA,
    MTO_TRUTH,
    SynthSpec,
    generate_synthetic,
    lens_piezo_design,
    mto_design,
)
