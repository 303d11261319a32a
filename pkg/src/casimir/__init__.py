"""Casimir pressure and free energy between parallel mirrors.

The library evaluates the finite-temperature Lifshitz expressions for
metallic mirrors under interchangeable dielectric models (ohmic-loss
Drude, lossless plasma, plasma plus core-electron oscillators), checks
the models' causality relations numerically, and probes the
thermodynamic consequences of the zero-loss limit.
"""

from .constants import (
    EV_PER_NM2_TO_J_PER_M2,
    EV_PER_NM3_TO_PA,
    HBAR_C_EV_NM,
    KB_EV_PER_K,
    matsubara_frequency,
)
from .dispersion import (
    WEAK_LIMIT_TEST_SUITE,
    FrequencyGrid,
    KKReport,
    MollifiedDelta,
    generalized_relation_admissible,
    kk_imag_axis_generalized,
    kk_imag_axis_standard,
    kk_imag_from_real_generalized,
    kk_real_from_imag_generalized,
    kk_residual_report,
    mollified_delta_identity,
    pv_integral,
    standard_relation_admissible,
    suite_test_function,
    weak_limit_drude,
    weak_limit_prediction,
)
from .errors import (
    AmbiguousClassificationError,
    CasimirError,
    ConfigError,
    ConvergenceError,
    CoverageError,
    InadmissibleModelError,
)
from .lifshitz import (
    ComparisonTable,
    CompareRow,
    FreeEnergyResult,
    LifshitzOptions,
    MirrorPair,
    PressureResult,
    compare_models,
    free_energy,
    fresnel_coefficients,
    matsubara_frequencies,
    pressure,
    pressure_and_free_energy,
    pressure_ideal_metal,
    zero_frequency_coefficients,
)
from .materials import (
    DrudeParams,
    MaterialModel,
    MatsubaraEps,
    OscillatorSet,
    PermeabilityModel,
    PlasmaParams,
    chi_imag_axis,
    eps_at_matsubara,
    gold_drude,
    gold_oscillators,
    gold_plasma,
    material_from_dict,
    material_from_json,
    material_to_dict,
    material_to_json,
    model_id,
    mu_at_matsubara,
)
from .optics import (
    DrudeBelowCutoff,
    FitResult,
    OpticalDataTable,
    PlasmaBelowCutoff,
    eps_imag_axis_from_data,
    fit_oscillators,
    load_nk_table,
    synthesize_nk_table,
)
from .thermo import (
    EntropyCurve,
    EntropyEstimate,
    NernstClassification,
    default_temperature_ladder,
    entropy,
    nernst_probe,
)

__version__ = "0.1.0"
