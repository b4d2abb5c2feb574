"""Single-excitation dynamics of a damped qubit chain, with and without
reservoir memory, and the distance between the two evolutions.

The package splits into five layers:

* ``chain``: chain geometry, reservoir parameter sets, trajectories.
* ``markovian``: memoryless reference dynamics (adaptive ODE solve).
* ``kernels``: memory kernels R(t) and their transforms B(s).
* ``nonmarkovian``: two independent backends for the memory dynamics --
  a time-domain integro-differential march and a transform-domain
  closed form with numerical inversion.
* ``qsd``: trace-decay-aware state distance measures.
* ``scenario`` / ``cli``: batch orchestration and on-disk run records.
"""

from .chain import (
    LAB,
    TILDE,
    AmplitudeTrajectory,
    ChainConfig,
    DensityMatrixSeries,
    Lorentzian,
    LorentzianSquared,
    Markovian,
    Ohmic,
    SpectralDensity,
    density_matrix,
    environment_population,
    site_populations,
    subsample,
    to_lab_frame,
    total_population,
    validate_spectral_density,
)
from .errors import (
    BranchCutWarning,
    CalibrationError,
    ChainQsdError,
    ClampWarning,
    ConvergenceError,
    FrameError,
    HalfLifeNotFoundError,
    InvalidDensityError,
    NumericalConsistencyError,
    PoleProximityWarning,
    ScenarioError,
    SolverError,
)
from .kernels import KernelEval, kernel_for, upper_incomplete_gamma
from .markovian import OdeSettings, coupling_matrix, half_life, solve_markovian
from .nonmarkovian import (
    BACKENDS,
    INVERSION_METHODS,
    QUADRATURES,
    InversionSettings,
    VolterraSettings,
    a_m,
    f1_of_s,
    f_i_of_s,
    invert_laplace,
    laplace_amplitudes,
    solve_laplace,
    solve_nonmarkovian,
    solve_volterra,
)
from .qsd import (
    MEASURES,
    QsdSeries,
    bures_distance,
    fidelities,
    hellinger_distance,
    matrix_abs,
    psd_sqrt,
    qsd_many,
    qsd_series,
    trace_distance,
    trace_distance_radical,
)
from .scenario import (
    CalibrationSpec,
    ReservoirResult,
    RunRecord,
    Scenario,
    calibrate,
    compare_dirs,
    decay_time,
    derivative_sign_changes,
    emit,
    envelope_half_life,
    intervals_overlap,
    load_scenario,
    read_record,
    records_equal,
    reference_half_life_for,
    run_scenario,
    scenario_from_dict,
    scenario_hash,
    scenario_to_dict,
    variance_spike_window,
    windowed_variance,
)

__version__ = "1.0.0"

__all__ = [
    "LAB",
    "TILDE",
    "AmplitudeTrajectory",
    "ChainConfig",
    "DensityMatrixSeries",
    "Lorentzian",
    "LorentzianSquared",
    "Markovian",
    "Ohmic",
    "SpectralDensity",
    "density_matrix",
    "environment_population",
    "site_populations",
    "subsample",
    "to_lab_frame",
    "total_population",
    "validate_spectral_density",
    "BranchCutWarning",
    "CalibrationError",
    "ChainQsdError",
    "ClampWarning",
    "ConvergenceError",
    "FrameError",
    "HalfLifeNotFoundError",
    "InvalidDensityError",
    "NumericalConsistencyError",
    "PoleProximityWarning",
    "ScenarioError",
    "SolverError",
    "KernelEval",
    "kernel_for",
    "upper_incomplete_gamma",
    "OdeSettings",
    "coupling_matrix",
    "half_life",
    "solve_markovian",
    "BACKENDS",
    "INVERSION_METHODS",
    "QUADRATURES",
    "InversionSettings",
    "VolterraSettings",
    "a_m",
    "f1_of_s",
    "f_i_of_s",
    "invert_laplace",
    "laplace_amplitudes",
    "solve_laplace",
    "solve_nonmarkovian",
    "solve_volterra",
    "MEASURES",
    "QsdSeries",
    "bures_distance",
    "fidelities",
    "hellinger_distance",
    "matrix_abs",
    "psd_sqrt",
    "qsd_many",
    "qsd_series",
    "trace_distance",
    "trace_distance_radical",
    "CalibrationSpec",
    "ReservoirResult",
    "RunRecord",
    "Scenario",
    "calibrate",
    "compare_dirs",
    "decay_time",
    "derivative_sign_changes",
    "emit",
    "envelope_half_life",
    "intervals_overlap",
    "load_scenario",
    "read_record",
    "records_equal",
    "reference_half_life_for",
    "run_scenario",
    "scenario_from_dict",
    "scenario_hash",
    "scenario_to_dict",
    "variance_spike_window",
    "windowed_variance",
]
