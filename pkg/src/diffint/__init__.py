"""Differential atom interferometry with squeezed and entangled ensembles.

Closed-form phase-noise calculators for seven measurement schemes, an exact
Monte Carlo oracle for validating them, decoherence corrections with probe
detuning optimization, and a sweep/plot harness.
"""

from .constants import (
    C_LIGHT,
    D_DIPOLE_DEFAULT,
    EPSILON_0,
    H_PLANCK,
    HBAR,
    M_RB87,
)
from .core import (
    EnsembleConfig,
    PhysicalParams,
    Rotation,
    SpinMoments,
    StokesMoments,
    Vec3,
    apply_rotation,
    coherent_spin_state,
    coherent_stokes_state,
    compute_chi,
    coupling_from_chi,
    dipole_from_coupling,
    interferometer_rotation,
    rotation_about_axis,
    sagnac_phase,
)
from .decoherence import (
    DecoherenceParams,
    DetuningOptimum,
    analytic_minimum_variance,
    corrected_variance,
    decohere_spin_moments,
    decohere_stokes_moments,
    optical_density,
    optimize_detuning,
)
from .errors import (
    ConfigError,
    DegenerateTiltError,
    DiffintError,
    InvalidParameterError,
    OptimizationFailedError,
)
from .harness import (
    McComparison,
    RunConfig,
    SweepRow,
    SweepSpec,
    compare_mc,
    load_config,
    run_sweep,
)
from .mc import McOptions, McResult, MicroState, active_backend, run_scheme_mc
from .schemes import (
    AssumptionReport,
    LightConfig,
    PhaseEstimate,
    SchemeId,
    check_assumptions,
    evaluate_scheme,
)

__version__ = "1.0.0"

__all__ = [
    "C_LIGHT",
    "D_DIPOLE_DEFAULT",
    "EPSILON_0",
    "H_PLANCK",
    "HBAR",
    "M_RB87",
    "EnsembleConfig",
    "PhysicalParams",
    "Rotation",
    "SpinMoments",
    "StokesMoments",
    "Vec3",
    "apply_rotation",
    "coherent_spin_state",
    "coherent_stokes_state",
    "compute_chi",
    "coupling_from_chi",
    "dipole_from_coupling",
    "interferometer_rotation",
    "rotation_about_axis",
    "sagnac_phase",
    "ConfigError",
    "DegenerateTiltError",
    "DiffintError",
    "InvalidParameterError",
    "OptimizationFailedError",
    "DecoherenceParams",
    "DetuningOptimum",
    "analytic_minimum_variance",
    "corrected_variance",
    "decohere_spin_moments",
    "decohere_stokes_moments",
    "optical_density",
    "optimize_detuning",
    "AssumptionReport",
    "LightConfig",
    "PhaseEstimate",
    "SchemeId",
    "check_assumptions",
    "evaluate_scheme",
    "McOptions",
    "McResult",
    "MicroState",
    "active_backend",
    "run_scheme_mc",
    "McComparison",
    "RunConfig",
    "SweepRow",
    "SweepSpec",
    "compare_mc",
    "load_config",
    "run_sweep",
    "__version__",
]
