"""Target-partaker-guardian reaction-advection-diffusion toolkit.

Finite-volume solver, linear-stability analyzer, and diagnostics for a
three-component system in which a partaker population chemotaxes up the
gradient of a target field it consumes, while a guardian population both
follows that gradient and suppresses target growth.
"""

from .config import RunConfig, build_initial_state, build_model, load_config, parse_config
from .diagnostics import (BoundsReport, DiagnosticsSeries, classify_regime,
                          measured_growth_rate, stabilization_time,
                          transient_end, verify_bounds)
from .errors import (ConfigError, LinearSolveDiverged, MissingParam,
                     NonFiniteFlux, NonFiniteRhs, NonFiniteState,
                     NoRootInBracket, PositivityBreached, TpgError,
                     UnknownPreset, WindowTooShort)
from .grid import Field, GridSpec, integrate, laplacian, rms_amplitude, taxis_divergence_values
from .models import (PRESETS, HypothesisBounds, HypothesisViolation,
                     ModelSpec, State, hypothesis_check, preset,
                     reaction_terms, rhs, rhs_values)
from .snapshots import read_snapshot, write_snapshot
from .stability import (GrowthRates, JacobianEntries, StabilityReport,
                        SteadyState, analyze, default_k2_grid,
                        dispersion_matrix, growth_rates, jacobian_entries,
                        proposition1_inequalities, proposition1_verdict,
                        theorem1_bounds, trivial_steady_state)
from .stepper import StepperConfig, run, step

__version__ = "0.1.0"

__all__ = [
    "BoundsReport", "ConfigError", "DiagnosticsSeries", "Field",
    "GridSpec", "GrowthRates", "HypothesisBounds", "HypothesisViolation",
    "JacobianEntries", "LinearSolveDiverged", "MissingParam", "ModelSpec",
    "NoRootInBracket", "NonFiniteFlux", "NonFiniteRhs", "NonFiniteState",
    "PRESETS", "PositivityBreached", "RunConfig", "StabilityReport",
    "State", "SteadyState", "StepperConfig", "TpgError", "UnknownPreset",
    "WindowTooShort", "analyze", "build_initial_state", "build_model",
    "classify_regime", "default_k2_grid", "dispersion_matrix",
    "growth_rates", "hypothesis_check", "integrate", "jacobian_entries",
    "laplacian", "load_config", "measured_growth_rate", "parse_config",
    "preset", "proposition1_inequalities", "proposition1_verdict",
    "read_snapshot", "reaction_terms", "rhs", "rhs_values", "rms_amplitude",
    "run", "stabilization_time", "step", "taxis_divergence_values",
    "theorem1_bounds", "transient_end", "trivial_steady_state",
    "verify_bounds", "write_snapshot",
]
