"""Two-patch SIR model with commuters and permanently resident populations."""
from .errors import (CommuterSIRError, ConsistencyError, ConvergenceError, HypothesisError,
                     ValidationError)
from .model import (GROUPS, EpidemicParams, EquilibriumPopulations, MobilityParams,
                    PopulationSplit, Scenario, StateVector, equilibrium_split,
                    intrinsic_reproduction, ode_rhs)
from .ngm import (NextGenMatrices, ReducedMatrix, ThresholdReport, build_next_generation,
                  dominant_growth_rate, epidemic_threshold, reduced_coefficients,
                  spectral_radius, threshold_explicit, threshold_report, threshold_via_alpha)
from .threshold_analysis import (ApproxCoefficients, EtaPair, MinimizerResult, Monotonicity,
                                 MonotonicityClass, approx_coefficients, approx_threshold,
                                 classify_monotonicity, eta, increase_condition_a,
                                 minimize_threshold, sign_indicators_AB)
from .simulate import OutbreakVerdict, Trajectory, integrate, outbreak_verdict
from .experiments import (ScenarioFile, SweepResult, emit_figure_data, load_scenario,
                          reproduce_tables, run_sweep)

__version__ = "0.1.0"
