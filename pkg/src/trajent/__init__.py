"""Entanglement dynamics of two monitored qubits.

Simulates quantum-jump and quantum-state-diffusion trajectory unravelings of
two-qubit decay alongside the ensemble (Lindblad) evolution, tracks Wootters
concurrence on single trajectories and in the mean, and provides the
closed-form disentanglement rates of the different monitoring schemes
together with an optimizer over channel mixings.
"""

from .config import load_scenario, scenario_from_dict
from .diffusion import (run_ensemble_qsd, run_trajectory_qsd, step_heterodyne,
                        step_homodyne)
from .ensemble import (EnsembleSummary, RateFit, average, empirical_density,
                       fit_rate, fit_rate_series)
from .entanglement import (concurrence_batch, concurrence_mixed,
                           concurrence_pure, eof_from_concurrence,
                           preconcurrence)
from .errors import (ConfigError, ConvergenceError, FitWindowError,
                     NumericalError, PositivityError, StepSizeError)
from .lindblad import (DensityEvolution, concurrence_series, evolve_rho,
                       lindblad_rhs)
from .models import (JumpChannel, Scenario, ValidationReport, bell_state,
                     lindblad_superoperator, preset_common_bath,
                     preset_dephasing, preset_photon_counting,
                     preset_rotated_thermal, preset_thermal,
                     scenario_from_channels, state_from_amplitudes,
                     validate_scenario, with_heterodyne, with_homodyne_shift,
                     with_phase_rotation)
from .optimize import UnravelingOptimum, optimize_unraveling
from .quantum_jump import (JumpEvent, TrajectoryRecord, default_dt,
                           run_ensemble, run_trajectory, step_qj,
                           survival_probability)
from .rates import (CommonBathCurve, RateReport, analytic_mean_concurrence,
                    common_bath_mean, common_bath_one_jump_pieces,
                    common_bath_vanish_time, kappa_het, kappa_ho, kappa_ho_opt,
                    kappa_opt_thermal, kappa_qj, kappa_qj_decomposed,
                    mean_concurrence_independent, rate_report)

__version__ = "0.1.0"
