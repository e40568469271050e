"""Design and verification toolkit for sliding-mode control of buildings
with an active tuned mass damper: modal reduction, pole-placement sliding
design, frequency-band tuning, an LQR baseline, and a nonlinear earthquake
simulator."""

from .errors import (ConfigError, InfeasibleDesignError, InfeasibleTuningError,
                     NumericalError)
from .freqresp import (DEFAULT_BAND, DEFAULT_SAMPLES, BandMetrics, RationalTf,
                       TransferFunctions, band_metrics, band_peak, band_rms,
                       build_transfer_functions, dump_frequency_response,
                       frequency_grid, transfer_zeros)
from .lqr import (LqrResult, LqrSpec, MaxValues, bryson_weights,
                  lqr_equivalent_polespec, solve_lqr, solve_riccati)
from .sim import (Accelerogram, LqrControl, PassiveControl, ReachingReport,
                  SimulationTrace, SmcControl, load_accelerogram,
                  mechanical_energy, reaching_check, simulate, summarize,
                  synthetic_accelerogram, write_trace_csv)
from .smc import (PoleSpec, ReducedDynamics, SlidingDesign, ackermann_gain,
                  control_force, design_sliding_controller, reduced_dynamics,
                  sliding_vector, switching_gain)
from .structure import (AtmdParams, BuildingModel, BuildingSetup,
                        ExcitationBounds, ModalModel, PlantStateSpace,
                        RayleighSpec, assemble_plant, build_shear_building,
                        controllability_matrix, controllability_rcond,
                        load_building_config, modal_reduce, natural_modes,
                        plant_from_setup, rayleigh_damping)
from .tuning import (KappaBounds, TuningConfig, TuningResult, TuningTuple,
                     export_mesh, feasible_region, load_tuning_config,
                     result_from_dict, tune)

__version__ = "0.1.0"
