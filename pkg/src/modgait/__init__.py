"""Many-objective gait parameter optimization for modular legged robots.

Generates gait parameters (per-leg strides and swing speeds, swing height,
duty factor) with NSGA-III over three objectives: locomotion speed, static
stability, and joint load, evaluated by a quasi-static locomotion model on
flat, slope, and step terrains.
"""

__version__ = "0.1.0"

from .analysis import (
    ParetoArchive,
    RegressionReport,
    compare_archives,
    ols_regression,
    pareto_filter,
    regress_load,
)
from .evaluator import SimulationConfig, SimulationTrace, simulate
from .gait import DecisionVector, GaitSchedule, build_schedule, gait_bounds, genome_decode, genome_encode
from .nsga3 import (
    EvolutionConfig,
    environmental_selection,
    fast_nondominated_sort,
    generate_reference_points,
    optimize,
    polynomial_mutation,
    sbx_crossover,
)
from .objectives import ObjectiveConstants, assemble, constants_for, f_load, f_speed, f_stability
from .pipeline import RunConfig, evaluate_genome, load_run_config, run_optimization
from .robot import (
    LegModel,
    RobotModel,
    compute_com,
    forward_kinematics,
    inverse_kinematics,
    leg_jacobian,
    load_morphology,
)
from .terrain import Terrain
