"""Robust UAV trajectory and transmit-power planning for worst-case secrecy rate."""

from .convex_backend import SolverResult, SolverSettings, solve
from .geometry import (WorstCaseGeometry, avg_worst_case_secrecy_rate, rate_bob,
                       rate_coefficients, secrecy_sum, worst_case_dist_sq,
                       worst_case_dist_sq_oracle, worst_case_rate_eves)
from .harness import SweepSpec, export_csv, load_scenario, run_sweep
from .planner import (IterationRecord, PlannerOptions, PlanResult,
                      best_effort_trajectory, equal_power, optimize,
                      optimize_non_robust, run_best_effort)
from .power_alloc import (PowerDual, optimize_power, power_for_dual,
                          solve_power_subproblem)
from .robust_lmi import (ArrowheadCoeffs, LmiBlock, RotatedSocConstraint,
                         as_rotated_soc, exact_c, linearized_c, psd_check)
from .scenario import (EveRegion, PowerSchedule, Scenario, Trajectory,
                       slot_count, validate)
from .trajectory_sca import (ConvexProgram, ScaState, SubproblemSolution,
                             assemble, initialize_slacks, make_state,
                             solve_step, taylor_rate_surrogate)

__version__ = "0.1.0"
