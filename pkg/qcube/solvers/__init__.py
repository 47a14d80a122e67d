from qcube.solvers.base import SolveResult, SolveStatus, SolverSpec, check_model
from qcube.solvers.campaign import CampaignReport, CubeCampaign, replay_journal, run_campaign
from qcube.solvers.cubes import generate_cubes, load_cubes, save_cubes
from qcube.solvers.external import simplify_external, solve, solve_external, solve_pysat
from qcube.solvers.internal import DpllSolver, propagate, solve_internal
