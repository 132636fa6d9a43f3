"""Human-aware path replanning for serial manipulators under speed-and-separation monitoring."""
__version__ = "0.1.0"

from ._backend import BACKEND
from .cost import HampTime, MarshaTime, PathLength, WeightedLength, connection_cost, path_cost
from .executor import (STRATEGIES, EpisodeConfig, Rates, load_scenario, run_benchmark,
                       run_episode)
from .kinematics import RobotModel, load_model
from .planner import PathP, plan, plan_path_set
from .replanner import Replanner, ReplanRequest, replan
from .safety import PFLParams, SSMParams, execution_scale, lambda_at
from .world import HumanScript, HumanState, Scene, sample_human

__all__ = [
    "BACKEND", "HampTime", "MarshaTime", "PathLength", "WeightedLength", "connection_cost",
    "path_cost", "STRATEGIES", "EpisodeConfig", "Rates", "load_scenario", "run_benchmark",
    "run_episode", "RobotModel", "load_model", "PathP", "plan", "plan_path_set", "Replanner",
    "ReplanRequest", "replan", "PFLParams", "SSMParams", "execution_scale", "lambda_at",
    "HumanScript", "HumanState", "Scene", "sample_human",
]
