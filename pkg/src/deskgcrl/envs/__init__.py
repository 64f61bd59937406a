from . import lightsout, maze, planning, powder
from .base import (GridMazeEnv, LightsOutEnv, PowderEnv, env_ids, make_env,
                   oracle_repr)
from .tasks import TaskSet, read_tasks, write_tasks

__all__ = [
    "GridMazeEnv", "LightsOutEnv", "PowderEnv", "TaskSet", "env_ids",
    "lightsout", "make_env", "maze", "oracle_repr", "planning", "powder",
    "read_tasks", "write_tasks",
]
