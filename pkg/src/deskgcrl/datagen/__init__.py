from .collect import CollectorSpec, collect_dataset
from .datasets import Dataset, RewardedDataset, Trajectory, read_dataset, write_dataset
from .experts import (PowderDrawer, PuzzlePresser, maze_expert_action,
                      plan_waypoints)
from .relabel import relabel_singletask

__all__ = [
    "CollectorSpec", "Dataset", "PowderDrawer", "PuzzlePresser",
    "RewardedDataset", "Trajectory", "collect_dataset", "maze_expert_action",
    "plan_waypoints", "read_dataset", "relabel_singletask", "write_dataset",
]
