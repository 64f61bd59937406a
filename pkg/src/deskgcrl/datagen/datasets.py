"""Trajectory containers and the on-disk dataset format.

A trajectory is (s_0, a_0, s_1, ..., s_T): T+1 states, T actions.  Files are
little-endian with one columnar block per episode (states then actions), each
guarded by a CRC32; the header records env id, dims, variant, seed, and noise
parameters so a dataset is reproducible from its provenance alone.
"""
from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from ..errors import FormatError, InvalidArgError

MAGIC = b"DGD1"
VERSION = 1

VARIANTS = ("navigate", "stitch", "explore", "play", "noisy")


@dataclass
class Trajectory:
    states: np.ndarray   # (T+1, state_dim) float64
    actions: np.ndarray  # (T, action_dim) float64, or (T,) int64 when discrete

    def __post_init__(self):
        self.states = np.asarray(self.states, dtype=np.float64)
        if self.actions.dtype != np.int64:
            self.actions = np.asarray(self.actions, dtype=np.float64)
        if len(self.states) != len(self.actions) + 1:
            raise InvalidArgError(
                f"need T+1 states for T actions, got {len(self.states)} / {len(self.actions)}"
            )

    @property
    def length(self):
        return len(self.actions)


@dataclass
class Dataset:
    env_id: str
    variant: str
    seed: int
    trajectories: list
    discrete: bool
    noise_params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise InvalidArgError(f"unknown variant {self.variant!r}; have {VARIANTS}")

    @property
    def n_transitions(self):
        return sum(t.length for t in self.trajectories)

    @property
    def n_states(self):
        return sum(t.length + 1 for t in self.trajectories)

    @property
    def state_dim(self):
        return self.trajectories[0].states.shape[1] if self.trajectories else 0


@dataclass
class RewardedDataset(Dataset):
    """Single-task relabeling: per-transition rewards and terminal flags."""
    rewards: list = field(default_factory=list)    # per episode: (T,) int64
    terminals: list = field(default_factory=list)  # per episode: (T,) bool
    goal_index: int = 0
    n_task: int = 1


def _pack_str(s):
    b = s.encode("utf-8")
    return struct.pack("<H", len(b)) + b


def write_dataset(dataset: Dataset, path):
    with open(path, "wb") as f:
        f.write(MAGIC)
        header = bytearray()
        header += struct.pack("<H", VERSION)
        header += _pack_str(dataset.env_id)
        header += _pack_str(dataset.variant)
        header += struct.pack("<q", int(dataset.seed))
        header += struct.pack("<B", 1 if dataset.discrete else 0)
        sd = dataset.state_dim
        ad = 1 if dataset.discrete else (
            dataset.trajectories[0].actions.shape[1] if dataset.trajectories else 0)
        header += struct.pack("<II", sd, ad)
        header += struct.pack("<H", len(dataset.noise_params))
        for key in sorted(dataset.noise_params):
            header += _pack_str(key)
            header += struct.pack("<d", float(dataset.noise_params[key]))
        header += struct.pack("<I", len(dataset.trajectories))
        f.write(struct.pack("<I", zlib.crc32(bytes(header))))
        f.write(bytes(header))
        for traj in dataset.trajectories:
            block = bytearray()
            block += struct.pack("<I", traj.length)
            block += traj.states.astype("<f8").tobytes()
            if dataset.discrete:
                block += traj.actions.astype("<i8").tobytes()
            else:
                block += traj.actions.astype("<f8").tobytes()
            f.write(struct.pack("<I", zlib.crc32(bytes(block))))
            f.write(bytes(block))


def read_dataset(path) -> Dataset:
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:4] != MAGIC:
        raise FormatError(f"{path}: not a dataset file")
    off = 4

    def take(n):
        nonlocal off
        if off + n > len(blob):
            raise FormatError(f"{path}: truncated")
        out = blob[off:off + n]
        off += n
        return out

    def take_str():
        (n,) = struct.unpack("<H", take(2))
        return take(n).decode("utf-8")

    (header_crc,) = struct.unpack("<I", take(4))
    header_start = off
    (version,) = struct.unpack("<H", take(2))
    if version != VERSION:
        raise FormatError(f"{path}: dataset version {version} != {VERSION}")
    env_id = take_str()
    variant = take_str()
    (seed,) = struct.unpack("<q", take(8))
    (discrete,) = struct.unpack("<B", take(1))
    sd, ad = struct.unpack("<II", take(8))
    (n_noise,) = struct.unpack("<H", take(2))
    noise_params = {}
    for _ in range(n_noise):
        key = take_str()
        (val,) = struct.unpack("<d", take(8))
        noise_params[key] = val
    (n_eps,) = struct.unpack("<I", take(4))
    if zlib.crc32(blob[header_start:off]) != header_crc:
        raise FormatError(f"{path}: header checksum failure")
    trajectories = []
    for _ in range(n_eps):
        (crc,) = struct.unpack("<I", take(4))
        block_start = off
        (length,) = struct.unpack("<I", take(4))
        states = np.frombuffer(take(8 * (length + 1) * sd), dtype="<f8").reshape(length + 1, sd)
        if discrete:
            actions = np.frombuffer(take(8 * length), dtype="<i8").copy()
        else:
            actions = np.frombuffer(take(8 * length * ad), dtype="<f8").reshape(length, ad)
        if zlib.crc32(blob[block_start:off]) != crc:
            raise FormatError(f"{path}: episode checksum failure")
        trajectories.append(Trajectory(states=states.copy(), actions=np.array(actions)))
    if off != len(blob):
        raise FormatError(f"{path}: trailing bytes")
    return Dataset(env_id=env_id, variant=variant, seed=seed,
                   trajectories=trajectories, discrete=bool(discrete),
                   noise_params=noise_params)
