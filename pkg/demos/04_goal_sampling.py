"""The four hindsight goal distributions and minibatch mixtures.

Run: python demos/04_goal_sampling.py
"""
import numpy as np

from deskgcrl.datagen import CollectorSpec, collect_dataset
from deskgcrl.envs import make_env
from deskgcrl.goalsampling import (DatasetView, GoalMixture, _geom_offsets,
                                   sample_policy_batch, sample_value_batch)

env = make_env("grid7")
ds = collect_dataset(env, CollectorSpec(variant="navigate", n_transitions=20000), 0)
view = DatasetView(ds, env)
rng = np.random.default_rng(0)

print("=== geometric future-goal offsets, gamma = 0.99 ===")
offs = _geom_offsets(rng.random(size=1_000_000), 0.99)
print(f"mean offset {offs.mean():.2f} (theory 1/(1-gamma) = 100)")
print("offset histogram (each * = 2% of draws <= bucket):")
for hi in (1, 10, 50, 100, 200, 400):
    frac = (offs <= hi).mean()
    print(f"  <= {hi:4d}: {'*' * int(frac * 50):50s} {frac:.3f}")

print("\n=== value-loss mixture (cur, traj, geom, rand) = (0.2, 0, 0.5, 0.3) ===")
mix = GoalMixture(0.2, 0.0, 0.5, 0.3)
batch = sample_value_batch(view, mix, 100_000, rng)
freqs = np.bincount(batch.kinds, minlength=4) / batch.size
print("empirical kind frequencies:", dict(zip(("cur", "traj", "geom", "rand"),
                                              freqs.round(3))))
print("goal rows at the anchor state have reward 0 and terminate bootstrap:",
      bool(np.all(batch.rewards[batch.kinds == 0] == 0.0)
           and np.all(batch.masks[batch.kinds == 0] == 0.0)))

print("\n=== policy-extraction mixtures by dataset variant ===")
for variant in ("navigate", "stitch", "explore"):
    b = sample_policy_batch(view, variant, 50_000, rng)
    freqs = np.bincount(b.kinds, minlength=4) / b.size
    print(f"  {variant:9s}: cur/traj/geom/rand = {freqs.round(3)}")
