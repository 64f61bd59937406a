import numpy as np
import pytest
from scipy import stats

from deskgcrl.datagen import Dataset, Trajectory
from deskgcrl.envs import make_env
from deskgcrl.errors import InvalidArgError
from deskgcrl.goalsampling import (DatasetView, GoalMixture, _geom_offsets,
                                   sample_goal, sample_hiql_pairs,
                                   sample_policy_batch, sample_value_batch)


class TaggedEnv:
    """Duck-typed env whose states are (episode id, step); success iff equal."""
    kind = "synthetic"
    discrete = False

    def success_batch(self, states, goals):
        return np.all(np.asarray(states) == np.asarray(goals), axis=-1)

    def featurize(self, states):
        return np.asarray(states, dtype=np.float64)


def tagged_dataset(n_eps=6, length=40):
    trajs = []
    for ep in range(n_eps):
        states = np.stack([np.full(length + 1, ep, dtype=np.float64),
                           np.arange(length + 1, dtype=np.float64)], axis=1)
        actions = np.zeros((length, 2))
        trajs.append(Trajectory(states=states, actions=actions))
    return Dataset(env_id="synthetic", variant="navigate", seed=0,
                   trajectories=trajs, discrete=False)


@pytest.fixture(scope="module")
def tagged_view():
    return DatasetView(tagged_dataset(), TaggedEnv())


def test_mixture_validation():
    with pytest.raises(InvalidArgError):
        GoalMixture(0.5, 0.5, 0.5, -0.5)
    with pytest.raises(InvalidArgError):
        GoalMixture(0.3, 0.3, 0.3, 0.3)
    with pytest.raises(InvalidArgError):
        GoalMixture(1.0, 0.0, 0.0, 0.0, gamma=1.0)
    GoalMixture(0.2, 0.0, 0.5, 0.3)  # table default is valid


def test_cur_goal_is_anchor(tagged_view):
    rng = np.random.default_rng(0)
    g = sample_goal("cur", tagged_view, (2, 7), 0.99, rng)
    assert np.array_equal(g, [2.0, 7.0])


def test_traj_goal_support(tagged_view):
    rng = np.random.default_rng(1)
    T = 40
    for _ in range(300):
        t = int(rng.integers(0, T))
        g = sample_goal("traj", tagged_view, (1, t), 0.99, rng)
        assert g[0] == 1.0  # same trajectory always
        assert min(t + 1, T - 1) <= g[1] <= T - 1
    # degenerate single-point support at t = T-1
    g = sample_goal("traj", tagged_view, (3, T - 1), 0.99, rng)
    assert g[1] == T - 1


def test_geom_goal_clamps(tagged_view):
    rng = np.random.default_rng(2)
    T = 40
    for _ in range(300):
        g = sample_goal("geom", tagged_view, (0, T - 1), 0.5, rng)
        assert g[0] == 0.0 and g[1] == T - 1  # clamped at the boundary


def test_geom_offset_distribution():
    rng = np.random.default_rng(3)
    gamma = 0.99
    offs = _geom_offsets(rng.random(size=1_000_000), gamma)
    assert offs.min() >= 1
    assert abs(offs.mean() - 1.0 / (1.0 - gamma)) < 0.02 * 100
    # chi-square goodness of fit against (1-g) g^(j-1) on the head of support
    k_max = 400
    counts = np.bincount(np.minimum(offs, k_max + 1))[1:]
    expected = np.array([(1 - gamma) * gamma ** (j - 1)
                         for j in range(1, k_max + 1)])
    expected = np.append(expected, gamma ** k_max) * len(offs)
    chi2 = stats.chisquare(counts, expected)
    assert chi2.pvalue > 0.01


def test_value_batch_mixture_frequencies(tagged_view):
    rng = np.random.default_rng(4)
    mix = GoalMixture(0.2, 0.0, 0.5, 0.3)
    batch = sample_value_batch(tagged_view, mix, 100_000, rng)
    freqs = np.bincount(batch.kinds, minlength=4) / batch.size
    assert np.all(np.abs(freqs - [0.2, 0.0, 0.5, 0.3]) < 0.01)


def test_pure_cur_mixture(tagged_view):
    rng = np.random.default_rng(5)
    batch = sample_value_batch(tagged_view, GoalMixture(1, 0, 0, 0), 500, rng)
    assert np.array_equal(batch.obs, batch.goal_obs)
    assert np.all(batch.rewards == 0.0) and np.all(batch.masks == 0.0)


def test_rewards_and_masks_complementary(tagged_view):
    rng = np.random.default_rng(6)
    mix = GoalMixture(0.2, 0.0, 0.5, 0.3)
    batch = sample_value_batch(tagged_view, mix, 2000, rng)
    assert set(np.unique(batch.rewards)) <= {-1.0, 0.0}
    assert np.array_equal(batch.masks, -batch.rewards)


def test_traj_goals_never_cross_trajectories(tagged_view):
    rng = np.random.default_rng(7)
    batch = sample_value_batch(tagged_view, GoalMixture(0, 1, 0, 0), 3000, rng)
    assert np.array_equal(batch.obs[:, 0], batch.goal_obs[:, 0])
    batch = sample_value_batch(tagged_view, GoalMixture(0, 0, 1, 0, gamma=0.9),
                               3000, rng)
    assert np.array_equal(batch.obs[:, 0], batch.goal_obs[:, 0])


def test_policy_batch_variant_mixtures(tagged_view):
    rng = np.random.default_rng(8)
    b = sample_policy_batch(tagged_view, "navigate", 2000, rng)
    assert np.all(b.kinds == 1)
    b = sample_policy_batch(tagged_view, "play", 2000, rng)
    assert np.all(b.kinds == 1)
    b = sample_policy_batch(tagged_view, "explore", 2000, rng)
    assert np.all(b.kinds == 3)
    b = sample_policy_batch(tagged_view, "stitch", 100_000, rng)
    frac_traj = (b.kinds == 1).mean()
    assert abs(frac_traj - 0.5) < 0.01
    assert set(np.unique(b.kinds)) == {1, 3}
    with pytest.raises(InvalidArgError):
        sample_policy_batch(tagged_view, "unknown", 10, rng)


def test_hiql_pairs_clamping(tagged_view):
    rng = np.random.default_rng(9)
    T = 40
    b = sample_hiql_pairs(tagged_view, 10, 5000, rng)
    t = b.obs[:, 1]
    sub = b.subgoal_obs[:, 1]
    assert np.array_equal(b.obs[:, 0], b.subgoal_obs[:, 0])
    assert np.array_equal(sub, np.minimum(t + 10, T - 1))
    b1 = sample_hiql_pairs(tagged_view, 1, 5000, rng)
    inner = b1.next_obs[:, 1] <= T - 1  # at t = T-1 the subgoal clamps back
    assert inner.any()
    assert np.array_equal(b1.subgoal_obs[inner, 1], b1.next_obs[inner, 1])
    assert np.all(b1.subgoal_obs[~inner, 1] == T - 1)
    with pytest.raises(InvalidArgError):
        sample_hiql_pairs(tagged_view, 0, 10, rng)


def test_rand_goal_exchangeable_under_trajectory_reordering():
    env = TaggedEnv()
    base = tagged_dataset(n_eps=8, length=30)
    shuffled = Dataset(env_id="synthetic", variant="navigate", seed=0,
                       trajectories=list(reversed(base.trajectories)),
                       discrete=False)
    mix = GoalMixture(0.0, 0.0, 0.0, 1.0)
    a = sample_value_batch(DatasetView(base, env), mix, 20_000,
                           np.random.default_rng(1))
    b = sample_value_batch(DatasetView(shuffled, env), mix, 20_000,
                           np.random.default_rng(2))
    # same distribution of sampled goal positions (two-sample KS)
    ks = stats.ks_2samp(a.goal_obs[:, 1], b.goal_obs[:, 1])
    assert ks.pvalue > 0.01


def test_empty_dataset_rejected():
    ds = Dataset(env_id="synthetic", variant="navigate", seed=0,
                 trajectories=[], discrete=False)
    with pytest.raises(InvalidArgError):
        DatasetView(ds, TaggedEnv())


def test_real_env_batch_shapes():
    env = make_env("grid7")
    from deskgcrl.datagen import CollectorSpec, collect_dataset
    ds = collect_dataset(env, CollectorSpec(variant="navigate",
                                            n_transitions=500), 0)
    view = DatasetView(ds, env)
    rng = np.random.default_rng(0)
    b = sample_value_batch(view, GoalMixture(0.2, 0, 0.5, 0.3), 64, rng)
    assert b.obs.shape == (64, 2) and b.actions.shape == (64, 2)
    assert b.next_obs.shape == (64, 2) and b.goal_obs.shape == (64, 2)
