"""Shared test utilities: finite-difference gradient checks and the
loss-by-loss battery used by both unit and acceptance tests."""
from __future__ import annotations

import numpy as np

from deskgcrl.agents import AgentSpec, make_agent
from deskgcrl.datagen import CollectorSpec, collect_dataset
from deskgcrl.envs import make_env
from deskgcrl.goalsampling import DatasetView

FD_H = 1e-5
FD_TOL = 1e-4


def fd_gradients(loss_fn, stores, h=FD_H):
    """Central finite differences of ``loss_fn()`` wrt every value in
    ``stores`` (dict name -> ParamStore)."""
    grads = {}
    for store_name, store in stores.items():
        grads[store_name] = {}
        for pname, t in store.items():
            flat = t.data.ravel()
            g = np.zeros(flat.size)
            for i in range(flat.size):
                old = flat[i]
                flat[i] = old + h
                up = loss_fn()
                flat[i] = old - h
                down = loss_fn()
                flat[i] = old
                g[i] = (up - down) / (2.0 * h)
            grads[store_name][pname] = g.reshape(t.data.shape)
    return grads


def max_rel_error(analytic, numeric, floor=FD_TOL):
    worst = 0.0
    for store_name in numeric:
        for pname, fd in numeric[store_name].items():
            ga = analytic[store_name][pname]
            denom = np.maximum(np.maximum(np.abs(ga), np.abs(fd)), floor)
            worst = max(worst, float(np.max(np.abs(ga - fd) / denom)))
    return worst


def analytic_gradients(loss_tensor, stores):
    for store in stores.values():
        store.zero_grads()
    loss_tensor.backward()
    return {name: store.grads() for name, store in stores.items()}


def check_loss_gradient(make_loss, stores):
    """Compare backward() gradients of ``make_loss()`` against central FD.

    ``make_loss`` must rebuild the loss tensor from current parameter values.
    Returns the worst relative error.
    """
    analytic = analytic_gradients(make_loss(), stores)
    numeric = fd_gradients(lambda: make_loss().item(), stores)
    return max_rel_error(analytic, numeric)


def tiny_continuous_setup(seed=0, n_transitions=600):
    env = make_env("grid7")
    ds = collect_dataset(env, CollectorSpec(variant="navigate",
                                            n_transitions=n_transitions,
                                            noise_sigma=0.3), seed=seed)
    return env, DatasetView(ds, env)


def tiny_discrete_setup(seed=0, n_transitions=600):
    env = make_env("puzzle-3x3")
    ds = collect_dataset(env, CollectorSpec(variant="play",
                                            n_transitions=n_transitions), seed=seed)
    return env, DatasetView(ds, env)


def tiny_spec(algorithm, **kw):
    base = dict(
        algorithm=algorithm, hidden_dims=(16, 16),
        crl_latent_dim=8, hiql_repr_dim=4,
        iqe_n_components=2, iqe_component_dim=4,
    )
    base.update(kw)
    return AgentSpec(**base)


def loss_battery(batch_size=8, seed=3):
    """Yield (name, make_loss, stores) for every implemented loss, built on
    tiny nets (<= 2x16 hidden) and a batch of ``batch_size``."""
    env_c, view_c = tiny_continuous_setup()
    env_d, view_d = tiny_discrete_setup()
    rng = np.random.default_rng(seed)

    def batches(agent, view, variant="navigate"):
        return agent.sample_batches(view, variant, batch_size, rng)

    # GCBC ---------------------------------------------------------------
    gcbc = make_agent(tiny_spec("gcbc"), env_c, seed=1)
    _, pb = batches(gcbc, view_c)
    yield "gcbc", (lambda a=gcbc, b=pb: a.policy_loss(b)), {"policy": gcbc.stores["policy"]}

    # GCIVL value + AWR_V extraction --------------------------------------
    gcivl = make_agent(tiny_spec("gcivl"), env_c, seed=2)
    vb, pb = batches(gcivl, view_c)
    yield "gcivl", (lambda a=gcivl, b=vb: a.value_loss(b)), \
        {"v1": gcivl.stores["v1"], "v2": gcivl.stores["v2"]}
    yield "awr_v", (lambda a=gcivl, b=pb: a.policy_loss(b)[0]), \
        {"policy": gcivl.stores["policy"]}

    # GCIQL V and Q losses + DDPG+BC + discrete AWR_Q ---------------------
    gciql = make_agent(tiny_spec("gciql"), env_c, seed=3)
    vb, pb = batches(gciql, view_c)
    yield "gciql_v", (lambda a=gciql, b=vb: a.v_loss(b)), \
        {"v1": gciql.stores["v1"], "v2": gciql.stores["v2"]}
    yield "gciql_q", (lambda a=gciql, b=vb: a.q_loss(b)), \
        {"q1": gciql.stores["q1"], "q2": gciql.stores["q2"]}
    ddpg_norm = gciql.ddpg_normalizer(pb)  # frozen: it is under stop-gradient
    yield "ddpgbc", (lambda a=gciql, b=pb, n=ddpg_norm: a._ddpgbc_loss(b, normalizer=n)), \
        {"policy": gciql.stores["policy"]}
    gciql_d = make_agent(tiny_spec("gciql"), env_d, seed=4)
    vb_d, pb_d = batches(gciql_d, view_d, "play")
    yield "gciql_q_discrete", (lambda a=gciql_d, b=vb_d: a.q_loss(b)), \
        {"q1": gciql_d.stores["q1"], "q2": gciql_d.stores["q2"]}

    # QRL value (with active dual) and dynamics ----------------------------
    qrl = make_agent(tiny_spec("qrl"), env_c, seed=5)
    qrl.lam = 0.7
    vb, pb = batches(qrl, view_c)
    qrl_stores = {"phi": qrl.stores["phi"], "iqe": qrl.stores["iqe"]}
    yield "qrl_value", (lambda a=qrl, b=vb: a.value_loss(b)[0]), qrl_stores
    dyn_stores = dict(qrl_stores)
    dyn_stores["dyn"] = qrl.stores["dyn"]
    yield "qrl_dynamics", (lambda a=qrl, b=vb: a.dynamics_loss(b)), dyn_stores

    # CRL and the discrete-action state-only head --------------------------
    crl = make_agent(tiny_spec("crl"), env_c, seed=6)
    vb, pb = batches(crl, view_c)
    yield "crl", (lambda a=crl, b=vb: a.value_loss(b)), \
        {n: crl.stores[n] for n in ("phi1", "phi2", "psi1", "psi2")}
    crl_d = make_agent(tiny_spec("crl"), env_d, seed=7)
    vb_d, _ = batches(crl_d, view_d, "play")
    yield "crl_v", (lambda a=crl_d, b=vb_d: a.v_loss(b)), \
        {n: crl_d.stores[n] for n in ("phi_v1", "phi_v2", "psi_v1", "psi_v2")}

    # HIQL value / high / low ----------------------------------------------
    hiql = make_agent(tiny_spec("hiql"), env_c, seed=8)
    vb, pb = batches(hiql, view_c)
    yield "hiql_value", (lambda a=hiql, b=vb: a.value_loss(b)), \
        {n: hiql.stores[n] for n in ("phi", "v1", "v2")}
    yield "hiql_high", (lambda a=hiql, b=pb: a.high_loss(b)[0]), \
        {"high": hiql.stores["high"]}
    yield "hiql_low", (lambda a=hiql, b=pb: a.low_loss(b)[0]), \
        {"low": hiql.stores["low"]}
