from .core import ALGORITHMS, Agent, AgentSpec
from .crl import CrlAgent
from .gcbc import GcbcAgent
from .hiql import HiqlAgent
from .iqe import iqe_distance, iqe_distance_np
from .iql_family import GciqlAgent, GcivlAgent
from .losses import (awr_weights, binary_nce, categorical_logprob,
                     expectile_loss, expectile_of_samples, gaussian_logprob,
                     weighted_nll)
from .qrl import QrlAgent

_AGENT_CLASSES = {
    "gcbc": GcbcAgent,
    "gcivl": GcivlAgent,
    "gciql": GciqlAgent,
    "qrl": QrlAgent,
    "crl": CrlAgent,
    "hiql": HiqlAgent,
}

# reference defaults: the expectile used by the hierarchical agent is softer
_KAPPA_DEFAULTS = {"hiql": 0.7}


def make_agent(spec: AgentSpec, env, seed: int) -> Agent:
    if spec.algorithm in _KAPPA_DEFAULTS and spec.kappa == 0.9:
        from dataclasses import replace
        spec = replace(spec, kappa=_KAPPA_DEFAULTS[spec.algorithm])
    return _AGENT_CLASSES[spec.algorithm](spec, env, seed)


__all__ = [
    "ALGORITHMS", "Agent", "AgentSpec", "CrlAgent", "GcbcAgent", "GciqlAgent",
    "GcivlAgent", "HiqlAgent", "QrlAgent", "awr_weights", "binary_nce",
    "categorical_logprob", "expectile_loss", "expectile_of_samples",
    "gaussian_logprob", "iqe_distance", "iqe_distance_np", "make_agent",
    "weighted_nll",
]
