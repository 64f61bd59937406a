from . import tensor
from .checkpoint import load_params, save_params
from .nets import (
    Activation,
    MlpSpec,
    ParamStore,
    build_mlp,
    forward,
    mlp_apply,
    param_count,
    value_and_grad,
)
from .optim import AdamState, adam_step, polyak_update
from .tensor import Tensor, constant, parameter, stop_gradient

__all__ = [
    "Activation", "AdamState", "MlpSpec", "ParamStore", "Tensor",
    "adam_step", "build_mlp", "constant", "forward", "load_params",
    "mlp_apply", "param_count", "parameter", "polyak_update", "save_params",
    "stop_gradient", "tensor", "value_and_grad",
]
