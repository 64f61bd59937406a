"""Walkthrough of the differentiation core: tensors, MLPs, Adam, Polyak.

Run: python demos/01_autodiff_and_networks.py
"""
import numpy as np

from deskgcrl.diffcore import (AdamState, MlpSpec, ParamStore, adam_step,
                               build_mlp, forward, mlp_apply, polyak_update)
from deskgcrl.diffcore import tensor as T

print("=== tensors and gradients ===")
store = ParamStore()
store.add("w", np.array([1.0, -2.0, 3.0]))
loss = T.mean(T.square(store["w"]))
loss.backward()
print("loss = mean(w^2) =", loss.item())
print("grad =", store["w"].grad, " (analytic: 2w/3 =", 2 * store["w"].data / 3, ")")

print("\n=== finite-difference check on a layer-normed GELU MLP ===")
spec = MlpSpec(3, (16, 16), 2, use_layer_norm=True)
params = build_mlp(spec, seed=0)
x = np.random.default_rng(0).normal(size=(8, 3))
y = np.random.default_rng(1).normal(size=(8, 2))


def make_loss():
    return T.mean(T.square(T.sub(forward(params, spec, x), T.constant(y))))


params.zero_grads()
make_loss().backward()
name, tensor = next(iter(params.items()))
i = 3
analytic = tensor.grad.ravel()[i]
h = 1e-5
flat = tensor.data.ravel()
flat[i] += h
up = make_loss().item()
flat[i] -= 2 * h
down = make_loss().item()
flat[i] += h
fd = (up - down) / (2 * h)
print(f"d loss / d {name}[{i}]: analytic {analytic:.10f}  central-diff {fd:.10f}")

print("\n=== the inference path is bit-identical to the graph path ===")
print("bitwise equal:", np.array_equal(forward(params, spec, x).data,
                                       mlp_apply(params, spec, x)))

print("\n=== Adam drives a small regression to zero ===")
adam = AdamState.for_params(params, lr=3e-3)
for step in range(1, 1501):
    params.zero_grads()
    loss = make_loss()
    loss.backward()
    adam_step(adam, params, params.grads())
    if step % 500 == 0:
        print(f"step {step}: loss {loss.item():.6f}")

print("\n=== Polyak-averaged target network converges geometrically ===")
online = build_mlp(spec, seed=1)
target = build_mlp(spec, seed=2)
gap0 = np.linalg.norm(target.to_flat() - online.to_flat())
for k in range(1, 4):
    for _ in range(200):
        polyak_update(target, online, tau=0.005)
    gap = np.linalg.norm(target.to_flat() - online.to_flat())
    print(f"after {200 * k} updates: gap {gap:.4f} "
          f"(theory {(1 - 0.005) ** (200 * k) * gap0:.4f})")
