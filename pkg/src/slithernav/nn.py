"""Minimal fully connected network with hand-derived backpropagation.

Used for both the policy and value networks. Gradients are computed
analytically (verified against central finite differences in the test
suite); the optimizer is RMSProp, a momentum-free adaptive method.
"""

from __future__ import annotations

import numpy as np

_ACTIVATIONS = ("relu", "tanh", "linear")


def _act(name, z):
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    return z


def _act_grad(name, z):
    if name == "relu":
        return (z > 0.0).astype(z.dtype)
    if name == "tanh":
        t = np.tanh(z)
        return 1.0 - t * t
    return np.ones_like(z)


class Mlp:
    """Dense layers sizes[0] -> sizes[1] -> ... -> sizes[-1], one activation
    tag per layer transition."""

    def __init__(self, sizes, activations, rng=None):
        if len(activations) != len(sizes) - 1:
            raise ValueError("need one activation per layer transition")
        for a in activations:
            if a not in _ACTIVATIONS:
                raise ValueError(f"unknown activation {a!r}")
        self.sizes = list(sizes)
        self.activations = list(activations)
        rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
        self.weights = []
        self.biases = []
        for fan_in, fan_out, act in zip(sizes, sizes[1:], activations):
            if act == "relu":
                scale = np.sqrt(2.0 / fan_in)
            else:
                scale = np.sqrt(1.0 / fan_in)
            self.weights.append(rng.normal(0.0, scale, size=(fan_out, fan_in)))
            self.biases.append(np.zeros(fan_out))

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def forward(self, x: np.ndarray) -> np.ndarray:
        y, _ = self.forward_cached(x)
        return y

    def forward_cached(self, x: np.ndarray):
        """Returns (output, cache) with cache holding per-layer inputs and
        pre-activations for the backward pass. x is (batch, in) or (in,)."""
        x = np.asarray(x, dtype=float)
        squeeze = x.ndim == 1
        h = x[None, :] if squeeze else x
        inputs = []
        preacts = []
        for w, b, act in zip(self.weights, self.biases, self.activations):
            inputs.append(h)
            z = h @ w.T + b
            preacts.append(z)
            h = _act(act, z)
        out = h[0] if squeeze else h
        return out, (inputs, preacts, squeeze)

    def backward(self, cache, grad_out: np.ndarray):
        """Backpropagate dL/d(output); returns (weight grads, bias grads,
        dL/d(input)). Gradients are summed over the batch."""
        inputs, preacts, squeeze = cache
        g = np.asarray(grad_out, dtype=float)
        if squeeze:
            g = g[None, :]
        w_grads = [None] * self.n_layers
        b_grads = [None] * self.n_layers
        for i in range(self.n_layers - 1, -1, -1):
            g = g * _act_grad(self.activations[i], preacts[i])
            w_grads[i] = g.T @ inputs[i]
            b_grads[i] = g.sum(axis=0)
            g = g @ self.weights[i]
        return w_grads, b_grads, (g[0] if squeeze else g)

    def parameters(self):
        return self.weights + self.biases

    def set_parameters(self, params):
        k = self.n_layers
        for i in range(k):
            self.weights[i][...] = params[i]
            self.biases[i][...] = params[k + i]

    def copy(self) -> "Mlp":
        dup = Mlp.__new__(Mlp)
        dup.sizes = list(self.sizes)
        dup.activations = list(self.activations)
        dup.weights = [w.copy() for w in self.weights]
        dup.biases = [b.copy() for b in self.biases]
        return dup

    def soft_update_from(self, other: "Mlp", tau: float):
        """theta <- (1 - tau) theta + tau theta_other."""
        for mine, theirs in zip(self.parameters(), other.parameters()):
            mine *= 1.0 - tau
            mine += tau * theirs

    def zero_output_layer(self):
        self.weights[-1][...] = 0.0
        self.biases[-1][...] = 0.0

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(p)) for p in self.parameters())


class RmsProp:
    """Momentum-free adaptive gradient method: per-parameter step sizes from a
    running mean of squared gradients."""

    def __init__(self, params, lr: float, rho: float = 0.9, eps: float = 1e-8):
        self.params = list(params)
        self.lr = lr
        self.rho = rho
        self.eps = eps
        self.cache = [np.zeros_like(p) for p in self.params]

    def step(self, grads):
        for p, g, c in zip(self.params, grads, self.cache):
            c *= self.rho
            c += (1.0 - self.rho) * g * g
            p -= self.lr * g / (np.sqrt(c) + self.eps)
