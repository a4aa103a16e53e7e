import numpy as np
import pytest

from slithernav.nn import Mlp, RmsProp


def numeric_grad(f, x, h=1e-6):
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        old = x[idx]
        x[idx] = old + h
        fp = f()
        x[idx] = old - h
        fm = f()
        x[idx] = old
        g[idx] = (fp - fm) / (2 * h)
        it.iternext()
    return g


def safe_input(net, rng, margin=1e-4, batch=1):
    """Random input whose hidden pre-activations stay away from relu kinks,
    so finite differences are valid."""
    for _ in range(200):
        x = rng.normal(size=(batch, net.sizes[0]))
        _, (_, preacts, _) = net.forward_cached(x)
        if all(
            np.abs(z).min() > margin
            for z, act in zip(preacts, net.activations)
            if act == "relu"
        ):
            return x
    raise RuntimeError("could not find a kink-free input")


def scalar_loss(net, x, w_out):
    y = net.forward(x)
    return float(np.sum(y * w_out))


@pytest.mark.parametrize("acts", [["relu", "relu", "tanh"], ["relu", "relu", "linear"], ["tanh", "linear"]])
def test_parameter_gradients_match_finite_differences(acts):
    rng = np.random.default_rng(1)
    sizes = [6, 16, 12, 3][: len(acts) + 1]
    net = Mlp(sizes, acts, rng=rng)
    for _ in range(5):
        x = safe_input(net, rng, batch=2)
        w_out = rng.normal(size=(2, sizes[len(acts)]))
        y, cache = net.forward_cached(x)
        wg, bg, _ = net.backward(cache, w_out)
        grads = wg + bg
        for p, g in zip(net.parameters(), grads):
            num = numeric_grad(lambda: scalar_loss(net, x, w_out), p)
            denom = np.maximum(np.abs(num), np.abs(g))
            rel = np.abs(g - num) / np.where(denom > 1e-8, denom, 1.0)
            assert rel.max() < 1e-4


def test_input_gradient_matches_finite_differences():
    rng = np.random.default_rng(2)
    net = Mlp([5, 32, 32, 1], ["relu", "relu", "linear"], rng=rng)
    for _ in range(10):
        x = safe_input(net, rng)[0]
        _, cache = net.forward_cached(x)
        _, _, dx = net.backward(cache, np.ones(1))
        num = numeric_grad(lambda: float(net.forward(x)[0]), x)
        denom = np.maximum(np.abs(num), np.abs(dx))
        rel = np.abs(dx - num) / np.where(denom > 1e-8, denom, 1.0)
        assert rel.max() < 1e-4


def test_batched_forward_equals_per_sample():
    rng = np.random.default_rng(3)
    net = Mlp([4, 8, 2], ["relu", "tanh"], rng=rng)
    xs = rng.normal(size=(16, 4))
    batch = net.forward(xs)
    single = np.stack([net.forward(x) for x in xs])
    assert np.abs(batch - single).max() < 1e-12


def test_zeroed_output_layer_gives_zero():
    net = Mlp([4, 8, 3], ["relu", "linear"], rng=0)
    net.zero_output_layer()
    assert np.allclose(net.forward(np.ones(4)), 0.0)


def test_forward_deterministic_per_seed():
    a = Mlp([4, 8, 2], ["relu", "tanh"], rng=7)
    b = Mlp([4, 8, 2], ["relu", "tanh"], rng=7)
    x = np.linspace(-1, 1, 4)
    assert np.array_equal(a.forward(x), b.forward(x))


def test_soft_update_contraction():
    online = Mlp([3, 8, 2], ["relu", "linear"], rng=1)
    target = Mlp([3, 8, 2], ["relu", "linear"], rng=2)
    tau = 0.005

    def gap():
        return np.sqrt(
            sum(np.sum((a - b) ** 2) for a, b in zip(target.parameters(), online.parameters()))
        )

    g0 = gap()
    for k in range(1, 50):
        target.soft_update_from(online, tau)
        assert abs(gap() - (1 - tau) ** k * g0) < 1e-10


def test_soft_update_tau_one_copies():
    online = Mlp([3, 8, 2], ["relu", "linear"], rng=1)
    target = Mlp([3, 8, 2], ["relu", "linear"], rng=2)
    target.soft_update_from(online, 1.0)
    for a, b in zip(target.parameters(), online.parameters()):
        assert np.allclose(a, b)


def test_rmsprop_reduces_quadratic():
    rng = np.random.default_rng(4)
    x = rng.normal(size=(5,))
    target = np.arange(5.0)
    # coarse approach: RMSProp limit-cycles at O(lr) around the optimum
    opt = RmsProp([x], lr=0.05)
    for _ in range(500):
        opt.step([2 * (x - target)])
    assert np.abs(x - target).max() < 0.05
    # refine with a smaller step
    opt = RmsProp([x], lr=1e-3)
    for _ in range(1000):
        opt.step([2 * (x - target)])
    assert np.abs(x - target).max() < 2e-3


def test_shape_mismatch_raises():
    net = Mlp([4, 8, 2], ["relu", "tanh"], rng=0)
    with pytest.raises(ValueError):
        net.forward(np.ones((3, 5)) @ np.ones((5, 5)))  # wrong inner dim
    with pytest.raises(ValueError):
        Mlp([4, 8, 2], ["relu"], rng=0)
    with pytest.raises(ValueError):
        Mlp([4, 8, 2], ["relu", "sigmoid"], rng=0)
