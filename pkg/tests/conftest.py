import numpy as np
import pytest

from relu_forge import Box, ShallowNet, SkipNet


def make_random_skip(d, depth, width, rng, scale=1.0) -> SkipNet:
    """Random dense skip net with weights in [-scale, scale]."""
    first_w = rng.uniform(-scale, scale, (width, d))
    first_b = rng.uniform(-scale, scale, width)
    hw, hy, hb = [], [], []
    for _ in range(depth - 1):
        hw.append(rng.uniform(-scale, scale, (width, d)))
        hy.append(rng.uniform(-scale, scale, (width, width)))
        hb.append(rng.uniform(-scale, scale, width))
    return SkipNet(
        input_dim=d,
        first_w=first_w,
        first_b=first_b,
        hidden_wx=tuple(hw),
        hidden_wy=tuple(hy),
        hidden_b=tuple(hb),
        out_a0=float(rng.uniform(-scale, scale)),
        out_a=rng.uniform(-scale, scale, d),
        out_beta=rng.uniform(-scale, scale, (depth, width)),
        domain=Box.symmetric(d),
    )


def make_random_shallow(d, units, rng, activation="relu") -> ShallowNet:
    return ShallowNet(
        input_dim=d,
        a=rng.normal(size=(units, d)),
        b=rng.normal(size=units),
        c=rng.normal(size=units),
        c0=float(rng.normal()),
        activation=activation,
        domain=Box.symmetric(d),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
