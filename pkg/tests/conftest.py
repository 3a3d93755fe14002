"""Shared fixtures: canonical parameter points and random-parameter draws."""

import numpy as np
import pytest

from sirmap.model import Params

# Parameter sets that recur throughout the suite.  FLIP is the
# period-doubling example point, NS_SUB the subcritical Neimark-Sacker
# one, NS_POS a point where the first Lyapunov quantity is positive.
FLIP = Params(N=0.72, beta=0.52, r=0.21, alpha=4.5)
NS_SUB = Params(N=3.72, beta=0.52, r=0.81, alpha=5.36)
NS_POS = Params(N=1.25, beta=0.32, r=0.7983, alpha=10.5)
TONGUE = Params(N=10.0, beta=0.9, r=0.4246, alpha=5.419)


@pytest.fixture
def rng():
    return np.random.default_rng(20250819)


def random_params(rng, n, endemic=True):
    """Draw n biologically valid parameter sets.

    With endemic=True every draw satisfies alpha > beta + r so the
    endemic point exists; otherwise alpha is free and may fall on
    either side.
    """
    N = rng.uniform(0.1, 20.0, n)
    beta = rng.uniform(0.01, 0.99, n)
    r = rng.uniform(0.01, 3.0, n)
    if endemic:
        alpha = (beta + r) * rng.uniform(1.001, 8.0, n)
    else:
        alpha = rng.uniform(0.05, 25.0, n)
    return [Params(N=a, beta=b, r=c, alpha=d) for a, b, c, d in zip(N, beta, r, alpha)]
