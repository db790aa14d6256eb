import numpy as np
import pytest

from degcz.weight_algebra import Ball, QuadratureSpec


@pytest.fixture
def unit_ball():
    return Ball((0.0, 0.0), 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def quad():
    return QuadratureSpec("polar-midpoint", (64, 32))


def random_spd(rng, count, n, max_cond=1e6):
    """Random SPD batch with spectral condition number at most max_cond."""
    q, _ = np.linalg.qr(rng.standard_normal((count, n, n)))
    spread = rng.uniform(0.0, np.log(max_cond), count)
    base = rng.uniform(-3.0, 3.0, count)
    evs = np.exp(base[:, None] + np.linspace(0.0, 1.0, n)[None, :] * spread[:, None])
    m = np.einsum("mik,mk,mjk->mij", q, evs, q)
    return 0.5 * (m + np.swapaxes(m, -1, -2))
