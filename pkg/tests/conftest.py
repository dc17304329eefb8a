import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gnrelax.spectral import GridSpec

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture
def grid64():
    return GridSpec(2.0 * np.pi, 64)


@pytest.fixture
def grid256():
    return GridSpec(2.0 * np.pi, 256)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def smooth_random(grid, rng, n_modes=6, scale=1.0):
    """Random real trigonometric polynomial with decaying coefficients."""
    x = grid.x * 2.0 * np.pi / grid.domain_length
    f = np.zeros_like(x)
    for k in range(1, n_modes + 1):
        a, b = rng.standard_normal(2) / k**2
        f += a * np.cos(k * x) + b * np.sin(k * x)
    return scale * f


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_symbol_point(rng, d):
    from gnrelax.analysis import SymbolPoint

    zeta = rng.uniform(-0.8, 1.0)
    h = 1.0 + zeta
    return SymbolPoint(
        zeta=zeta,
        u=rng.uniform(-2, 2, d),
        eta=h * rng.uniform(0.2, 1.8),
        w=rng.uniform(-1, 1),
        xi=rng.uniform(-5, 5, d),
        mu=10 ** rng.uniform(-3, 0),
        lam=10 ** rng.uniform(0, 3),
    )


def random_balanced_point(rng, d, ratio_max=1.3):
    """Balanced point whose margin ranges over ``[1 - ratio_max, 1]``."""
    from gnrelax.analysis import BalancedSymbolPoint

    zeta = rng.uniform(-0.8, 1.0)
    h = 1.0 + zeta
    mu = 10 ** rng.uniform(-3, 0)
    lam = 10 ** rng.uniform(0, 4)
    s = np.sqrt(lam * mu)
    kappa = rng.choice([-1, 1]) * rng.uniform(0, ratio_max) * s / h
    iota = rng.choice([-1, 1]) * rng.uniform(0, ratio_max) * s * h / 2.0
    return BalancedSymbolPoint(zeta, rng.uniform(-2, 2, d), iota, kappa, mu, lam, rng.uniform(-5, 5, d))
