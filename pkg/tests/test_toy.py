import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gnrelax import toy
from gnrelax.experiments import combined_ratio, oscillator_slope, toy_profiles
from gnrelax.spectral import GridSpec, ScalarField

G = GridSpec(2 * np.pi, 64)
H, PHI = toy_profiles(G, 0.2)


def spec(model, eps=0.01, mu=0.0, h=H, u0=PHI):
    return toy.ToySpec(model, eps, h, u0, mu)


def test_spec_validation():
    with pytest.raises(ValueError):
        spec("diffusion")
    with pytest.raises(ValueError):
        spec("oscillator", eps=0.0)
    with pytest.raises(ValueError):
        spec("combined", mu=-1.0)
    with pytest.raises(ValueError):
        spec("oscillator", h=ScalarField(G, np.cos(G.x)))
    with pytest.raises(ValueError):
        spec("oscillator", u0=ScalarField(GridSpec(2 * np.pi, 32), np.ones(32)))
    with pytest.raises(ValueError):
        toy.toy_transport_solve(spec("oscillator"), 1.0)


@given(st.floats(0.0, 50.0))
def test_oscillator_invariants(t):
    s = spec("oscillator")
    u = toy.toy_oscillator_exact(s, t)
    assert np.allclose(np.abs(u.values), np.abs(PHI.values), rtol=1e-13)
    assert toy.weighted_l2(u, H) == pytest.approx(toy.weighted_l2(PHI, H), rel=1e-13)


def test_oscillator_growth_slope():
    for eps in (0.01, 0.001):
        s = spec("oscillator", eps=eps)
        t2 = 100.0 * eps
        assert oscillator_slope(s, 0.99 * t2, t2) == pytest.approx(toy.oscillator_growth_rate(s), rel=1e-2)


def test_transport_constant_depth_translates():
    c, eps, t = 1.5, 0.1, 0.37
    s = spec("transport", eps=eps, h=ScalarField(G, np.full(G.n_points, c)))
    u = toy.toy_transport_solve(s, t)
    assert np.allclose(u.values, np.exp(np.sin(G.x + c * t / eps)), atol=1e-9)
    assert np.array_equal(toy.characteristic_feet(s, 0.0), G.x)


def test_transport_bounded_gradient_and_weighted_norm():
    s = spec("transport", eps=0.01)
    u = toy.toy_transport_solve(s, 0.1)
    assert toy.weighted_l2(u, H) == pytest.approx(toy.weighted_l2(PHI, H), rel=1e-6)
    assert toy.derivative_norm(u, 1) < 3 * toy.derivative_norm(PHI, 1)


def test_combined_reduces_to_oscillator_without_dispersion():
    t = 0.3
    a = toy.toy_combined_solve(spec("combined", mu=0.0), t)
    b = toy.toy_oscillator_exact(spec("oscillator"), t)
    assert np.allclose(a.values, b.values, atol=1e-11)


def test_combined_constant_depth_is_multiplier():
    mu, eps, t = 0.1, 0.05, 0.4
    s = spec("combined", eps=eps, mu=mu, h=ScalarField(G, np.ones(G.n_points)), u0=ScalarField(G, np.cos(3 * G.x)))
    u = toy.toy_combined_solve(s, t)
    assert np.allclose(u.values, np.exp(1j * t * np.sqrt(1 + 9 * mu) / eps) * np.cos(3 * G.x), atol=1e-11)


@settings(max_examples=10)
@given(st.floats(1e-3, 1.0), st.floats(0.0, 5.0))
def test_combined_conserves_weighted_norm(mu, t):
    u = toy.toy_combined_solve(spec("combined", mu=mu), t)
    assert toy.weighted_l2(u, H) == pytest.approx(toy.weighted_l2(PHI, H), rel=1e-10)


def test_combined_exact_matches_rk4():
    s = spec("combined", eps=0.1, mu=0.1)
    t = 0.5
    exact = toy.toy_combined_solve(s, t).values
    errs = [np.abs(toy.toy_combined_solve(s, t, method="rk4", n_steps=n).values - exact).max() for n in (2000, 4000)]
    assert errs[1] < 1e-9
    assert errs[0] / errs[1] > 10
    with pytest.raises(ValueError):
        toy.toy_combined_solve(s, t, method="rk4")


def test_combined_prepared_ratio_bounded():
    for mu in (1.0, 0.1, 0.01):
        for m in (1, 2):
            assert combined_ratio(G, H, PHI, 0.01, mu, m, 5.0, 51) < 10


def test_derivative_norm_example():
    u = ScalarField(G, np.sin(2 * G.x))
    assert toy.derivative_norm(u, 2) == pytest.approx(4 * np.sqrt(np.pi), rel=1e-12)
