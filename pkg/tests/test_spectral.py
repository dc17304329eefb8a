import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gnrelax.errors import InvalidFieldError
from gnrelax.spectral import GridSpec, ScalarField, dealias, sobolev_norm, spectral_derivative

G = GridSpec(2.0 * np.pi, 64)
finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
fields = arrays(np.float64, 64, elements=finite).map(lambda v: ScalarField(G, v))


def field(fn, grid=G):
    return ScalarField.from_function(grid, fn)


def test_derivative_of_sine_is_cosine():
    d = spectral_derivative(field(np.sin))
    assert np.max(np.abs(d.values - np.cos(G.x))) < 1e-13


def test_derivative_of_constant_vanishes():
    assert spectral_derivative(ScalarField.constant(G, 3.0)).max_abs() < 1e-14


def test_second_derivative_of_cos2x():
    d = spectral_derivative(field(lambda x: np.cos(2 * x)), 2)
    assert np.max(np.abs(d.values + 4 * np.cos(2 * G.x))) < 1e-12


def test_derivative_on_scaled_domain():
    g = GridSpec(10.0, 128)
    f = field(lambda x: np.sin(2 * np.pi * x / 10.0), g)
    d = spectral_derivative(f)
    assert np.allclose(d.values, 2 * np.pi / 10.0 * np.cos(2 * np.pi * g.x / 10.0), atol=1e-12)


def test_derivative_rejects_bad_order():
    with pytest.raises(ValueError):
        spectral_derivative(field(np.sin), 3)


def test_nonfinite_values_rejected():
    vals = np.zeros(64)
    vals[3] = np.nan
    with pytest.raises(InvalidFieldError):
        ScalarField(G, vals)
    with pytest.raises(InvalidFieldError):
        ScalarField(G, np.zeros(10))


@pytest.mark.parametrize("n, L", [(7, 1.0), (6, 1.0), (64, 0.0), (64, -1.0)])
def test_grid_validation(n, L):
    with pytest.raises(ValueError):
        GridSpec(L, n)


def test_dealias_keeps_band_limited_field():
    f = field(lambda x: np.sin(3 * x) + 0.5 * np.cos(21 * x))
    assert np.allclose(dealias(f).values, f.values, atol=1e-14)


def test_dealias_kills_highest_mode():
    f = field(lambda x: np.cos(32 * x))
    assert dealias(f).max_abs() < 1e-14


@given(fields)
def test_dealias_idempotent(f):
    once = dealias(f)
    assert np.allclose(dealias(once).values, once.values, atol=1e-12)


@given(fields, fields, finite)
def test_derivative_linear(f, g, a):
    lhs = spectral_derivative(f * a + g).values
    rhs = a * spectral_derivative(f).values + spectral_derivative(g).values
    assert np.allclose(lhs, rhs, atol=1e-9 * (1 + np.abs(lhs).max()))


@given(fields)
def test_derivative_commutes_with_dealias(f):
    a = spectral_derivative(dealias(f)).values
    b = dealias(spectral_derivative(f)).values
    assert np.allclose(a, b, atol=1e-10 * (1 + np.abs(a).max()))


def test_sobolev_norm_of_sine():
    f = field(np.sin)
    assert sobolev_norm(f, 0) == pytest.approx(np.sqrt(np.pi), rel=1e-14)
    assert sobolev_norm(f, 1) == pytest.approx(np.sqrt(2 * np.pi), rel=1e-14)
    assert sobolev_norm(ScalarField.constant(G, 0.0), 2.5) == 0.0


@given(fields)
def test_l2_norm_matches_quadrature(f):
    quad = np.sqrt(np.sum(f.values**2) * G.dx)
    assert sobolev_norm(f, 0) == pytest.approx(quad, rel=1e-12, abs=1e-300)


@given(fields, st.floats(-2, 3), st.floats(0, 2))
def test_sobolev_norm_monotone_in_s(f, s1, ds):
    assert sobolev_norm(f, s1) <= sobolev_norm(f, s1 + ds) * (1 + 1e-12) + 1e-300


def test_complex_norm_and_derivative():
    f = np.exp(1j * 3 * G.x)
    assert np.allclose(G.diff(f), 3j * f, atol=1e-12)
    assert G.norm(f) == pytest.approx(np.sqrt(2 * np.pi), rel=1e-13)


def test_interpolation_exact_for_band_limited():
    f = np.sin(G.x) + 0.3 * np.cos(5 * G.x)
    xs = np.linspace(0.1, 6.0, 17)
    assert np.allclose(G.interpolate(f, xs), np.sin(xs) + 0.3 * np.cos(5 * xs), atol=1e-12)
    assert np.allclose(G.interpolate(f, G.x), f, atol=1e-12)
    z = np.exp(2j * G.x)
    assert np.allclose(G.interpolate(z, xs), np.exp(2j * xs), atol=1e-12)


def test_field_arithmetic():
    f = field(np.sin)
    g = field(np.cos)
    assert np.allclose((2.0 - f * g / 2.0 + (-g)).values, 2 - np.sin(G.x) * np.cos(G.x) / 2 - np.cos(G.x))
    with pytest.raises(InvalidFieldError):
        f + ScalarField.constant(GridSpec(2 * np.pi, 32), 1.0)
    assert "n=64" in repr(f)
