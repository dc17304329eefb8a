import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gnrelax import elliptic
from gnrelax.errors import CavitationError
from gnrelax.prep import prepare
from gnrelax.solvers import (
    StepPolicy,
    fg_jvp_array,
    fg_tendency,
    fg_tendency_array,
    gn_tendency,
    gn_tendency_array,
    integrate,
    relaxation_substep_exact,
    step,
    step_array,
)
from gnrelax.spectral import GridSpec, ScalarField
from gnrelax.state import ParamSet, StateU

G = GridSpec(2 * np.pi, 128)
x = G.x


def F(v, g=G):
    return ScalarField(g, v)


def fg_state(z, u, eta, w, g=G):
    return StateU(F(z, g), F(u, g), F(eta, g), F(w, g))


def sine_data(p, m=2, a=0.1, g=G, travelling=False):
    z = a * np.sin(g.x)
    return prepare(F(z, g), F(z if travelling else 0 * z, g), m, p).U0


def test_rest_is_fixed_point_of_tendency():
    p = ParamSet(lam=1e4, mu=0.1)
    assert np.all(fg_tendency_array(G, StateU.rest(G).as_array(), p) == 0)
    zt, ut = gn_tendency(F(0 * x), F(0 * x), p)
    assert np.all(zt.values == 0) and np.all(ut.values == 0)


def test_hydrostatic_example():
    a = 0.05
    p = ParamSet(lam=1e3, mu=0.1)
    z = a * np.cos(x)
    dU = fg_tendency(fg_state(z, 0 * x, 1 + z, 0 * x), p)
    assert np.allclose(dU.u.values, a * np.sin(x), atol=1e-13)
    for name in ("zeta", "eta", "w"):
        assert np.abs(getattr(dU, name).values).max() < 1e-13


def test_manufactured_tendency():
    """Tendency of smooth trigonometric fields against hand-differentiated formulas."""
    p = ParamSet(lam=50.0, mu=0.2)
    s, c = np.sin(x), np.cos(x)
    z, zx = 0.1 * s, 0.1 * c
    u, ux = 0.2 * c, -0.2 * s
    e, ex = 0.01 * np.sin(2 * x), 0.02 * np.cos(2 * x)
    w = 0.3 * s
    wx = 0.3 * c
    h = 1 + z
    eta, etax = h + e, zx + ex
    q = eta * e / h
    qx = (etax * e + eta * ex) / h - eta * e * zx / h**2
    lam, mu = p.lam, p.mu
    expected = np.stack(
        [
            -(zx * u + h * ux),
            -u * ux - zx + lam * mu / (3 * h) * qx,
            -u * etax + w,
            -u * wx - lam * e / h**2,
        ]
    )
    got = fg_tendency_array(G, np.stack([z, u, eta, w]), p)
    assert np.allclose(got, expected, atol=1e-10)


def test_jvp_matches_finite_difference():
    p = ParamSet(lam=200.0, mu=0.1)
    U = sine_data(p, travelling=True).as_array()
    rng = np.random.default_rng(0)
    dU = np.stack([np.sin(k * x + rng.uniform(0, 6)) for k in (1, 2, 3, 1)]) * 0.1
    eps = 1e-6
    fd = (fg_tendency_array(G, U + eps * dU, p) - fg_tendency_array(G, U - eps * dU, p)) / (2 * eps)
    assert np.abs(fd - fg_jvp_array(G, U, dU, p)).max() < 1e-6 * np.abs(fd).max()


def test_gn_shallow_limit_is_saint_venant():
    p = ParamSet(lam=1.0, mu=1e-14)
    z, u = 0.1 * np.sin(x), 0.2 * np.cos(2 * x)
    zt, ut = gn_tendency(F(z), F(u), p)
    assert np.allclose(ut.values, -G.dealias(u * G.diff(u)) - G.diff(z), atol=1e-12)
    assert np.allclose(zt.values, -G.diff((1 + z) * u), atol=1e-12)


def test_gn_tendency_solves_momentum_equation():
    p = ParamSet(lam=1.0, mu=0.3)
    z, u = 0.1 * np.sin(x), 0.2 * np.cos(x)
    V = np.stack([z, u])
    ut = gn_tendency_array(G, V, p)[1]
    h = 1 + z
    lhs = elliptic.T_apply_array(G, h, ut, p.mu)
    ux, uxx = G.diff(u), G.diff(u, 2)
    rhs = -G.dealias(u * ux) - G.diff(z) - p.mu / (3 * h) * G.diff(G.dealias(h**3 * (ux**2 - u * uxx)))
    assert np.allclose(lhs, rhs, atol=1e-9)


def test_gn_step_consistent_with_tendency():
    p = ParamSet(lam=1.0, mu=0.1)
    V = np.stack([0.1 * np.sin(x), 0.1 * np.sin(x)])
    dt = 1e-4
    fd = (step_array(G, V, p, dt, "rk4_explicit", "gn") - step_array(G, V, p, -dt, "rk4_explicit", "gn")) / (2 * dt)
    assert np.abs(fd - gn_tendency_array(G, V, p)).max() < 1e-6


def test_relaxation_substep_example():
    h = F(np.ones(G.n_points))
    eta, w = F(1 + 0.01 * np.sin(x)), F(0.03 * np.cos(x))
    lam, t = 4.0, 0.7
    eta1, w1 = relaxation_substep_exact(eta, w, h, t, lam)
    e0, w0 = 0.01 * np.sin(x), 0.03 * np.cos(x)
    assert np.allclose(eta1.values - 1, e0 * np.cos(2 * t) + w0 / 2 * np.sin(2 * t), atol=1e-15)
    assert np.allclose(w1.values, -2 * e0 * np.sin(2 * t) + w0 * np.cos(2 * t), atol=1e-15)


@given(st.integers(0, 2**32 - 1), st.floats(1.0, 1e6), st.floats(1e-4, 10.0))
def test_relaxation_substep_invariant(seed, lam, dt):
    rng = np.random.default_rng(seed)
    hv = rng.uniform(0.2, 2.0, G.n_points)
    ev, wv = rng.standard_normal((2, G.n_points))
    eta1, w1 = relaxation_substep_exact(F(hv + ev), F(wv), F(hv), dt, lam)
    omega2 = lam / hv**2
    e1 = eta1.values - hv
    assert np.allclose(omega2 * e1**2 + w1.values**2, omega2 * ev**2 + wv**2, rtol=1e-10)
    back_eta, back_w = relaxation_substep_exact(eta1, w1, F(hv), -dt, lam)
    assert np.allclose(back_eta.values - hv, ev, atol=1e-10 * (1 + np.abs(ev).max()))


def test_linear_wave_phase_speed():
    """Small-amplitude plane wave follows the slow branch of the linear dispersion relation."""
    lam, mu, k, amp = 3.0, 1.0, 32, 1e-7
    p = ParamSet(lam=lam, mu=mu)
    # Fourier symbol of the FG system linearised about rest, unknowns (zeta, u, eta - 1, w).
    c = lam * mu / 3
    M = np.array(
        [
            [0, -1j * k, 0, 0],
            [-1j * k - c * 1j * k, 0, c * 1j * k, 0],
            [0, 0, 0, 1],
            [lam, 0, -lam, 0],
        ]
    )
    vals, vecs = np.linalg.eig(M)
    i = min(range(4), key=lambda j: (vals[j].imag >= 0, abs(vals[j])))
    omega = -vals[i].imag
    omega2_exact = ((lam + k**2 + c * k**2) - np.sqrt((lam + k**2 + c * k**2) ** 2 - 4 * lam * k**2)) / 2
    assert omega**2 == pytest.approx(omega2_exact, rel=1e-10)
    v = vecs[:, i] / np.abs(vecs[:, i]).max()
    field = lambda t: np.real(amp * v[:, None] * np.exp(1j * k * x - 1j * omega * t))  # noqa: E731
    U0 = field(0.0)
    U0[2] += 1.0
    T = 1.0
    traj = integrate(StateU.from_array(G, U0), p, StepPolicy(scheme="rk4_explicit", t_end=T, fixed_dt=1e-3))
    got = traj.states[-1].copy()
    got[2] -= 1.0
    ref = field(T)
    assert np.abs(got - ref).max() <= 1e-3 * np.abs(ref).max()


def test_mass_conserved():
    p = ParamSet(lam=1e3, mu=0.1)
    traj = integrate(sine_data(p, travelling=True), p, StepPolicy(t_end=0.5, cfl_number=0.3, snapshot_interval=0.1))
    mass = traj.states[:, 0].sum(axis=1) * G.dx
    assert np.abs(mass - mass[0]).max() <= 1e-10


@pytest.mark.parametrize("scheme", ["strang_split", "rk4_explicit"])
def test_rest_state_fixed_over_many_steps(scheme):
    p = ParamSet(lam=1e4, mu=0.1)
    U = StateU.rest(G)
    policy = StepPolicy(scheme=scheme, fixed_dt=1e-3)
    arr = U.as_array()
    for _ in range(1000):
        arr = step_array(G, arr, p, 1e-3, scheme, "fg")
    assert np.array_equal(arr, U.as_array())
    assert np.array_equal(step(U, p, policy).as_array(), U.as_array())


def _run(p, U0, scheme, dt, t_end=0.2):
    return integrate(U0, p, StepPolicy(scheme=scheme, t_end=t_end, fixed_dt=dt)).states[-1]


def test_rk4_fourth_order():
    p = ParamSet(lam=10.0, mu=0.1)
    g = GridSpec(2 * np.pi, 64)
    U0 = sine_data(p, g=g, travelling=True)
    sols = [_run(p, U0, "rk4_explicit", 0.04 / 2**i, 0.4) for i in range(4)]
    diffs = [np.abs(a - b).max() for a, b in zip(sols[:-1], sols[1:])]
    orders = np.log2(np.array(diffs[:-1]) / np.array(diffs[1:]))
    assert np.all(np.abs(orders - 4) <= 0.3), orders


def test_strang_second_order():
    p = ParamSet(lam=10.0, mu=0.1)
    g = GridSpec(2 * np.pi, 64)
    U0 = sine_data(p, g=g, travelling=True)
    sols = [_run(p, U0, "strang_split", 0.04 / 2**i, 0.4) for i in range(4)]
    diffs = [np.abs(a - b).max() for a, b in zip(sols[:-1], sols[1:])]
    assert np.log2(diffs[-2] / diffs[-1]) == pytest.approx(2.0, abs=0.3)


def test_strang_and_rk4_agree_within_discretisation_error():
    p = ParamSet(lam=1e3, mu=0.1)
    U0 = sine_data(p, travelling=True)
    dt = 2e-3
    a, a2 = _run(p, U0, "strang_split", dt), _run(p, U0, "strang_split", dt / 2)
    b, b2 = _run(p, U0, "rk4_explicit", dt), _run(p, U0, "rk4_explicit", dt / 2)
    self_err = max(np.abs(a - a2).max(), np.abs(b - b2).max())
    assert np.abs(a - b).max() <= 10 * self_err


def test_cavitation_aborts_with_snapshot():
    p = ParamSet(lam=100.0, mu=0.1, h_star=0.3)
    z = -0.6 * np.exp(-((x - np.pi) ** 2))
    U0 = fg_state(z, 0.8 * np.sin(x - np.pi), 1 + z, 0 * x)
    with pytest.raises(CavitationError) as info:
        integrate(U0, p, StepPolicy(t_end=2.0, snapshot_interval=0.1))
    err = info.value
    assert err.min_depth < 0.3 and 0 < err.time < 2.0
    assert err.snapshot.shape == (4, G.n_points) and np.min(1 + err.snapshot[0]) >= 0.3


def test_blow_up_reported_as_abort():
    p = ParamSet(lam=1e3, mu=0.1)
    with pytest.raises(CavitationError):
        integrate(sine_data(p), p, StepPolicy(scheme="rk4_explicit", t_end=50.0, fixed_dt=0.5))


@settings(max_examples=5)
@given(st.sampled_from(["strang_split", "rk4_explicit"]))
def test_deterministic(scheme):
    p = ParamSet(lam=1e3, mu=0.1)
    U0 = sine_data(p, travelling=True)
    pol = StepPolicy(scheme=scheme, t_end=0.05)
    assert np.array_equal(integrate(U0, p, pol).states, integrate(U0, p, pol).states)


def test_trajectory_snapshots_and_gn_counters():
    p = ParamSet(lam=1e3, mu=0.1)
    traj = integrate(sine_data(p), p, StepPolicy(t_end=0.3, snapshot_interval=0.1))
    assert np.allclose(traj.times, [0, 0.1, 0.2, 0.3])
    assert traj.elliptic_calls == 0 and traj.field("eta").shape == (4, G.n_points)
    gn = integrate((F(0.1 * np.sin(x)), F(0 * x)), p, StepPolicy(t_end=0.05), system="gn")
    assert gn.scheme == "rk4_explicit" and gn.elliptic_calls == 4 * gn.n_steps
    assert gn.elliptic_iterations > 0
