"""Scalar toy models for the fast singular dynamics, with ``h`` frozen in time.

    transport:   u_t = (1/eps) h u_x
    oscillator:  u_t = (i/eps) h u
    combined:    u_t = (i/eps) h sqrt(1 - mu d_x^2) u

Transport keeps derivatives bounded uniformly in ``eps``; the oscillator
develops gradients growing like ``t |h'| / eps``; the combined model sits in
between, with ``mu`` setting the crossover frequency ``|xi| ~ mu^{-1/2}``.

All three conserve ``int |u|^2 / h``; the oscillator also conserves ``|u|``
pointwise.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import solve_ivp

from .errors import SolverError
from .spectral import ScalarField

MODELS = ("transport", "oscillator", "combined")


@dataclass(frozen=True, eq=False)
class ToySpec:
    model: str
    epsilon: float
    h_profile: ScalarField
    u0: ScalarField
    mu: float = 0.0

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}, got {self.model!r}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.mu >= 0:
            raise ValueError("mu must be non-negative")
        if self.h_profile.grid != self.u0.grid:
            raise ValueError("h_profile and u0 live on different grids")
        if np.iscomplexobj(self.h_profile.values) or not self.h_profile.min() > 0:
            raise ValueError("h_profile must be real and bounded below by a positive constant")

    @property
    def grid(self):
        return self.u0.grid

    @property
    def h(self):
        return self.h_profile.values

    @cached_property
    def _combined_eig(self):
        # u = A^{-1/2} v with v_t = (i/eps) K v, K = A^{1/2} h A^{1/2} real symmetric.
        g = self.grid
        n = g.n_points
        a_half = (1.0 + self.mu * g.k_full**2) ** 0.25
        F = np.fft.fft(np.eye(n), axis=0)
        Finv = np.fft.ifft(np.eye(n), axis=0)
        A_half = np.real(Finv @ (a_half[:, None] * F))
        A_mhalf = np.real(Finv @ ((1.0 / a_half)[:, None] * F))
        K = A_half @ (self.h[:, None] * A_half)
        K = 0.5 * (K + K.T)
        lam, Q = np.linalg.eigh(K)
        return lam, Q, A_half, A_mhalf


def _complex(f):
    return np.asarray(f.values, dtype=complex)


def toy_oscillator_exact(spec, t):
    """``u0 exp(i t h / eps)``."""
    if spec.model != "oscillator":
        raise ValueError("spec.model must be 'oscillator'")
    return ScalarField(spec.grid, _complex(spec.u0) * np.exp(1j * t * spec.h / spec.epsilon))


def characteristic_feet(spec, t, rtol=1e-12, atol=1e-12):
    """Feet ``X(t)`` of the characteristics through the grid points, ``dX/ds = h(X)/eps``, ``X(0) = x``."""
    g = spec.grid
    hv = spec.h

    def rhs(_, X):
        return g.interpolate(hv, np.mod(X, g.domain_length)) / spec.epsilon

    if t == 0:
        return g.x.copy()
    sol = solve_ivp(rhs, (0.0, t), g.x.copy(), method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise SolverError(f"characteristic integration failed: {sol.message}")
    return sol.y[:, -1]


def toy_transport_solve(spec, t, rtol=1e-12, atol=1e-12):
    """``u(t, x) = u0(X)`` where ``X`` is the foot of the characteristic through ``x``.

    The feet come from DOP853 on ``dX/ds = h(X)/eps``; ``u0`` and ``h`` are
    evaluated through their trigonometric interpolants.
    """
    if spec.model != "transport":
        raise ValueError("spec.model must be 'transport'")
    g = spec.grid
    feet = np.mod(characteristic_feet(spec, t, rtol, atol), g.domain_length)
    return ScalarField(g, g.interpolate(_complex(spec.u0), feet))


def _combined_rhs(spec, u):
    g = spec.grid
    return (1j / spec.epsilon) * spec.h * g.multiplier(u, lambda k: np.sqrt(1.0 + spec.mu * k**2))


def toy_combined_solve(spec, t, method="exact", n_steps=None):
    """Solve ``u_t = (i/eps) h sqrt(1 - mu d_x^2) u``.

    ``method="exact"`` diagonalises the symmetrised generator once per spec
    and applies its exponential (unitary up to the ``A^{1/2}`` similarity).
    ``method="rk4"`` runs ``n_steps`` classical RK4 steps and is meant as an
    independent cross-check.
    """
    if spec.model != "combined":
        raise ValueError("spec.model must be 'combined'")
    u0 = _complex(spec.u0)
    if method == "exact":
        lam, Q, A_half, A_mhalf = spec._combined_eig
        v = Q.T @ (A_half @ u0)
        v = np.exp(1j * t * lam / spec.epsilon) * v
        return ScalarField(spec.grid, A_mhalf @ (Q @ v))
    if method != "rk4":
        raise ValueError(f"unknown method {method!r}")
    if n_steps is None:
        raise ValueError("rk4 needs n_steps")
    dt = t / n_steps
    u = u0
    f = lambda y: _combined_rhs(spec, y)  # noqa: E731
    for _ in range(n_steps):
        k1 = f(u)
        k2 = f(u + 0.5 * dt * k1)
        k3 = f(u + 0.5 * dt * k2)
        k4 = f(u + dt * k3)
        u = u + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return ScalarField(spec.grid, u)


def toy_solve(spec, t, **kw):
    """Dispatch on ``spec.model``."""
    if spec.model == "oscillator":
        return toy_oscillator_exact(spec, t)
    if spec.model == "transport":
        return toy_transport_solve(spec, t, **kw)
    return toy_combined_solve(spec, t, **kw)


def weighted_l2(u, h):
    """``(int |u|^2 / h dx)^{1/2}``: conserved by all three models."""
    g = u.grid
    return float(np.sqrt(np.sum(np.abs(u.values) ** 2 / h.values) * g.dx))


def derivative_norm(u, m):
    """``||d_x^m u||_{L^2}``."""
    g = u.grid
    v = np.asarray(u.values, dtype=complex)
    for _ in range(m):
        v = g.diff(v)
    return g.norm(v, 0.0)


def oscillator_growth_rate(spec):
    """Asymptotic slope ``||u0 h'||_{L^2} / eps`` of ``t -> ||d_x u(t)||``."""
    g = spec.grid
    return g.norm(_complex(spec.u0) * g.diff(spec.h), 0.0) / spec.epsilon
