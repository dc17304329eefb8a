"""Pointwise symbol analysis and the Fourier-multiplier structure of the FG system.

Pointwise part (d = 1 or 2): flux Jacobians, characteristic speeds, the
Friedrichs symmetrizer in physical variables and the symmetric form in
balanced variables.

Multiplier part (d = 1): the skew operator ``J`` acting on balanced fields
``(zeta, u, iota, kappa)``,

    J V = (0, sqrt(mu) iota', sqrt(mu) u' + kappa, -iota),

its kernel/non-kernel projections and the inverse of ``J`` on the singular
subspace. The Nyquist mode is treated as the zero mode (its first derivative
is dropped, as in :mod:`gnrelax.spectral`) so that every identity holds exactly
on the discrete level.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import _kernels
from .errors import DomainError, NonHyperbolicError
from .spectral import GridSpec
from .state import StateV


# ---------------------------------------------------------------------------
# pointwise symbols, physical variables
# ---------------------------------------------------------------------------


def _as_tuple(v):
    return tuple(float(c) for c in np.atleast_1d(v))


@dataclass(frozen=True)
class SymbolPoint:
    """Pointwise state ``(zeta, u, eta, w)`` together with a frequency ``xi``."""

    zeta: float
    u: tuple
    eta: float
    w: float
    xi: tuple
    mu: float
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "u", _as_tuple(self.u))
        object.__setattr__(self, "xi", _as_tuple(self.xi))
        if len(self.u) not in (1, 2) or len(self.xi) != len(self.u):
            raise ValueError("u and xi must both have 1 or 2 components")
        if not 1.0 + self.zeta > 0:
            raise ValueError(f"depth 1 + zeta must be positive, got {1.0 + self.zeta}")

    @property
    def d(self):
        return len(self.u)

    @property
    def h(self):
        return 1.0 + self.zeta

    @property
    def alpha(self):
        return 1.0 + self.mu * self.lam * self.eta**2 / (3.0 * self.h**3)

    @property
    def beta(self):
        return self.mu * self.lam / (3.0 * self.h) * (1.0 - 2.0 * self.eta / self.h)

    @property
    def advection_shift(self):
        """``u . xi``."""
        return float(np.dot(self.u, self.xi))

    @property
    def xi_norm(self):
        return float(np.linalg.norm(self.xi))


def flux_jacobians(p):
    """Matrices ``A_j`` of the quasilinear form ``U_t + sum_j A_j U_{x_j} = F(U)``.

    Unknown ordering is ``(zeta, u_1, ..., u_d, eta, w)``.
    """
    d = p.d
    n = d + 3
    i_eta = d + 1
    mats = []
    for j in range(d):
        A = np.eye(n) * p.u[j]
        A[0, 1 + j] += p.h
        A[1 + j, 0] += p.alpha
        A[1 + j, i_eta] += p.beta
        mats.append(A)
    return mats


def symbol_matrix(p):
    """``-(xi_x A_x + xi_y A_y)``: the roots ``tau`` of ``det(i tau + i xi.A) = 0`` are its eigenvalues."""
    return -sum(x * A for x, A in zip(p.xi, flux_jacobians(p)))


def characteristic_speeds(p):
    """Relative characteristic speeds ``Theta`` and the advective shift ``u . xi``.

    Returns
    -------
    speeds : list of float
        ``[0] * (d + 1) + [-sqrt(alpha h)|xi|, +sqrt(alpha h)|xi|]``.
    shift : float
        ``u . xi``; the roots of the principal symbol are ``tau = -shift + Theta``.

    Raises
    ------
    NonHyperbolicError
        If ``alpha h < 0``.
    """
    ah = p.alpha * p.h
    if ah < 0:
        raise NonHyperbolicError(f"alpha*h = {ah:.6g} < 0: outside the hyperbolicity region")
    c = math.sqrt(ah) * p.xi_norm
    return [0.0] * (p.d + 1) + [-c, c], p.advection_shift


def tau_roots(p):
    """Sorted roots ``tau`` of the characteristic equation."""
    speeds, shift = characteristic_speeds(p)
    return np.sort(np.array([-shift + s for s in speeds]))


def gamma_min(p):
    """Smallest ``gamma`` for which the ``(zeta, eta)`` block ``[[alpha, beta], [beta, gamma]]`` is definite."""
    return p.beta**2 / p.alpha


def default_gamma(p):
    return 2.0 * p.beta**2 / p.alpha + 1.0


def symmetrizer_hyp(p, gamma=None):
    """Friedrichs symmetrizer ``S`` making every ``S A_j`` symmetric.

    ``gamma`` defaults to :func:`default_gamma`; ``S`` is positive definite
    whenever ``gamma > gamma_min(p)`` and ``h > 0``.
    """
    if gamma is None:
        gamma = default_gamma(p)
    d = p.d
    S = np.zeros((d + 3, d + 3))
    S[0, 0] = p.alpha
    S[0, d + 1] = S[d + 1, 0] = p.beta
    for j in range(d):
        S[1 + j, 1 + j] = p.h
    S[d + 1, d + 1] = gamma
    S[d + 2, d + 2] = 1.0
    return S


# ---------------------------------------------------------------------------
# pointwise symbols, balanced variables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BalancedSymbolPoint:
    """Pointwise balanced state ``(zeta, u, iota, kappa)`` and a frequency ``xi``."""

    zeta: float
    u: tuple
    iota: float
    kappa: float
    mu: float
    lam: float
    xi: tuple = (1.0,)

    def __post_init__(self):
        object.__setattr__(self, "u", _as_tuple(self.u))
        object.__setattr__(self, "xi", _as_tuple(self.xi))
        if len(self.u) not in (1, 2) or len(self.xi) != len(self.u):
            raise ValueError("u and xi must both have 1 or 2 components")
        if not 1.0 + self.zeta > 0:
            raise ValueError(f"depth 1 + zeta must be positive, got {1.0 + self.zeta}")
        if not self.lam * self.mu > 0:
            raise ValueError("lam * mu must be positive")

    @property
    def d(self):
        return len(self.u)

    @property
    def h(self):
        return 1.0 + self.zeta

    @property
    def sqrt_lam_mu(self):
        return math.sqrt(self.lam * self.mu)

    @property
    def alpha(self):
        return 1.0 + self.iota**2 / (3.0 * self.h**2)

    @property
    def beta(self):
        num = 1.0 - self.kappa**2 * self.h**2 / (self.lam * self.mu)
        return num / (1.0 + 2.0 * self.iota / (self.sqrt_lam_mu * self.h))

    @property
    def margin(self):
        """Pointwise hyperbolicity margin ``1 - max(h|kappa|, 2|iota|/h) / sqrt(lam mu)``."""
        return 1.0 - max(self.h * abs(self.kappa), 2.0 * abs(self.iota) / self.h) / self.sqrt_lam_mu


def symmetric_form(p):
    """Return ``(S_t, S_x xi_x + S_y xi_y, G)`` of the balanced symmetric system."""
    d = p.d
    h, a, b = p.h, p.alpha, p.beta
    i_io, i_ka = d + 1, d + 2
    off = -p.kappa * h**2 / p.sqrt_lam_mu

    St = np.zeros((d + 3, d + 3))
    St[0, 0] = 3.0 * a * b
    for j in range(d):
        St[1 + j, 1 + j] = 3.0 * h * b
    St[i_io, i_io] = 1.0 / h
    St[i_io, i_ka] = St[i_ka, i_io] = off
    St[i_ka, i_ka] = h**3

    Sx = np.zeros_like(St)
    c_u = p.kappa**2 * h**2 / p.sqrt_lam_mu
    for j, x in enumerate(p.xi):
        Sx[0, 1 + j] = Sx[1 + j, 0] = 3.0 * h * a * b * x
        Sx[1 + j, i_io] = Sx[i_io, 1 + j] = c_u * x

    G = np.zeros(d + 3)
    G[i_io] = p.kappa * p.iota / (math.sqrt(p.mu) * h)
    G[i_ka] = -(h**3) * p.kappa**2 / math.sqrt(p.mu)
    return St, Sx, G


def hyperbolicity_margin(V, p):
    """Grid-wide margin ``1 - max(h|kappa|, 2|iota|/h) / sqrt(lam mu)``.

    Positive values mean the balanced symmetrizer ``S_t`` is positive definite.
    """
    h = np.ascontiguousarray(1.0 + V.zeta.values)
    worst = _kernels.margin_ratio(h, np.ascontiguousarray(V.iota.values), np.ascontiguousarray(V.kappa.values))
    return 1.0 - float(worst) / p.sqrt_lam_mu


# ---------------------------------------------------------------------------
# multipliers on balanced fields, d = 1
# ---------------------------------------------------------------------------


def _unpack(f, grid):
    """Accept a StateV or a (4, n) array; return (array, grid, rebuild)."""
    if isinstance(f, StateV):
        return f.as_array(), f.grid, lambda arr: StateV.from_array(f.grid, arr)
    arr = np.asarray(f, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != 4:
        raise ValueError(f"expected a (4, n) array, got shape {arr.shape}")
    if grid is None:
        grid = GridSpec(2.0 * np.pi, arr.shape[1])
    elif grid.n_points != arr.shape[1]:
        raise ValueError("grid size does not match field size")
    return arr, grid, lambda out: out


def _mode_symbols(grid, mu):
    """Per-mode ``(i sqrt(mu) xi, mu xi^2, 1 + mu xi^2)`` with the Nyquist mode treated as ``xi = 0``."""
    xi = grid.k.copy()
    xi[-1] = 0.0
    return 1j * math.sqrt(mu) * xi, mu * xi**2, 1.0 + mu * xi**2


def _apply_blocks(arr, grid, fn):
    c = np.fft.rfft(arr, axis=1)
    out = fn(c)
    return np.fft.irfft(out, grid.n_points, axis=1)


def projector_apply(f, mu, which="regular", grid=None):
    """Apply the regular (kernel of ``J``) or singular projection per Fourier mode."""
    if which not in ("regular", "singular"):
        raise ValueError(f"which must be 'regular' or 'singular', got {which!r}")
    arr, grid, rebuild = _unpack(f, grid)
    ia, m2, D = _mode_symbols(grid, mu)

    def reg(c):
        out = np.zeros_like(c)
        out[0] = c[0]
        out[1] = (c[1] + ia * c[3]) / D
        out[3] = (-ia * c[1] + m2 * c[3]) / D
        return out

    def sing(c):
        return c - reg(c)

    return rebuild(_apply_blocks(arr, grid, reg if which == "regular" else sing))


def j_apply(f, mu, grid=None):
    """``J f = (0, sqrt(mu) iota', sqrt(mu) u' + kappa, -iota)``; skew-adjoint in ``L^2``."""
    arr, grid, rebuild = _unpack(f, grid)
    ia, _, _ = _mode_symbols(grid, mu)

    def J(c):
        out = np.zeros_like(c)
        out[1] = ia * c[2]
        out[2] = ia * c[1] + c[3]
        out[3] = -c[2]
        return out

    return rebuild(_apply_blocks(arr, grid, J))


def j_inverse_singular(f, mu, grid=None, tol=1e-10):
    """Solve ``J V = f`` with ``V`` in the singular subspace: ``V = -J f / (1 + mu xi^2)``.

    Raises
    ------
    DomainError
        If the regular part of ``f`` exceeds ``tol`` times its norm.
    """
    arr, grid, rebuild = _unpack(f, grid)
    reg = np.asarray(projector_apply(arr, mu, "regular", grid))
    size = np.sqrt(np.sum(arr**2))
    if np.sqrt(np.sum(reg**2)) > tol * max(size, np.finfo(float).tiny):
        raise DomainError("input is not in the singular subspace of J")
    ia, _, D = _mode_symbols(grid, mu)

    def inv(c):
        out = np.zeros_like(c)
        out[1] = -ia * c[2] / D
        out[2] = -(ia * c[1] + c[3]) / D
        out[3] = c[2] / D
        return out

    return rebuild(_apply_blocks(arr, grid, inv))


def j_inverse_multiplier_norm(mu, xi):
    """Operator norm of ``sqrt(mu) (1 + xi^2)^{1/2} J(xi) / (1 + mu xi^2)`` restricted to the singular subspace.

    This is the constant ``C`` in ``||V||_{H^k} <= C mu^{-1/2} ||f||_{H^{k-1}}`` for a single mode.
    """
    a = math.sqrt(mu)
    J = np.array(
        [[0, 0, 0, 0], [0, 0, 1j * a * xi, 0], [0, 1j * a * xi, 0, 1], [0, 0, -1, 0]],
        dtype=complex,
    )
    D = 1.0 + mu * xi**2
    Pr = np.array(
        [[1, 0, 0, 0], [0, 1 / D, 0, 1j * a * xi / D], [0, 0, 0, 0], [0, -1j * a * xi / D, 0, mu * xi**2 / D]],
        dtype=complex,
    )
    Ps = np.eye(4) - Pr
    M = (-J / D) @ Ps
    return a * math.sqrt(1.0 + xi**2) * float(np.linalg.norm(M, 2))
