"""Measured quantities along trajectories: time derivatives, space-time norms,
the GN consistency residual and energy monitors.

Time derivatives come either from finite differences on uniformly spaced
snapshots (any trajectory) or from the FG right-hand side and its directional
derivative (FG states, ``j <= 2``). Every space-time norm is truncated at
``j <= 3``; the truncation is reported with the result.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from . import analysis
from .errors import DomainError
from .solvers import fg_jvp_array, fg_tendency_array
from .spectral import ScalarField
from .state import balanced_array

J_MAX = 3
# Stencil half-widths giving at least fourth order for each derivative order.
_HALF_WIDTH = {1: 2, 2: 2, 3: 3}


def fd_weights(offsets, order):
    """Finite-difference weights for the ``order``-th derivative at 0 on integer ``offsets``.

    Solves the moment (Vandermonde) system; fine for the short stencils used here.
    """
    offsets = np.asarray(offsets, dtype=float)
    n = len(offsets)
    A = np.vander(offsets, n, increasing=True).T
    b = np.zeros(n)
    b[order] = math.factorial(order)
    return np.linalg.solve(A, b)


@dataclass
class TimeDerivatives:
    """``derivs[j]`` has the shape of ``traj.states``; ``one_sided[i]`` flags lower-accuracy endpoint rows."""

    derivs: dict
    one_sided: np.ndarray
    dt: float


def time_derivatives(traj, j_max=2, states=None):
    """Finite-difference estimates of ``d^j/dt^j`` of the snapshots, ``1 <= j <= j_max``.

    Interior snapshots use centered stencils (5 points for ``j <= 2``, 7 for
    ``j = 3``; fourth order). Snapshots too close to either end use a
    shifted stencil of the same width and are flagged in ``one_sided``.

    Raises
    ------
    DomainError
        If ``j_max > 3``, the spacing is not uniform, or there are fewer
        snapshots than the widest stencil needs.
    """
    if not 1 <= j_max <= J_MAX:
        raise DomainError(f"j_max must be in [1, {J_MAX}], got {j_max}")
    data = traj.states if states is None else states
    times = np.asarray(traj.times)
    width = 2 * max(_HALF_WIDTH[j] for j in range(1, j_max + 1)) + 1
    if len(times) < width:
        raise DomainError(f"need at least {width} snapshots for j_max={j_max}, got {len(times)}")
    steps = np.diff(times)
    dt = float(steps.mean())
    if np.max(np.abs(steps - dt)) > 1e-9 * max(dt, 1.0):
        raise DomainError("snapshot spacing must be uniform")
    n_snap = len(times)
    derivs = {}
    one_sided = np.zeros(n_snap, dtype=bool)
    for j in range(1, j_max + 1):
        hw = _HALF_WIDTH[j]
        out = np.empty_like(data, dtype=float)
        for i in range(n_snap):
            start = min(max(i - hw, 0), n_snap - 2 * hw - 1)
            idx = np.arange(start, start + 2 * hw + 1)
            if start != i - hw:
                one_sided[i] = True
            wts = fd_weights(idx - i, j) / dt**j
            out[i] = np.tensordot(wts, data[idx], axes=(0, 0))
        derivs[j] = out
    return TimeDerivatives(derivs, one_sided, dt)


# ---------------------------------------------------------------------------
# exact (tendency-based) derivatives of FG states
# ---------------------------------------------------------------------------


def fg_state_derivatives(grid, U, p):
    """``(U, U_t, U_tt)`` of the FG flow at state ``U`` from the right-hand side."""
    Ut = fg_tendency_array(grid, U, p)
    Utt = fg_jvp_array(grid, U, Ut, p)
    return U, Ut, Utt


def balanced_derivatives(U, Ut, Utt, p):
    """Chain rule: ``(V, V_t, V_tt)`` from physical ``(U, U_t, U_tt)``."""
    zeta, w = U[0], U[3]
    zt, wt = Ut[0], Ut[3]
    ztt, wtt = Utt[0], Utt[3]
    h = 1.0 + zeta
    sm = math.sqrt(p.mu)
    V = balanced_array(U, p)
    Vt = np.empty_like(U)
    Vtt = np.empty_like(U)
    Vt[:2], Vtt[:2] = Ut[:2], Utt[:2]
    Vt[2] = p.sqrt_lam_mu * (Ut[2] - zt)
    Vtt[2] = p.sqrt_lam_mu * (Utt[2] - ztt)
    Vt[3] = sm * (wt / h - w * zt / h**2)
    Vtt[3] = sm * (wtt / h - 2.0 * wt * zt / h**2 - w * ztt / h**2 + 2.0 * w * zt**2 / h**3)
    return V, Vt, Vtt


# ---------------------------------------------------------------------------
# space-time norms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormSpec:
    """Indices of the space-time norm: spatial order ``s``, time order ``m``, weight ``lambda_tilde``."""

    s: int
    m: int
    lambda_tilde: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.s, int) and self.s >= 2):
            raise ValueError(f"s must be an integer >= 2, got {self.s}")
        if not (isinstance(self.m, int) and 1 <= self.m <= self.s):
            raise ValueError(f"m must be an integer in [1, s], got {self.m}")
        if not self.lambda_tilde >= 1:
            raise ValueError(f"lambda_tilde must be >= 1, got {self.lambda_tilde}")


@dataclass
class NormReport:
    """Value of a truncated space-time norm and its per-``j`` squared terms."""

    value: float
    terms: dict
    weights: dict
    truncated_at: int
    one_sided: bool = False
    extra: dict = field(default_factory=dict)


def _vec_norm2(grid, arr, s):
    return float(sum(grid.norm(c, s) ** 2 for c in arr))


def triple_norm_from_derivatives(grid, derivs, spec):
    """``sqrt(sum_j w_j ||d_t^j V||^2_{H^{s-j}})`` with ``w_j = 1`` for ``j <= m`` and ``lambda_tilde^{m-j}`` above.

    ``derivs[j]`` holds ``d_t^j V`` as a ``(4, n)`` array; the sum stops at the
    largest ``j <= min(s, 3)`` present.
    """
    jmax = min(spec.s, J_MAX, max(derivs))
    terms, weights = {}, {}
    for j in range(jmax + 1):
        terms[j] = _vec_norm2(grid, derivs[j], spec.s - j)
        weights[j] = 1.0 if j <= spec.m else spec.lambda_tilde ** (spec.m - j)
    value = math.sqrt(sum(weights[j] * terms[j] for j in terms))
    return NormReport(value, terms, weights, jmax)


def _balanced_series(traj):
    if traj.system != "fg":
        raise ValueError("space-time norms are defined for FG trajectories")
    return balanced_array(traj.states, traj.params)


def triple_norm(traj, t_index, spec, method="fd", td=None):
    """Truncated space-time norm of the balanced unknowns at snapshot ``t_index``.

    ``method="fd"`` differentiates the snapshot series (``j <= 3``);
    ``method="tendency"`` uses the FG right-hand side (``j <= 2``).
    """
    grid, p = traj.grid, traj.params
    if method == "tendency":
        U = traj.states[t_index]
        V, Vt, Vtt = balanced_derivatives(*fg_state_derivatives(grid, U, p), p)
        return triple_norm_from_derivatives(grid, {0: V, 1: Vt, 2: Vtt}, spec)
    if method != "fd":
        raise ValueError(f"unknown method {method!r}")
    series = _balanced_series(traj)
    jm = min(spec.s, J_MAX)
    if td is None:
        td = time_derivatives(traj, jm, states=series)
    derivs = {0: series[t_index]}
    derivs.update({j: td.derivs[j][t_index] for j in range(1, jm + 1)})
    rep = triple_norm_from_derivatives(grid, derivs, spec)
    rep.one_sided = bool(td.one_sided[t_index])
    return rep


# ---------------------------------------------------------------------------
# consistency residual
# ---------------------------------------------------------------------------


def material_second(grid, f, ft, ftt, u, ut):
    """``f'' `` in the material sense: ``f_tt + u_t f' + 2 u f_t' + u u' f' + u^2 f''``."""
    D = grid.diff
    fx = D(f)
    return ftt + ut * fx + 2.0 * u * D(ft) + u * D(u) * fx + u * u * grid.diff(f, 2)


def residual_from_derivatives(grid, U, Ut, Utt):
    """``r = -h (eta - h) eta_dd - h^2 (eta_dd - h_dd)`` with material second derivatives."""
    zeta, u, eta = U[0], U[1], U[2]
    h = 1.0 + zeta
    h_dd = material_second(grid, h, Ut[0], Utt[0], u, Ut[1])
    eta_dd = material_second(grid, eta, Ut[2], Utt[2], u, Ut[1])
    return -h * (eta - h) * eta_dd - h * h * (eta_dd - h_dd)


@dataclass
class ResidualReport:
    field: ScalarField
    norm: float
    s: float


def consistency_residual(traj, t_index, p=None, method="tendency", s=2.0, td=None):
    """Residual ``r`` of the GN momentum constraint at one snapshot and ``||r||_{H^{s-2}}``.

    ``method="tendency"`` takes ``U_t, U_tt`` from the FG right-hand side;
    ``method="fd"`` takes them from finite differences of the snapshots.
    """
    if traj.system != "fg":
        raise ValueError("consistency residual needs an FG trajectory")
    p = p or traj.params
    grid = traj.grid
    U = traj.states[t_index]
    if method == "tendency":
        _, Ut, Utt = fg_state_derivatives(grid, U, p)
    elif method == "fd":
        if td is None:
            td = time_derivatives(traj, 2)
        Ut, Utt = td.derivs[1][t_index], td.derivs[2][t_index]
    else:
        raise ValueError(f"unknown method {method!r}")
    r = residual_from_derivatives(grid, U, Ut, Utt)
    return ResidualReport(ScalarField(grid, r), grid.norm(r, s - 2.0), s)


def residual_series(traj, p=None, method="tendency", s=2.0):
    """``||r||_{H^{s-2}}`` at every snapshot."""
    td = time_derivatives(traj, 2) if method == "fd" else None
    return np.array([consistency_residual(traj, i, p, method, s, td).norm for i in range(len(traj))])


# ---------------------------------------------------------------------------
# energy monitors
# ---------------------------------------------------------------------------


def st_quadratic_density(V, W, p):
    """Pointwise ``(S_t(V) W) . W`` for balanced ``(4, n)`` arrays."""
    zeta, iota, kappa = V[0], V[2], V[3]
    h = 1.0 + zeta
    alpha = 1.0 + iota**2 / (3.0 * h**2)
    beta = (1.0 - kappa**2 * h**2 / (p.lam * p.mu)) / (1.0 + 2.0 * iota / (p.sqrt_lam_mu * h))
    off = -kappa * h**2 / p.sqrt_lam_mu
    return (
        3.0 * alpha * beta * W[0] ** 2
        + 3.0 * h * beta * W[1] ** 2
        + W[2] ** 2 / h
        + 2.0 * off * W[2] * W[3]
        + h**3 * W[3] ** 2
    )


def st_energy(grid, V, p, W=None):
    """``(S_t(V) W, W)_{L^2}`` with ``W = V`` by default."""
    W = V if W is None else W
    return float(np.sum(st_quadratic_density(V, W, p)) * grid.dx)


def norm1_monitor(grid, V, Vt, p, s):
    """First-order-in-time truncation (``m = 1``, ``j <= 1``) of the ``S_t``-weighted form.

    ``sum_{k<=s} (S_t d^k V, d^k V) + (S_t V_t, V_t)``; may be negative outside
    the hyperbolicity region.
    """
    total = 0.0
    dk = V
    for _ in range(s + 1):
        total += st_energy(grid, V, p, dk)
        dk = grid.diff(dk)
    total += st_energy(grid, V, p, Vt)
    return total


def norm2_monitor(grid, Vt, s):
    """``m = 1`` truncation at ``j <= 1``: ``sum_{1<=k<=s-1} ||d^k V_t||^2``."""
    total = 0.0
    dk = grid.diff(Vt)
    for _ in range(1, s):
        total += float(np.sum(dk**2) * grid.dx)
        dk = grid.diff(dk)
    return total


def energy_series(traj):
    """``(S_t(V)V, V)`` at each snapshot of an FG trajectory."""
    series = _balanced_series(traj)
    return np.array([st_energy(traj.grid, V, traj.params) for V in series])


def margin_series(traj):
    """Hyperbolicity margin at each snapshot."""
    p = traj.params
    series = _balanced_series(traj)
    out = []
    for V in series:
        h = 1.0 + V[0]
        worst = max(np.max(h * np.abs(V[3])), np.max(2.0 * np.abs(V[2]) / h))
        out.append(1.0 - worst / p.sqrt_lam_mu)
    return np.array(out)


def projection_split(grid, V, mu):
    """``(||V||^2, ||Pi_r V||^2, ||Pi_sing V||^2)`` in ``L^2``."""
    reg = analysis.projector_apply(V, mu, "regular", grid)
    sing = analysis.projector_apply(V, mu, "singular", grid)
    l2 = lambda a: float(np.sum(a**2) * grid.dx)  # noqa: E731
    return l2(V), l2(reg), l2(sing)
