"""Well-prepared initial data for the relaxation system.

Given ``(zeta0, u0)`` and ``h0 = 1 + zeta0`` the correctors are

    c1 = -h0 u0'
    t[h0] c2 = h0^3 (u0 u0'' - u0'^2 - zeta0'' - (u0 u0')')

and the data of order ``m`` is

    m = 0:  eta0 = h0,            w0 = 0
    m = 1:  eta0 = h0,            w0 = c1
    m = 2:  eta0 = h0 + c2 / lam, w0 = c1

With these choices the first ``m`` time derivatives of ``lam (eta - h)`` stay
bounded at ``t = 0`` as ``lam`` grows. Higher orders need correctors that are
not available in closed form and are not implemented.
"""

from dataclasses import dataclass

import numpy as np

from . import elliptic
from .spectral import ScalarField, _check
from .state import StateU, check_depth

SUPPORTED_ORDERS = (0, 1, 2)


@dataclass(frozen=True, eq=False)
class PreparedData:
    order_m: int
    U0: StateU
    c1: ScalarField | None = None
    c2: ScalarField | None = None


def _depth(zeta0, u0, h_star):
    _check(zeta0)
    _check(u0)
    if zeta0.grid != u0.grid:
        raise ValueError("fields live on different grids")
    check_depth(zeta0.values, h_star, "initial data")
    return 1.0 + zeta0.values


def compute_c1(zeta0, u0, h_star=0.0):
    """``-(1 + zeta0) u0'``."""
    h0 = _depth(zeta0, u0, h_star)
    return ScalarField(zeta0.grid, -h0 * zeta0.grid.diff(u0.values))


def c2_rhs(zeta0, u0):
    """Right-hand side ``h0^3 (u0 u0'' - u0'^2 - zeta0'' - (u0 u0')')`` of the second corrector."""
    g = zeta0.grid
    D = g.diff
    h0 = 1.0 + zeta0.values
    u = u0.values
    ux = D(u)
    return ScalarField(g, h0**3 * (u * D(ux) - ux * ux - g.diff(zeta0.values, 2) - D(u * ux)))


def compute_c2(zeta0, u0, mu, h_star=0.0):
    """Solve ``t[h0] c2 = c2_rhs(zeta0, u0)``."""
    h0 = _depth(zeta0, u0, h_star)
    return elliptic.t_solve(ScalarField(zeta0.grid, h0), c2_rhs(zeta0, u0), mu)


def prepare(zeta0, u0, m, p):
    """Initial state of preparation order ``m`` for parameters ``p``.

    Raises
    ------
    NotImplementedError
        For ``m > 2``: the general correctors are not available in closed form.
    CavitationError
        If ``min(1 + zeta0) < p.h_star``.
    """
    if m not in SUPPORTED_ORDERS:
        if isinstance(m, int) and m > 2:
            raise NotImplementedError(
                f"preparation order {m} is not supported: only m <= 2 have explicit correctors"
            )
        raise ValueError(f"preparation order must be a non-negative integer, got {m!r}")
    h0 = _depth(zeta0, u0, p.h_star)
    g = zeta0.grid
    hf = ScalarField(g, h0)
    if m == 0:
        return PreparedData(0, StateU(zeta0, u0, hf, ScalarField.constant(g, 0.0)))
    c1 = compute_c1(zeta0, u0)
    if m == 1:
        return PreparedData(1, StateU(zeta0, u0, hf, c1), c1=c1)
    c2 = compute_c2(zeta0, u0, p.mu)
    return PreparedData(2, StateU(zeta0, u0, hf + c2 / p.lam, c1), c1=c1, c2=c2)


def initial_deviation_derivatives(U, p):
    """``(d/dt (eta - h), d^2/dt^2 (eta - h))`` at the state ``U`` along the exact FG flow.

    Both come from the FG right-hand side: the first from one evaluation, the
    second from its directional derivative along itself.
    """
    from .solvers import fg_second_derivative_array, fg_tendency_array

    g = U.grid
    arr = U.as_array()
    F = fg_tendency_array(g, arr, p)
    F2 = fg_second_derivative_array(g, arr, p)
    return ScalarField(g, F[2] - F[0]), ScalarField(g, F2[2] - F2[0])


def preparedness_report(traj, p, s=1.0):
    """Per-snapshot ``lam * ||eta - h||_{H^s}`` of an FG trajectory."""
    if traj.system != "fg":
        raise ValueError("preparedness_report needs an FG trajectory")
    g = traj.grid
    dev = traj.states[:, 2] - 1.0 - traj.states[:, 0]
    return np.array([p.lam * g.norm(d, s) for d in dev])
