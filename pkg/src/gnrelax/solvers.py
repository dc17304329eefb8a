"""Time integration of the relaxation (FG) system and the reference GN system, d = 1.

FG unknowns ``U = (zeta, u, eta, w)``, ``h = 1 + zeta``, ``e = eta - h``:

    zeta_t = -(h u)'
    u_t    = -u u' - zeta' + (lam mu / (3h)) (eta e / h)'
    eta_t  = -u eta' + w
    w_t    = -u w' - lam e / h^2

GN unknowns ``(zeta, u)`` with the momentum equation solved for ``u_t`` through
``T[h]``:

    T[h] u_t = -zeta' - u u' - (mu/(3h)) (h^3 (u'^2 - u u''))'

Every quadratic product is dealiased by the 2/3 rule; quotients by ``h`` are
pointwise.
"""

from dataclasses import dataclass, field
import math
import time

import numpy as np

from . import _kernels, elliptic
from .errors import CavitationError, InvalidFieldError
from .spectral import ScalarField
from .state import ParamSet, StateU

SCHEMES = ("rk4_explicit", "strang_split")
SYSTEMS = ("fg", "gn")


# ---------------------------------------------------------------------------
# right-hand sides (array level)
# ---------------------------------------------------------------------------


def fg_tendency_array(grid, U, p, stiff=True):
    """FG tendency of a ``(4, n)`` state; ``stiff=False`` drops the two relaxation sources."""
    D, dl = grid.diff, grid.dealias
    zeta, u, eta, w = U
    h, e, q, src = _kernels.fg_pointwise(zeta, u, eta, w, p.lam)
    out = np.empty_like(U)
    out[0] = -D(dl(h * u))
    out[1] = -(dl(u * D(u)) + D(zeta)) + (p.lam * p.mu / 3.0) / h * D(dl(q))
    out[2] = -dl(u * D(eta))
    out[3] = -dl(u * D(w))
    if stiff:
        out[2] += w
        out[3] += src
    return out


def fg_jvp_array(grid, U, dU, p, stiff=True):
    """Directional derivative ``F'(U) dU`` of :func:`fg_tendency_array`."""
    D, dl = grid.diff, grid.dealias
    zeta, u, eta, w = U
    dz, du, deta, dw = dU
    h = 1.0 + zeta
    e = eta - h
    q = eta * e / h
    dq = 2.0 * eta * deta / h - eta**2 * dz / h**2 - deta
    c = p.lam * p.mu / 3.0
    out = np.empty_like(U)
    out[0] = -D(dl(dz * u + h * du))
    out[1] = -(dl(du * D(u) + u * D(du)) + D(dz)) + c * (-dz / h**2 * D(dl(q)) + D(dl(dq)) / h)
    out[2] = -dl(du * D(eta) + u * D(deta))
    out[3] = -dl(du * D(w) + u * D(dw))
    if stiff:
        out[2] += dw
        out[3] += -p.lam * ((deta - dz) / h**2 - 2.0 * e * dz / h**3)
    return out


def fg_second_derivative_array(grid, U, p):
    """``d^2 U / dt^2 = F'(U) F(U)`` along the exact FG flow."""
    return fg_jvp_array(grid, U, fg_tendency_array(grid, U, p), p)


def gn_rhs_momentum(grid, zeta, u, mu):
    """Right-hand side of ``T[h] u_t = ...``."""
    D, dl = grid.diff, grid.dealias
    h = 1.0 + zeta
    ux = D(u)
    return -dl(u * ux) - D(zeta) - (mu / 3.0) / h * D(dl(h**3 * (ux * ux - u * D(ux))))


def gn_tendency_array(grid, V, p):
    """GN tendency of a ``(2, n)`` state ``(zeta, u)``."""
    zeta, u = V
    h = 1.0 + zeta
    if np.min(h) < p.h_star:
        raise CavitationError(f"depth {np.min(h):.6g} below floor {p.h_star:.6g}", min_depth=float(np.min(h)))
    out = np.empty_like(V)
    out[0] = -grid.diff(grid.dealias(h * u))
    rhs = gn_rhs_momentum(grid, zeta, u, p.mu)
    out[1] = elliptic.T_solve_array(grid, h, rhs, p.mu)
    return out


def relax_rotate_array(U, p, dt):
    """Exact frozen-coefficient rotation of ``(eta - h, w)`` over ``dt``; ``zeta, u`` untouched."""
    zeta, u, eta, w = U
    h = 1.0 + zeta
    e, w_new = _kernels.relax_rotate(
        np.ascontiguousarray(eta - h), np.ascontiguousarray(w), np.ascontiguousarray(h), p.sqrt_lam, dt
    )
    out = U.copy()
    out[2] = h + e
    out[3] = w_new
    return out


# ---------------------------------------------------------------------------
# field-level API
# ---------------------------------------------------------------------------


def _check_state_depth(U, p):
    hmin = float(np.min(1.0 + U.zeta.values))
    if hmin < p.h_star:
        raise CavitationError(f"depth {hmin:.6g} below floor {p.h_star:.6g}", min_depth=hmin)


def fg_tendency(U, p):
    """FG tendency as a :class:`StateU`-shaped container (components are time derivatives)."""
    _check_state_depth(U, p)
    return StateU.from_array(U.grid, fg_tendency_array(U.grid, U.as_array(), p))


def fg_jvp(U, dU, p):
    """``F'(U) dU`` for the FG tendency."""
    _check_state_depth(U, p)
    return StateU.from_array(U.grid, fg_jvp_array(U.grid, U.as_array(), dU.as_array(), p))


def gn_tendency(zeta, u, p):
    """GN tendency ``(zeta_t, u_t)`` as two :class:`ScalarField`."""
    if zeta.grid != u.grid:
        raise InvalidFieldError("fields live on different grids")
    out = gn_tendency_array(zeta.grid, np.stack([zeta.values, u.values]), p)
    return ScalarField(zeta.grid, out[0]), ScalarField(zeta.grid, out[1])


def relaxation_substep_exact(eta, w, h, dt, lam):
    """Exact solve of ``eta_t = w``, ``w_t = -(lam/h^2)(eta - h)`` with ``h`` frozen.

    Each grid point rotates ``(eta - h, w)`` at frequency ``omega = sqrt(lam)/h``;
    ``omega^2 (eta - h)^2 + w^2`` is invariant.
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    hv = np.ascontiguousarray(h.values, dtype=float)
    e, w_new = _kernels.relax_rotate(
        np.ascontiguousarray(eta.values - hv), np.ascontiguousarray(w.values, dtype=float), hv, math.sqrt(lam), dt
    )
    return ScalarField(eta.grid, hv + e), ScalarField(w.grid, w_new)


# ---------------------------------------------------------------------------
# stepping
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StepPolicy:
    """Time-stepping controls.

    ``fixed_dt`` overrides the CFL rule (it is still shortened so snapshots
    fall on step boundaries).
    """

    scheme: str = "strang_split"
    cfl_number: float = 0.5
    stiff_safety: float = 0.5
    t_end: float = 1.0
    snapshot_interval: float | None = None
    fixed_dt: float | None = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if not 0 < self.cfl_number <= 1:
            raise ValueError(f"cfl_number must lie in (0, 1], got {self.cfl_number}")
        if not self.stiff_safety > 0:
            raise ValueError("stiff_safety must be positive")
        if not self.t_end >= 0:
            raise ValueError("t_end must be non-negative")
        if self.snapshot_interval is not None and not self.snapshot_interval > 0:
            raise ValueError("snapshot_interval must be positive")
        if self.fixed_dt is not None and not self.fixed_dt > 0:
            raise ValueError("fixed_dt must be positive")


def max_speed(U, p, system):
    """Largest characteristic speed ``|u| + sqrt(alpha h)`` on the grid (``|u| + sqrt(h)`` for GN)."""
    zeta, u = U[0], U[1]
    h = 1.0 + zeta
    if system == "gn":
        return float(np.max(np.abs(u) + np.sqrt(h)))
    eta = U[2]
    alpha = 1.0 + p.mu * p.lam * eta**2 / (3.0 * h**3)
    return float(np.max(np.abs(u) + np.sqrt(alpha * h)))


def stable_dt(U, grid, p, policy, system):
    if policy.fixed_dt is not None:
        return policy.fixed_dt
    dt = policy.cfl_number * grid.dx / max_speed(U, p, system)
    if system == "fg" and policy.scheme == "rk4_explicit":
        hmin = float(np.min(1.0 + U[0]))
        dt = min(dt, policy.stiff_safety * hmin / p.sqrt_lam)
    return dt


def _rk4(f, y, dt):
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_array(grid, U, p, dt, scheme, system):
    """Advance a raw state array by one step of size ``dt``."""
    if system == "gn":
        return _rk4(lambda y: gn_tendency_array(grid, y, p), U, dt)
    if scheme == "rk4_explicit":
        return _rk4(lambda y: fg_tendency_array(grid, y, p), U, dt)
    U = relax_rotate_array(U, p, 0.5 * dt)
    U = _rk4(lambda y: fg_tendency_array(grid, y, p, stiff=False), U, dt)
    return relax_rotate_array(U, p, 0.5 * dt)


def _to_array(state, system):
    if isinstance(state, StateU):
        arr = state.as_array()
        return state.grid, (arr[:2].copy() if system == "gn" else arr)
    zeta, u = state
    return zeta.grid, np.stack([zeta.values, u.values])


def _from_array(grid, arr, system):
    if system == "gn":
        return ScalarField(grid, arr[0]), ScalarField(grid, arr[1])
    return StateU.from_array(grid, arr)


def step(state, p, policy, system="fg", dt=None):
    """One step of the chosen scheme; ``dt`` defaults to the policy's stability rule.

    ``state`` is a :class:`StateU` for FG and a ``(zeta, u)`` pair (or a
    StateU, whose ``eta, w`` are ignored) for GN.
    """
    if system not in SYSTEMS:
        raise ValueError(f"system must be one of {SYSTEMS}")
    grid, U = _to_array(state, system)
    if dt is None:
        dt = stable_dt(U, grid, p, policy, system)
    out = step_array(grid, U, p, dt, policy.scheme, system)
    _guard(out, p, 0.0, out)
    return _from_array(grid, out, system)


def _guard(U, p, t, snapshot):
    if not np.all(np.isfinite(U)):
        raise CavitationError(f"non-finite state at t={t:.6g}", time=t, snapshot=snapshot)
    hmin = float(np.min(1.0 + U[0]))
    if hmin < p.h_star:
        raise CavitationError(
            f"depth {hmin:.6g} below floor {p.h_star:.6g} at t={t:.6g}", min_depth=hmin, time=t, snapshot=snapshot
        )


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------


@dataclass
class Trajectory:
    """Snapshots of one run.

    ``states`` has shape ``(n_snap, 4, n)`` for FG and ``(n_snap, 2, n)`` for GN.
    """

    times: np.ndarray
    states: np.ndarray
    grid: object
    params: ParamSet
    system: str
    scheme: str
    dt: float
    n_steps: int
    step_wall: np.ndarray = field(repr=False)
    elliptic_calls: int = 0
    elliptic_iterations: int = 0

    def __len__(self):
        return len(self.times)

    def state(self, i):
        return _from_array(self.grid, self.states[i], self.system)

    @property
    def final(self):
        return self.state(-1)

    def field(self, name):
        """Time series ``(n_snap, n)`` of one component by name."""
        names = ("zeta", "u", "eta", "w") if self.system == "fg" else ("zeta", "u")
        return self.states[:, names.index(name)]


def _snapshot_times(policy):
    t_end = policy.t_end
    if t_end == 0:
        return np.array([0.0])
    interval = policy.snapshot_interval or t_end
    k = int(math.floor(t_end / interval + 1e-9))
    times = interval * np.arange(k + 1)
    if t_end - times[-1] > 1e-12 * max(1.0, t_end):
        times = np.append(times, t_end)
    else:
        times[-1] = t_end
    return times


def integrate(state0, p, policy, system="fg"):
    """Integrate to ``policy.t_end`` and return a :class:`Trajectory`.

    Within each snapshot interval the step is the stability-limited ``dt``
    rounded down so an integer number of steps fills the interval.

    Raises
    ------
    CavitationError
        If the depth drops below ``p.h_star`` (or the state blows up); the
        last good state is attached as ``snapshot``.
    """
    if system not in SYSTEMS:
        raise ValueError(f"system must be one of {SYSTEMS}")
    if system == "gn" and policy.scheme == "strang_split":
        scheme = "rk4_explicit"
    else:
        scheme = policy.scheme
    grid, U = _to_array(state0, system)
    _guard(U, p, 0.0, U)
    times = _snapshot_times(policy)
    states = [U.copy()]
    walls = []
    stats0 = elliptic.solve_stats()
    dt_used = 0.0
    for t0, t1 in zip(times[:-1], times[1:]):
        span = t1 - t0
        dt_max = stable_dt(U, grid, p, policy, system)
        nsub = max(1, int(math.ceil(span / dt_max - 1e-9)))
        dt = span / nsub
        dt_used = max(dt_used, dt)
        for i in range(nsub):
            tic = time.perf_counter()
            U_new = step_array(grid, U, p, dt, scheme, system)
            walls.append(time.perf_counter() - tic)
            _guard(U_new, p, t0 + (i + 1) * dt, U)
            U = U_new
        states.append(U.copy())
    stats1 = elliptic.solve_stats()
    return Trajectory(
        times=times,
        states=np.array(states),
        grid=grid,
        params=p,
        system=system,
        scheme=scheme,
        dt=dt_used,
        n_steps=len(walls),
        step_wall=np.array(walls),
        elliptic_calls=stats1.calls - stats0.calls,
        elliptic_iterations=stats1.iterations - stats0.iterations,
    )
