"""Elliptic operators of the dispersive problem and their inverses (d = 1).

    t[h] psi = psi - (mu/3) h^3 (h^{-1} psi')'
    T[h] v   = v   - (mu/(3h)) (h^3 v')'

They are conjugate: ``T[h](h^{-1} psi') = h^{-1} (t[h] psi)'`` and
``h^3 (T[h] v)' = t[h](h^3 v')``. Products inside the operators are evaluated
pointwise without dealiasing; this keeps both identities exact on the grid.

Inversion uses preconditioned CG on the symmetric forms ``h^{-3} t[h]`` and
``h T[h]`` with a constant-depth spectral preconditioner. Grids with
``n <= DENSE_FALLBACK_MAX`` fall back to a dense collocation solve if CG misses
the tolerance.
"""

from dataclasses import dataclass
import threading

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from .errors import CavitationError, SolverError
from .spectral import ScalarField, _check

TOL_REL = 1e-10
DENSE_FALLBACK_MAX = 512


@dataclass
class SolveStats:
    calls: int = 0
    iterations: int = 0
    dense_fallbacks: int = 0


_stats = SolveStats()
_stats_lock = threading.Lock()


def solve_stats():
    """Snapshot of the process-wide elliptic solve counters."""
    with _stats_lock:
        return SolveStats(_stats.calls, _stats.iterations, _stats.dense_fallbacks)


def reset_solve_stats():
    with _stats_lock:
        _stats.calls = _stats.iterations = _stats.dense_fallbacks = 0


def _record(iters, dense=False):
    with _stats_lock:
        _stats.calls += 1
        _stats.iterations += iters
        _stats.dense_fallbacks += int(dense)


def _check_depth(h, h_star):
    hmin = float(np.min(h))
    if hmin < h_star:
        raise CavitationError(f"depth {hmin:.6g} below floor {h_star:.6g} in elliptic operator", min_depth=hmin)


# -- array level -------------------------------------------------------------


def t_apply_array(grid, h, psi, mu):
    return psi - (mu / 3.0) * h**3 * grid.diff(grid.diff(psi) / h)


def T_apply_array(grid, h, v, mu):
    return v - (mu / (3.0 * h)) * grid.diff(h**3 * grid.diff(v))


def diff_matrix(grid):
    """Dense matrix of the first spectral derivative."""
    # Row j of diff(eye) is the derivative of the j-th unit vector.
    return grid.diff(np.eye(grid.n_points)).T


def t_matrix(grid, h, mu):
    """Collocation matrix of ``t[h]``."""
    D = diff_matrix(grid)
    return np.eye(grid.n_points) - (mu / 3.0) * (h**3)[:, None] * (D @ (D / h[:, None]))


def T_matrix(grid, h, mu):
    """Collocation matrix of ``T[h]``."""
    D = diff_matrix(grid)
    return np.eye(grid.n_points) - (mu / 3.0) / h[:, None] * (D @ ((h**3)[:, None] * D))


def _pcg(grid, apply_sym, weight, precond_symbol, rhs, tol, maxiter, dense_matrix):
    """Solve ``A x = rhs`` where ``weight * A`` is SPD and applied by ``apply_sym``.

    The stopping rule is on the unweighted residual ``||A x - rhs|| <= tol ||rhs||``.
    """
    n = grid.n_points
    bnorm = np.linalg.norm(rhs)
    if bnorm == 0.0:
        _record(0)
        return np.zeros(n), 0
    b_w = weight * rhs
    op = LinearOperator((n, n), matvec=apply_sym, dtype=float)
    pre = LinearOperator((n, n), matvec=lambda r: np.fft.irfft(np.fft.rfft(r) / precond_symbol, n), dtype=float)
    # Tighten the weighted tolerance so the unweighted residual meets ``tol``.
    ratio = float(np.min(np.abs(weight)) / np.max(np.abs(weight)))
    count = [0]

    def cb(_):
        count[0] += 1

    x, info = cg(op, b_w, rtol=0.5 * tol * ratio, atol=0.0, maxiter=maxiter, M=pre, callback=cb)
    resid = np.linalg.norm((apply_sym(x)) / weight - rhs) / bnorm
    if info == 0 and resid <= tol:
        _record(count[0])
        return x, count[0]
    if n <= DENSE_FALLBACK_MAX:
        x = np.linalg.solve(dense_matrix(), rhs)
        resid = np.linalg.norm((apply_sym(x)) / weight - rhs) / bnorm
        if resid <= tol:
            _record(count[0], dense=True)
            return x, count[0]
    raise SolverError(
        f"elliptic solve did not reach relative residual {tol:g} (got {resid:.3e} after {count[0]} iterations)",
        residual=resid,
        iterations=count[0],
    )


def t_solve_array(grid, h, rhs, mu, tol=TOL_REL, maxiter=None):
    hbar = float(np.mean(h))
    w = h**-3
    k2 = grid.k**2
    k2[-1] = 0.0

    def apply_sym(x):
        return w * t_apply_array(grid, h, x, mu)

    x, _ = _pcg(
        grid,
        apply_sym,
        w,
        hbar**-3 + (mu / 3.0) * k2 / hbar,
        rhs,
        tol,
        maxiter or 10 * grid.n_points,
        lambda: t_matrix(grid, h, mu),
    )
    return x


def T_solve_array(grid, h, rhs, mu, tol=TOL_REL, maxiter=None):
    hbar = float(np.mean(h))
    k2 = grid.k**2
    k2[-1] = 0.0

    def apply_sym(x):
        return h * T_apply_array(grid, h, x, mu)

    x, _ = _pcg(
        grid,
        apply_sym,
        h,
        hbar + (mu / 3.0) * hbar**3 * k2,
        rhs,
        tol,
        maxiter or 10 * grid.n_points,
        lambda: T_matrix(grid, h, mu),
    )
    return x


# -- field level ---------------------------------------------------------------


def _prep(h, f, h_star):
    _check(h)
    _check(f)
    if h.grid != f.grid:
        raise ValueError("fields live on different grids")
    _check_depth(h.values, h_star)
    return h.grid, h.values, f.values


def t_apply(h, psi, mu, h_star=0.0):
    """``psi - (mu/3) h^3 (h^{-1} psi')'``."""
    grid, hv, pv = _prep(h, psi, h_star)
    return ScalarField(grid, t_apply_array(grid, hv, pv, mu))


def T_apply(h, v, mu, h_star=0.0):
    """``v - (mu/(3h)) (h^3 v')'``."""
    grid, hv, vv = _prep(h, v, h_star)
    return ScalarField(grid, T_apply_array(grid, hv, vv, mu))


def t_solve(h, rhs, mu, h_star=0.0, tol=TOL_REL):
    """Solve ``t[h] psi = rhs`` to relative residual ``tol``.

    Raises
    ------
    CavitationError
        If ``min h < h_star`` (or ``h <= 0``).
    SolverError
        If neither CG nor the dense fallback reaches ``tol``.
    """
    grid, hv, rv = _prep(h, rhs, max(h_star, np.finfo(float).tiny))
    return ScalarField(grid, t_solve_array(grid, hv, rv, mu, tol))


def T_solve(h, rhs, mu, h_star=0.0, tol=TOL_REL):
    """Solve ``T[h] v = rhs``; errors as :func:`t_solve`."""
    grid, hv, rv = _prep(h, rhs, max(h_star, np.finfo(float).tiny))
    return ScalarField(grid, T_solve_array(grid, hv, rv, mu, tol))
