"""Parameters, physical/balanced states and the change of variables between them.

Physical unknowns ``U = (zeta, u, eta, w)`` with depth ``h = 1 + zeta``;
balanced unknowns ``V = (zeta, u, iota, kappa)`` with

    iota  = sqrt(mu * lam) * (eta - h)
    kappa = sqrt(mu) * w / h
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import CavitationError, InvalidFieldError
from .spectral import GridSpec, ScalarField


@dataclass(frozen=True)
class ParamSet:
    """Relaxation parameter ``lam``, shallowness ``mu`` and admissibility bounds."""

    lam: float
    mu: float
    nu: float = 1.0
    h_star: float = 0.1

    def __post_init__(self):
        for name in ("lam", "mu", "nu", "h_star"):
            val = getattr(self, name)
            if not (val > 0 and math.isfinite(val)):
                raise ValueError(f"{name} must be positive and finite, got {val}")

    @property
    def sqrt_lam(self):
        return math.sqrt(self.lam)

    @property
    def sqrt_lam_mu(self):
        return math.sqrt(self.lam * self.mu)

    def s_nu_value(self):
        """``1/lam + mu + 1/(lam mu)``; membership in S_nu means this is <= nu."""
        return 1.0 / self.lam + self.mu + 1.0 / (self.lam * self.mu)

    def in_s_nu(self):
        return self.s_nu_value() <= self.nu

    def with_lambda(self, lam):
        return ParamSet(lam=lam, mu=self.mu, nu=self.nu, h_star=self.h_star)


def check_depth(zeta, h_star, what="state"):
    """Raise :class:`CavitationError` if ``min(1 + zeta) < h_star``."""
    hmin = float(np.min(1.0 + np.real(zeta)))
    if hmin < h_star:
        raise CavitationError(f"{what}: min depth {hmin:.6g} below h_star={h_star:.6g}", min_depth=hmin)
    return hmin


class _FourFieldState:
    """Shared plumbing for the two 4-component state containers."""

    _names = ()

    def as_array(self):
        return np.stack([getattr(self, name).values for name in self._names])

    @classmethod
    def from_array(cls, grid, arr):
        arr = np.asarray(arr)
        if arr.shape != (4, grid.n_points):
            raise InvalidFieldError(f"expected array of shape (4, {grid.n_points}), got {arr.shape}")
        return cls(*(ScalarField(grid, arr[i]) for i in range(4)))

    @property
    def grid(self):
        return getattr(self, self._names[0]).grid

    @property
    def h(self):
        return 1.0 + self.zeta

    def check_depth(self, h_star):
        return check_depth(self.zeta.values, h_star, type(self).__name__)


@dataclass(frozen=True, eq=False)
class StateU(_FourFieldState):
    """Physical FG unknowns (surface deformation, velocity, augmented depth, augmented velocity)."""

    zeta: ScalarField
    u: ScalarField
    eta: ScalarField
    w: ScalarField

    _names = ("zeta", "u", "eta", "w")

    def __post_init__(self):
        grids = {f.grid for f in (self.zeta, self.u, self.eta, self.w)}
        if len(grids) != 1:
            raise InvalidFieldError("all components must share one grid")

    @classmethod
    def rest(cls, grid):
        zero = ScalarField.constant(grid, 0.0)
        return cls(zero, zero, ScalarField.constant(grid, 1.0), zero)


@dataclass(frozen=True, eq=False)
class StateV(_FourFieldState):
    """Balanced FG unknowns ``(zeta, u, iota, kappa)``."""

    zeta: ScalarField
    u: ScalarField
    iota: ScalarField
    kappa: ScalarField

    _names = ("zeta", "u", "iota", "kappa")

    def __post_init__(self):
        grids = {f.grid for f in (self.zeta, self.u, self.iota, self.kappa)}
        if len(grids) != 1:
            raise InvalidFieldError("all components must share one grid")


def balanced_array(U, p):
    """Array-level ``U -> V`` for a ``(4, n)`` or ``(..., 4, n)`` stack."""
    U = np.asarray(U)
    h = 1.0 + U[..., 0, :]
    V = np.empty_like(U)
    V[..., 0, :] = U[..., 0, :]
    V[..., 1, :] = U[..., 1, :]
    V[..., 2, :] = p.sqrt_lam_mu * (U[..., 2, :] - h)
    V[..., 3, :] = math.sqrt(p.mu) * U[..., 3, :] / h
    return V


def physical_array(V, p):
    """Array-level inverse of :func:`balanced_array`."""
    V = np.asarray(V)
    h = 1.0 + V[..., 0, :]
    U = np.empty_like(V)
    U[..., 0, :] = V[..., 0, :]
    U[..., 1, :] = V[..., 1, :]
    U[..., 2, :] = h + V[..., 2, :] / p.sqrt_lam_mu
    U[..., 3, :] = h * V[..., 3, :] / math.sqrt(p.mu)
    return U


def to_balanced(U, p):
    """Map physical unknowns to balanced ones.

    Raises
    ------
    CavitationError
        If ``min(1 + zeta) < p.h_star``.
    """
    U.check_depth(p.h_star)
    return StateV.from_array(U.grid, balanced_array(U.as_array(), p))


def from_balanced(V, p):
    """Inverse of :func:`to_balanced`."""
    V.check_depth(p.h_star)
    return StateU.from_array(V.grid, physical_array(V.as_array(), p))


__all__ = [
    "GridSpec",
    "ParamSet",
    "StateU",
    "StateV",
    "balanced_array",
    "check_depth",
    "from_balanced",
    "physical_array",
    "to_balanced",
]
