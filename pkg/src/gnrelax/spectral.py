"""Periodic grids, scalar fields and Fourier pseudo-spectral calculus.

Fields are sampled at ``x_j = j L / n``. Derivatives act exactly on the
trigonometric interpolant; the Nyquist mode is dropped for odd-order
derivatives so that the discrete first derivative stays real and skew-adjoint.

Norms use the continuum convention on the torus: with
``f(x) = sum_k c_k exp(i k x)``, ``||f||_{H^s}^2 = L * sum_k (1 + k^2)^s |c_k|^2``.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from .errors import InvalidFieldError


@dataclass(frozen=True)
class GridSpec:
    """Equispaced periodic grid on ``[0, domain_length)``."""

    domain_length: float = 2.0 * np.pi
    n_points: int = 256

    def __post_init__(self):
        if not (self.domain_length > 0 and np.isfinite(self.domain_length)):
            raise ValueError(f"domain_length must be positive, got {self.domain_length}")
        if int(self.n_points) != self.n_points or self.n_points < 8 or self.n_points % 2:
            raise ValueError(f"n_points must be an even integer >= 8, got {self.n_points}")

    @property
    def dx(self):
        return self.domain_length / self.n_points

    @cached_property
    def x(self):
        return np.arange(self.n_points) * self.dx

    @cached_property
    def k(self):
        """Wavenumbers of the ``rfft`` coefficients (Nyquist included)."""
        return 2.0 * np.pi / self.domain_length * np.arange(self.n_points // 2 + 1)

    @cached_property
    def k_full(self):
        """Wavenumbers of the full ``fft`` coefficients."""
        return 2.0 * np.pi / self.domain_length * np.fft.fftfreq(self.n_points, 1.0 / self.n_points)

    @cached_property
    def _ik_r(self):
        ik = 1j * self.k
        ik[-1] = 0.0
        return ik

    @cached_property
    def _ik_c(self):
        ik = 1j * self.k_full
        ik[self.n_points // 2] = 0.0
        return ik

    @cached_property
    def _dealias_r(self):
        return np.arange(self.n_points // 2 + 1) <= self.n_points / 3.0

    @cached_property
    def _dealias_c(self):
        idx = np.abs(np.fft.fftfreq(self.n_points, 1.0 / self.n_points))
        return idx <= self.n_points / 3.0

    @cached_property
    def _rfft_weights(self):
        # Each interior rfft coefficient stands for a +/- pair.
        wts = np.full(self.n_points // 2 + 1, 2.0)
        wts[0] = 1.0
        wts[-1] = 1.0
        return wts

    # -- array-level operators (hot path) -----------------------------------

    def _symbol(self, order, complex_):
        if complex_:
            return self._ik_c**order if order % 2 else (-(self.k_full**2)) ** (order // 2)
        return self._ik_r**order if order % 2 else (-(self.k**2)) ** (order // 2)

    def diff(self, f, order=1):
        """Spectral derivative of the sampled array ``f`` (real or complex)."""
        if np.iscomplexobj(f):
            return np.fft.ifft(self._symbol(order, True) * np.fft.fft(f))
        return np.fft.irfft(self._symbol(order, False) * np.fft.rfft(f), self.n_points)

    def dealias(self, f):
        """Zero every Fourier mode with ``|index| > n/3``."""
        if np.iscomplexobj(f):
            return np.fft.ifft(np.fft.fft(f) * self._dealias_c)
        return np.fft.irfft(np.fft.rfft(f) * self._dealias_r, self.n_points)

    def multiplier(self, f, symbol):
        """Apply the Fourier multiplier ``symbol(k)`` (callable of wavenumber)."""
        if np.iscomplexobj(f):
            return np.fft.ifft(symbol(self.k_full) * np.fft.fft(f))
        return np.fft.irfft(symbol(self.k) * np.fft.rfft(f), self.n_points)

    def norm(self, f, s=0.0):
        """Continuum-consistent ``H^s`` norm of the sampled array ``f``."""
        n = self.n_points
        if np.iscomplexobj(f):
            c = np.fft.fft(f) / n
            return float(np.sqrt(self.domain_length * np.sum((1.0 + self.k_full**2) ** s * np.abs(c) ** 2)))
        c = np.fft.rfft(f) / n
        total = np.sum(self._rfft_weights * (1.0 + self.k**2) ** s * np.abs(c) ** 2)
        return float(np.sqrt(self.domain_length * total))

    def inner(self, f, g):
        """Quadrature ``L^2`` inner product (exact for band-limited products)."""
        return np.sum(f * np.conj(g)) * self.dx

    def integral(self, f):
        return float(np.sum(f) * self.dx) if not np.iscomplexobj(f) else np.sum(f) * self.dx

    def interpolate(self, f, xs):
        """Evaluate the trigonometric interpolant of ``f`` at arbitrary points ``xs``."""
        n = self.n_points
        xs = np.ascontiguousarray(np.asarray(xs, dtype=float))
        c = np.fft.fft(np.asarray(f, dtype=complex)) / n
        # Split the Nyquist coefficient symmetrically so real data stays real.
        kk = self.k_full.copy()
        c = c.copy()
        nyq = n // 2
        c_nyq = c[nyq] / 2.0
        c[nyq] = c_nyq
        kk = np.append(kk, -kk[nyq])
        c = np.append(c, c_nyq)
        re_c = np.ascontiguousarray(c.real)
        im_c = np.ascontiguousarray(c.imag)
        if np.iscomplexobj(f):
            return _kernels.trig_interp(re_c, im_c, kk, xs)
        return _kernels.trig_interp_real(re_c, im_c, kk, xs)


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Samples of one unknown on a periodic grid.

    Values are real except in the toy models, which build complex fields.
    """

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.dtype.kind not in "fc":
            vals = vals.astype(float)
        if vals.shape != (self.grid.n_points,):
            raise InvalidFieldError(f"expected {self.grid.n_points} samples, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise InvalidFieldError("field contains non-finite values")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid, func):
        return cls(grid, func(grid.x))

    @classmethod
    def constant(cls, grid, value):
        return cls(grid, np.full(grid.n_points, float(value)))

    def _wrap(self, other, op):
        if isinstance(other, ScalarField):
            if other.grid != self.grid:
                raise InvalidFieldError("fields live on different grids")
            other = other.values
        return ScalarField(self.grid, op(self.values, other))

    def __add__(self, other):
        return self._wrap(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(other, np.subtract)

    def __rsub__(self, other):
        return self._wrap(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._wrap(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._wrap(other, np.divide)

    def __neg__(self):
        return ScalarField(self.grid, -self.values)

    def min(self):
        return float(np.min(self.values.real))

    def max_abs(self):
        return float(np.max(np.abs(self.values)))

    def __repr__(self):
        return f"ScalarField(n={self.grid.n_points}, L={self.grid.domain_length:.6g}, max|f|={self.max_abs():.3e})"


def _check(f):
    if not isinstance(f, ScalarField):
        raise TypeError(f"expected ScalarField, got {type(f).__name__}")
    if not np.all(np.isfinite(f.values)):
        raise InvalidFieldError("field contains non-finite values")


def spectral_derivative(f, order=1):
    """Exact derivative of the trigonometric interpolant of ``f``.

    Parameters
    ----------
    f : ScalarField
    order : {1, 2}

    Returns
    -------
    ScalarField
    """
    _check(f)
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    return ScalarField(f.grid, f.grid.diff(f.values, order))


def dealias(f):
    """Two-thirds rule truncation; idempotent."""
    _check(f)
    return ScalarField(f.grid, f.grid.dealias(f.values))


def sobolev_norm(f, s=0.0):
    """``||(1 - d_x^2)^{s/2} f||_{L^2}`` on the torus."""
    _check(f)
    return f.grid.norm(f.values, s)
