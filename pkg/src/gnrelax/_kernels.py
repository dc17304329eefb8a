"""Pointwise hot kernels with a numba path and a pure-numpy fallback.

The numba versions are used when numba imports cleanly and the environment
variable ``GNRELAX_NUMBA`` is not set to ``0``. Both implementations are always
importable under ``numpy_impl`` / ``numba_impl`` so they can be compared.
"""

import os
import types

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("GNRELAX_NUMBA", "1").strip().lower() not in (
    "0",
    "false",
    "no",
    "off",
)


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------


def _relax_rotate_np(e, w, h, sqrt_lam, dt):
    om = sqrt_lam / h
    c = np.cos(om * dt)
    s = np.sin(om * dt)
    return e * c + (w / om) * s, -om * e * s + w * c


def _margin_ratio_np(h, iota, kappa):
    return max(np.max(h * np.abs(kappa)), np.max(2.0 * np.abs(iota) / h))


def _trig_interp_np(re_c, im_c, wavenumbers, xs):
    # Sum_k c_k exp(i k x); re/im parts passed separately for the numba twin.
    phase = np.outer(xs, wavenumbers)
    return np.cos(phase) @ re_c - np.sin(phase) @ im_c + 1j * (np.sin(phase) @ re_c + np.cos(phase) @ im_c)


def _trig_interp_real_np(re_c, im_c, wavenumbers, xs):
    phase = np.outer(xs, wavenumbers)
    return np.cos(phase) @ re_c - np.sin(phase) @ im_c


def _fg_pointwise_np(zeta, u, eta, w, lam):
    """Pointwise pieces of the FG flux: depth, deviation, relaxation flux, source."""
    h = 1.0 + zeta
    e = eta - h
    q = eta * e / h
    src = -lam * e / (h * h)
    return h, e, q, src


numpy_impl = types.SimpleNamespace(
    relax_rotate=_relax_rotate_np,
    margin_ratio=_margin_ratio_np,
    trig_interp=_trig_interp_np,
    trig_interp_real=_trig_interp_real_np,
    fg_pointwise=_fg_pointwise_np,
)


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @njit(cache=True)
    def _relax_rotate_nb(e, w, h, sqrt_lam, dt):
        n = e.shape[0]
        e_out = np.empty(n)
        w_out = np.empty(n)
        for i in range(n):
            om = sqrt_lam / h[i]
            c = np.cos(om * dt)
            s = np.sin(om * dt)
            e_out[i] = e[i] * c + (w[i] / om) * s
            w_out[i] = -om * e[i] * s + w[i] * c
        return e_out, w_out

    @njit(cache=True)
    def _margin_ratio_nb(h, iota, kappa):
        worst = 0.0
        for i in range(h.shape[0]):
            a = h[i] * abs(kappa[i])
            b = 2.0 * abs(iota[i]) / h[i]
            if a > worst:
                worst = a
            if b > worst:
                worst = b
        return worst

    @njit(cache=True)
    def _trig_interp_nb(re_c, im_c, wavenumbers, xs):
        out = np.empty(xs.shape[0], dtype=np.complex128)
        for j in range(xs.shape[0]):
            sr = 0.0
            si = 0.0
            for m in range(wavenumbers.shape[0]):
                ph = wavenumbers[m] * xs[j]
                c = np.cos(ph)
                s = np.sin(ph)
                sr += re_c[m] * c - im_c[m] * s
                si += re_c[m] * s + im_c[m] * c
            out[j] = sr + 1j * si
        return out

    @njit(cache=True)
    def _trig_interp_real_nb(re_c, im_c, wavenumbers, xs):
        out = np.empty(xs.shape[0])
        for j in range(xs.shape[0]):
            sr = 0.0
            for m in range(wavenumbers.shape[0]):
                ph = wavenumbers[m] * xs[j]
                sr += re_c[m] * np.cos(ph) - im_c[m] * np.sin(ph)
            out[j] = sr
        return out

    @njit(cache=True)
    def _fg_pointwise_nb(zeta, u, eta, w, lam):
        n = zeta.shape[0]
        h = np.empty(n)
        e = np.empty(n)
        q = np.empty(n)
        src = np.empty(n)
        for i in range(n):
            hi = 1.0 + zeta[i]
            ei = eta[i] - hi
            h[i] = hi
            e[i] = ei
            q[i] = eta[i] * ei / hi
            src[i] = -lam * ei / (hi * hi)
        return h, e, q, src

    numba_impl = types.SimpleNamespace(
        relax_rotate=_relax_rotate_nb,
        margin_ratio=_margin_ratio_nb,
        trig_interp=_trig_interp_nb,
        trig_interp_real=_trig_interp_real_nb,
        fg_pointwise=_fg_pointwise_nb,
    )
else:  # pragma: no cover
    numba_impl = None

active = numba_impl if USE_NUMBA else numpy_impl

relax_rotate = active.relax_rotate
margin_ratio = active.margin_ratio
trig_interp = active.trig_interp
trig_interp_real = active.trig_interp_real
fg_pointwise = active.fg_pointwise


def backend():
    """Name of the kernel backend in use."""
    return "numba" if active is numba_impl else "numpy"
