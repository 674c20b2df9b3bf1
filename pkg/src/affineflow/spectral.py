"""Fourier calculus for periodic samples on the uniform grid theta_j = 2*pi*j/N."""

from functools import lru_cache

import numpy as np


class NonFiniteError(ValueError):
    """Raised when a periodic sample vector contains NaN or inf."""

    def __init__(self, index):
        self.index = int(index)
        super().__init__(f"non-finite sample at grid index {self.index}")


def grid(n):
    return 2.0 * np.pi * np.arange(n) / n


@lru_cache(maxsize=None)
def _wavenumbers(n):
    k = np.arange(n // 2 + 1, dtype=float)
    return k


def _check_finite(f):
    bad = ~np.isfinite(f)
    if bad.any():
        raise NonFiniteError(np.flatnonzero(bad)[0])


def spectral_derivative(f, order=1):
    """Derivative of a periodic sample vector by FFT differentiation.

    Exact for trigonometric polynomials of degree below N/2. For odd orders
    the Nyquist coefficient is discarded, since its derivative is not
    representable on the grid.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    f = np.asarray(f, dtype=float)
    _check_finite(f)
    n = f.shape[-1]
    k = _wavenumbers(n)
    fh = np.fft.rfft(f)
    if order == 1:
        fh = 1j * k * fh
        if n % 2 == 0:
            fh[-1] = 0.0
    else:
        fh = -(k**2) * fh
    return np.fft.irfft(fh, n)


def radius_operator(s):
    """(d^2/dtheta^2 + 1) s, without the finiteness check (hot path)."""
    n = s.shape[-1]
    k = _wavenumbers(n)
    return np.fft.irfft((1.0 - k**2) * np.fft.rfft(s), n)


def fourier_coefficients(f):
    """Real Fourier coefficients (a_k, b_k) with f = a_0 + sum a_k cos + b_k sin."""
    f = np.asarray(f, dtype=float)
    n = f.shape[-1]
    fh = np.fft.rfft(f) / n
    a = 2.0 * fh.real
    b = -2.0 * fh.imag
    a[0] /= 2.0
    b[0] = 0.0
    if n % 2 == 0:
        a[-1] /= 2.0
        b[-1] = 0.0
    return a, b


def trig_interpolate(f, theta, derivative=0):
    """Evaluate the trigonometric interpolant of ``f`` (or a derivative) off-grid.

    Direct Fourier-series summation, O(N * len(theta)). The Nyquist term is
    split symmetrically so the interpolant is real and matches ``f`` on the grid.
    """
    a, b = fourier_coefficients(f)
    theta = np.asarray(theta, dtype=float)
    k = np.arange(a.size, dtype=float)
    phase = np.multiply.outer(theta, k)
    c, s = np.cos(phase), np.sin(phase)
    if derivative == 0:
        return c @ a + s @ b
    if derivative == 1:
        return (-s * k) @ a + (c * k) @ b
    if derivative == 2:
        return (-c * k**2) @ a + (-s * k**2) @ b
    raise ValueError(f"derivative must be 0, 1 or 2, got {derivative}")


def resample(f, m):
    """Values of the trigonometric interpolant of ``f`` on the uniform M-point grid."""
    f = np.asarray(f, dtype=float)
    n = f.shape[-1]
    if m == n:
        return f.copy()
    fh = np.fft.rfft(f)
    if m > n:
        out = np.zeros(m // 2 + 1, dtype=complex)
        out[: fh.size] = fh
        if n % 2 == 0:
            # split Nyquist between +-N/2 so the padded series stays real
            out[n // 2] *= 0.5
    else:
        out = fh[: m // 2 + 1].copy()
        if m % 2 == 0:
            out[-1] = out[-1].real
    return np.fft.irfft(out, m) * (m / n)


def trapezoid(f):
    """Uniform trapezoid rule over one period (spectrally accurate for smooth f)."""
    f = np.asarray(f, dtype=float)
    return 2.0 * np.pi * f.mean(axis=-1)
