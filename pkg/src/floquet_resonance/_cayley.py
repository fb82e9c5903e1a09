"""Compiled Crank-Nicolson (Cayley) kernels for ``A = I + i a H``, H real tridiagonal.

``A`` has positive-definite Hermitian part, so elimination without pivoting
is stable.  Columns of ``psi`` are independent states sharing one step.  Entries below
``TINY`` are flushed to zero: the exponentially small far field otherwise
fills with subnormal floats, which are two orders of magnitude slower.
"""
import numba
import numpy as np

TINY = 1e-150


@numba.njit(inline="always")
def _flush(z):
    if abs(z.real) < TINY and abs(z.imag) < TINY:
        return 0j
    return z


@numba.njit(cache=True, nogil=True)
def factor(diag, off, a):
    """Thomas coefficients of ``I + i a tridiag(off, diag, off)``."""
    n = diag.shape[0]
    cp = np.empty(n, np.complex128)
    inv = np.empty(n, np.complex128)
    o = 1j * a * off
    b = 1.0 + 1j * a * diag[0]
    inv[0] = 1.0 / b
    cp[0] = o * inv[0]
    for j in range(1, n):
        b = 1.0 + 1j * a * diag[j] - o * cp[j - 1]
        inv[j] = 1.0 / b
        cp[j] = o * inv[j]
    return cp, inv


@numba.njit(cache=True, nogil=True)
def apply(psi, diag, off, a, cp, inv):
    """``(I + i a H)^{-1} (I - i a H) psi`` for ``psi`` of shape (n, k)."""
    n, k = psi.shape
    o = 1j * a * off
    out = np.empty_like(psi)
    g = 1.0 - 1j * a * diag[0]
    for c in range(k):
        out[0, c] = (g * psi[0, c] - o * psi[1, c]) * inv[0]
    for j in range(1, n - 1):
        g = 1.0 - 1j * a * diag[j]
        for c in range(k):
            r = g * psi[j, c] - o * (psi[j - 1, c] + psi[j + 1, c])
            out[j, c] = _flush((r - o * out[j - 1, c]) * inv[j])
    j = n - 1
    g = 1.0 - 1j * a * diag[j]
    for c in range(k):
        out[j, c] = (g * psi[j, c] - o * psi[j - 1, c] - o * out[j - 1, c]) * inv[j]
    for j in range(n - 2, -1, -1):
        for c in range(k):
            out[j, c] = _flush(out[j, c] - cp[j] * out[j + 1, c])
    return out
