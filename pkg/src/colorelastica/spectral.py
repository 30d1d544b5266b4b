"""FFT solvers for the periodic elliptic subproblems.

All three solvers diagonalize a constant-coefficient difference operator in
the discrete Fourier basis: forward transform, divide by the operator symbol
frequency by frequency, inverse transform, keep the real part.  The DFT is
the unnormalized numpy convention (inverse carries the 1/MN factor); since
every solve is a pointwise division the normalization cancels.

The defining contract of each solver is its residual: applying the matching
difference stencil from :mod:`colorelastica.grid` to the output reproduces
the right-hand side.
"""

from __future__ import annotations

import numpy as np

from . import grid


def frequency_angles(m: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Angular frequencies 2*pi*k/M as a broadcastable (M,1), (1,N) pair."""
    zi = 2.0 * np.pi * np.arange(m) / m
    zj = 2.0 * np.pi * np.arange(n) / n
    return zi[:, None], zj[None, :]


def _shift_symbol(z: np.ndarray, sign: int) -> np.ndarray:
    # Symbol of the shift v(i,j) -> v(i +/- 1, j): cos z +/- i sin z.
    return np.cos(z) + 1j * sign * np.sin(z)


def solve_helmholtz(rhs: np.ndarray, tau: float, eta: float, h: float = 1.0) -> np.ndarray:
    """Solve (tau*h^2*I - eta*h^2*Lap) u = rhs on the periodic grid.

    Lap is the five-point Laplacian div_bwd(grad_fwd(.)); the symbol is
    b = tau*h^2 + 4*eta - 2*eta*cos(zi) - 2*eta*cos(zj), strictly positive
    for tau, eta > 0.
    """
    if tau <= 0 or eta <= 0:
        raise ValueError(f"tau and eta must be positive, got tau={tau}, eta={eta}")
    m, n = rhs.shape
    zi, zj = frequency_angles(m, n)
    b = tau * h * h + 4.0 * eta - 2.0 * eta * np.cos(zi) - 2.0 * eta * np.cos(zj)
    return np.real(np.fft.ifft2(np.fft.fft2(rhs) / b))


def solve_block2x2(
    w1: np.ndarray, w2: np.ndarray, gamma1: float, c1: float, h: float = 1.0
) -> np.ndarray:
    """Solve the coupled system (gamma1*I - c1*grad_fwd(div_bwd(.))) lam = (w1, w2).

    Each frequency decouples into a 2x2 complex system inverted by Cramer's
    rule.  The operator is positive definite for gamma1 > 0, c1 >= 0 (the
    grad/div pair is a negative semidefinite square), so the per-frequency
    determinant never vanishes.

    Returns the solution as an (M, N, 2) vector field.
    """
    if gamma1 <= 0:
        raise ValueError(f"gamma1 must be positive, got {gamma1}")
    if c1 < 0:
        raise ValueError(f"c1 must be nonnegative, got {c1}")
    if w1.shape != w2.shape:
        raise ValueError(f"component shape mismatch: {w1.shape} vs {w2.shape}")
    m, n = w1.shape
    zi, zj = frequency_angles(m, n)
    h2 = h * h

    # Symbols of d1p*d1m etc.; (S+ - I)(I - S-) has symbol 2 cos z - 2.
    a11 = gamma1 - 2.0 * c1 * (np.cos(zi) - 1.0) / h2
    a22 = gamma1 - 2.0 * c1 * (np.cos(zj) - 1.0) / h2
    a12 = -c1 * (_shift_symbol(zi, +1) - 1.0) * (1.0 - _shift_symbol(zj, -1)) / h2
    a21 = -c1 * (_shift_symbol(zj, +1) - 1.0) * (1.0 - _shift_symbol(zi, -1)) / h2

    det = a11 * a22 - a12 * a21
    assert np.min(np.abs(det)) > 0.0, "singular frequency block; gamma1/c1 out of range"

    f1 = np.fft.fft2(w1)
    f2 = np.fft.fft2(w2)
    lam1 = np.real(np.fft.ifft2((a22 * f1 - a12 * f2) / det))
    lam2 = np.real(np.fft.ifft2((-a21 * f1 + a11 * f2) / det))
    return np.stack((lam1, lam2), axis=-1)


def solve_poisson_mean(rhs: np.ndarray, mean_value: float, h: float = 1.0) -> np.ndarray:
    """Solve div_bwd(grad_fwd(v)) = rhs with the mean of v pinned.

    rhs must have (numerically) zero total mass, which holds exactly when it
    is a backward divergence.  The zero frequency of the Laplacian symbol is
    replaced by the mean constraint.
    """
    total = float(np.sum(rhs))
    if abs(total) > 1e-8 * max(1.0, float(np.sum(np.abs(rhs)))):
        raise ValueError(f"right-hand side has nonzero mass {total:g}; Poisson problem is inconsistent")
    m, n = rhs.shape
    zi, zj = frequency_angles(m, n)
    sym = (2.0 * np.cos(zi) + 2.0 * np.cos(zj) - 4.0) / (h * h)
    sym[0, 0] = 1.0  # placeholder, overwritten by the mean constraint
    f = np.fft.fft2(rhs) / sym
    f[0, 0] = m * n * mean_value
    return np.real(np.fft.ifft2(f))
