"""Per-pixel metric tensor of the image manifold and its derived fields.

A color image embeds the plane into joint space-color coordinates; the
induced metric at each pixel is the symmetric 2x2 matrix

    G = alpha * I + sum_k grad(v_k) grad(v_k)^T,

built here from a gradient field q of shape (M, N, 3, 2).  Only the three
distinct entries are stored.  The determinant satisfies det G >= alpha^2
with equality exactly on flat (zero-gradient) pixels.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np


class MetricField(NamedTuple):
    """Symmetric 2x2 matrix per pixel, stored as its three entries."""

    g11: np.ndarray
    g12: np.ndarray
    g22: np.ndarray


def metric_tensor(q: np.ndarray, alpha: float) -> MetricField:
    """Metric induced by the gradient field q (shape (M, N, 3, 2))."""
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    q1 = q[..., 0]
    q2 = q[..., 1]
    g11 = alpha + np.sum(q1 * q1, axis=-1)
    g12 = np.sum(q1 * q2, axis=-1)
    g22 = alpha + np.sum(q2 * q2, axis=-1)
    return MetricField(g11, g12, g22)


def metric_det(G: MetricField) -> np.ndarray:
    return G.g11 * G.g22 - G.g12 * G.g12


def metric_cofactor(G: MetricField) -> MetricField:
    """Cofactor matrix [[g22, -g12], [-g12, g11]]; G @ cof(G)^T = det(G) I."""
    return MetricField(G.g22, -G.g12, G.g11)


def apply_rows(q: np.ndarray, A: MetricField) -> np.ndarray:
    """Right-multiply each row vector q_k by the symmetric matrix A, pixelwise."""
    q1 = q[..., 0]
    q2 = q[..., 1]
    a11 = A.g11[..., None]
    a12 = A.g12[..., None]
    a22 = A.g22[..., None]
    return np.stack((q1 * a11 + q2 * a12, q1 * a12 + q2 * a22), axis=-1)


def beltrami_flux(q: np.ndarray, G: MetricField) -> np.ndarray:
    """Flux field mu with sqrt(g) * Laplace-Beltrami = div(mu).

    Per channel row, mu_k = sqrt(g) q_k G^{-1} = q_k cof(G) / sqrt(g);
    requires det G > 0, which the construction of G guarantees for alpha > 0.
    """
    g = metric_det(G)
    if np.any(g <= 0):
        raise ValueError("metric determinant must be positive")
    return apply_rows(q, metric_cofactor(G)) / np.sqrt(g)[..., None, None]


def shifted_beltrami_flux(q: np.ndarray, G: MetricField, alpha: float, eps: float) -> np.ndarray:
    """Flux field nu with sqrt(g - alpha^2) * nu_k = q_k cof(G).

    The denominator vanishes on flat pixels; eps > 0 regularizes it.  The
    numerator q_k cof(G) vanishes there too, so nu -> 0 on flat regions.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    root = np.sqrt(np.maximum(metric_det(G) - alpha * alpha, 0.0))
    return apply_rows(q, metric_cofactor(G)) / (root + eps)[..., None, None]
