"""Operator-splitting denoisers for the two elastica regularization models.

Each outer iteration advances the coupled variables (p, lam, G) through
three fractional steps and finishes with an image update:

1. a pixelwise proximal step on the weighted-area term for p, an exact
   exponential relaxation of the metric G toward M(p), and an implicit
   spectral step for the flux field lam;
2. a pixelwise closed-form projection of (p, lam) onto the coupling
   constraint between gradient and flux, followed by another relaxation
   of G;
3. a screened-Poisson fidelity solve producing the next image u (p becomes
   its gradient, lam unchanged), and a final relaxation of G.

Model 1 couples p and lam through sqrt(g) q = mu G; model 2 through
sqrt(g - alpha^2) nu = q cof(G).  The final image is recovered from the
converged gradient field by a mean-constrained Poisson solve.
"""

from __future__ import annotations

from dataclasses import dataclass, replace, field

import numpy as np

from . import energies, grid, metric, spectral


class DivergenceError(RuntimeError):
    """Raised when the iteration produces non-finite values."""


@dataclass(frozen=True)
class SolverConfig:
    """All scalar knobs of one denoising run.

    c1 is the frozen constant of the spectral flux solve; None selects the
    adaptive choice 2*beta*tau*max(coefficient), which makes the frozen
    solve exact whenever the coefficient field is constant.
    """

    model: int
    alpha: float
    beta: float
    eta: float
    tau: float = 0.05
    gamma1: float = 1.0
    gamma2: float = 3.0
    xi1: float = 1e-5
    eps: float = 1e-3
    zeta: float = 1e-5
    max_outer: int = 500
    max_inner: int = 50
    c1: float | None = None
    init: str = "data"
    h: float = 1.0

    def __post_init__(self):
        if self.model not in (1, 2):
            raise ValueError(f"model must be 1 or 2, got {self.model}")
        for name in ("alpha", "eta", "tau", "gamma1", "gamma2", "xi1", "eps", "zeta", "h"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.beta < 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}")
        if self.max_outer < 1 or self.max_inner < 1:
            raise ValueError("iteration caps must be at least 1")
        if self.c1 is not None and self.c1 < 0:
            raise ValueError(f"c1 must be nonnegative, got {self.c1}")
        if self.init not in ("data", "zero"):
            raise ValueError(f"init must be 'data' or 'zero', got {self.init!r}")


def default_config(model: int, **overrides) -> SolverConfig:
    """Per-model default parameters (tuned for noise SD 0.06)."""
    if model == 1:
        cfg = SolverConfig(model=1, alpha=5e-4, beta=50.0, eta=3.0)
    elif model == 2:
        cfg = SolverConfig(model=2, alpha=3e-2, beta=30.0, eta=0.2)
    else:
        raise ValueError(f"model must be 1 or 2, got {model}")
    return replace(cfg, **overrides) if overrides else cfg


_CONFIG_FIELDS = (
    "model", "alpha", "beta", "eta", "tau", "gamma1", "gamma2",
    "xi1", "eps", "zeta", "max_outer", "max_inner", "c1", "init", "h",
)


def config_to_text(cfg: SolverConfig) -> str:
    """Serialize a config as key=value lines."""
    lines = []
    for name in _CONFIG_FIELDS:
        value = getattr(cfg, name)
        if value is None:
            value = "max"
        lines.append(f"{name}={value}")
    return "\n".join(lines) + "\n"


def parse_config_text(text: str) -> dict:
    """Parse key=value lines ('#' starts a comment) into an override dict."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _CONFIG_FIELDS:
            raise ValueError(f"line {lineno}: unknown config key {key!r}")
        if key in ("model", "max_outer", "max_inner"):
            values[key] = int(val)
        elif key == "init":
            values[key] = val
        elif key == "c1":
            values[key] = None if val in ("max", "none", "") else float(val)
        else:
            values[key] = float(val)
    return values


def config_from_text(text: str, base: SolverConfig | None = None) -> SolverConfig:
    """Rebuild a config from key=value lines.

    Unspecified keys fall back to `base` or, failing that, the per-model
    defaults; the text must then contain at least the model number.
    """
    values = parse_config_text(text)
    if base is None:
        model = values.pop("model", None)
        if model is None:
            raise ValueError("config file must set the model when no base config is given")
        return default_config(model, **values)
    return replace(base, **values)


@dataclass
class SolverState:
    """Variables carried between outer iterations."""

    p: np.ndarray          # (M, N, 3, 2) gradient field
    lam: np.ndarray        # (M, N, 3, 2) flux field
    G: metric.MetricField  # relaxed metric
    g: np.ndarray          # det(G)
    u: np.ndarray          # (M, N, 3) current image
    n: int = 0


@dataclass
class IterationHistory:
    """Objective value and relative image change per outer iteration."""

    energies: list = field(default_factory=list)
    rel_changes: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.energies)

    def rows(self):
        """Yield (iteration, energy, rel_change) starting from iteration 1."""
        for i, (e, r) in enumerate(zip(self.energies, self.rel_changes), 1):
            yield i, e, r


def init_state(f: np.ndarray, cfg: SolverConfig) -> SolverState:
    """Initial variables: u0 from the data (or zero), everything else induced."""
    u0 = f.astype(float).copy() if cfg.init == "data" else np.zeros_like(f, dtype=float)
    p0 = grid.grad_fwd(u0, cfg.h)
    G0 = metric.metric_tensor(p0, cfg.alpha)
    g0 = metric.metric_det(G0)
    if cfg.model == 1:
        lam0 = metric.beltrami_flux(p0, G0)
    else:
        lam0 = metric.shifted_beltrami_flux(p0, G0, cfg.alpha, cfg.eps)
    return SolverState(p=p0, lam=lam0, G=G0, g=g0, u=u0)


def prox_weighted_area(p_prev: np.ndarray, s: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    """Pixelwise proximal step: argmin |q - p|^2/(2 tau) + s * area density(q).

    The area density is sqrt(det M(q)) for model 1 and the shifted
    sqrt(det M(q) - alpha^2) (eps-regularized) for model 2.  Solved by a
    fixed-point sweep that freezes the metric entries of the previous
    iterate; sweeps stop when the sup-norm update drops below xi1.
    """
    p1 = p_prev[..., 0]
    p2 = p_prev[..., 1]
    st = (s * cfg.tau)[..., None]  # broadcast over channels
    q = p_prev.copy()
    for _ in range(cfg.max_inner):
        q1 = q[..., 0]
        q2 = q[..., 1]
        G = metric.metric_tensor(q, cfg.alpha)
        m = metric.metric_det(G)
        g11 = G.g11[..., None]
        g12 = G.g12[..., None]
        g22 = G.g22[..., None]
        if cfg.model == 1:
            root = np.sqrt(m)[..., None]
            q1_new = (root * p1 + st * g12 * q2) / (root + st * g22)
            q2_new = (root * p2 + st * g12 * q1) / (root + st * g11)
        else:
            c = st / (np.sqrt(np.maximum(m - cfg.alpha * cfg.alpha, 0.0)) + cfg.eps)[..., None]
            q1_new = (p1 + c * g12 * q2) / (1.0 + c * g22)
            q2_new = (p2 + c * g12 * q1) / (1.0 + c * g11)
        q_new = np.stack((q1_new, q2_new), axis=-1)
        delta = float(np.max(np.abs(q_new - q)))
        q = q_new
        if delta < cfg.xi1:
            break
    return q


def relax_metric(
    G: metric.MetricField, p: np.ndarray, cfg: SolverConfig
) -> tuple[metric.MetricField, np.ndarray]:
    """Exact relaxation G <- e^{-gamma2 tau} G + (1 - e^{-gamma2 tau}) M(p)."""
    w = float(np.exp(-cfg.gamma2 * cfg.tau))
    Mp = metric.metric_tensor(p, cfg.alpha)
    G_new = metric.MetricField(
        w * G.g11 + (1.0 - w) * Mp.g11,
        w * G.g12 + (1.0 - w) * Mp.g12,
        w * G.g22 + (1.0 - w) * Mp.g22,
    )
    return G_new, metric.metric_det(G_new)


def flux_coefficient(g: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    """Spatial coefficient of the implicit flux solve: sqrt(g) or its shift."""
    if cfg.model == 1:
        return np.sqrt(g)
    return np.sqrt(np.maximum(g - cfg.alpha * cfg.alpha, 0.0))


def update_flux(lam_prev: np.ndarray, g: np.ndarray, cfg: SolverConfig) -> np.ndarray:
    """Implicit step of gamma1*lam - 2*beta*tau*grad(d * div(lam)) = gamma1*lam_prev.

    The variable coefficient d is frozen at the constant c1 on the left,
    moving the difference (2*beta*tau*d - c1) * div(lam_prev) to the right,
    so each channel reduces to one constant-coefficient spectral solve.
    """
    d = flux_coefficient(g, cfg)
    scale = 2.0 * cfg.beta * cfg.tau
    c1 = cfg.c1 if cfg.c1 is not None else scale * float(np.max(d))
    coeff = scale * d - c1
    out = np.empty_like(lam_prev)
    for k in range(lam_prev.shape[2]):
        div_l = grid.div_bwd(lam_prev[:, :, k, :], cfg.h)
        w = cfg.gamma1 * lam_prev[:, :, k, :] + grid.grad_fwd(coeff * div_l, cfg.h)
        out[:, :, k, :] = spectral.solve_block2x2(
            w[..., 0], w[..., 1], cfg.gamma1, c1, cfg.h
        )
    return out


_SINGULAR_TOL = 1e-14


def project_metric_coupling(
    p: np.ndarray,
    lam: np.ndarray,
    G: metric.MetricField,
    g: np.ndarray,
    gamma1: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Closest point of (p, lam) on the constraint sqrt(g) q = mu G.

    Minimizes |q - p|^2 + gamma1 |mu - lam|^2 per pixel and channel; the two
    Lagrange multipliers solve a 2x2 system whose matrix depends only on the
    pixel metric.  Singular pixels (cannot occur for alpha > 0) are left
    unchanged.
    """
    g11, g12, g22 = G.g11, G.g12, G.g22
    root = np.sqrt(g)
    a1 = -(g11 * g11 + g12 * g12) / gamma1 - g
    a2 = -(g11 * g12 + g12 * g22) / gamma1
    b2 = -(g12 * g12 + g22 * g22) / gamma1 - g
    det = a1 * b2 - a2 * a2
    safe = np.abs(det) > _SINGULAR_TOL
    det = np.where(safe, det, 1.0)[..., None]
    scale = np.where(safe, 1.0, 0.0)[..., None]

    lam1, lam2 = lam[..., 0], lam[..., 1]
    p1, p2 = p[..., 0], p[..., 1]
    g11c, g12c, g22c = g11[..., None], g12[..., None], g22[..., None]
    rootc = root[..., None]
    a1c, a2c, b2c = a1[..., None], a2[..., None], b2[..., None]

    a3 = lam1 * g11c + lam2 * g12c - rootc * p1
    b3 = lam1 * g12c + lam2 * g22c - rootc * p2
    s1 = scale * (a2c * b3 - b2c * a3) / det
    s2 = scale * (a3 * a2c - a1c * b3) / det

    lam_new = np.stack(
        (lam1 - (g11c * s1 + g12c * s2) / gamma1,
         lam2 - (g12c * s1 + g22c * s2) / gamma1),
        axis=-1,
    )
    p_new = np.stack((p1 + rootc * s1, p2 + rootc * s2), axis=-1)
    return p_new, lam_new


def project_shifted_coupling(
    p: np.ndarray,
    lam: np.ndarray,
    G: metric.MetricField,
    g: np.ndarray,
    gamma1: float,
    alpha: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Closest point of (p, lam) on the constraint sqrt(g - alpha^2) nu = q cof(G).

    Same Lagrangian construction as project_metric_coupling.  On flat pixels
    the shift root vanishes and the formulas degenerate gracefully to the
    exact limit (q -> 0, nu unchanged); the multiplier matrix stays
    nonsingular for alpha > 0.
    """
    g11, g12, g22 = G.g11, G.g12, G.g22
    gm = np.maximum(g - alpha * alpha, 0.0)
    w = np.sqrt(gm)
    a1 = -(g22 * g22 + g12 * g12) - gm / gamma1
    a2 = g12 * (g11 + g22)
    b2 = -(g11 * g11 + g12 * g12) - gm / gamma1
    det = a1 * b2 - a2 * a2
    safe = np.abs(det) > _SINGULAR_TOL
    det = np.where(safe, det, 1.0)[..., None]
    scale = np.where(safe, 1.0, 0.0)[..., None]

    lam1, lam2 = lam[..., 0], lam[..., 1]
    p1, p2 = p[..., 0], p[..., 1]
    g11c, g12c, g22c = g11[..., None], g12[..., None], g22[..., None]
    wc = w[..., None]
    a1c, a2c, b2c = a1[..., None], a2[..., None], b2[..., None]

    a3 = g22c * p1 - g12c * p2 - wc * lam1
    b3 = -g12c * p1 + g11c * p2 - wc * lam2
    s1 = scale * (a2c * b3 - a3 * b2c) / det
    s2 = scale * (a3 * a2c - a1c * b3) / det

    p_new = np.stack(
        (p1 - s1 * g22c + s2 * g12c, p2 + s1 * g12c - s2 * g11c), axis=-1
    )
    lam_new = np.stack(
        (lam1 + s1 * wc / gamma1, lam2 + s2 * wc / gamma1), axis=-1
    )
    return p_new, lam_new


def fidelity_step(
    p: np.ndarray, f: np.ndarray, cfg: SolverConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Screened-Poisson image update: (tau - eta*Lap) u = -eta*div(p) + tau*f.

    Returns the new image and its forward gradient.
    """
    h2 = cfg.h * cfg.h
    rhs = -cfg.eta * h2 * grid.div_bwd(p, cfg.h) + cfg.tau * h2 * f
    u = np.empty_like(f, dtype=float)
    for k in range(f.shape[2]):
        u[:, :, k] = spectral.solve_helmholtz(rhs[:, :, k], cfg.tau, cfg.eta, cfg.h)
    return u, grid.grad_fwd(u, cfg.h)


def reconstruct_image(p: np.ndarray, f: np.ndarray, h: float = 1.0) -> np.ndarray:
    """Recover the image whose gradient is closest to p, channel means from f."""
    u = np.empty_like(f, dtype=float)
    for k in range(f.shape[2]):
        u[:, :, k] = spectral.solve_poisson_mean(
            grid.div_bwd(p[:, :, k, :], h), float(np.mean(f[:, :, k])), h
        )
    return u


def denoise(f: np.ndarray, cfg: SolverConfig) -> tuple[np.ndarray, IterationHistory]:
    """Run the full operator-splitting iteration on a noisy image.

    f is an (M, N, 3) array, nominally in [0, 1].  Iterations stop when the
    relative image change drops to cfg.zeta or cfg.max_outer is reached.
    Returns the denoised image and the per-iteration history.

    Raises DivergenceError if non-finite values appear (the diagnostic
    names the offending iteration).
    """
    f = np.asarray(f, dtype=float)
    if f.ndim != 3 or f.shape[2] != 3:
        raise ValueError(f"expected an (M, N, 3) image, got shape {f.shape}")
    if not np.all(np.isfinite(f)):
        raise ValueError("input image contains non-finite values")

    state = init_state(f, cfg)
    history = IterationHistory()
    u_prev = state.u

    for n in range(1, cfg.max_outer + 1):
        # Step 1: proximal area step, metric relaxation, implicit flux solve.
        div_lam = grid.div_bwd(state.lam, cfg.h)  # (M, N, 3)
        s = 1.0 + cfg.beta * np.sum(div_lam * div_lam, axis=-1)
        p13 = prox_weighted_area(state.p, s, cfg)
        G13, g13 = relax_metric(state.G, p13, cfg)
        lam13 = update_flux(state.lam, g13, cfg)

        # Step 2: restore the gradient/flux coupling, relax the metric again.
        if cfg.model == 1:
            p23, lam23 = project_metric_coupling(p13, lam13, G13, g13, cfg.gamma1)
        else:
            p23, lam23 = project_shifted_coupling(
                p13, lam13, G13, g13, cfg.gamma1, cfg.alpha
            )
        G23, _ = relax_metric(G13, p23, cfg)

        # Step 3: fidelity solve; lam is carried over unchanged.
        u_new, p_new = fidelity_step(p23, f, cfg)
        G_new, g_new = relax_metric(G23, p_new, cfg)

        if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(lam23))):
            raise DivergenceError(f"solver diverged: non-finite values at iteration {n}")

        energy = energies.model_energy(
            u_new, f, cfg.model, cfg.alpha, cfg.beta, cfg.eta, cfg.eps, cfg.h
        )
        denom = max(float(np.linalg.norm(u_prev)), 1e-12)
        rel = float(np.linalg.norm(u_new - u_prev)) / denom
        history.energies.append(energy)
        history.rel_changes.append(rel)

        state = SolverState(p=p_new, lam=lam23, G=G_new, g=g_new, u=u_new, n=n)
        u_prev = u_new
        if rel <= cfg.zeta:
            break

    return reconstruct_image(state.p, f, cfg.h), history
