"""Mixed Lebesgue norms, admissibility, and scaling-exponent fits.

The restriction estimate is stated between the mixed norms

    ||f||_{L^q_x L^p_t} = ( int_{R^{d2}} ( int_{R^{d1}} |f|^q dx )^{p/q} dt )^{1/p}

(max over the grid when an exponent is infinite) with the mu-power

    e(p, q, r) = 2 d2 (1/p - 1/2) + (d1/2)(1/q - 1/r) - 1

on the admissible range 1 <= p <= 2(d2+1)/(d2+3), 1 <= q <= 2 <= r <= inf.
Verification fits log-log slopes of measured norms against e(p, q, r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AdmissibilityError
from .fields import SampledField
from .spectral import build_basis, grid_points, grid_weights, hermite_grid

__all__ = [
    "MixedNormParams", "mixed_norm", "predicted_exponent",
    "ExponentFitReport", "fit_scaling_exponent", "projection_norm_estimate",
    "lp_norm",
]

INF = float("inf")


@dataclass(frozen=True)
class MixedNormParams:
    """Exponent triple (q, p, r) of the restriction estimate."""

    q: float
    p: float
    r: float

    @property
    def p_prime(self) -> float:
        if self.p == 1:
            return INF
        if self.p == INF:
            return 1.0
        return self.p / (self.p - 1.0)

    def admissibility_failure(self, d2: int) -> str | None:
        """The violated constraint, or None when (p, q, r) is admissible."""
        p_top = 2.0 * (d2 + 1) / (d2 + 3)
        if not 1.0 <= self.p <= p_top:
            return (f"p={self.p:g} outside [1, 2(d2+1)/(d2+3)] = "
                    f"[1, {p_top:g}] at d2={d2}")
        if not 1.0 <= self.q <= 2.0:
            return f"q={self.q:g} outside [1, 2]"
        if not 2.0 <= self.r:
            return f"r={self.r:g} below 2"
        return None

    def admissible(self, d2: int) -> bool:
        return self.admissibility_failure(d2) is None


def predicted_exponent(params: MixedNormParams, d1: int, d2: int) -> float:
    """The mu-exponent 2 d2 (1/p - 1/2) + (d1/2)(1/q - 1/r) - 1."""
    fail = params.admissibility_failure(d2)
    if fail is not None:
        raise AdmissibilityError(fail)
    inv_r = 0.0 if params.r == INF else 1.0 / params.r
    return (2.0 * d2 * (1.0 / params.p - 0.5)
            + 0.5 * d1 * (1.0 / params.q - inv_r) - 1.0)


def _power_mean(weighted_abs_pow_sum: np.ndarray, p: float) -> np.ndarray:
    return weighted_abs_pow_sum ** (1.0 / p)


def mixed_norm(f: SampledField, q: float, p: float) -> float:
    """Quadrature realization of ||f||_{L^q_x L^p_t}, inner x first."""
    if q < 1 or p < 1:
        raise ValueError("exponents must lie in [1, inf]")
    mag = np.abs(f.values).reshape(f.n_x, f.n_t)
    xw = f.x_weights()
    if q == INF:
        inner = mag.max(axis=0)
    else:
        inner = ((mag ** q) * xw[:, None]).sum(axis=0) ** (1.0 / q)
    if p == INF:
        return float(inner.max())
    return float(((inner ** p).sum() * f.t_weight()) ** (1.0 / p))


def lp_norm(values, weight: float, p: float) -> float:
    """Plain L^p norm of flat samples with uniform quadrature weight."""
    v = np.abs(np.asarray(values)).ravel()
    if p == INF:
        return float(v.max())
    return float(((v ** p).sum() * weight) ** (1.0 / p))


@dataclass(frozen=True)
class ExponentFitReport:
    """Least-squares log-log fit of norm samples against mu."""

    mu_samples: tuple
    norm_samples: tuple
    slope: float
    intercept: float
    residual: float          # rms of log-residuals
    predicted: float | None
    slope_tol: float
    residual_cap: float

    @property
    def verdict(self) -> bool | None:
        if self.predicted is None:
            return None
        return (abs(self.slope - self.predicted) <= self.slope_tol
                and self.residual <= self.residual_cap)


def fit_scaling_exponent(mus, norms, predicted: float | None = None,
                         slope_tol: float = 0.05,
                         residual_cap: float = 0.05) -> ExponentFitReport:
    """Slope of log(norm) vs log(mu); the intercept absorbs constants."""
    mus = np.asarray(mus, dtype=float)
    norms = np.asarray(norms, dtype=float)
    if mus.size < 4:
        raise ValueError("need at least 4 samples for a slope fit")
    if np.any(np.diff(mus) <= 0):
        raise ValueError("mu samples must be strictly increasing")
    if np.any(norms <= 0):
        raise ValueError("norms must be positive for a log-log fit")
    lx, ly = np.log(mus), np.log(norms)
    coef = np.polyfit(lx, ly, 1)
    resid = ly - np.polyval(coef, lx)
    rms = float(np.sqrt(np.mean(resid ** 2)))
    return ExponentFitReport(tuple(mus), tuple(norms), float(coef[0]),
                             float(coef[1]), rms, predicted,
                             slope_tol, residual_cap)


@dataclass(frozen=True)
class ProjectionNormReport:
    k: int
    a: float
    q: float
    max_ratio: float
    normalized_ratio: float   # ratio / (|a|^{(d1/2)(1/q-1/2)} (2k+d1)^{((d1-1)/2)(1/q-1/2)})
    n_trials: int


def _trial_bumps(pts: np.ndarray, extent: float, a: float, k: int,
                 trials: int, rng) -> np.ndarray:
    """Randomized complex Gaussian bumps sampled on the grid points."""
    d1 = pts.shape[1]
    cols = []
    for _ in range(trials):
        center = rng.uniform(-0.5 * extent, 0.5 * extent, size=d1)
        width = rng.uniform(0.3, 2.0) / math.sqrt(abs(a))
        freq = rng.uniform(-1.0, 1.0, size=d1) * math.sqrt(abs(a) * (2 * k + d1))
        r2 = ((pts - center) ** 2).sum(axis=1)
        cols.append(np.exp(-r2 / (2 * width * width) + 1j * (pts @ freq)))
    return np.stack(cols, axis=-1)


def projection_norm_estimate(k: int, a: float, q: float, trials: int = 64,
                             d1: int = 1, seed: int = 0,
                             grid=None) -> ProjectionNormReport:
    """Largest measured ||P_k(a) phi||_2 / ||phi||_q over a trial ensemble.

    Trials are randomized Gaussian bumps plus deterministic extremizer
    candidates: the level eigenfunctions (sharp at q = 2) and, for q < 2,
    near-delta bumps at the kernel's diagonal maximum (the exact
    extremizers of the q = 1 ratio).
    """
    if not 1 <= q <= 2:
        raise ValueError("q must lie in [1, 2]")
    if grid is None:
        grid = hermite_grid(k, a, d1)
    basis = build_basis(a, d1, k, grid)
    pts = grid_points(grid)
    w = grid_weights(grid)
    extent = grid[0].extent
    rng = np.random.default_rng(seed)
    cand = [_trial_bumps(pts, extent, a, k, trials, rng)]
    v = basis.level_matrix(k)
    cand.append(v.T.astype(complex))
    if q < 2:
        diag = (v * v).sum(axis=0)
        top = np.argsort(diag)[-8:]
        eye = np.zeros((pts.shape[0], top.size), dtype=complex)
        h = grid[0].spacing
        for j, i in enumerate(top):
            r2 = ((pts - pts[i]) ** 2).sum(axis=1)
            eye[:, j] = np.exp(-r2 / (2 * (0.75 * h) ** 2))
        cand.append(eye)
    phi = np.concatenate(cand, axis=1)
    proj = basis.project(k, phi)
    out_l2 = np.sqrt(((np.abs(proj) ** 2) * w[:, None]).sum(axis=0))
    if q == INF:
        in_q = np.abs(phi).max(axis=0)
    else:
        in_q = (((np.abs(phi) ** q) * w[:, None]).sum(axis=0)) ** (1.0 / q)
    ratios = out_l2 / in_q
    bound = (abs(a) ** (0.5 * d1 * (1.0 / q - 0.5))
             * (2 * k + d1) ** (0.5 * (d1 - 1) * (1.0 / q - 0.5)))
    best = float(ratios.max())
    return ProjectionNormReport(k, float(a), float(q), best, best / bound,
                                phi.shape[1])
