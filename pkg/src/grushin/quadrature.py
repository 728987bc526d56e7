"""Quadrature rules and a vectorised adaptive panel integrator.

One-dimensional rules are described by the ``Quadrature1D`` container used
throughout the package: uniform trapezoid grids for field sampling and
Gauss rules for inner products and oscillatory integrals.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite import hermgauss
from scipy.special import roots_legendre

from .errors import QuadratureError


@dataclass(frozen=True)
class Quadrature1D:
    """Nodes-and-weights description of a one-dimensional rule.

    ``kind`` is one of ``"uniform-trapezoid"`` or ``"gauss-hermite"``.
    Nodes are strictly increasing, weights strictly positive.
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: str

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.ndim != 1 or weights.shape != nodes.shape:
            raise ValueError("nodes and weights must be 1-D arrays of equal length")
        if nodes.size > 1 and not np.all(np.diff(nodes) > 0):
            raise ValueError("nodes must be strictly increasing")
        if np.any(weights <= 0):
            raise ValueError("weights must be strictly positive")

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def spacing(self) -> float:
        """Node spacing; only meaningful for uniform rules."""
        return float(self.nodes[1] - self.nodes[0]) if self.n > 1 else 0.0

    @property
    def extent(self) -> float:
        return float(max(abs(self.nodes[0]), abs(self.nodes[-1])))


def uniform_trapezoid(n: int, extent: float) -> Quadrature1D:
    """Uniform rule with ``n`` nodes on [-extent, extent], trapezoid weights."""
    if n < 2:
        raise ValueError("need at least 2 nodes")
    nodes = np.linspace(-extent, extent, n)
    h = nodes[1] - nodes[0]
    weights = np.full(n, h)
    weights[0] = weights[-1] = h / 2
    return Quadrature1D(nodes, weights, "uniform-trapezoid")


@lru_cache(maxsize=64)
def _hermgauss_cached(n: int):
    x, w = hermgauss(n)
    return x, w


def gauss_hermite_rule(n: int) -> Quadrature1D:
    """n-point Gauss-Hermite rule for the weight e^{-x^2}."""
    x, w = _hermgauss_cached(int(n))
    return Quadrature1D(x.copy(), w.copy(), "gauss-hermite")


@lru_cache(maxsize=64)
def _gauss_legendre_cached(n: int):
    x, w = roots_legendre(n)
    return x, w


def gauss_legendre(n: int, a: float, b: float):
    """Gauss-Legendre nodes and weights on [a, b]."""
    x, w = _gauss_legendre_cached(int(n))
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


def adaptive_integrate(f, a: float, b: float, rtol: float = 1e-9,
                       initial_edges=None, max_panels: int = 20000,
                       order: int = 15):
    """Adaptive composite Gauss-Legendre integration of a vectorised integrand.

    ``f`` must accept an array of evaluation points and return an array of
    values.  Panels whose bisection estimate disagrees with the single-panel
    estimate are split until the global error estimate falls below
    ``rtol`` times the integral estimate.

    Returns ``(value, err_estimate)``; raises ``QuadratureError`` on
    non-convergence.
    """
    if initial_edges is None:
        edges = np.array([a, b], dtype=float)
    else:
        edges = np.unique(np.clip(np.asarray(initial_edges, dtype=float), a, b))
        if edges[0] > a:
            edges = np.concatenate([[a], edges])
        if edges[-1] < b:
            edges = np.concatenate([edges, [b]])

    xg, wg = _gauss_legendre_cached(order)

    def panel_values(lo, hi):
        # lo, hi: arrays of panel ends; returns per-panel GL estimates
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        pts = mid[:, None] + half[:, None] * xg[None, :]
        vals = f(pts.ravel()).reshape(pts.shape)
        return half * (vals @ wg)

    lo = edges[:-1].copy()
    hi = edges[1:].copy()
    coarse = panel_values(lo, hi)

    done_vals = []
    done_errs = []
    total_hint = float(np.sum(np.abs(coarse))) + 1e-300

    for _ in range(60):
        mid = 0.5 * (lo + hi)
        left = panel_values(lo, mid)
        right = panel_values(mid, hi)
        fine = left + right
        err = np.abs(fine - coarse)
        # accept panels whose local error is a small share of the running total
        accept = err <= rtol * total_hint * 0.05 * np.maximum(
            (hi - lo) / (b - a), 1e-6)
        accept |= err <= 1e-3 * rtol * total_hint
        done_vals.append(fine[accept])
        done_errs.append(err[accept])
        keep = ~accept
        if not np.any(keep):
            break
        lo = np.concatenate([lo[keep], mid[keep]])
        hi = np.concatenate([mid[keep], hi[keep]])
        coarse = np.concatenate([left[keep], right[keep]])
        if lo.size > max_panels:
            raise QuadratureError(
                f"adaptive quadrature exceeded {max_panels} panels on "
                f"[{a:g}, {b:g}]")
        total_hint = float(sum(np.sum(np.abs(v)) for v in done_vals)
                           + np.sum(np.abs(coarse))) + 1e-300
    else:
        raise QuadratureError("adaptive quadrature did not converge")

    value = float(sum(np.sum(v) for v in done_vals))
    err = float(sum(np.sum(e) for e in done_errs))
    if err > rtol * max(abs(value), 1e-300) * 10:
        raise QuadratureError(
            f"quadrature error estimate {err:.3e} exceeds tolerance for "
            f"value {value:.6e}")
    return value, err
