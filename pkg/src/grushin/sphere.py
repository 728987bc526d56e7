"""Quadrature on the unit sphere S^{d2-1} and sphere-measure transforms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quadrature import gauss_legendre

SURFACE_MEASURE = {1: 2.0, 2: 2.0 * np.pi, 3: 4.0 * np.pi}


@dataclass(frozen=True)
class SphereRule:
    """Points on S^{d2-1} with positive weights summing to the surface measure.

    For d2 = 3 the product structure (polar cosines z with weights wz,
    equispaced azimuths phi with common weight wphi) is kept alongside the
    flat point list; tensor contractions against t-grids factor over it.
    """

    d2: int
    points: np.ndarray   # (n, d2)
    weights: np.ndarray  # (n,)
    product: tuple | None = None   # (z, wz, phi, wphi) when d2 == 3

    @property
    def n(self) -> int:
        return self.points.shape[0]


def sphere_rule(d2: int, order: int = 16) -> SphereRule:
    """Quadrature rule for int_{S^{d2-1}} . dsigma.

    d2 = 1: the two points +-1 with unit weights.
    d2 = 2: ``order`` equispaced points on the circle, weights 2 pi / n.
    d2 = 3: Gauss-Legendre in the polar cosine (order points) times
            2*order equispaced azimuths; exact for spherical harmonics
            of degree < 2*order.
    """
    if d2 == 1:
        return SphereRule(1, np.array([[-1.0], [1.0]]), np.array([1.0, 1.0]))
    if d2 == 2:
        n = max(int(order), 4)
        th = 2 * np.pi * np.arange(n) / n
        pts = np.stack([np.cos(th), np.sin(th)], axis=-1)
        return SphereRule(2, pts, np.full(n, 2 * np.pi / n))
    if d2 == 3:
        m = max(int(order), 2)
        z, wz = gauss_legendre(m, -1.0, 1.0)
        nphi = 2 * m
        phi = 2 * np.pi * np.arange(nphi) / nphi
        sin_th = np.sqrt(1.0 - z ** 2)
        pts = np.stack([
            np.outer(sin_th, np.cos(phi)).ravel(),
            np.outer(sin_th, np.sin(phi)).ravel(),
            np.repeat(z, nphi),
        ], axis=-1)
        w = np.repeat(wz, nphi) * (2 * np.pi / nphi)
        return SphereRule(3, pts, w, product=(z, wz, phi, 2 * np.pi / nphi))
    raise ValueError(f"unsupported sphere dimension d2={d2} (need 1, 2 or 3)")


def sphere_transform(h_hat, radius: float, t_pts, rule: SphereRule) -> np.ndarray:
    """The convolution h * FT(dsigma_radius) evaluated at t points:

        r^{d2-1} int_{S^{d2-1}} h_hat(r eps) e^{-i r t.eps} dsigma(eps),

    with h_hat a callable on R^{d2} (the e^{+i lambda t} transform of h).
    """
    t = np.atleast_2d(np.asarray(t_pts, dtype=float))
    lam = radius * rule.points
    hv = np.asarray(h_hat(lam), dtype=complex)
    phases = np.exp(-1j * radius * (t @ rule.points.T))
    return radius ** (rule.d2 - 1) * (phases @ (rule.weights * hv))


def sphere_trace(h_hat, rho: float, rule: SphereRule) -> float:
    """( int_{S^{d2-1}} |h_hat(rho eps)|^2 dsigma )^{1/2} by the rule."""
    hv = np.abs(np.asarray(h_hat(rho * rule.points))) ** 2
    return float(np.sqrt((rule.weights * hv).sum()))
