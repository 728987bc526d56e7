"""Cap-concentrated test fields and the closed-form restriction identity.

The construction takes a radial cutoff psi (1 near 1/d1, 0 near 0), a
Schwartz profile h on R^{d2}, and an exponent n, and builds

    f(x,t) = int psi(|lam|) h_hat(lam) e^{-|lam| |x|^2 / 2}
             e^{-i lam.t} |lam|^n dlam .

Every |lam|-slice of f is the ground state of the scaled oscillator at
matching scale, so the restriction operator sees pure level-0 content and
collapses to the closed form

    P_1 f(x,t) = d1^{-d1-d2} e^{-|x|^2/(2 d1)}
                 int_{S^{d2-1}} h_hat(eps/d1) e^{-i t.eps/d1} dsigma(eps)

at mu = 1 when n = d1 (the exponent the polar-coordinate route fixes).
The factorization f = h *_t g holds for every n when g is built from the
same |lam|^n integrand; matching g against its stated xi-transform
phi(a) e^{-|xi|^2/(2|a|)} instead forces n = d1/2 together with a global
(2 pi)-type constant, which the calibration below measures and records
rather than hard-codes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .errors import UsageError
from .fields import (PartialSpectrum, SampledField, field_norm2,
                     inverse_partial_fourier, partial_fourier_t,
                     t_axes_for, uniform_x_axes)
from .quadrature import gauss_legendre
from .sphere import SphereRule, sphere_rule, sphere_transform

__all__ = [
    "PlateauBump", "KnappInputs", "KnappBuild", "default_inputs",
    "build_section3_field", "knapp_build", "knapp_reference",
    "calibrate_exponent", "duality_demo", "gaussian_profile",
]


@dataclass(frozen=True)
class PlateauBump:
    """Radial cutoff: 0 on (0, s0], equal to 1 on [s1, s2], 0 from s3 on.

    ``profile="smooth"`` is the classical C^infinity transition
    e^{-1/u} / (e^{-1/u} + e^{-1/(1-u)}) (transform tails ~e^{-c sqrt t});
    ``profile="quintic"`` the C^2 smoothstep u^3(10 - 15u + 6u^2)
    (transform tails ~t^{-3}).  Both tails are too heavy for tight
    boundary gates on desk-scale periodic grids; see GaussianAnnulus for
    the default cutoff used by the verification scenarios.
    """

    s0: float
    s1: float
    s2: float
    s3: float
    profile: str = "smooth"

    def __post_init__(self):
        if not 0 < self.s0 < self.s1 < self.s2 < self.s3:
            raise UsageError("bump breakpoints must satisfy 0 < s0 < s1 < s2 < s3")
        if self.profile not in ("smooth", "quintic"):
            raise UsageError(f"unknown bump profile {self.profile!r}")

    @property
    def support(self):
        return (self.s0, self.s3)

    def _edge(self, u: np.ndarray) -> np.ndarray:
        u = np.clip(u, 0.0, 1.0)
        if self.profile == "quintic":
            return u ** 3 * (10.0 - 15.0 * u + 6.0 * u * u)
        out = np.zeros_like(u)
        interior = (u > 0) & (u < 1)
        ui = u[interior]
        a = np.exp(-1.0 / ui)
        b = np.exp(-1.0 / (1.0 - ui))
        out[interior] = a / (a + b)
        out[u >= 1] = 1.0
        return out

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        rise = self._edge((s - self.s0) / (self.s1 - self.s0))
        fall = self._edge((self.s3 - s) / (self.s3 - self.s2))
        return rise * fall


@dataclass(frozen=True)
class GaussianAnnulus:
    """Radial weight exp(-(s - center)^2 / (2 sigma^2)), analytic in s.

    Exactly 1 at the center, below 1e-17 of its peak at nine sigma, so it
    is compactly supported at double precision without any gluing; its
    transform decays at the true Gaussian rate, which is what makes the
    field boundary gates attainable on desk-scale periodic grids.  An
    optional power |s|^beta tilts the spectral envelope for broad-band
    test families.
    """

    center: float
    sigma: float
    beta: float = 0.0
    half_width: float = 9.0

    def __post_init__(self):
        if self.center <= 0 or self.sigma <= 0:
            raise UsageError("center and sigma must be positive")

    @property
    def support(self):
        lo = max(self.center - self.half_width * self.sigma, 1e-3 * self.sigma)
        return (lo, self.center + self.half_width * self.sigma)

    def __call__(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        u = (s - self.center) / self.sigma
        out = np.exp(-0.5 * u * u)
        if self.beta:
            out = out * (s / self.center) ** self.beta
        return out


def gaussian_profile(d2: int, width: float = 1.0):
    """Schwartz profile h and its transform h_hat = int h e^{+i lam.t} dt."""

    def h(t):
        t = np.atleast_2d(np.asarray(t, dtype=float))
        return np.exp(-(t ** 2).sum(axis=-1) / (2 * width * width))

    def h_hat(lam):
        lam = np.atleast_2d(np.asarray(lam, dtype=float))
        return ((2 * np.pi * width * width) ** (d2 / 2.0)
                * np.exp(-width * width * (lam ** 2).sum(axis=-1) / 2.0))

    return h, h_hat


@dataclass(frozen=True)
class KnappInputs:
    """Cutoff psi, Schwartz profile (h, h_hat), and the |lam|^n exponent."""

    d1: int
    d2: int
    psi: object
    h: object
    h_hat: object
    n: float

    def check_peak(self) -> None:
        """The mu = 1 closed form needs psi(1/d1) = 1 exactly."""
        if abs(float(self.psi(np.array(1.0 / self.d1))) - 1.0) > 1e-12:
            raise UsageError("psi must equal 1 at 1/d1 for the closed form")


def default_inputs(d1: int, d2: int, n: float | None = None,
                   sigma: float | None = None, h_width: float = 1.0) -> KnappInputs:
    """The standard construction: Gaussian annulus at 1/d1, Gaussian h, n = d1.

    psi peaks with value exactly 1 at 1/d1, vanishes (to machine
    precision) near 0 and beyond ~2.3/d1, and its transform decays at the
    Gaussian rate, so the field meets the 1e-8 boundary gate by
    |t| ~ 46 d1.  PlateauBump profiles remain available for psi but their
    heavier transform tails need far larger periods.
    """
    psi = GaussianAnnulus(1.0 / d1, (sigma if sigma is not None else 0.14) / d1)
    h, h_hat = gaussian_profile(d2, h_width)
    return KnappInputs(d1, d2, psi, h, h_hat, float(n) if n is not None else float(d1))


def _sphere_profile(rule, r: float, t_node_axes, h_hat) -> np.ndarray:
    """sum_eps w_eps h_hat(r eps) e^{-i r t.eps} over a tensor t-grid."""
    if rule.product is None:
        ts = np.stack(np.meshgrid(*t_node_axes, indexing="ij"),
                      axis=-1).reshape(-1, rule.d2)
        hv = np.asarray(h_hat(r * rule.points), dtype=complex)
        return np.exp(-1j * r * (ts @ rule.points.T)) @ (rule.weights * hv)
    z, wz, phi, wphi = rule.product
    t1, t2, t3 = t_node_axes
    hv = np.asarray(h_hat(r * rule.points), dtype=complex).reshape(z.size, phi.size)
    out = np.zeros((t1.size, t2.size, t3.size), dtype=complex)
    cos_p, sin_p = np.cos(phi), np.sin(phi)
    for i, zi in enumerate(z):
        s = np.sqrt(max(1.0 - zi * zi, 0.0))
        a = np.exp(-1j * r * s * np.outer(cos_p, t1))
        b = np.exp(-1j * r * s * np.outer(sin_p, t2))
        inner = np.einsum("f,fi,fj->ij", wz[i] * wphi * hv[i], a, b)
        out += inner[..., None] * np.exp(-1j * r * zi * t3)
    return out.ravel()


def _auto_radial_n(t_max: float, span: float) -> int:
    # Gauss-Legendre must resolve the e^{-i r t} oscillation at the
    # largest |t| sampled: phase across the support is t_max * span
    return int(math.ceil(0.35 * t_max * span)) + 48


def build_section3_field(inputs: KnappInputs, x_axes, t_axes,
                         dilation: float = 1.0, with_h: bool = True,
                         radial_n: int | None = None, sphere_order: int = 32,
                         x_width_c: float = 1.0,
                         weight_exponent: float | None = None) -> SampledField:
    """Sample the lambda-integral field on a tensor grid.

    ``dilation = s`` samples f(sqrt(s) x, s t) (the anisotropic dilation
    under which the restriction family is covariant).  ``with_h = False``
    drops the h_hat factor (the function named g).  ``x_width_c`` widens
    the x-profile to e^{-c |lam| |x|^2 / 2}, giving multi-level content
    for generic-family checks.  ``weight_exponent`` overrides inputs.n.
    The radial order defaults to the oscillation-resolving value for the
    largest sampled |t|.
    """
    d1, d2 = inputs.d1, inputs.d2
    n_exp = inputs.n if weight_exponent is None else float(weight_exponent)
    rule = sphere_rule(d2, sphere_order)
    sup = inputs.psi.support
    t_scaled = [ax.nodes * dilation for ax in t_axes]
    if radial_n is None:
        t_max = max(float(np.abs(t).max()) for t in t_scaled)
        radial_n = _auto_radial_n(t_max, sup[1] - sup[0])
    r_nodes, r_weights = gauss_legendre(radial_n, sup[0], sup[1])
    xs = np.stack(np.meshgrid(*[ax.nodes for ax in x_axes], indexing="ij"),
                  axis=-1).reshape(-1, d1)
    x2 = (xs ** 2).sum(axis=1) * dilation          # |sqrt(s) x|^2
    psi_vals = inputs.psi(r_nodes)
    one = lambda lam: np.ones(np.atleast_2d(lam).shape[0])  # noqa: E731
    acc = np.zeros((xs.shape[0], int(np.prod([t.size for t in t_scaled]))),
                   dtype=complex)
    for r, wr, pv in zip(r_nodes, r_weights, psi_vals):
        if pv == 0.0:
            continue
        s_t = _sphere_profile(rule, r, t_scaled,
                              inputs.h_hat if with_h else one)
        profile = np.exp(-0.5 * x_width_c * r * x2)
        acc += (wr * r ** (d2 - 1 + n_exp) * pv) * np.outer(profile, s_t)
    shape = tuple(ax.n for ax in x_axes) + tuple(ax.n for ax in t_axes)
    return SampledField(x_axes, t_axes, acc.reshape(shape))


def knapp_reference(inputs: KnappInputs, x_axes, t_axes,
                    sphere_order: int = 64) -> np.ndarray:
    """Closed form of P_1 f:  d1^{-d1-d2} e^{-|x|^2/(2 d1)} times the
    sphere integral of h_hat(eps/d1) e^{-i t.eps/d1}."""
    inputs.check_peak()
    d1, d2 = inputs.d1, inputs.d2
    rule = sphere_rule(d2, sphere_order)
    xs = np.stack(np.meshgrid(*[ax.nodes for ax in x_axes], indexing="ij"),
                  axis=-1).reshape(-1, d1)
    ts = np.stack(np.meshgrid(*[ax.nodes for ax in t_axes], indexing="ij"),
                  axis=-1).reshape(-1, d2)
    lam = rule.points / d1
    hv = np.asarray(inputs.h_hat(lam), dtype=complex)
    sph = np.exp(-1j * (ts @ lam.T)) @ (rule.weights * hv)
    prof = d1 ** (-d1 - d2) * np.exp(-(xs ** 2).sum(axis=1) / (2.0 * d1))
    out = np.outer(prof, sph)
    return out.reshape(tuple(ax.n for ax in x_axes) + tuple(ax.n for ax in t_axes))


@dataclass
class KnappBuild:
    """The field, its two independent constructions, and the P_1 reference."""

    inputs: KnappInputs
    field: SampledField
    g_field: SampledField
    conv_field: SampledField
    reference_p1: np.ndarray
    route_residual: float


def knapp_build(inputs: KnappInputs, x_axes, t_axes, radial_n: int = 64,
                sphere_order: int = 32) -> KnappBuild:
    """Build f directly and as h *_t g, and attach the P_1 closed form.

    The convolution route multiplies the g-spectrum by h_hat on the dual
    grid and inverts; the direct route carries h_hat inside the
    lambda-quadrature.  Their relative L^2 gap is the route residual.
    """
    inputs.check_peak()
    f_direct = build_section3_field(inputs, x_axes, t_axes, with_h=True,
                                    radial_n=radial_n, sphere_order=sphere_order)
    g = build_section3_field(inputs, x_axes, t_axes, with_h=False,
                             radial_n=radial_n, sphere_order=sphere_order)
    g_spec = partial_fourier_t(g, check=False)
    lam_mesh = np.stack(np.meshgrid(*g_spec.lambda_axes, indexing="ij"),
                        axis=-1).reshape(-1, inputs.d2)
    hv = np.asarray(inputs.h_hat(lam_mesh), dtype=complex).reshape(g.t_shape)
    conv = inverse_partial_fourier(
        PartialSpectrum(g.x_axes, g.t_axes, g_spec.values * hv))
    nf = field_norm2(f_direct)
    dv = field_norm2(f_direct.copy_with(f_direct.values - conv.values))
    ref = knapp_reference(inputs, x_axes, t_axes)
    return KnappBuild(inputs, f_direct, g, conv, ref,
                      dv / nf if nf > 0 else 0.0)


def transform_route_field(inputs: KnappInputs, x_axes, t_axes,
                          radial_n: int = 64, sphere_order: int = 32) -> SampledField:
    """h *_t g with g built from its stated transform
    g_hat(xi, a) = psi(|a|) e^{-|xi|^2/(2|a|)} under this package's
    (2 pi)^{-d} inversion convention.  The xi-integral is the exact
    Gaussian transform, leaving a radial lambda-quadrature with weight
    (2 pi)^{-d2 - d1/2} |lam|^{d1/2}."""
    d1, d2 = inputs.d1, inputs.d2
    g_tr = build_section3_field(inputs, x_axes, t_axes, with_h=False,
                                radial_n=radial_n, sphere_order=sphere_order,
                                weight_exponent=0.5 * d1)
    scale = (2 * np.pi) ** (-(d2 + 0.5 * d1))
    g_tr = g_tr.copy_with(scale * g_tr.values)
    spec = partial_fourier_t(g_tr, check=False)
    lam_mesh = np.stack(np.meshgrid(*spec.lambda_axes, indexing="ij"),
                        axis=-1).reshape(-1, d2)
    hv = np.asarray(inputs.h_hat(lam_mesh), dtype=complex).reshape(g_tr.t_shape)
    return inverse_partial_fourier(
        PartialSpectrum(g_tr.x_axes, g_tr.t_axes, spec.values * hv))


def calibrate_exponent(inputs: KnappInputs, x_axes, t_axes,
                       candidates=(None, None), radial_n: int = 64,
                       sphere_order: int = 32) -> dict:
    """Scan |lam|^n candidates against the transform-built route.

    For each candidate n, f_direct(n) is compared with the best scalar
    multiple of h *_t g_transform; the transform route is n-independent,
    so the residual identifies which exponent the stated g_hat display
    implies, and the fitted scalar records the accompanying constant.
    """
    d1 = inputs.d1
    cand = [0.5 * d1, float(d1)] if candidates == (None, None) else list(candidates)
    f_tr = transform_route_field(inputs, x_axes, t_axes, radial_n, sphere_order)
    tr_flat = f_tr.values.ravel()
    den = float(np.real(np.vdot(tr_flat, tr_flat)))
    rows = []
    for n in cand:
        fi = KnappInputs(inputs.d1, inputs.d2, inputs.psi, inputs.h,
                         inputs.h_hat, float(n))
        fd = build_section3_field(fi, x_axes, t_axes, with_h=True,
                                  radial_n=radial_n, sphere_order=sphere_order)
        fd_flat = fd.values.ravel()
        scale = float(np.real(np.vdot(tr_flat, fd_flat))) / den
        resid = np.linalg.norm(fd_flat - scale * tr_flat) / np.linalg.norm(fd_flat)
        rows.append({"n": float(n), "fitted_scale": scale,
                     "residual": float(resid)})
    best = min(rows, key=lambda r: r["residual"])
    return {"candidates": rows, "calibrated_n": best["n"],
            "fitted_scale": best["fitted_scale"],
            "expected_scale": float((2 * np.pi) ** (inputs.d2 + 0.5 * d1))}


def duality_demo(h, h_hat, p: float, radius: float, d2: int,
                 t_extent: float = 24.0, n_t: int = 384,
                 sphere_order: int = 48) -> dict:
    """Tabulate ||h * FT(dsigma_radius)||_{p'} / ||h||_p on a t-grid.

    Exploratory: ratios are reported across p with no pass/fail, since
    the sharpness direction is not numerically decidable at desk scale.
    """
    if not 1.0 <= p <= 2.0:
        raise UsageError("p must lie in [1, 2]")
    rule = sphere_rule(d2, sphere_order)
    axes = t_axes_for(d2, n_t, 2 * t_extent)
    tp = np.stack(np.meshgrid(*[ax.nodes for ax in axes], indexing="ij"),
                  axis=-1).reshape(-1, d2)
    conv = sphere_transform(h_hat, radius, tp, rule)
    hv = np.asarray(h(tp), dtype=float)
    wt = 1.0
    for ax in axes:
        wt *= ax.spacing
    p_prime = float("inf") if p == 1.0 else p / (p - 1.0)
    from .norms import lp_norm
    num = lp_norm(conv, wt, p_prime)
    den = lp_norm(hv, wt, p)
    return {"p": float(p), "p_prime": p_prime, "radius": float(radius),
            "conv_norm": num, "h_norm": den,
            "ratio": num / den if den > 0 else 0.0}
