"""The Weyl transform and the oscillatory-integral route to P_k(a).

For integrable g on R^{2 d1} the transform W_a(g) acts on L^2(R^{d1}) as an
integral operator with kernel

    K_g^a(x, y) = int_{R^{d1}} g(xi, y - x) e^{i (a/2) xi.(x+y)} dxi.

Taking g to be the scaled radial Laguerre function phi_{k,a} produces,
up to the constant (2 pi)^{-d1} |a|^{d1}, the level-k spectral projection
kernel

    F_{k,a}(x,y) = (2 pi)^{-d1} |a|^{d1} int e^{i(a/2) xi.(x+y)}
                   L_k^{d1-1}((|a|/2)(|xi|^2 + |x-y|^2))
                   e^{-(|a|/4)(|xi|^2 + |x-y|^2)} dxi,

an identity this module exposes as an executable check against the
eigenfunction-sum route.

The xi-integral is Gaussian-damped, so it is evaluated with a tensor
Gauss-Hermite rule matched to the e^{-(|a|/4)|xi|^2} factor; the rule
order covers the Laguerre polynomial degree plus a phase margin chosen
from the largest |x+y| requested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import QuadratureError
from .quadrature import gauss_hermite_rule
from .spectral import (ProjectionKernel, as_axes, check_resolution,
                       grid_points, grid_weights, operator_norm,
                       projection_kernel_eigsum)
from .specfun import _rescale_pair, _scaled_exp

_MAX_RULE = 700


def phase_margin(c: float, tol: float = 1e-9) -> int:
    """Extra Gauss-Hermite order needed to resolve a phase e^{i c eta}.

    Returns the smallest m with (c^2/4)^m / m! below tol (the absolute
    Gauss-Hermite truncation error scale for a pure phase of rate c).
    """
    z = 0.25 * c * c
    if z < 1e-30:
        return 1
    log_term = 0.0
    m = 0
    log_tol = math.log(tol)
    while log_term >= log_tol or m < z:
        m += 1
        log_term += math.log(z) - math.log(m)
        if m > 5 * _MAX_RULE:
            raise QuadratureError(f"phase rate c={c:g} too large to resolve")
    return m


def xi_rule(a: float, k_max: int, u_max: float, d1: int, tol: float = 1e-9):
    """Tensor Gauss-Hermite rule for the xi-integral.

    Returns ``(xi, logw)``: nodes of shape (Q, d1) with xi = 2 eta/sqrt|a|,
    and the log of the plain quadrature weights (e^{+|eta|^2} included),
    shape (Q,).  Callers absorb Gaussian factors of the integrand in log
    space against these weights.
    """
    c = math.sqrt(abs(a)) * u_max
    n = k_max + phase_margin(c, tol) + 8
    if n > _MAX_RULE:
        raise QuadratureError(
            f"xi quadrature order {n} exceeds {_MAX_RULE}; the requested "
            f"pairs have |x+y| up to {u_max:g}, unresolved at scale a={a:g}")
    rule = gauss_hermite_rule(n)
    eta, w = rule.nodes, rule.weights
    scale = 2.0 / math.sqrt(abs(a))
    if d1 == 1:
        xi = (scale * eta)[:, None]
        logw = np.log(w) + eta * eta + math.log(scale)
    else:
        mesh = np.meshgrid(*([eta] * d1), indexing="ij")
        xi = scale * np.stack([m.ravel() for m in mesh], axis=-1)
        lw1 = np.log(w) + eta * eta + math.log(scale)
        logw = lw1
        for _ in range(d1 - 1):
            logw = np.add.outer(logw, lw1)
        logw = logw.ravel()
    return xi, logw


def laguerre_kernel_entries(k_list, a: float, d1: int, x_pts, y_pts,
                            tol: float = 1e-9, chunk: int = 128) -> dict:
    """F_{k,a}(x, y) for every k in k_list at the given point pairs.

    One Laguerre recurrence pass over the (pairs x quadrature) array
    serves all requested levels.  Returns {k: complex array (n_pairs,)}.
    """
    x_pts = np.atleast_2d(np.asarray(x_pts, dtype=float))
    y_pts = np.atleast_2d(np.asarray(y_pts, dtype=float))
    if x_pts.shape != y_pts.shape or x_pts.shape[1] != d1:
        raise ValueError("x_pts and y_pts must both have shape (n, d1)")
    k_list = sorted(set(int(k) for k in k_list))
    k_max = k_list[-1]
    delta = d1 - 1
    u = x_pts + y_pts
    v2 = ((x_pts - y_pts) ** 2).sum(axis=1)
    u_max = float(np.abs(u).max()) if u.size else 0.0
    xi, logw = xi_rule(a, k_max, u_max, d1, tol)
    pref = (2 * math.pi) ** -d1 * abs(a) ** d1
    out = {k: np.empty(x_pts.shape[0], dtype=complex) for k in k_list}

    for lo in range(0, x_pts.shape[0], chunk):
        sl = slice(lo, min(lo + chunk, x_pts.shape[0]))
        tau = 0.5 * abs(a) * ((xi ** 2).sum(axis=1)[None, :] + v2[sl, None])
        phase = np.exp(1j * (0.5 * a) * (u[sl] @ xi.T))
        # the integrand L_k(tau) e^{-tau/2} carries its own Gaussian decay,
        # so it pairs with the plain weights e^{logw} (which include e^{+eta^2})
        wphase = np.exp(logw)[None, :] * phase
        ell = -0.5 * tau
        u_prev = np.ones_like(tau)
        if 0 in out:
            out[0][sl] = pref * (wphase * _scaled_exp(u_prev, ell)).sum(axis=1)
        if k_max == 0:
            continue
        u_cur = delta + 1.0 - tau
        if 1 in out:
            out[1][sl] = pref * (wphase * _scaled_exp(u_cur, ell)).sum(axis=1)
        for j in range(1, k_max):
            u_next = ((2 * j + delta + 1 - tau) * u_cur - (j + delta) * u_prev) / (j + 1)
            u_prev, u_cur = u_cur, u_next
            _rescale_pair(u_prev, u_cur, ell)
            if j + 1 in out:
                out[j + 1][sl] = pref * (wphase * _scaled_exp(u_cur, ell)).sum(axis=1)
    return out


def projection_kernel_laguerre(k: int, a: float, grid, d1: int | None = None,
                               tol: float = 1e-9) -> ProjectionKernel:
    """Dense F_{k,a} table on a tensor grid via the oscillatory route."""
    axes = as_axes(grid, d1)
    d1 = len(axes)
    check_resolution(axes, k, a, d1)
    pts = grid_points(axes)
    m = pts.shape[0]
    if m * m > (1 << 24):
        raise MemoryError(
            f"laguerre-route kernel with {m}x{m} entries is beyond desk "
            "scale; evaluate on point pairs with laguerre_kernel_entries")
    ix, iy = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    vals = laguerre_kernel_entries([k], a, d1, pts[ix.ravel()], pts[iy.ravel()],
                                   tol=tol)[k]
    return ProjectionKernel(k, float(a), axes, "laguerre",
                            values=vals.reshape(m, m))


@dataclass(frozen=True)
class RouteDiff:
    """Comparison of the two P_k(a) constructions on a common pair set."""

    k: int
    a: float
    d1: int
    n_pairs: int
    sup_ref: float
    max_abs_dev: float
    fitted_scale: float

    @property
    def rel_dev(self) -> float:
        return self.max_abs_dev / self.sup_ref


def _pair_subset(axes, budget: int):
    """Deterministic sub-lattice of grid point pairs within a budget."""
    pts = grid_points(axes)
    m = pts.shape[0]
    if m * m <= budget:
        ix, iy = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
        return pts[ix.ravel()], pts[iy.ravel()]
    per_side = max(2, int(math.isqrt(budget)))
    stride_axes = []
    for ax in axes:
        npick = max(2, int(round(per_side ** (1 / len(axes)))))
        idx = np.unique(np.linspace(0, ax.n - 1, npick).astype(int))
        stride_axes.append(ax.nodes[idx])
    mesh = np.meshgrid(*stride_axes, indexing="ij")
    sub = np.stack([mm.ravel() for mm in mesh], axis=-1)
    s = sub.shape[0]
    ix, iy = np.meshgrid(np.arange(s), np.arange(s), indexing="ij")
    return sub[ix.ravel()], sub[iy.ravel()]


def compare_projection_routes(k_list, a: float, d1: int, grid=None,
                              pair_budget: int = 250_000) -> dict:
    """Entrywise diff of eigensum vs oscillatory kernels, per level.

    For grids whose full pair set exceeds the budget, a deterministic
    coarse sub-lattice of (x, y) pairs is compared instead: the identity
    is pointwise, so any pair set certifies it at the same tolerance.
    Returns {k: RouteDiff}.
    """
    k_list = sorted(set(int(k) for k in k_list))
    k_max = k_list[-1]
    if grid is None:
        from .spectral import hermite_grid
        grid = hermite_grid(k_max, a, d1)
    axes = as_axes(grid, d1)
    xp, yp = _pair_subset(axes, pair_budget)
    lag = laguerre_kernel_entries(k_list, a, d1, xp, yp)
    from .spectral import build_basis
    basis = build_basis(a, d1, k_max, axes)
    # eigensum entries at arbitrary points: rebuild 1-D tables on the pair
    # coordinates (they need not lie on the tensor grid)
    from .specfun import hermite_batch
    root = math.sqrt(abs(a))
    out = {}
    for k in k_list:
        from .spectral import multiindices
        idx = multiindices(d1, k)
        ref = np.zeros(xp.shape[0])
        for nu in idx:
            fx = np.ones(xp.shape[0])
            fy = np.ones(yp.shape[0])
            for j in range(d1):
                tab_x = hermite_batch(int(nu[j]), root * xp[:, j])[int(nu[j])]
                tab_y = hermite_batch(int(nu[j]), root * yp[:, j])[int(nu[j])]
                fx *= tab_x
                fy *= tab_y
            ref += fx * fy
        ref *= abs(a) ** (d1 / 2.0)
        diff = lag[k] - ref
        sup = float(np.abs(ref).max())
        num = float(np.real(np.vdot(ref, lag[k])))
        den = float(np.real(np.vdot(ref, ref)))
        out[k] = RouteDiff(k, float(a), d1, xp.shape[0], sup,
                           float(np.abs(diff).max()),
                           num / den if den > 0 else float("nan"))
    return out


def weyl_kernel(g, a: float, grid, d1: int | None = None,
                k_hint: int = 0, tol: float = 1e-9) -> np.ndarray:
    """Dense kernel table of W_a(g) on a tensor grid.

    ``g`` is a callable on R^{2 d1}, invoked as ``g(z)`` with z of shape
    (..., 2 d1); it must decay at least like e^{-(|a|/4)|z|^2} in its first
    d1 arguments for the matched Gauss-Hermite rule to converge (the
    intended radial-Gaussian symbols do).  ``k_hint`` widens the rule for
    symbols with polynomial factors of known degree.
    """
    axes = as_axes(grid, d1)
    d1 = len(axes)
    pts = grid_points(axes)
    m = pts.shape[0]
    if m * m > (1 << 24):
        raise MemoryError("kernel table beyond desk scale")
    u_max = 2.0 * max(ax.extent for ax in axes)
    xi, logw = xi_rule(a, k_hint, u_max, d1, tol)
    w = np.exp(logw)
    if not np.all(np.isfinite(w)):
        raise QuadratureError("xi-rule weights overflow; symbol unresolved")
    ker = np.empty((m, m), dtype=complex)
    q = xi.shape[0]
    z = np.empty((q, 2 * d1))
    z[:, :d1] = xi
    for i in range(m):
        v = pts - pts[i]          # y - x for all y at fixed x
        phase = np.exp(1j * (0.5 * a) * ((pts[i] + pts) @ xi.T))
        for jlo in range(0, m, 4096):
            sl = slice(jlo, min(jlo + 4096, m))
            zz = np.broadcast_to(z, (sl.stop - sl.start, q, 2 * d1)).copy()
            zz[:, :, d1:] = v[sl][:, None, :]
            gv = g(zz)
            ker[i, sl] = (w[None, :] * gv * phase[sl]).sum(axis=1)
    return ker


def radial_gaussian_symbol(k: int, a: float, d1: int):
    """The scaled Laguerre symbol phi_{k,a}(z) = phi_k(sqrt|a| z) as a callable."""
    from .specfun import laguerre_weighted

    def g(z):
        r2 = (z * z).sum(axis=-1)
        return laguerre_weighted(k, d1 - 1, 0.5 * abs(a) * r2)
    return g


def weyl_l1_contraction_check(g, a: float, grid=None, d1: int = 1,
                              l1_grid_n: int = 481, k_hint: int = 0) -> dict:
    """Measure ||W_a(g)||_op / ||g||_1 (bounded by 1 for integrable g).

    The operator norm is estimated by power iteration on the weighted
    kernel; the L^1 norm by tensor trapezoid over the truncation box of
    the matched Gaussian rule.
    """
    if grid is None:
        from .spectral import hermite_grid
        grid = hermite_grid(max(k_hint, 2), a, d1)
    axes = as_axes(grid, d1)
    d1 = len(axes)
    ker = weyl_kernel(g, a, axes, k_hint=k_hint)
    wts = grid_weights(axes)
    s = np.sqrt(wts)

    def matvec(zv):
        return s * (ker @ (s * zv))

    op = operator_norm(matvec, ker.shape[0], dtype=complex)
    radius = math.sqrt(4.0 * 14.0 * math.log(10.0) / abs(a))
    box_extent = max(radius, 2.0 * max(ax.extent for ax in axes))
    t = np.linspace(-box_extent, box_extent, l1_grid_n)
    h = t[1] - t[0]
    mesh = np.meshgrid(*([t] * (2 * d1)), indexing="ij")
    z = np.stack([mm.ravel() for mm in mesh], axis=-1)
    total = 0.0
    for lo in range(0, z.shape[0], 1 << 20):
        total += float(np.abs(g(z[lo:lo + (1 << 20)])).sum())
    l1 = total * h ** (2 * d1)
    return {"operator_norm": float(op), "l1_norm": float(l1),
            "ratio": float(op / l1) if l1 > 0 else 0.0}


def kernel_sup(k: int, a: float, d1: int, grid=None) -> float:
    """sup_{x,y} |F_{k,a}(x,y)|, taken on the diagonal.

    The eigensum kernel is positive semidefinite, so
    |F(x,y)|^2 <= F(x,x) F(y,y) and the global sup is the diagonal sup.
    """
    if grid is None:
        from .spectral import hermite_grid
        grid = hermite_grid(k, a, d1)
    kern = projection_kernel_eigsum(k, a, grid, d1=d1, materialize="never")
    v = kern.basis.level_matrix(k)
    return float((v * v).sum(axis=0).max())
