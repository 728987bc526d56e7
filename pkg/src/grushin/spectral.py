"""Scaled Hermite eigenfunctions and spectral projections.

The harmonic-oscillator family H(a) = -Lap_x + a^2 |x|^2 on R^{d1} has
eigenfunctions

    Phi_nu^a(x) = |a|^{d1/4} prod_j h_{nu_j}(sqrt|a| x_j),

unit-normalized in L^2(R^{d1}) for every dimension, with eigenvalue
(2|nu| + d1)|a|.  The level-k spectral projection P_k(a) is realized
either as a dense kernel table on a tensor grid or in factored form
through the basis matrix of level-k eigenfunctions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridResolutionError
from .quadrature import Quadrature1D, uniform_trapezoid
from .specfun import hermite_batch, hermite_eval

DENSE_ENTRY_CAP = 1 << 24  # materialize kernels up to 16M entries


# ---------------------------------------------------------------------------
# Multiindices
# ---------------------------------------------------------------------------

def multiindex_count(d1: int, k: int) -> int:
    """Number of multiindices of degree k in d1 variables."""
    return math.comb(k + d1 - 1, d1 - 1)


def multiindices(d1: int, k: int) -> np.ndarray:
    """All nu in N^{d1} with |nu| = k, lexicographic, shape (count, d1)."""
    if d1 < 1:
        raise ValueError("d1 must be a positive integer")
    if k < 0:
        raise ValueError("k must be nonnegative")
    if d1 == 1:
        return np.array([[k]], dtype=np.int64)
    rows = []
    for first in range(k + 1):
        tail = multiindices(d1 - 1, k - first)
        block = np.empty((tail.shape[0], d1), dtype=np.int64)
        block[:, 0] = first
        block[:, 1:] = tail
        rows.append(block)
    return np.concatenate(rows, axis=0)


# ---------------------------------------------------------------------------
# Grid policy
# ---------------------------------------------------------------------------

def required_extent(k_max: int, a: float, d1: int) -> float:
    """Policy minimum half-width for level-k_max eigenfunctions at scale a."""
    return math.sqrt((2 * k_max + d1 + 4) / abs(a))


def decay_extent(k_max: int, a: float, d1: int, log_tail: float = 16.5) -> float:
    """Half-width at which level-k_max eigenfunctions decay to e^{-log_tail}.

    Uses the WKB tail integral E(t) = (t sqrt(t^2 - t0^2)
    - t0^2 arccosh(t/t0)) / 2 beyond the turning point t0 = sqrt(2k+d1);
    boundary values this small keep discrete Gram matrices accurate to
    ~1e-12, which the projection-algebra tolerances require.
    """
    t0 = math.sqrt(2 * k_max + d1)

    def tail(t):
        return 0.5 * (t * math.sqrt(max(t * t - t0 * t0, 0.0))
                      - t0 * t0 * math.acosh(max(t / t0, 1.0)))

    lo, hi = t0, t0 + 2.0
    while tail(hi) < log_tail:
        hi += 2.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if tail(mid) < log_tail:
            lo = mid
        else:
            hi = mid
    return max(hi / math.sqrt(abs(a)), required_extent(k_max, a, d1))


def required_nodes(k_max: int, a: float, d1: int, extent: float) -> int:
    """Node count per axis resolving the level-k_max oscillation."""
    return max(2, math.ceil(8 * extent * math.sqrt(abs(a) * (2 * k_max + d1)) / math.pi))


def check_resolution(grid, k_max: int, a: float, d1: int) -> None:
    """Raise GridResolutionError naming any violated sampling condition."""
    axes = as_axes(grid, d1)
    x_req = required_extent(k_max, a, d1)
    for i, ax in enumerate(axes):
        if ax.extent < x_req * (1 - 1e-12):
            raise GridResolutionError(
                f"axis {i}: extent {ax.extent:.3f} < required "
                f"sqrt((2k+d1+4)/|a|) = {x_req:.3f} for k={k_max}, a={a}")
        n_req = required_nodes(k_max, a, d1, ax.extent)
        if ax.n < n_req:
            raise GridResolutionError(
                f"axis {i}: {ax.n} nodes < required "
                f"8*X*sqrt(|a|(2k+d1))/pi = {n_req} for k={k_max}, a={a}")


def hermite_grid(k_max: int, a: float, d1: int = 1, n: int | None = None,
                 extent: float | None = None, pad: float = 1.02):
    """Per-axis uniform grids satisfying the sampling policy for (k_max, a).

    Defaults use the decay-based extent (boundary values ~1e-7) rather
    than the bare policy minimum, so Gram matrices of the sampled basis
    are accurate to the tolerances of the projection-algebra checks.
    """
    if a == 0:
        raise ValueError("scale a must be nonzero")
    x = extent if extent is not None else decay_extent(k_max, a, d1)
    npts = n if n is not None else math.ceil(pad * required_nodes(k_max, a, d1, x))
    axes = tuple(uniform_trapezoid(npts, x) for _ in range(d1))
    check_resolution(axes, k_max, a, d1)
    return axes


def as_axes(grid, d1: int | None = None):
    """Normalize a grid argument to a tuple of per-axis Quadrature1D."""
    if isinstance(grid, Quadrature1D):
        axes = (grid,)
    else:
        axes = tuple(grid)
    if d1 is not None and len(axes) != d1:
        raise ValueError(f"grid has {len(axes)} axes, expected {d1}")
    return axes


def grid_points(axes) -> np.ndarray:
    """Flattened tensor-product nodes, shape (M, d1), C order."""
    mesh = np.meshgrid(*[ax.nodes for ax in axes], indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def grid_weights(axes) -> np.ndarray:
    """Flattened tensor-product quadrature weights, shape (M,)."""
    w = axes[0].weights
    for ax in axes[1:]:
        w = np.multiply.outer(w, ax.weights)
    return w.ravel()


# ---------------------------------------------------------------------------
# Scaled basis
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScaledBasis:
    """Per-axis table of scaled Hermite functions on a tensor grid.

    ``axis_tables[j][m, i] = |a|^{1/4} h_m(sqrt|a| x_i)`` so that products
    over the d1 axes carry the total |a|^{d1/4} normalization.
    """

    a: float
    d1: int
    k_max: int
    axes: tuple
    axis_tables: tuple = field(repr=False)

    @property
    def n_points(self) -> int:
        return int(np.prod([ax.n for ax in self.axes]))

    def level_matrix(self, k: int) -> np.ndarray:
        """Matrix of level-k eigenfunction samples, shape (count, M)."""
        if k > self.k_max:
            raise ValueError(f"level {k} exceeds basis k_max {self.k_max}")
        idx = multiindices(self.d1, k)
        if self.d1 == 1:
            return self.axis_tables[0][[k], :]
        v = self.axis_tables[0][idx[:, 0]]
        for j in range(1, self.d1):
            tj = self.axis_tables[j][idx[:, j]]
            v = v[..., :, None] * tj[(slice(None),) + (None,) * j + (slice(None),)]
        return v.reshape(idx.shape[0], -1)

    def project(self, k: int, phi: np.ndarray) -> np.ndarray:
        """Apply P_k(a) to sample columns phi of shape (M,) or (M, m)."""
        w = grid_weights(self.axes)
        v = self.level_matrix(k)
        flat = phi.reshape(self.n_points, -1)
        coeff = v @ (w[:, None] * flat)
        out = v.T @ coeff
        return out.reshape(phi.shape)


def build_basis(a: float, d1: int, k_max: int, grid) -> ScaledBasis:
    if a == 0:
        raise ValueError("scale a must be nonzero")
    axes = as_axes(grid, d1)
    root = math.sqrt(abs(a))
    tables = tuple(abs(a) ** 0.25 * hermite_batch(k_max, root * ax.nodes)
                   for ax in axes)
    return ScaledBasis(float(a), d1, k_max, axes, tables)


def phi_scaled(nu, a: float, x) -> float:
    """Scaled Hermite eigenfunction Phi_nu^a(x), unit L^2(R^{d1}) norm."""
    if a == 0:
        raise ValueError("scale a must be nonzero")
    nu = np.atleast_1d(np.asarray(nu, dtype=np.int64))
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if nu.shape != x.shape:
        raise ValueError("nu and x must have the same length d1")
    root = math.sqrt(abs(a))
    val = abs(a) ** (len(nu) / 4.0)
    for m, xj in zip(nu, x):
        val *= hermite_eval(int(m), root * xj)
    return float(val)


# ---------------------------------------------------------------------------
# Projection kernels
# ---------------------------------------------------------------------------

@dataclass
class ProjectionKernel:
    """Discretized kernel of P_k(a) on a tensor grid.

    ``route`` records the construction: "eigensum" (sum over level-k
    eigenfunctions, factored representation always available) or
    "laguerre" (oscillatory-integral route, dense values only).
    """

    k: int
    a: float
    axes: tuple
    route: str
    values: np.ndarray | None = None
    basis: ScaledBasis | None = None

    @property
    def n_points(self) -> int:
        return int(np.prod([ax.n for ax in self.axes]))

    @property
    def weights(self) -> np.ndarray:
        return grid_weights(self.axes)

    def dense(self, cap: int = DENSE_ENTRY_CAP) -> np.ndarray:
        if self.values is not None:
            return self.values
        m = self.n_points
        if m * m > cap:
            raise MemoryError(
                f"kernel table with {m}x{m} entries exceeds the dense cap; "
                "use apply()/entries() instead")
        v = self.basis.level_matrix(self.k)
        self.values = v.T @ v
        return self.values

    def entries(self, ix, iy) -> np.ndarray:
        """Kernel values at flat-index pairs (ix[i], iy[i])."""
        if self.values is not None:
            return self.values[np.asarray(ix), np.asarray(iy)]
        v = self.basis.level_matrix(self.k)
        return np.sum(v[:, np.asarray(ix)] * v[:, np.asarray(iy)], axis=0)

    def apply(self, phi: np.ndarray) -> np.ndarray:
        """Discrete operator: (P phi)(x_i) = sum_j K(x_i, y_j) W_j phi(y_j)."""
        flat = np.asarray(phi).reshape(self.n_points, -1)
        if flat.shape[0] != self.n_points:
            raise ValueError("sample vector does not match the kernel grid")
        if self.basis is not None:
            out = self.basis.project(self.k, flat)
        else:
            out = self.values @ (self.weights[:, None] * flat)
        return out.reshape(np.asarray(phi).shape)

    def weighted_matvec(self, z: np.ndarray) -> np.ndarray:
        """Symmetrized operator W^{1/2} K W^{1/2} z (same L^2 spectrum).

        apply() already carries one factor of W, so the input is divided
        by W^{1/2} and the output multiplied by it.
        """
        s = np.sqrt(self.weights)
        return s * self.apply(z / s).reshape(-1)

    def trace(self) -> float:
        if self.values is not None:
            diag = np.real(np.diagonal(self.values))
        else:
            v = self.basis.level_matrix(self.k)
            diag = np.sum(v * v, axis=0)
        return float(diag @ self.weights)


def projection_kernel_eigsum(k: int, a: float, grid, d1: int | None = None,
                             materialize: str = "auto") -> ProjectionKernel:
    """P_k(a) kernel by the eigenfunction sum  sum_{|nu|=k} Phi_nu^a(x) Phi_nu^a(y).

    The grid must satisfy the sampling policy for level k at scale a;
    violations raise :class:`GridResolutionError` naming the condition.
    """
    axes = as_axes(grid, d1)
    check_resolution(axes, k, a, len(axes))
    basis = build_basis(a, len(axes), k, axes)
    kern = ProjectionKernel(k, float(a), axes, "eigensum", basis=basis)
    m = kern.n_points
    if materialize == "always" or (materialize == "auto" and m * m <= DENSE_ENTRY_CAP):
        kern.dense(cap=m * m if materialize == "always" else DENSE_ENTRY_CAP)
    return kern


def apply_projection(kernel: ProjectionKernel, phi: np.ndarray) -> np.ndarray:
    """Quadrature application of a kernel to samples on its own grid."""
    return kernel.apply(phi)


def hermite_apply(a: float, phi: np.ndarray, k_max: int, grid, d1: int = 1):
    """Spectral application of H(a) = sum_k (2k+d1)|a| P_k(a), truncated.

    Returns ``(H_phi, tail)`` where ``tail`` is the weighted L^2 norm of
    phi minus its projection onto levels <= k_max, i.e. the discarded
    spectral content (reported, not assumed small).
    """
    axes = as_axes(grid, d1)
    basis = build_basis(a, d1, k_max, axes)
    w = grid_weights(axes)
    flat = np.asarray(phi).reshape(-1)
    out = np.zeros_like(flat, dtype=complex if np.iscomplexobj(phi) else float)
    acc = np.zeros_like(out)
    for k in range(k_max + 1):
        pk = basis.project(k, flat)
        out += (2 * k + d1) * abs(a) * pk
        acc += pk
    tail = np.sqrt(np.real(np.vdot(flat - acc, w * (flat - acc))))
    return out.reshape(np.asarray(phi).shape), float(tail)


def hermite_apply_fd(a: float, phi: np.ndarray, grid, d1: int = 1) -> np.ndarray:
    """Second-order finite-difference H(a) = -Lap + a^2 |x|^2, interior only.

    The one-cell boundary ring is left as zeros; comparisons should mask it.
    """
    axes = as_axes(grid, d1)
    shape = tuple(ax.n for ax in axes)
    f = np.asarray(phi).reshape(shape)
    lap = np.zeros_like(f)
    inner = tuple(slice(1, -1) for _ in range(d1))
    for j, ax in enumerate(axes):
        h2 = ax.spacing ** 2
        up = tuple(slice(2, None) if i == j else slice(1, -1) for i in range(d1))
        dn = tuple(slice(None, -2) if i == j else slice(1, -1) for i in range(d1))
        lap[inner] += (f[up] - 2 * f[inner] + f[dn]) / h2
    pts = grid_points(axes)
    r2 = (pts ** 2).sum(axis=1).reshape(shape)
    out = -lap + (a * a) * r2 * f
    ring = np.ones(shape, dtype=bool)
    ring[inner] = False
    out[ring] = 0.0
    return out.reshape(np.asarray(phi).shape)


def interior_mask(axes) -> np.ndarray:
    """Boolean mask excluding the one-cell boundary ring, flattened."""
    shape = tuple(ax.n for ax in axes)
    m = np.zeros(shape, dtype=bool)
    m[tuple(slice(1, -1) for _ in shape)] = True
    return m.ravel()


def operator_norm(matvec, n: int, steps: int = 50, tol: float = 1e-6,
                  seed: int = 0, dtype=float) -> float:
    """Power-iteration estimate of the spectral norm of a linear map."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n).astype(dtype)
    if np.iscomplexobj(np.empty(0, dtype=dtype)):
        v = v + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    prev = 0.0
    for _ in range(steps):
        w = matvec(v)
        nrm = float(np.linalg.norm(w))
        if nrm == 0.0:
            return 0.0
        v = w / nrm
        if abs(nrm - prev) <= tol * nrm:
            break
        prev = nrm
    return nrm


def idempotence_residual(kernel: ProjectionKernel, **kw) -> float:
    """Operator norm of P.P - P in the weighted L^2 metric."""
    def matvec(z):
        return kernel.weighted_matvec(kernel.weighted_matvec(z)) - kernel.weighted_matvec(z)
    return operator_norm(matvec, kernel.n_points, **kw)


def cross_residual(k1: ProjectionKernel, k2: ProjectionKernel, **kw) -> float:
    """Operator norm of P_k P_j (should vanish for k != j)."""
    def fwd(z):
        return k1.weighted_matvec(k2.weighted_matvec(z))

    def matvec(z):
        return k2.weighted_matvec(k1.weighted_matvec(fwd(z)))
    return math.sqrt(max(operator_norm(matvec, k1.n_points, **kw), 0.0))
