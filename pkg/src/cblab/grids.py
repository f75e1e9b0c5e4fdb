"""Discretizations of the unit ball with weighted quadrature.

Two grid modes:

* ``radial`` -- fields depend on ``r = |y|`` only (N = 2 or 3).
* ``polar`` -- the N = 2 disk as a tensor grid (r_j, theta_k) with a
  uniform periodic angular grid.

Radial nodes are Chebyshev-Gauss-Lobatto points mapped to [0, 1] with the
origin excluded, ``r_j = (1 - cos(pi j / n_r)) / 2``, ``j = 1..n_r``: the
cosine clustering toward ``r = 1`` resolves the boundary layer of weights
like ``(1 - r^2)^kappa`` and ``(1 - r^2)^kappa log(1 - r^2)`` that
degenerate only there.  Quadrature weights are interpolatory with respect
to the surface measure ``r^(N-1) dr`` (times the sphere area), so plain
polynomials of any parity integrate exactly up to degree n_r - 1, and the
log-weighted integrands converge at order >= 2 because the integrand
vanishes algebraically at the clustered endpoint.

The last radial level sits at ``r = 1`` exactly; those are the boundary
nodes, which also carry separate surface weights for flux integrals.
Radial lines extend through the origin (a scalar field is even across it,
a radial vector component odd; in polar mode the mirror values live on the
opposite ray), so no node at ``r = 0`` is needed and no coordinate
singularity ever appears in the operators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad as _scipy_quad


class GridConfigError(ValueError):
    """Unsupported dimension/mode combination or bad resolution."""


def chebyshev_r_nodes(m: int) -> np.ndarray:
    """CGL points (1 - cos(pi j/m))/2 for j = 1..m; last node exactly 1."""
    r = 0.5 * (1.0 - np.cos(np.pi * np.arange(1, m + 1) / m))
    r[-1] = 1.0
    return r


def _sin_moment(k: int, m: int) -> float:
    """int_0^pi cos(k t) sin(m t) dt."""
    if (k + m) % 2 == 0:
        return 0.0
    return 2.0 * m / (m**2 - k**2)


def _rpow_moments(n: int, dim_N: int) -> np.ndarray:
    """Moments int_0^1 cos(k theta(r)) r^(N-1) dr in the r = (1-cos)/2 map.

    Closed forms from expanding r(t)^(N-1) sin(t)/2 in sines.
    """
    k = np.arange(n)
    out = np.empty(n)
    for kk in k:
        if dim_N == 2:
            out[kk] = 0.25 * (_sin_moment(kk, 1) - 0.5 * _sin_moment(kk, 2))
        else:
            out[kk] = 0.125 * (1.25 * _sin_moment(kk, 1) - _sin_moment(kk, 2)
                               + 0.25 * _sin_moment(kk, 3))
    return out


def _subset_weights(r_nodes: np.ndarray, moments: np.ndarray) -> np.ndarray:
    """Interpolatory weights on the given nodes from cosine-basis moments.

    Solves sum_j w_j cos(k theta(r_j)) = moments[k] for k = 0..n-1; well
    conditioned because the nodes are cosine-distributed.
    """
    n = len(r_nodes)
    theta = np.arccos(np.clip(1.0 - 2.0 * r_nodes, -1.0, 1.0))
    V = np.cos(np.outer(np.arange(n), theta))
    return np.linalg.solve(V, moments[:n])


def fd_weights(x: np.ndarray, x0: float, order: int) -> np.ndarray:
    """Fornberg finite-difference weights for d^order/dx^order at x0."""
    n = len(x)
    c = np.zeros((n, order + 1))
    c1 = 1.0
    c4 = x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, order]


def _mirrored_derivative_matrices(r, order, width, parity, bias=0):
    """Differentiation matrices on a radial line with mirror extension.

    The line r_1..r_m extends through the origin as f(-r_j) = parity *
    f(r_j) (the mirror value comes from the same line in radial mode, from
    the opposite ray in polar mode; the caller handles that pairing).
    Returns ``(D_pos, D_neg)`` with ``df = D_pos @ f + D_neg @ f_mirror``.
    At r = 1 the stencils are one-sided: the degenerate operator is
    characteristic there, so no boundary condition is imposed.

    ``bias`` shifts the stencil window toward smaller r (upwind for
    outward transport).
    """
    n = len(r)
    D_pos = np.zeros((n, n))
    D_neg = np.zeros((n, n))
    for i in range(n):
        lo = i - (width - 1) // 2 - bias
        hi = lo + width - 1
        if hi > n - 1:
            lo -= hi - (n - 1)
            hi = n - 1
        idx = np.arange(lo, hi + 1)
        # extended index -j (j >= 1) sits at -r_j; index 0 means r_1's
        # neighbour across the origin is -r_1, so shift negatives by one
        pos = np.where(idx >= 0, r[np.minimum(idx, n - 1)], -r[np.minimum(-idx - 1, n - 1)])
        wts = fd_weights(pos, r[i], order)
        for j, c in zip(idx, wts):
            if j >= 0:
                D_pos[i, j] += c
            else:
                D_neg[i, -j - 1] += parity * c
    return D_pos, D_neg


@dataclass
class BallGrid:
    """Discretization of the unit ball B(0,1) in R^N.

    Attributes
    ----------
    dim_N : spatial dimension (2 or 3)
    mode : "radial" or "polar"
    r : radial levels, ascending in (0, 1], last level exactly 1
    theta : angular nodes (polar mode only)
    quad_weights : per-node volume weights incl. surface measure factor
    boundary_weights : per-boundary-node surface weights for d(sigma)
    """

    dim_N: int
    mode: str
    r: np.ndarray
    theta: np.ndarray | None
    quad_weights: np.ndarray
    boundary_weights: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n_r(self) -> int:
        return len(self.r)

    @property
    def n_theta(self) -> int:
        return 0 if self.theta is None else len(self.theta)

    @property
    def field_shape(self) -> tuple:
        if self.mode == "radial":
            return (self.n_r,)
        return (self.n_r, self.n_theta)

    @property
    def u(self) -> np.ndarray:
        """Squared radius |y|^2 broadcast to field shape."""
        if self.mode == "radial":
            return self.r**2
        return np.broadcast_to((self.r**2)[:, None], self.field_shape)

    @property
    def rr(self) -> np.ndarray:
        """Radius broadcast to field shape."""
        if self.mode == "radial":
            return self.r
        return np.broadcast_to(self.r[:, None], self.field_shape)

    @property
    def nodes(self) -> np.ndarray:
        """Cartesian node coordinates, shape field_shape + (dim_N,)."""
        if self.mode == "radial":
            pts = np.zeros((self.n_r, self.dim_N))
            pts[:, 0] = self.r
            return pts
        ct, st = np.cos(self.theta), np.sin(self.theta)
        pts = np.empty(self.field_shape + (2,))
        pts[..., 0] = self.r[:, None] * ct[None, :]
        pts[..., 1] = self.r[:, None] * st[None, :]
        return pts

    @property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.field_shape, dtype=bool)
        mask[-1] = True
        return mask

    def descriptor(self) -> dict:
        return {"dim_N": self.dim_N, "mode": self.mode,
                "n_r": self.n_r, "n_theta": self.n_theta}

    # -- quadrature ---------------------------------------------------

    def quad(self, values: np.ndarray, extra_weight: np.ndarray | None = None) -> float:
        """Approximate int_B values * extra_weight dy."""
        vals = np.asarray(values, dtype=float)
        if vals.shape != self.field_shape:
            raise ValueError(f"field shape {vals.shape} does not match grid {self.field_shape}")
        if extra_weight is not None:
            ew = np.asarray(extra_weight, dtype=float)
            if ew.shape != self.field_shape:
                raise ValueError("extra weight shape does not match grid")
            vals = vals * ew
        return float(np.sum(self.quad_weights * vals))

    def boundary_quad(self, values: np.ndarray) -> float:
        """Approximate int_{dB} values d(sigma) from boundary node values."""
        vals = np.asarray(values, dtype=float)
        if vals.shape == self.field_shape:
            vals = np.atleast_1d(vals[-1])
        else:
            vals = np.atleast_1d(vals)
        if vals.shape != self.boundary_weights.shape:
            raise ValueError("boundary values shape mismatch")
        return float(np.sum(self.boundary_weights * vals))

    def weighted_rule(self, sigma: float, with_log: bool) -> np.ndarray:
        """Volume weights with the factor (1-|y|^2)^sigma (optionally times
        log(1-|y|^2)) folded in, exact for smooth integrands.

        Identity checks use these instead of pointwise weight evaluation,
        so their residuals reflect only differentiation error even when
        the degenerate weight would dominate plain quadrature error.
        Cached per (sigma, with_log).
        """
        key = ("jacobi", round(float(sigma), 14), bool(with_log))
        if key not in self._cache:
            mom = _degenerate_moments(self.n_r, self.dim_N, float(sigma), bool(with_log))
            w_r = _subset_weights(self.r, mom)
            if self.mode == "radial":
                w = (2.0 * np.pi if self.dim_N == 2 else 4.0 * np.pi) * w_r
            else:
                dth = 2.0 * np.pi / self.n_theta
                w = np.broadcast_to((dth * w_r)[:, None], self.field_shape).copy()
            self._cache[key] = w
        return self._cache[key]

    # -- differentiation -----------------------------------------------

    def _dmats(self, key):
        if key not in self._cache:
            order, parity, bias = key
            width = 4 if bias else 5
            self._cache[key] = _mirrored_derivative_matrices(
                self.r, order, width, parity, bias=bias)
        return self._cache[key]

    def d_r(self, vals: np.ndarray, parity: int = 1, order: int = 1,
            bias: int = 0) -> np.ndarray:
        """Radial derivative with mirror extension through the origin.

        ``parity`` is +1 for scalar fields, -1 for radial vector
        components.  ``bias=1`` biases stencils inward (upwind for
        outward transport).
        """
        D_pos, D_neg = self._dmats((order, parity, bias))
        if self.mode == "radial":
            return D_pos @ vals + D_neg @ vals
        half = self.n_theta // 2
        mirror = np.roll(vals, half, axis=1)
        return D_pos @ vals + D_neg @ mirror

    def d_theta(self, vals: np.ndarray, order: int = 1) -> np.ndarray:
        """Spectral angular derivative (polar mode).

        Fourier differentiation is exact for resolved harmonics, which
        keeps the w_thth / r^2 term clean at the innermost radii where a
        finite-difference angular error would be amplified by 1/r^2.
        """
        if self.mode != "polar":
            raise GridConfigError("d_theta requires a polar grid")
        if order not in (1, 2):
            raise ValueError("order must be 1 or 2")
        k = np.fft.rfftfreq(self.n_theta, d=1.0 / self.n_theta)
        spec = np.fft.rfft(vals, axis=1)
        if order == 1:
            spec = spec * (1j * k)[None, :]
            if self.n_theta % 2 == 0:
                spec[:, -1] = 0.0  # Nyquist mode has no odd derivative
        else:
            spec = spec * (-(k**2))[None, :]
        return np.fft.irfft(spec, n=self.n_theta, axis=1)


@lru_cache(maxsize=4096)
def _degenerate_moment_single(k: int, dim_N: int, sigma: float, with_log: bool) -> float:
    """int_0^1 cos(k theta(r)) r^(N-1) (1-r^2)^sigma [log(1-r^2)] dr.

    Split (1-r^2)^sigma = (1-r)^sigma (1+r)^sigma and log(1-r^2) =
    log(1-r) + log(1+r); QUADPACK's QAWS handles the endpoint factor.
    """

    def base(rr):
        th = np.arccos(np.clip(1.0 - 2.0 * rr, -1.0, 1.0))
        return np.cos(k * th) * rr ** (dim_N - 1) * (1.0 + rr) ** sigma

    if not with_log:
        val, _ = _scipy_quad(base, 0.0, 1.0, weight="alg", wvar=(0.0, sigma), limit=400)
        return val
    v1, _ = _scipy_quad(base, 0.0, 1.0, weight="alg-logb", wvar=(0.0, sigma), limit=400)
    v2, _ = _scipy_quad(lambda rr: base(rr) * np.log1p(rr), 0.0, 1.0,
                        weight="alg", wvar=(0.0, sigma), limit=400)
    return v1 + v2


def _degenerate_moments(n: int, dim_N: int, sigma: float, with_log: bool) -> np.ndarray:
    return np.array([_degenerate_moment_single(k, dim_N, sigma, with_log)
                     for k in range(n)])


def build_ball_grid(dim_N: int, mode: str, n_r: int, n_theta: int = 0) -> BallGrid:
    """Build a unit-ball grid with n_r radial levels (last at r = 1).

    Polar mode requires an even ``n_theta``: radial lines pair up across
    the origin for through-center stencils.
    """
    if dim_N not in (2, 3):
        raise GridConfigError(f"dim_N must be 2 or 3, got {dim_N}")
    if mode not in ("radial", "polar"):
        raise GridConfigError(f"unknown mode {mode!r}")
    if mode == "polar" and dim_N != 2:
        raise GridConfigError("polar mode is only available for N = 2")
    if n_r < 8:
        raise GridConfigError("n_r must be at least 8")

    r = chebyshev_r_nodes(n_r)
    w_r = _subset_weights(r, _rpow_moments(n_r, dim_N))
    if np.any(w_r < -1e-13 * w_r.max()):
        raise GridConfigError("non-positive quadrature weight")
    w_r = np.maximum(w_r, 1e-300)

    if mode == "radial":
        qw = (2.0 * np.pi if dim_N == 2 else 4.0 * np.pi) * w_r
        bw = np.array([2.0 * np.pi if dim_N == 2 else 4.0 * np.pi])
        return BallGrid(dim_N, mode, r, None, qw, bw)

    if n_theta < 8 or n_theta % 2:
        raise GridConfigError("polar mode needs even n_theta >= 8")
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    dth = 2.0 * np.pi / n_theta
    qw = np.broadcast_to((dth * w_r)[:, None], (n_r, n_theta)).copy()
    bw = np.full(n_theta, dth)
    return BallGrid(dim_N, mode, r, theta, qw, bw)
