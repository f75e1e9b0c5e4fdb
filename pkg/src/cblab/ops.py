"""Fields on ball grids and the degenerate differential operators.

Gradients are returned in Cartesian components.  All radial
differentiation extends lines through the origin (scalar fields are even
across it, radial vector components odd), and one-sided stencils are used
at r = 1: the operator div(grad w - (y.grad w) y) is characteristic there,
so no boundary condition is imposed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import BallGrid

ORIGIN_TOL = 1e-12


@dataclass
class ScalarField:
    grid: BallGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.field_shape:
            raise ValueError(f"scalar field shape {self.values.shape} "
                             f"!= grid shape {self.grid.field_shape}")


@dataclass
class VectorField:
    grid: BallGrid
    values: np.ndarray  # shape (dim_N,) + field_shape, Cartesian components

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        want = (self.grid.dim_N,) + self.grid.field_shape
        if self.values.shape != want:
            raise ValueError(f"vector field shape {self.values.shape} != {want}")


def field_from_function(grid: BallGrid, fn) -> ScalarField:
    """Sample fn(points) -> values; points has shape field_shape + (dim,)."""
    return ScalarField(grid, np.asarray(fn(grid.nodes), dtype=float))


def _check_same_grid(a, b):
    if a.grid is not b.grid and a.grid.descriptor() != b.grid.descriptor():
        raise ValueError("fields live on different grids")


def radial_component(vf: VectorField) -> np.ndarray:
    """V . e_r at every node (e_r = x-axis direction in radial mode)."""
    g = vf.grid
    if g.mode == "radial":
        return vf.values[0]
    ct, st = np.cos(g.theta), np.sin(g.theta)
    return vf.values[0] * ct[None, :] + vf.values[1] * st[None, :]


def grad(f: ScalarField) -> VectorField:
    g = f.grid
    wr = g.d_r(f.values, parity=1)
    if g.mode == "radial":
        out = np.zeros((g.dim_N,) + g.field_shape)
        out[0] = wr
        return VectorField(g, out)
    wth = g.d_theta(f.values) / g.r[:, None]
    ct, st = np.cos(g.theta), np.sin(g.theta)
    out = np.empty((2,) + g.field_shape)
    out[0] = wr * ct[None, :] - wth * st[None, :]
    out[1] = wr * st[None, :] + wth * ct[None, :]
    return VectorField(g, out)


def div(vf: VectorField) -> ScalarField:
    """Divergence; in radial mode the input must be a radial vector field."""
    g = vf.grid
    vr = radial_component(vf)
    dvr = g.d_r(vr, parity=-1)
    if g.mode == "radial":
        over_r = np.where(g.r > ORIGIN_TOL, vr / np.where(g.r > 0, g.r, 1.0), dvr)
        return ScalarField(g, dvr + (g.dim_N - 1) * over_r)
    ct, st = np.cos(g.theta), np.sin(g.theta)
    vth = -vf.values[0] * st[None, :] + vf.values[1] * ct[None, :]
    return ScalarField(g, dvr + vr / g.r[:, None] + g.d_theta(vth) / g.r[:, None])


def y_dot_grad(f: ScalarField) -> np.ndarray:
    """y . grad w = r dw/dr; no angular part, exact at the origin (0)."""
    g = f.grid
    return g.rr * g.d_r(f.values, parity=1)


def grad_squared(f: ScalarField) -> np.ndarray:
    """|grad w|^2 at nodes."""
    g = f.grid
    wr = g.d_r(f.values, parity=1)
    if g.mode == "radial":
        return wr**2
    wth = g.d_theta(f.values) / g.r[:, None]
    return wr**2 + wth**2


def tangential_squared(f: ScalarField) -> np.ndarray:
    """|grad_theta w|^2 = |grad w|^2 - (y.grad w)^2 / |y|^2."""
    g = f.grid
    if g.mode == "radial":
        return np.zeros(g.field_shape)
    return (g.d_theta(f.values) / g.r[:, None]) ** 2


def radial_tangential_split(f: ScalarField) -> tuple[VectorField, VectorField]:
    """Orthogonal split grad w = grad_r w + grad_theta w.

    At nodes with |y| < 1e-12 the whole gradient is assigned to the radial
    part (both split identities then hold by continuity).
    """
    g = f.grid
    full = grad(f)
    if g.mode == "radial":
        zero = VectorField(g, np.zeros_like(full.values))
        return full, zero
    wr = g.d_r(f.values, parity=1)
    ct, st = np.cos(g.theta), np.sin(g.theta)
    rad = np.empty_like(full.values)
    rad[0] = wr * ct[None, :]
    rad[1] = wr * st[None, :]
    tan = full.values - rad
    return VectorField(g, rad), VectorField(g, tan)


def degenerate_div(f: ScalarField) -> ScalarField:
    """div(grad w - (y.grad w) y), the similarity-variable wave operator.

    Radial:  (1-r^2) w_rr + [(N-1)/r](1-r^2) w_r - 2 r w_r
    Polar:   (1-r^2) w_rr + (1/r - 3 r) w_r + w_theta_theta / r^2
    with L'Hopital regularization at the radial-mode origin.
    """
    g = f.grid
    w = f.values
    wr = g.d_r(w, parity=1)
    wrr = g.d_r(w, parity=1, order=2)
    if g.mode == "radial":
        one_m = 1.0 - g.r**2
        over_r = np.where(g.r > ORIGIN_TOL, wr / np.where(g.r > 0, g.r, 1.0), wrr)
        return ScalarField(g, one_m * wrr + (g.dim_N - 1) * one_m * over_r - 2.0 * g.r * wr)
    r = g.r[:, None]
    out = (1.0 - r**2) * wrr + (1.0 / r - 3.0 * r) * wr + g.d_theta(w, order=2) / r**2
    return ScalarField(g, out)


def transport_outward(f: ScalarField) -> np.ndarray:
    """y . grad f with inward-biased (upwind) radial stencils.

    Used for the -2 y.grad(ds w) term, whose characteristics run toward
    the boundary; the bias keeps explicit stepping stable there.
    """
    g = f.grid
    return g.rr * g.d_r(f.values, parity=1, bias=1)


def h_norm_squared(w: np.ndarray, ws: np.ndarray, grid: BallGrid) -> float:
    """Energy-space norm int (ws^2 + |grad w|^2 (1-|y|^2) + w^2) dy."""
    gs = grad_squared(ScalarField(grid, w))
    return grid.quad(ws**2 + gs * (1.0 - grid.u) + w**2)
