"""Direct integration of the similarity-variable wave equation on B(0,1).

The evolved system is the first-order form of

    dss w = div(grad w - (y.grad w) y) - 2(p+1)/(p-1)^2 w + |w|^(p-1) w
            - [(p+3)/(p-1)] ds w - 2 y.grad(ds w)
            + e^(-2ps/(p-1)) f(e^(2s/(p-1)) w),

posed with no boundary condition: the principal operator degenerates at
|y| = 1 (characteristic boundary) and the transport term carries
information outward, which the inward-biased stencils respect.  The
time-weighted form used by the energy functionals differs only by
expanding the weighted divergence, (1/phi) div(phi grad w - (y.grad w)
phi y) = div(grad w - (y.grad w) y) - (2/s^b) y.grad w, assembled
analytically here (never by differencing phi).

Stepping is explicit RK2 (Heun) under a frozen-coefficient CFL bound; the
clustered boundary nodes and unit-scale characteristic speeds make the
stable step O(1/n_r^2).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .grids import BallGrid
from .nonlin import Perturbation, make_perturbation
from .ops import ScalarField, degenerate_div, h_norm_squared, transport_outward, y_dot_grad
from .params import p_conformal


class SimilarityInstability(RuntimeError):
    """Raised when a step grows the energy norm by more than 10x."""


@dataclass(frozen=True)
class Frame:
    """Similarity-frame metadata: expansion point, blow-up time, model."""

    dim_N: int
    p: float
    a: float
    M: float = 1.0
    perturbation: str = "none"
    x0: tuple = (0.0, 0.0)
    T0: float = 1.0

    def __post_init__(self):
        if abs(self.p - p_conformal(self.dim_N)) > 1e-12:
            raise ValueError("similarity variables require the conformal exponent "
                             f"p = {p_conformal(self.dim_N)} for N = {self.dim_N}")

    @cached_property
    def pert(self) -> Perturbation:
        return make_perturbation(self.perturbation, self.p, self.a, self.M)

    def descriptor(self) -> dict:
        return {"dim_N": self.dim_N, "p": self.p, "a": self.a, "M": self.M,
                "perturbation": self.perturbation,
                "x0": list(self.x0), "T0": self.T0}


@dataclass
class SimilarState:
    """Samples of (w, ds w) on a ball grid at similarity time s."""

    grid: BallGrid
    w: np.ndarray
    ws: np.ndarray
    s: float
    b: float
    frame: Frame

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        self.ws = np.asarray(self.ws, dtype=float)
        if self.w.shape != self.grid.field_shape or self.ws.shape != self.grid.field_shape:
            raise ValueError("state arrays do not match the grid")

    def h_norm(self) -> float:
        return float(np.sqrt(h_norm_squared(self.w, self.ws, self.grid)))

    def copy(self) -> "SimilarState":
        return replace(self, w=self.w.copy(), ws=self.ws.copy())


def rescaled_f(state: SimilarState) -> np.ndarray:
    """e^(-2ps/(p-1)) f(e^(2s/(p-1)) w) at the nodes."""
    p = state.frame.p
    pert = state.frame.pert
    if pert.kind == "none":
        return np.zeros_like(state.w)
    gamma = 2.0 / (p - 1.0)
    return np.exp(-p * gamma * state.s) * pert.f(np.exp(gamma * state.s) * state.w)


def rescaled_F(state: SimilarState) -> np.ndarray:
    """e^(-2(p+1)s/(p-1)) F(e^(2s/(p-1)) w) at the nodes."""
    p = state.frame.p
    pert = state.frame.pert
    if pert.kind == "none":
        return np.zeros_like(state.w)
    gamma = 2.0 / (p - 1.0)
    return np.exp(-(p + 1.0) * gamma * state.s) * pert.F(np.exp(gamma * state.s) * state.w)


def _wave_operators(grid: BallGrid):
    """Cached dense matrices: (A_pos, A_neg) for the degenerate divergence
    and (T_pos, T_neg) for the upwind outward transport r d/dr."""
    key = "simops"
    if key not in grid._cache:
        r = grid.r
        one_m = 1.0 - r**2
        D1p, D1n = grid._dmats((1, 1, 0))
        D2p, D2n = grid._dmats((2, 1, 0))
        B1p, B1n = grid._dmats((1, 1, 1))
        if grid.mode == "radial":
            coef1 = (grid.dim_N - 1) * one_m / r - 2.0 * r
        else:
            coef1 = 1.0 / r - 3.0 * r
        A_pos = one_m[:, None] * D2p + coef1[:, None] * D1p
        A_neg = one_m[:, None] * D2n + coef1[:, None] * D1n
        T_pos = r[:, None] * B1p
        T_neg = r[:, None] * B1n
        if grid.mode == "radial":
            grid._cache[key] = (A_pos + A_neg, None, T_pos + T_neg, None)
        else:
            grid._cache[key] = (A_pos, A_neg, T_pos, T_neg)
    return grid._cache[key]


def _apply_wave(grid: BallGrid, w: np.ndarray, ws: np.ndarray):
    """(degenerate divergence of w, outward transport of ws) via the
    cached matrices; equals the generic ops to rounding."""
    A_pos, A_neg, T_pos, T_neg = _wave_operators(grid)
    if grid.mode == "radial":
        dd = A_pos @ w
        tr = T_pos @ ws
    else:
        half = grid.n_theta // 2
        dd = A_pos @ w + A_neg @ np.roll(w, half, axis=1)
        dd += grid.d_theta(w, order=2) / (grid.r**2)[:, None]
        tr = T_pos @ ws + T_neg @ np.roll(ws, half, axis=1)
    return dd, tr


def _polar_mask(grid: BallGrid) -> np.ndarray:
    """Angular mode mask m <= max(3, 2.5 n_theta r) per radial level.

    A smooth disk function's m-th harmonic scales like r^m, so the
    discarded content is below rounding; keeping it would force the step
    to resolve frequencies m/r at the innermost radius.
    """
    key = "polar_mask"
    if key not in grid._cache:
        m = np.fft.rfftfreq(grid.n_theta, d=1.0 / grid.n_theta)
        m_eff = np.maximum(3.0, 2.5 * grid.n_theta * grid.r)
        grid._cache[key] = (m[None, :] <= m_eff[:, None]).astype(float)
    return grid._cache[key]


def _filter_polar(grid: BallGrid, vals: np.ndarray) -> np.ndarray:
    spec = np.fft.rfft(vals, axis=1) * _polar_mask(grid)
    return np.fft.irfft(spec, n=grid.n_theta, axis=1)


def rhs(state: SimilarState) -> tuple[np.ndarray, np.ndarray]:
    """Right-hand side (dw/ds, d(ds w)/ds) of the first-order system."""
    p = state.frame.p
    w, ws = state.w, state.ws
    c1 = 2.0 * (p + 1.0) / (p - 1.0) ** 2
    friction = (p + 3.0) / (p - 1.0)
    dd, tr = _apply_wave(state.grid, w, ws)
    dws = (dd - c1 * w + np.abs(w) ** (p - 1.0) * w - friction * ws
           - 2.0 * tr + rescaled_f(state))
    if state.grid.mode == "polar":
        return _filter_polar(state.grid, ws), _filter_polar(state.grid, dws)
    return ws.copy(), dws


def rhs_parts(state: SimilarState) -> dict:
    """Named pieces of the time-weighted form of the equation.

    ``weighted_div`` is the analytic expansion of (1/phi) div(phi grad w
    - (y.grad w) phi y); ``drift`` is the (2/s^b) y.grad w term.  Their
    sum reproduces the plain divergence term exactly, which the
    equivalence tests assert node by node.
    """
    if state.s < 1.0:
        raise ValueError("weighted form is only used for s >= 1")
    p = state.frame.p
    w, ws = state.w, state.ws
    ydg = y_dot_grad(ScalarField(state.grid, w))
    sb = state.s ** (-state.b)
    return {
        "weighted_div": degenerate_div(ScalarField(state.grid, w)).values - 2.0 * sb * ydg,
        "drift": 2.0 * sb * ydg,
        "linear": -2.0 * (p + 1.0) / (p - 1.0) ** 2 * w,
        "power": np.abs(w) ** (p - 1.0) * w,
        "friction": -(p + 3.0) / (p - 1.0) * ws,
        "transport": -2.0 * transport_outward(ScalarField(state.grid, ws)),
        "forcing": rescaled_f(state),
    }


def cfl_limit(grid: BallGrid, safety: float = 0.35) -> float:
    """Largest stable step from the frozen-coefficient wave/transport speeds.

    Radial characteristics run at |r +- 1| <= 1 + r (wave sqrt(1-r^2)
    plus transport 2r).  In polar mode the retained angular modes (after
    the polar filter) oscillate at m_eff/r; the bound balances that
    frequency against the O(1) friction available to damp RK2's weak
    growth on oscillatory modes.
    """
    r = grid.r
    gaps = np.diff(np.concatenate([[0.0], r]))
    local = np.minimum(gaps, np.append(np.diff(r), np.inf))
    ds = np.min(local / (1.0 + r))
    if grid.mode == "polar":
        m_eff = np.minimum(grid.n_theta / 2.0, np.maximum(3.0, 2.5 * grid.n_theta * r))
        omega = m_eff / r
        ds = min(ds, float(np.min(np.minimum(1.0 / omega, (8.0 / omega**4) ** (1.0 / 3.0)))))
    return safety * ds


def step(state: SimilarState, ds: float) -> SimilarState:
    """One explicit RK2 (Heun) step; requires ds at or below the CFL limit."""
    k1w, k1v = rhs(state)
    pred = replace(state, w=state.w + ds * k1w, ws=state.ws + ds * k1v, s=state.s + ds)
    k2w, k2v = rhs(pred)
    new = replace(state,
                  w=state.w + 0.5 * ds * (k1w + k2w),
                  ws=state.ws + 0.5 * ds * (k1v + k2v),
                  s=state.s + ds)
    h_old = h_norm_squared(state.w, state.ws, state.grid)
    h_new = h_norm_squared(new.w, new.ws, new.grid)
    if not np.isfinite(h_new) or h_new > 100.0 * max(h_old, 1e-300):
        raise SimilarityInstability(
            f"H-norm grew from {np.sqrt(h_old):.3e} to {np.sqrt(max(h_new, 0)):.3e} "
            f"in one step at s = {state.s:.4f} (ds = {ds:.3e})")
    return new


def advance(state: SimilarState, s_target: float, ds_max: float | None = None) -> SimilarState:
    """Integrate to s_target with internal CFL-limited substeps."""
    ds_cfl = cfl_limit(state.grid)
    if ds_max is not None:
        ds_cfl = min(ds_cfl, ds_max)
    if state.grid.mode == "radial":
        return _advance_radial(state, s_target, ds_cfl)
    cur = state
    while cur.s < s_target - 1e-13:
        cur = step(cur, min(ds_cfl, s_target - cur.s))
    return cur


def _advance_radial(state: SimilarState, s_target: float, ds_cfl: float) -> SimilarState:
    """Allocation-light RK2 loop for radial grids (same semantics as step)."""
    grid, frame = state.grid, state.frame
    A, _, T, _ = _wave_operators(grid)
    p = frame.p
    c1 = 2.0 * (p + 1.0) / (p - 1.0) ** 2
    friction = (p + 3.0) / (p - 1.0)
    gamma = 2.0 / (p - 1.0)
    pert = frame.pert if frame.perturbation != "none" else None
    qw = grid.quad_weights
    one_m = 1.0 - grid.u
    D1, _ = grid._dmats((1, 1, 0))

    def force(w, ws, s):
        out = A @ w - c1 * w + np.abs(w) ** (p - 1.0) * w - friction * ws - 2.0 * (T @ ws)
        if pert is not None:
            out += np.exp(-p * gamma * s) * pert.f(np.exp(gamma * s) * w)
        return out

    def h_sq(w, ws):
        return float(np.sum(qw * (ws**2 + (D1 @ w) ** 2 * one_m + w**2)))

    w, ws, s = state.w.copy(), state.ws.copy(), state.s
    h_old = h_sq(w, ws)
    while s < s_target - 1e-13:
        ds = min(ds_cfl, s_target - s)
        k1v = force(w, ws, s)
        w1 = w + ds * ws
        v1 = ws + ds * k1v
        k2v = force(w1, v1, s + ds)
        w += 0.5 * ds * (ws + v1)   # k1w = ws, k2w = v1
        ws += 0.5 * ds * (k1v + k2v)
        s += ds
        h_new = h_sq(w, ws)
        if not np.isfinite(h_new) or h_new > 100.0 * max(h_old, 1e-300):
            raise SimilarityInstability(
                f"H-norm grew from {np.sqrt(h_old):.3e} to {np.sqrt(max(h_new, 0)):.3e} "
                f"in one step at s = {s:.4f} (ds = {ds:.3e})")
        h_old = h_new
    return replace(state, w=w, ws=ws, s=s)


def integrate(state: SimilarState, s_end: float, sample_ds: float,
              ds_max: float | None = None) -> list[SimilarState]:
    """Trajectory sampled every ``sample_ds`` (internally substepping)."""
    samples = [state.copy()]
    n = int(round((s_end - state.s) / sample_ds))
    cur = state
    s0 = state.s
    for i in range(1, n + 1):
        cur = advance(cur, s0 + i * sample_ds, ds_max)
        samples.append(cur.copy())
    return samples
