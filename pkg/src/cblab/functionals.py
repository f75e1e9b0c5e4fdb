"""Weighted energy functionals of similarity-variable states.

The two degenerate weights are

    phi(y, s) = (1 - |y|^2)^(s^-b),
    psi(y, s) = (1 - |y|^2)^(1 + s^-b) (1 - log(1 - |y|^2)),

defined for s >= 1 and b > 1.  phi is 1 at the origin and vanishes at the
boundary for finite s; pointwise phi -> 1 as s -> infinity.  On top of
them sit the energy E, the cross term J, H = E + J, the radial-multiplier
functional L, the damped combinations K and N, and the unweighted pair
E0, H0 = E0 + s^(-(a-2)/4) that is monotone along trajectories once a > 2.

``trace_from_states`` evaluates everything along a trajectory into a
fixed-schema column table (CSV + JSON sidecar, schema version pinned).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .grids import BallGrid
from .ops import ScalarField, grad_squared, y_dot_grad
from .params import eps0
from .similarity import SimilarState, rescaled_F

TRACE_SCHEMA = "cblab-trace-v1"
TRACE_COLUMNS = [
    "s", "E", "J", "H", "L", "K", "N_val", "E0", "H0",
    "boundary_flux", "weighted_dissipation", "Hnorm", "Lp_norm",
    "h1_w", "l2_ws", "gradsq", "wphi2", "lpphi", "gradphi_def",
]


class WeightDomainError(ValueError):
    """Weights are only defined in the regime s >= 1, b > 1."""


@dataclass
class WeightSet:
    """Pointwise weight evaluations at the grid nodes for given (s, b)."""

    s: float
    b: float
    sigma: float                 # s^-b
    phi: np.ndarray
    psi: np.ndarray
    log_phi: np.ndarray          # phi * log(1 - |y|^2), 0 at the boundary
    phi_over_1m: np.ndarray      # phi / (1 - |y|^2), 0 at the boundary


def eval_weights(grid: BallGrid, s: float, b: float) -> WeightSet:
    """Evaluate phi, psi and derived combinations at the nodes.

    Boundary nodes get the limiting value 0 for every entry (their
    integrands vanish there; the quadrature never needs a cap).
    """
    if s < 1.0:
        raise WeightDomainError(f"weights require s >= 1, got s = {s}")
    if b <= 1.0:
        raise WeightDomainError(f"weights require b > 1, got b = {b}")
    sigma = float(s) ** (-float(b))
    u = grid.u
    interior = u < 1.0
    log1m = np.where(interior, np.log1p(-np.where(interior, u, 0.0)), 0.0)
    phi = np.where(interior, np.exp(sigma * log1m), 0.0)
    one_m = 1.0 - u
    psi = np.where(interior, one_m * phi * (1.0 - log1m), 0.0)
    log_phi = np.where(interior, phi * log1m, 0.0)
    phi_over_1m = np.where(interior, phi / np.where(interior, one_m, 1.0), 0.0)
    return WeightSet(float(s), float(b), sigma, phi, psi, log_phi, phi_over_1m)


@dataclass
class _StateGeometry:
    """Cached first-derivative combinations of one state."""

    gsq: np.ndarray        # |grad w|^2
    ydg: np.ndarray        # y . grad w
    defect: np.ndarray     # |grad w|^2 - (y.grad w)^2


def _geometry(state: SimilarState) -> _StateGeometry:
    f = ScalarField(state.grid, state.w)
    gsq = grad_squared(f)
    ydg = y_dot_grad(f)
    return _StateGeometry(gsq, ydg, gsq - ydg**2)


def eval_E(state: SimilarState, weights: WeightSet | None = None,
           geom: _StateGeometry | None = None) -> float:
    """Weighted energy: quadratic part minus nonlinear potentials, all
    against phi, including the rescaled perturbation potential."""
    p = state.frame.p
    ws0 = weights or eval_weights(state.grid, state.s, state.b)
    g = geom or _geometry(state)
    c0 = (p + 1.0) / (p - 1.0) ** 2
    core = (0.5 * state.ws**2 + 0.5 * g.defect + c0 * state.w**2
            - np.abs(state.w) ** (p + 1.0) / (p + 1.0))
    val = state.grid.quad(core, ws0.phi)
    val -= state.grid.quad(rescaled_F(state), ws0.phi)
    return val


def eval_J(state: SimilarState, weights: WeightSet | None = None) -> float:
    ws0 = weights or eval_weights(state.grid, state.s, state.b)
    sb = state.s ** (-state.b)
    grid = state.grid
    return (-sb * grid.quad(state.w * state.ws, ws0.phi)
            + 0.5 * state.frame.dim_N * sb * grid.quad(state.w**2, ws0.phi))


def eval_H(state: SimilarState, weights: WeightSet | None = None) -> float:
    ws0 = weights or eval_weights(state.grid, state.s, state.b)
    return eval_E(state, ws0) + eval_J(state, ws0)


def eval_L(state: SimilarState, weights: WeightSet | None = None,
           geom: _StateGeometry | None = None) -> float:
    """Radial-multiplier functional int ((y.grad w)^2 + y.grad w ds w) psi."""
    ws0 = weights or eval_weights(state.grid, state.s, state.b)
    g = geom or _geometry(state)
    return state.grid.quad(g.ydg**2 + g.ydg * state.ws, ws0.psi)


def eval_K(state: SimilarState, weights: WeightSet | None = None) -> float:
    ws0 = weights or eval_weights(state.grid, state.s, state.b)
    s, b = state.s, state.b
    return eval_H(state, ws0) + b / (2.0 * (s + s ** (b + 1.0))) * eval_L(state, ws0)


def eval_N(state: SimilarState, sigma_const: float = 1.0,
           weights: WeightSet | None = None) -> float:
    """Damped functional exp((p+3)/((b-1) s^(b-1))) K + sigma e^(-eps0 s/8)."""
    if state.b <= 1.0:
        raise WeightDomainError("N requires b > 1")
    if sigma_const < 0:
        raise ValueError("sigma must be nonnegative")
    p = state.frame.p
    s, b = state.s, state.b
    damp = np.exp((p + 3.0) / ((b - 1.0) * s ** (b - 1.0)))
    tail = sigma_const * np.exp(-eps0(p, b) * s / 8.0)
    return damp * eval_K(state, weights) + tail


def eval_E0(state: SimilarState, geom: _StateGeometry | None = None) -> float:
    """Unweighted energy (phi replaced by 1)."""
    p = state.frame.p
    g = geom or _geometry(state)
    c0 = (p + 1.0) / (p - 1.0) ** 2
    core = (0.5 * state.ws**2 + 0.5 * g.defect + c0 * state.w**2
            - np.abs(state.w) ** (p + 1.0) / (p + 1.0))
    return state.grid.quad(core) - state.grid.quad(rescaled_F(state))


def eval_H0(state: SimilarState, geom: _StateGeometry | None = None) -> float:
    """E0 plus the algebraic tail s^(-(a-2)/4); needs a > 2."""
    a = state.frame.a
    if a <= 2.0:
        raise WeightDomainError(f"H0 requires a > 2, got a = {a}")
    return eval_E0(state, geom) + state.s ** (-(a - 2.0) / 4.0)


def functional_row(state: SimilarState, sigma_const: float = 1.0) -> dict:
    """All trace columns for one state (shared derivative evaluations)."""
    grid = state.grid
    p = state.frame.p
    a = state.frame.a
    g = _geometry(state)
    ws0 = eval_weights(grid, state.s, state.b)
    E = eval_E(state, ws0, g)
    J = eval_J(state, ws0)
    H = E + J
    L = eval_L(state, ws0, g)
    s, b = state.s, state.b
    K = H + b / (2.0 * (s + s ** (b + 1.0))) * L
    Nv = (np.exp((p + 3.0) / ((b - 1.0) * s ** (b - 1.0))) * K
          + sigma_const * np.exp(-eps0(p, b) * s / 8.0))
    E0 = eval_E0(state, g)
    H0 = E0 + s ** (-(a - 2.0) / 4.0) if a > 2.0 else np.nan
    lp = grid.quad(np.abs(state.w) ** (p + 1.0))
    return {
        "s": s, "E": E, "J": J, "H": H, "L": L, "K": K, "N_val": Nv,
        "E0": E0, "H0": H0,
        "boundary_flux": grid.boundary_quad(state.ws**2),
        "weighted_dissipation": grid.quad(state.ws**2, ws0.phi_over_1m),
        "Hnorm": float(np.sqrt(grid.quad(state.ws**2 + g.gsq * (1.0 - grid.u) + state.w**2))),
        "Lp_norm": lp,
        "h1_w": grid.quad(state.w**2 + g.gsq),
        "l2_ws": grid.quad(state.ws**2),
        "gradsq": grid.quad(g.gsq),
        "wphi2": grid.quad(state.w**2, ws0.phi),
        "lpphi": grid.quad(np.abs(state.w) ** (p + 1.0), ws0.phi),
        "gradphi_def": grid.quad(g.defect, ws0.phi),
    }


@dataclass
class FunctionalTrace:
    """Per-s table of functional values plus run metadata."""

    columns: dict
    meta: dict

    def __post_init__(self):
        self.columns = {k: np.asarray(v, dtype=float) for k, v in self.columns.items()}
        n = len(self.columns["s"])
        if any(len(v) != n for v in self.columns.values()):
            raise ValueError("ragged trace columns")
        if n > 1 and np.any(np.diff(self.columns["s"]) <= 0):
            raise ValueError("trace rows must be strictly increasing in s")

    def __len__(self) -> int:
        return len(self.columns["s"])

    @property
    def s(self) -> np.ndarray:
        return self.columns["s"]

    def column(self, name: str) -> np.ndarray:
        return self.columns[name]

    def interp(self, name: str, s_values) -> np.ndarray:
        return np.interp(np.asarray(s_values, dtype=float), self.s, self.columns[name])

    def window_integral(self, name: str, s_lo: float, s_hi: float) -> float:
        """Trapezoid integral of a column over [s_lo, s_hi] (clipped)."""
        s = self.s
        s_lo, s_hi = max(s_lo, s[0]), min(s_hi, s[-1])
        grid_pts = np.unique(np.concatenate([[s_lo], s[(s > s_lo) & (s < s_hi)], [s_hi]]))
        vals = self.interp(name, grid_pts)
        return float(np.trapezoid(vals, grid_pts))

    def to_csv(self, path) -> None:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\r\n")
            writer.writerow(TRACE_COLUMNS)
            for i in range(len(self)):
                writer.writerow([f"{self.columns[c][i]:.17g}" for c in TRACE_COLUMNS])
        sidecar = dict(self.meta)
        sidecar["schema"] = TRACE_SCHEMA
        sidecar["columns"] = TRACE_COLUMNS
        Path(str(path) + ".meta.json").write_text(json.dumps(sidecar, indent=2, sort_keys=True))

    @classmethod
    def from_csv(cls, path) -> "FunctionalTrace":
        path = Path(path)
        meta = json.loads(Path(str(path) + ".meta.json").read_text())
        if meta.get("schema") != TRACE_SCHEMA:
            raise ValueError(f"unknown trace schema {meta.get('schema')!r}, "
                             f"expected {TRACE_SCHEMA!r}")
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = [[float(x) for x in row] for row in reader]
        data = np.array(rows)
        cols = {name: data[:, i] for i, name in enumerate(header)}
        return cls(cols, meta)


def trace_from_states(states, sigma_const: float = 1.0, meta: dict | None = None) -> FunctionalTrace:
    rows = [functional_row(st, sigma_const) for st in states]
    cols = {name: np.array([row[name] for row in rows]) for name in TRACE_COLUMNS}
    base = {
        "sigma_const": sigma_const,
        "b": states[0].b,
        "grid": states[0].grid.descriptor(),
        "frame": states[0].frame.descriptor(),
    }
    if meta:
        base.update(meta)
    return FunctionalTrace(cols, base)
