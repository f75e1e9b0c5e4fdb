"""Cauchy solver for the perturbed wave equation in original variables.

    dtt u = Lap u + |u|^(p-1) u + f(u) + g(...),   u(0) = u0, dt u(0) = u1,

on a radial interval [0, R] (1-D reduction with the r^(N-1) metric term,
L'Hopital-regularized at r = 0) or a square [-R, R]^2.  Time stepping is
velocity Verlet with a step that shrinks like the remaining time to
blow-up, so the ODE-rate singularity is tracked until max|u| reaches the
cap; the blow-up time is then recovered by extrapolating
max|u|^(-(p-1)/2), which decays linearly in t for ODE-rate blow-up, to
zero.  The artificial outer boundary is kept outside the backward light
cone of the probed point, so its (frozen Dirichlet) condition never
influences the cone.

``to_similarity`` resamples snapshots onto a ball grid through

    y = (x - x0)/(T0 - t),  s = -log(T0 - t),  w = (T0 - t)^(2/(p-1)) u,
    ds w = (T0 - t)^(1 + 2/(p-1)) (dt u - y.grad u) - 2/(p-1) w.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline, RegularGridInterpolator

from .grids import BallGrid
from .nonlin import make_perturbation
from .params import kappa, p_conformal
from .similarity import Frame, SimilarState


class PhysicalConfigError(ValueError):
    pass


class ConeError(RuntimeError):
    """The backward light cone left the computed domain."""


@dataclass
class PhysicalConfig:
    """Cauchy-problem setup; defaults give the conformal ODE-type run."""

    dim_N: int = 2
    p: float | None = None            # None -> conformal exponent
    a: float = 3.0
    M: float = 1.0
    perturbation: str = "none"        # none | f_log
    g_amp: float = 0.0                # bounded-linear hook g = g_amp * dt u
    initial_data: str = "ode"         # ode | gaussian | aniso_gaussian
    amplitude: float = 1.0            # family-specific scale
    width: float = 0.35
    t_star: float = 1.0               # target blow-up time for ode data
    geometry: str = "radial"          # radial | cartesian2d
    domain_radius: float = 2.0
    n_x: int = 2048
    cfl: float = 0.45
    u_max: float = 1e8
    t_max: float = 4.0
    x0: tuple = (0.0, 0.0)
    probe_offsets: tuple = (0.0, 0.02, 0.05, 0.1)
    snapshots_per_octave: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.p is None:
            self.p = p_conformal(self.dim_N)
        if self.p <= 1:
            raise PhysicalConfigError("exponent p must exceed 1")
        if self.perturbation == "f_log" and self.a <= 1:
            raise PhysicalConfigError("log perturbation needs a > 1")
        if self.M < 0:
            raise PhysicalConfigError("M must be nonnegative")
        if self.geometry not in ("radial", "cartesian2d"):
            raise PhysicalConfigError(f"unknown geometry {self.geometry!r}")
        if self.geometry == "cartesian2d" and self.dim_N != 2:
            raise PhysicalConfigError("cartesian2d geometry requires N = 2")
        if self.initial_data == "aniso_gaussian" and self.geometry != "cartesian2d":
            raise PhysicalConfigError("anisotropic data needs the 2-D grid")

    @property
    def pert(self):
        return make_perturbation(self.perturbation, self.p, self.a, self.M)

    def descriptor(self) -> dict:
        d = {k: getattr(self, k) for k in (
            "dim_N", "p", "a", "M", "perturbation", "g_amp", "initial_data",
            "amplitude", "width", "t_star", "geometry", "domain_radius",
            "n_x", "cfl", "u_max", "t_max", "seed")}
        d["x0"] = list(self.x0)
        return d


@dataclass
class PhysicalState:
    """One snapshot of (u, dt u) at time t."""

    t: float
    u: np.ndarray
    ut: np.ndarray
    geometry: str
    axes: tuple            # (r,) for radial, (x, y) for cartesian2d

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.u)))


@dataclass
class BlowupReport:
    blew_up: bool
    T_est: float
    x0: tuple
    delta0: float
    fit_exponent: float
    fit_residual: float
    expected_exponent: float
    probe_T: dict = field(default_factory=dict)
    message: str = ""


def initial_fields(cfg: PhysicalConfig, pts_r=None, pts_xy=None):
    """(u0, u1) for the configured family on the given sample points."""
    p = cfg.p
    if cfg.initial_data == "ode":
        kap = kappa(p)
        alpha = 2.0 / (p - 1.0)
        u0c = kap * cfg.t_star ** (-alpha)
        u1c = alpha * kap * cfg.t_star ** (-alpha - 1.0)
        if cfg.geometry == "radial":
            shape = pts_r.shape
        else:
            shape = pts_xy[0].shape
        return np.full(shape, u0c), np.full(shape, u1c)
    if cfg.initial_data == "gaussian":
        if cfg.geometry == "radial":
            rho2 = pts_r**2
        else:
            rho2 = pts_xy[0] ** 2 + pts_xy[1] ** 2
        u0 = cfg.amplitude * np.exp(-rho2 / cfg.width**2)
        return u0, 0.5 * u0
    if cfg.initial_data == "aniso_gaussian":
        X, Y = pts_xy
        u0 = cfg.amplitude * np.exp(-(X**2 / cfg.width**2 + Y**2 / (2.0 * cfg.width) ** 2))
        return u0, 0.5 * u0
    if cfg.initial_data == "zero":
        shape = pts_r.shape if cfg.geometry == "radial" else pts_xy[0].shape
        return np.zeros(shape), np.zeros(shape)
    raise PhysicalConfigError(f"unknown initial data family {cfg.initial_data!r}")


def _forcing(cfg: PhysicalConfig, u, ut):
    out = np.abs(u) ** (cfg.p - 1.0) * u
    if cfg.perturbation != "none":
        out = out + cfg.pert.f(u)
    if cfg.g_amp != 0.0:
        out = out + cfg.g_amp * ut
    return out


def _laplacian_radial(u, r, h, dim_N):
    lap = np.empty_like(u)
    lap[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / h**2
    lap[0] = 2.0 * (u[1] - u[0]) / h**2 * dim_N  # even symmetry + L'Hopital
    lap[-1] = 0.0                                 # frozen Dirichlet boundary
    lap[1:-1] += (dim_N - 1.0) / r[1:-1] * (u[2:] - u[:-2]) / (2.0 * h)
    return lap


def _laplacian_2d(u, h):
    lap = np.zeros_like(u)
    lap[1:-1, 1:-1] = (u[2:, 1:-1] + u[:-2, 1:-1] + u[1:-1, 2:] + u[1:-1, :-2]
                       - 4.0 * u[1:-1, 1:-1]) / h**2
    return lap


@dataclass
class _Integrator:
    cfg: PhysicalConfig

    def __post_init__(self):
        cfg = self.cfg
        if cfg.geometry == "radial":
            self.r = np.linspace(0.0, cfg.domain_radius, cfg.n_x + 1)
            self.h = self.r[1] - self.r[0]
            self.axes = (self.r,)
            self.u, self.ut = initial_fields(cfg, pts_r=self.r)
        else:
            x = np.linspace(-cfg.domain_radius, cfg.domain_radius, cfg.n_x + 1)
            self.h = x[1] - x[0]
            X, Y = np.meshgrid(x, x, indexing="ij")
            self.axes = (x, x)
            self.u, self.ut = initial_fields(cfg, pts_xy=(X, Y))
        self.t = 0.0
        self.accel = self._rhs(self.u, self.ut)

    def _rhs(self, u, ut):
        cfg = self.cfg
        if cfg.geometry == "radial":
            lap = _laplacian_radial(u, self.r, self.h, cfg.dim_N)
        else:
            lap = _laplacian_2d(u, self.h)
        return lap + _forcing(cfg, u, ut)

    def dt_next(self) -> float:
        cfg = self.cfg
        dt_cfl = cfg.cfl * self.h
        peak = float(np.max(np.abs(self.u)))
        if peak <= 10.0 * kappa(cfg.p):
            return dt_cfl
        # track the ODE-rate singularity: remaining time ~ (peak/kappa)^(-(p-1)/2)
        tau_est = (peak / kappa(cfg.p)) ** (-(cfg.p - 1.0) / 2.0)
        return min(dt_cfl, 0.005 * tau_est)

    def step(self) -> None:
        dt = self.dt_next()
        ut_half = self.ut + 0.5 * dt * self.accel
        self.u = self.u + dt * ut_half
        accel_new = self._rhs(self.u, ut_half)
        self.ut = ut_half + 0.5 * dt * accel_new
        self.accel = accel_new
        self.t += dt

    def state(self) -> PhysicalState:
        return PhysicalState(self.t, self.u.copy(), self.ut.copy(),
                             self.cfg.geometry, self.axes)

    def probe_values(self, offsets) -> np.ndarray:
        cfg = self.cfg
        if cfg.geometry == "radial":
            idx = np.minimum((np.asarray(offsets) / self.h).round().astype(int), cfg.n_x)
            return self.u[idx]
        n0 = self.u.shape[0] // 2
        idx = np.minimum(n0 + (np.asarray(offsets) / self.h).round().astype(int),
                         self.u.shape[0] - 1)
        return self.u[idx, n0]


def _fit_blowup_time(times, peaks, p) -> tuple[float, float]:
    """Extrapolate z = peak^(-(p-1)/2) to zero: T_est and rms residual.

    z decays linearly in t for ODE-rate blow-up, so the root of a linear
    fit over the last decades (where the asymptotic regime surely holds)
    locates the blow-up time.
    """
    z = np.asarray(peaks) ** (-(p - 1.0) / 2.0)
    t = np.asarray(times)
    keep = z < 1e-2 * z[0]
    if keep.sum() < 50:
        keep = z < 0.25 * z[0]
    if keep.sum() < 4:
        keep = np.ones_like(z, dtype=bool)
    A = np.vstack([t[keep], np.ones(keep.sum())]).T
    coef, *_ = np.linalg.lstsq(A, z[keep], rcond=None)
    slope, intercept = coef
    if slope >= 0:
        return float("nan"), float("inf")
    resid = float(np.sqrt(np.mean((A @ coef - z[keep]) ** 2)))
    return float(-intercept / slope), resid


def _fit_rate_exponent(times, peaks, T_est, p, peak0) -> tuple[float, float]:
    """Slope of log max|u| against log(T_est - t).

    Restricted to samples far enough from T_est that the T_est fit error
    cannot distort log(T_est - t), yet past the onset of the ODE regime.
    """
    t = np.asarray(times)
    P = np.asarray(peaks)
    tau = T_est - t
    t_err = 2e-4 * T_est   # conservative bound on integrator drift in T_est
    keep = (P > 10.0 * max(kappa(p), peak0)) & (tau > t_err)
    if keep.sum() < 4:
        keep = (P > 2.0 * peak0) & (tau > t_err)
    if keep.sum() < 4:
        return float("nan"), float("inf")
    A = np.vstack([np.log(tau[keep]), np.ones(keep.sum())]).T
    coef, *_ = np.linalg.lstsq(A, np.log(P[keep]), rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - np.log(P[keep])) ** 2)))
    return float(-coef[0]), resid


def solve_cauchy(cfg: PhysicalConfig,
                 snapshot_times: list | None = None,
                 collect_probes: bool = True):
    """Integrate until blow-up cap or t_max.

    Returns (snapshots, report).  Snapshots are taken at the requested
    times (first step crossing each), or -- when none are given and the
    run blows up -- the solver re-runs itself on a schedule geometric in
    T_est - t, so the similarity-time samples are equally spaced.
    """
    cfg_probe_offsets = cfg.probe_offsets if collect_probes else (0.0,)
    it = _Integrator(cfg)
    peaks = [(it.t, it.state().max_abs())]
    probes = [(it.t, it.probe_values(cfg_probe_offsets))]
    snapshots: list[PhysicalState] = []
    pending = sorted(snapshot_times) if snapshot_times else []
    next_snap = 0
    blew_up = False
    while it.t < cfg.t_max:
        it.step()
        peak = float(np.max(np.abs(it.u)))
        peaks.append((it.t, peak))
        probes.append((it.t, it.probe_values(cfg_probe_offsets)))
        while next_snap < len(pending) and it.t >= pending[next_snap]:
            snapshots.append(it.state())
            next_snap += 1
        if not np.isfinite(peak):
            raise RuntimeError("solution overflowed before the blow-up cap; "
                               "lower u_max or the time step")
        if peak >= cfg.u_max:
            blew_up = True
            break

    times = np.array([t for t, _ in peaks])
    pk = np.array([v for _, v in peaks])
    if not blew_up:
        report = BlowupReport(False, float("nan"), cfg.x0, float("nan"),
                              float("nan"), float("nan"),
                              2.0 / (cfg.p - 1.0),
                              message="no blow-up detected")
        return snapshots, report

    T_est, fit_resid = _fit_blowup_time(times, pk, cfg.p)
    exponent, _ = _fit_rate_exponent(times, pk, T_est, cfg.p, pk[0])

    # per-probe blow-up times for the non-characteristic slope
    probe_T = {}
    pv = np.array([v for _, v in probes])
    for j, off in enumerate(cfg_probe_offsets):
        vals = np.abs(pv[:, j])
        ok = vals > 1.0
        if ok.sum() >= 6:
            Tj, _ = _fit_blowup_time(times[ok], vals[ok], cfg.p)
            probe_T[float(off)] = Tj
    offs = sorted(probe_T)
    slopes = [abs(probe_T[o2] - probe_T[o1]) / (o2 - o1)
              for o1, o2 in zip(offs, offs[1:]) if np.isfinite(probe_T[o1]) and np.isfinite(probe_T[o2])]
    delta0 = float(np.clip((max(slopes) if slopes else 0.0) + 0.1, 0.05, 0.95))

    report = BlowupReport(True, T_est, cfg.x0, delta0, exponent, fit_resid,
                          2.0 / (cfg.p - 1.0), probe_T)

    if snapshot_times is None:
        # re-run with a schedule geometric in T_est - t
        tau0 = min(0.35, T_est / 2.0)
        ratio = 2.0 ** (1.0 / cfg.snapshots_per_octave)
        tau_min = max(24.0 * it.h, T_est - times[-1])
        n_snap = max(1, int(np.floor(np.log(tau0 / tau_min) / np.log(ratio))))
        sched = [T_est - tau0 * ratio ** (-k) for k in range(n_snap + 1)]
        snapshots, _ = solve_cauchy(cfg, snapshot_times=sched, collect_probes=False)
    return snapshots, report


def _radial_interpolators(snap: PhysicalState):
    r = snap.axes[0]
    su = CubicSpline(r, snap.u)
    sut = CubicSpline(r, snap.ut)
    return (lambda rho: su(rho)), (lambda rho: su(rho, 1)), (lambda rho: sut(rho))


def _cart2d_interpolators(snap: PhysicalState):
    x, y = snap.axes
    h = x[1] - x[0]
    gx, gy = np.gradient(snap.u, h, edge_order=2)
    iu = RegularGridInterpolator((x, y), snap.u, method="cubic")
    iux = RegularGridInterpolator((x, y), gx, method="cubic")
    iuy = RegularGridInterpolator((x, y), gy, method="cubic")
    iut = RegularGridInterpolator((x, y), snap.ut, method="cubic")
    return iu, iux, iuy, iut


def to_similarity(snapshots, x0, T0, grid: BallGrid, cfg: PhysicalConfig,
                  b: float | None = None) -> list[SimilarState]:
    """Resample physical snapshots as similarity states on ``grid``.

    The expansion point x0 may differ from the blow-up point; radial data
    seen from a shifted frame becomes genuinely non-radial (use a polar
    grid then).  Raises ConeError naming the first snapshot whose cone
    section leaves the computed domain.
    """
    p = cfg.p
    if b is None:
        b = cfg.a / 2.0
    gamma = 2.0 / (p - 1.0)
    x0 = np.asarray(x0, dtype=float)
    frame = Frame(dim_N=cfg.dim_N, p=p, a=cfg.a, M=cfg.M,
                  perturbation=cfg.perturbation, x0=tuple(x0), T0=float(T0))
    nodes = grid.nodes          # field_shape + (dim,)
    states = []
    for snap in snapshots:
        tau = T0 - snap.t
        if tau <= 0:
            raise ConeError(f"snapshot at t = {snap.t} is not before T0 = {T0}")
        if snap.geometry == "radial":
            R = snap.axes[0][-1]
            h = snap.axes[0][1] - snap.axes[0][0]
            pts = x0[:nodes.shape[-1]] + tau * nodes.reshape(-1, nodes.shape[-1])
            rho = np.linalg.norm(pts, axis=-1)
            if rho.max() > R - 5.0 * h:
                raise ConeError(f"cone section at t = {snap.t:.6f} needs radius "
                                f"{rho.max():.4f} but the domain ends at {R:.4f}")
            fu, fur, fut = _radial_interpolators(snap)
            uvals = fu(rho)
            utvals = fut(rho)
            with np.errstate(invalid="ignore", divide="ignore"):
                unit = np.where(rho[:, None] > 1e-14, pts / np.maximum(rho, 1e-300)[:, None], 0.0)
            gradu = fur(rho)[:, None] * unit
        else:
            x, _ = snap.axes
            R = x[-1]
            h = x[1] - x[0]
            pts = x0[:2] + tau * nodes.reshape(-1, 2)
            if np.abs(pts).max() > R - 5.0 * h:
                raise ConeError(f"cone section at t = {snap.t:.6f} leaves the square "
                                f"domain of half-width {R:.4f}")
            iu, iux, iuy, iut = _cart2d_interpolators(snap)
            uvals = iu(pts)
            utvals = iut(pts)
            gradu = np.stack([iux(pts), iuy(pts)], axis=-1)
        ynod = nodes.reshape(-1, nodes.shape[-1])
        ydotgrad = np.einsum("ij,ij->i", ynod, gradu)
        w = tau**gamma * uvals
        ws = tau ** (gamma + 1.0) * (utvals - ydotgrad) - gamma * w
        states.append(SimilarState(grid,
                                   w.reshape(grid.field_shape),
                                   ws.reshape(grid.field_shape),
                                   s=float(-np.log(tau)), b=float(b), frame=frame))
    return states


def from_similarity(state: SimilarState):
    """Invert the scaling: physical sample points and (u, dt u) there."""
    p = state.frame.p
    gamma = 2.0 / (p - 1.0)
    tau = np.exp(-state.s)
    x0 = np.asarray(state.frame.x0, dtype=float)
    nodes = state.grid.nodes
    pts = x0[:nodes.shape[-1]] + tau * nodes.reshape(-1, nodes.shape[-1])
    u = tau ** (-gamma) * state.w.reshape(-1)
    from .ops import ScalarField, y_dot_grad   # local to avoid cycle at import
    ydg = y_dot_grad(ScalarField(state.grid, state.w)).reshape(-1)
    ut = tau ** (-gamma - 1.0) * (state.ws.reshape(-1) + ydg + gamma * state.w.reshape(-1))
    return pts, u, ut


def physical_energy(state: PhysicalState, cfg: PhysicalConfig) -> float:
    """Standard energy of the unperturbed equation (conserved for f=g=0)."""
    p = cfg.p
    if state.geometry == "radial":
        r = state.axes[0]
        ur = np.gradient(state.u, r, edge_order=2)
        dens = 0.5 * state.ut**2 + 0.5 * ur**2 - np.abs(state.u) ** (p + 1.0) / (p + 1.0)
        sphere = 2.0 * np.pi if cfg.dim_N == 2 else 4.0 * np.pi
        return float(np.trapezoid(dens * r ** (cfg.dim_N - 1.0), r) * sphere)
    x, y = state.axes
    h = x[1] - x[0]
    gx, gy = np.gradient(state.u, h, edge_order=2)
    dens = 0.5 * state.ut**2 + 0.5 * (gx**2 + gy**2) - np.abs(state.u) ** (p + 1.0) / (p + 1.0)
    return float(np.sum(dens) * h * h)
