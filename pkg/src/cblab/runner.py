"""Run orchestration: simulate -> transform -> continue -> monitor.

A run directory is reproducible from (config, seed, code version); its
manifest records all three plus the artifact list.  The pipeline:

1. integrate the Cauchy problem, estimate the blow-up time and
   non-characteristic slope, snapshot on a schedule geometric in T - t;
2. transform snapshots to similarity states on the configured ball grid
   (trace_transform.csv);
3. continue in similarity time with the direct solver up to s_max
   (trace.csv, densely sampled);
4. emit rate and monotonicity reports.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig
from .functionals import FunctionalTrace, trace_from_states
from .grids import build_ball_grid
from .identities import monotonicity_report
from .physical import solve_cauchy, to_similarity
from .similarity import integrate
from .snapio import write_physical, write_similar


class RateUndefinedError(RuntimeError):
    pass


@dataclass
class RateReport:
    """Rate-band and space-time-bound statistics of one run."""

    band_s: list
    band_values: list               # ||w||_H1 + ||ds w||_L2 per row
    band_window: tuple
    band_min: float
    band_max: float
    band_ratio: float
    K2: float
    loglog_slope: float
    slope_bound: float              # b + 0.5
    slope_ok: bool
    window_s: list
    window_integrals: list
    phys_dyadic: list               # (t, original-variable rate quantity)
    note: str = ("band boundedness is the desk-scale surrogate for the "
                 "existential constants eps0, K of the rate theorem")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        return d


def rate_report(trace: FunctionalTrace, snapshots=None, cfg: ExperimentConfig | None = None,
                T_est: float | None = None) -> RateReport:
    """Band statistics, least K2 with window integrals <= K2 s^b, and the
    original-variable dyadic quantities when snapshots are given."""
    s = trace.s
    hnorm = trace.column("Hnorm")
    if np.max(np.abs(hnorm)) < 1e-8:
        raise RateUndefinedError("no blow-up, rate undefined")
    B = np.sqrt(trace.column("h1_w")) + np.sqrt(trace.column("l2_ws"))
    win_lo = s[-1] - np.log(10.0)
    in_window = s >= win_lo - 1e-12
    bmin, bmax = float(np.min(B[in_window])), float(np.max(B[in_window]))
    b = trace.meta["b"]
    rows = np.arange(np.ceil(s[0]), s[-1] - 1.0 + 1e-9)
    integrals = np.array([
        trace.window_integral("l2_ws", r, r + 1.0)
        + trace.window_integral("gradsq", r, r + 1.0)
        + trace.window_integral("Lp_norm", r, r + 1.0) for r in rows])
    K2 = float(np.max(integrals / rows**b)) if len(rows) else float("nan")
    if len(rows) >= 2 and np.all(integrals > 0):
        A = np.vstack([np.log(rows), np.ones(len(rows))]).T
        coef, *_ = np.linalg.lstsq(A, np.log(integrals), rcond=None)
        slope = float(coef[0])
    else:
        slope = 0.0
    phys = []
    if snapshots and cfg is not None and T_est is not None:
        p = trace.meta["frame"]["p"]
        gamma = 2.0 / (p - 1.0)
        N = cfg.dim_N
        sphere = 2.0 * np.pi if N == 2 else 4.0 * np.pi
        for snap in snapshots:
            tau = T_est - snap.t
            if tau <= 0 or snap.geometry != "radial":
                continue
            r = snap.axes[0]
            sel = r <= tau
            if sel.sum() < 8:
                continue
            met = r[sel] ** (N - 1)
            l2u = np.sqrt(np.trapezoid(snap.u[sel] ** 2 * met, r[sel]) * sphere)
            l2ut = np.sqrt(np.trapezoid(snap.ut[sel] ** 2 * met, r[sel]) * sphere)
            ur = np.gradient(snap.u, r, edge_order=2)
            l2gr = np.sqrt(np.trapezoid(ur[sel] ** 2 * met, r[sel]) * sphere)
            q = (tau**gamma * l2u / tau ** (N / 2.0)
                 + tau ** (gamma + 1.0) * (l2ut + l2gr) / tau ** (N / 2.0))
            phys.append((float(snap.t), float(q)))
    return RateReport(
        band_s=[float(x) for x in s[in_window]],
        band_values=[float(x) for x in B[in_window]],
        band_window=(float(max(win_lo, s[0])), float(s[-1])),
        band_min=bmin, band_max=bmax,
        band_ratio=float(bmax / bmin) if bmin > 0 else float("inf"),
        K2=K2, loglog_slope=slope, slope_bound=float(b) + 0.5,
        slope_ok=slope <= float(b) + 0.5,
        window_s=[float(x) for x in rows],
        window_integrals=[float(x) for x in integrals],
        phys_dyadic=phys)


def run_simulation(cfg: ExperimentConfig, outdir) -> dict:
    """Execute the full pipeline into ``outdir``; returns a summary dict."""
    out = Path(outdir)
    (out / "physical").mkdir(parents=True, exist_ok=True)
    (out / "similar").mkdir(parents=True, exist_ok=True)
    pcfg = cfg.physical()
    snapshots, report = solve_cauchy(pcfg)

    artifacts = []
    summary: dict = {
        "blew_up": report.blew_up,
        "T_est": report.T_est,
        "delta0": report.delta0,
        "fit_exponent": report.fit_exponent,
        "expected_exponent": report.expected_exponent,
        "message": report.message,
    }

    if report.blew_up:
        T0 = report.T_est
    else:
        # global (or zero) solution: any T0 below the horizon defines a
        # regular similarity trace; use the configured t_max
        T0 = cfg.t_max
        tau0 = min(0.35, T0 / 2.0)
        sched = [T0 - tau0 * 2.0 ** (-k / 4.0) for k in range(13)]
        sched = [t for t in sched if t >= 0]
        snapshots, _ = solve_cauchy(pcfg, snapshot_times=sched, collect_probes=False)

    for i, snap in enumerate(snapshots):
        fp = out / "physical" / f"snap_{i:04d}.cbl"
        write_physical(fp, snap, cfg.dim_N, pcfg.p)
        artifacts.append(str(fp.relative_to(out)))

    grid = build_ball_grid(cfg.dim_N, cfg.grid_mode, cfg.n_r, cfg.n_theta)
    states = to_similarity(snapshots, cfg.x0, T0, grid, pcfg, b=cfg.b)
    for i, st in enumerate(states):
        fp = out / "similar" / f"snap_{i:04d}.cbl"
        write_similar(fp, st)
        artifacts.append(str(fp.relative_to(out)))

    tr_meta = {"kind": "transformed", "T0": T0, "config_hash": cfg.config_hash()}
    trace_tf = trace_from_states(states, cfg.sigma_const, tr_meta)
    trace_tf.to_csv(out / "trace_transform.csv")
    artifacts += ["trace_transform.csv", "trace_transform.csv.meta.json"]

    trace = trace_tf
    if cfg.continue_similarity:
        start = next((st for st in states if st.s >= 1.0), states[-1])
        s_end = max(cfg.s_max, start.s + 1.0)
        traj = integrate(start, s_end, sample_ds=cfg.sample_ds)
        trace = trace_from_states(
            traj, cfg.sigma_const,
            {"kind": "continued", "T0": T0, "config_hash": cfg.config_hash()})
    trace.to_csv(out / "trace.csv")
    artifacts += ["trace.csv", "trace.csv.meta.json"]

    (out / "blowup.json").write_text(json.dumps({
        **summary, "x0": list(cfg.x0),
        "probe_T": {str(k): v for k, v in report.probe_T.items()},
    }, indent=2, sort_keys=True))
    artifacts.append("blowup.json")

    try:
        rate = rate_report(trace, snapshots, cfg, T_est=T0)
        (out / "rate.json").write_text(json.dumps(rate.to_dict(), indent=2, sort_keys=True))
        artifacts.append("rate.json")
        summary["band_ratio"] = rate.band_ratio
        summary["K2"] = rate.K2
        summary["loglog_slope"] = rate.loglog_slope
    except RateUndefinedError as exc:
        summary["rate_error"] = str(exc)

    try:
        if cfg.a > 2.0:
            mono = monotonicity_report(trace, "H0")
            (out / "monotonicity_H0.json").write_text(
                json.dumps(mono.to_dict(), indent=2, sort_keys=True))
            artifacts.append("monotonicity_H0.json")
            summary["H0_onset"] = mono.onset
            summary["H0_nonneg_onset"] = mono.nonneg_onset
        monoN = monotonicity_report(trace, "N_func")
        (out / "monotonicity_N.json").write_text(
            json.dumps(monoN.to_dict(), indent=2, sort_keys=True))
        artifacts.append("monotonicity_N.json")
        summary["N_onset"] = monoN.onset
        summary["N_sigma"] = monoN.sigma_used
    except ValueError as exc:
        summary["monotonicity_error"] = str(exc)

    manifest = {
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "code_version": __version__,
        "artifacts": sorted(artifacts),
        "summary": summary,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return summary


def write_report_plots(run_dir) -> list:
    """Emit SVG plots (H0, N, band quantity) from a run's trace."""
    from .plots import plot_trace_columns, plot_series
    run_dir = Path(run_dir)
    trace = FunctionalTrace.from_csv(run_dir / "trace.csv")
    made = []
    for col, logy in (("H0", False), ("N_val", False), ("Hnorm", False)):
        path = run_dir / f"plot_{col}.svg"
        plot_trace_columns([(col, trace)], col, path, logy=logy)
        made.append(str(path))
    B = np.sqrt(trace.column("h1_w")) + np.sqrt(trace.column("l2_ws"))
    path = run_dir / "plot_rate_band.svg"
    plot_series([("H1+L2 norm", trace.s, B)], path, "s", "rate-band quantity")
    made.append(str(path))
    return made


def _sweep_cell(args):
    base_kwargs, a_val, family, outdir = args
    kwargs = dict(base_kwargs)
    kwargs.update(a=a_val, b=None, initial_data=family)
    if family == "gaussian":
        kwargs.setdefault("amplitude", 2.5)
        kwargs.setdefault("width", 1.0)
        kwargs["amplitude"] = max(kwargs.get("amplitude", 1.0), 2.5)
        kwargs["width"] = 1.0
    cfg = ExperimentConfig(**kwargs)
    tag = f"a{a_val}_{family}"
    cell_dir = Path(outdir) / f"run_{tag}"
    row = {"tag": tag, "a": a_val, "family": family, "status": "ok"}
    try:
        summary = run_simulation(cfg, cell_dir)
        row.update({k: summary.get(k) for k in (
            "T_est", "fit_exponent", "band_ratio", "K2", "loglog_slope",
            "H0_onset", "H0_nonneg_onset", "N_onset", "N_sigma")})
    except Exception as exc:   # partial failures recorded, sweep continues
        row["status"] = f"failed: {exc}"
    return row


def run_sweep(base: ExperimentConfig, outdir, a_values=(2.5, 3.0, 4.0),
              families=("ode", "gaussian"), workers: int | None = None) -> list:
    """Grid sweep; one run directory per cell, aggregate CSV + SVG plots."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    base_kwargs = base.to_dict()
    base_kwargs["x0"] = tuple(base_kwargs["x0"])
    base_kwargs["checks"] = tuple(base_kwargs["checks"])
    cells = [(base_kwargs, a, fam, str(out)) for a in a_values for fam in families]
    workers = workers or base.workers
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_sweep_cell, cells))
    else:
        rows = [_sweep_cell(c) for c in cells]

    cols = ["tag", "a", "family", "status", "T_est", "fit_exponent",
            "band_ratio", "K2", "loglog_slope", "H0_onset",
            "H0_nonneg_onset", "N_onset", "N_sigma"]
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join("" if row.get(c) is None else str(row.get(c)) for c in cols))
    (out / "sweep.csv").write_text("\r\n".join(lines) + "\r\n")

    from .plots import plot_trace_columns
    for col in ("H0", "N_val"):
        traces = []
        for row in rows:
            if row["status"] == "ok":
                try:
                    traces.append((row["tag"],
                                   FunctionalTrace.from_csv(out / f"run_{row['tag']}" / "trace.csv")))
                except Exception:
                    pass
        if traces:
            plot_trace_columns(traces, col, out / f"sweep_{col}.svg")
    return rows
