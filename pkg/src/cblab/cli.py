"""Command-line front end.

Subcommands: simulate, transform, functionals, verify, rate, sweep,
report.  Configuration comes from a key-value text file (--config),
CBLAB_* environment variables, and repeated --set key=value overrides,
in increasing precedence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, load_config


def _add_config_args(sub):
    sub.add_argument("--config", help="key = value config file")
    sub.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                     help="override a config key (repeatable)")


def _build_config(args):
    overrides = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, val = item.split("=", 1)
        overrides[key.strip()] = val.strip()
    return load_config(args.config, overrides)


def cmd_simulate(args) -> int:
    cfg = _build_config(args)
    out = Path(args.out or Path(cfg.outdir) / f"run_{cfg.config_hash()}")
    summary = __import__("cblab.runner", fromlist=["run_simulation"]).run_simulation(cfg, out)
    print(f"run directory: {out}")
    for key, val in sorted(summary.items()):
        print(f"  {key} = {val}")
    return 0


def cmd_transform(args) -> int:
    from .functionals import trace_from_states
    from .grids import build_ball_grid
    from .physical import to_similarity
    from .snapio import read_physical, write_similar

    cfg = _build_config(args)
    run = Path(args.run)
    snaps = []
    for fp in sorted((run / "physical").glob("snap_*.cbl")):
        state, _ = read_physical(fp)
        snaps.append(state)
    if not snaps:
        print("no physical snapshots found", file=sys.stderr)
        return 2
    blow = json.loads((run / "blowup.json").read_text())
    T0 = args.T0 if args.T0 is not None else blow["T_est"]
    x0 = tuple(float(x) for x in args.x0.split(",")) if args.x0 else tuple(blow["x0"])
    grid = build_ball_grid(cfg.dim_N, cfg.grid_mode, cfg.n_r, cfg.n_theta)
    states = to_similarity(snaps, x0, T0, grid, cfg.physical(), b=cfg.b)
    (run / "similar").mkdir(exist_ok=True)
    for i, st in enumerate(states):
        write_similar(run / "similar" / f"snap_{i:04d}.cbl", st)
    trace_from_states(states, cfg.sigma_const,
                      {"kind": "transformed", "T0": T0}).to_csv(run / "trace_transform.csv")
    print(f"transformed {len(states)} snapshots (T0 = {T0}, x0 = {x0})")
    return 0


def cmd_functionals(args) -> int:
    from .functionals import trace_from_states
    from .snapio import read_similar

    cfg = _build_config(args)
    run = Path(args.run)
    states = [read_similar(fp) for fp in sorted((run / "similar").glob("snap_*.cbl"))]
    if not states:
        print("no similarity snapshots found", file=sys.stderr)
        return 2
    trace = trace_from_states(states, cfg.sigma_const, {"kind": "recomputed"})
    trace.to_csv(run / "trace_transform.csv")
    print(f"evaluated functionals on {len(states)} states "
          f"-> {run / 'trace_transform.csv'}")
    return 0


def cmd_verify(args) -> int:
    from .identities import run_verification

    cfg = _build_config(args)
    manifest = run_verification(n_r=cfg.n_r_verify, seed=cfg.seed)
    out = Path(args.out or "verification.json")
    out.write_text(json.dumps(manifest, indent=2, sort_keys=True))
    for check in manifest["checks"]:
        status = "pass" if check["passed"] else "FAIL"
        print(f"[{status}] {check['name']}: residual={check['residuals'][-1]:.3e}")
    print(f"{manifest['n_checks'] - manifest['n_failed']}/{manifest['n_checks']} "
          f"checks passed -> {out}")
    return 0 if manifest["all_passed"] else 1


def cmd_rate(args) -> int:
    from .functionals import FunctionalTrace
    from .runner import RateUndefinedError, rate_report
    from .snapio import read_physical

    run = Path(args.run)
    trace = FunctionalTrace.from_csv(run / "trace.csv")
    snaps = []
    blow = {}
    if (run / "blowup.json").exists():
        blow = json.loads((run / "blowup.json").read_text())
        for fp in sorted((run / "physical").glob("snap_*.cbl")):
            snaps.append(read_physical(fp)[0])
    cfg = _build_config(args)
    try:
        rep = rate_report(trace, snaps, cfg, T_est=blow.get("T_est"))
    except RateUndefinedError as exc:
        print(f"rejected: {exc}", file=sys.stderr)
        return 3
    (run / "rate.json").write_text(json.dumps(rep.to_dict(), indent=2, sort_keys=True))
    print(f"band over s in [{rep.band_window[0]:.2f}, {rep.band_window[1]:.2f}]: "
          f"[{rep.band_min:.4f}, {rep.band_max:.4f}] ratio={rep.band_ratio:.3f}")
    print(f"space-time bound: K2={rep.K2:.4f}, log-log slope={rep.loglog_slope:.3f} "
          f"(bound {rep.slope_bound:.2f}, ok={rep.slope_ok})")
    print(f"note: {rep.note}")
    return 0


def cmd_sweep(args) -> int:
    from .runner import run_sweep

    cfg = _build_config(args)
    a_values = tuple(float(x) for x in args.a_values.split(","))
    families = tuple(args.families.split(","))
    out = Path(args.out or Path(cfg.outdir) / "sweep")
    rows = run_sweep(cfg, out, a_values=a_values, families=families,
                     workers=args.workers or cfg.workers)
    n_ok = sum(r["status"] == "ok" for r in rows)
    for row in rows:
        print(f"  {row['tag']:24s} {row['status']}")
    print(f"{n_ok}/{len(rows)} cells completed -> {out / 'sweep.csv'}")
    return 0 if n_ok == len(rows) else 1


def cmd_report(args) -> int:
    from .runner import write_report_plots

    run = Path(args.run)
    made = write_report_plots(run)
    manifest = json.loads((run / "manifest.json").read_text())
    print(f"config hash: {manifest['config_hash']}, code {manifest['code_version']}")
    for key, val in sorted(manifest["summary"].items()):
        print(f"  {key} = {val}")
    for path in made:
        print(f"  wrote {path}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="cblab",
        description="Blow-up laboratory for the conformally critical wave equation")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("simulate", help="run the full pipeline into a run directory")
    _add_config_args(p)
    p.add_argument("--out", help="run directory (default: <outdir>/run_<hash>)")
    p.set_defaults(fn=cmd_simulate)

    p = subs.add_parser("transform", help="re-transform stored physical snapshots")
    _add_config_args(p)
    p.add_argument("--run", required=True)
    p.add_argument("--T0", type=float, default=None)
    p.add_argument("--x0", default=None, help="comma-separated expansion point")
    p.set_defaults(fn=cmd_transform)

    p = subs.add_parser("functionals", help="recompute the trace from similarity snapshots")
    _add_config_args(p)
    p.add_argument("--run", required=True)
    p.set_defaults(fn=cmd_functionals)

    p = subs.add_parser("verify", help="run the identity verification suite")
    _add_config_args(p)
    p.add_argument("--out", help="manifest path (default verification.json)")
    p.set_defaults(fn=cmd_verify)

    p = subs.add_parser("rate", help="rate-band and space-time-bound report for a run")
    _add_config_args(p)
    p.add_argument("--run", required=True)
    p.set_defaults(fn=cmd_rate)

    p = subs.add_parser("sweep", help="parameter sweep over a and data families")
    _add_config_args(p)
    p.add_argument("--out")
    p.add_argument("--a-values", default="2.5,3,4")
    p.add_argument("--families", default="ode,gaussian")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(fn=cmd_sweep)

    p = subs.add_parser("report", help="summary and SVG plots for a run")
    _add_config_args(p)
    p.add_argument("--run", required=True)
    p.set_defaults(fn=cmd_report)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
