"""Versioned snapshot files: magic "CBL1", text header, CSV payload.

One file per snapshot.  The header is ``key=value`` lines; ``columns=``
names the CSV payload columns.  Physical snapshots carry (t, geometry,
axes); similarity snapshots carry (s, b, grid descriptor, frame).
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np

from .grids import build_ball_grid
from .physical import PhysicalState
from .similarity import Frame, SimilarState

MAGIC = "CBL1"


class SnapshotFormatError(ValueError):
    pass


def _write(path, header: dict, columns: list, arrays: list) -> None:
    buf = io.StringIO()
    buf.write(MAGIC + "\n")
    for k, v in header.items():
        buf.write(f"{k}={v}\n")
    buf.write("columns=" + ",".join(columns) + "\n")
    data = np.column_stack(arrays)
    for row in data:
        buf.write(",".join(f"{x:.17g}" for x in row) + "\n")
    Path(path).write_text(buf.getvalue())


def _read(path) -> tuple[dict, list, np.ndarray]:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0] != MAGIC:
        raise SnapshotFormatError(f"{path}: bad or missing magic "
                                  f"(expected {MAGIC!r}, got {lines[:1]!r})")
    header = {}
    i = 1
    columns = None
    while i < len(lines):
        line = lines[i]
        i += 1
        if line.startswith("columns="):
            columns = line.split("=", 1)[1].split(",")
            break
        if "=" in line:
            k, v = line.split("=", 1)
            header[k] = v
    if columns is None:
        raise SnapshotFormatError(f"{path}: missing columns line")
    data = np.array([[float(x) for x in line.split(",")] for line in lines[i:] if line])
    return header, columns, data


def write_physical(path, state: PhysicalState, dim_N: int, p: float) -> None:
    header = {"kind": "physical", "t": f"{state.t:.17g}",
              "geometry": state.geometry, "dim_N": dim_N, "p": f"{p:.17g}"}
    if state.geometry == "radial":
        _write(path, header, ["r", "u", "ut"],
               [state.axes[0], state.u, state.ut])
    else:
        x, y = state.axes
        X, Y = np.meshgrid(x, y, indexing="ij")
        header["n_side"] = len(x)
        _write(path, header, ["x", "y", "u", "ut"],
               [X.ravel(), Y.ravel(), state.u.ravel(), state.ut.ravel()])


def read_physical(path) -> tuple[PhysicalState, dict]:
    header, columns, data = _read(path)
    if header.get("kind") != "physical":
        raise SnapshotFormatError(f"{path}: not a physical snapshot")
    t = float(header["t"])
    if header["geometry"] == "radial":
        r, u, ut = data.T
        state = PhysicalState(t, u, ut, "radial", (r,))
    else:
        n = int(header["n_side"])
        x = data[:, 0].reshape(n, n)[:, 0]
        y = data[:, 1].reshape(n, n)[0, :]
        u = data[:, 2].reshape(n, n)
        ut = data[:, 3].reshape(n, n)
        state = PhysicalState(t, u, ut, "cartesian2d", (x, y))
    return state, header


def write_similar(path, state: SimilarState) -> None:
    g = state.grid
    fr = state.frame
    header = {"kind": "similar", "s": f"{state.s:.17g}", "b": f"{state.b:.17g}",
              "dim_N": g.dim_N, "mode": g.mode, "n_r": g.n_r, "n_theta": g.n_theta,
              "p": f"{fr.p:.17g}", "a": f"{fr.a:.17g}", "M": f"{fr.M:.17g}",
              "perturbation": fr.perturbation, "T0": f"{fr.T0:.17g}",
              "x0": ",".join(f"{x:.17g}" for x in fr.x0)}
    if g.mode == "radial":
        _write(path, header, ["r", "w", "ws"], [g.r, state.w, state.ws])
    else:
        R = np.repeat(g.r, g.n_theta)
        TH = np.tile(g.theta, g.n_r)
        _write(path, header, ["r", "theta", "w", "ws"],
               [R, TH, state.w.ravel(), state.ws.ravel()])


def read_similar(path) -> SimilarState:
    header, columns, data = _read(path)
    if header.get("kind") != "similar":
        raise SnapshotFormatError(f"{path}: not a similarity snapshot")
    mode = header["mode"]
    n_r, n_theta = int(header["n_r"]), int(header["n_theta"])
    grid = build_ball_grid(int(header["dim_N"]), mode, n_r, n_theta)
    frame = Frame(dim_N=int(header["dim_N"]), p=float(header["p"]),
                  a=float(header["a"]), M=float(header["M"]),
                  perturbation=header["perturbation"],
                  x0=tuple(float(x) for x in header["x0"].split(",")),
                  T0=float(header["T0"]))
    if mode == "radial":
        _, w, ws = data.T
    else:
        w = data[:, 2].reshape(n_r, n_theta)
        ws = data[:, 3].reshape(n_r, n_theta)
    return SimilarState(grid, w, ws, s=float(header["s"]), b=float(header["b"]),
                        frame=frame)
