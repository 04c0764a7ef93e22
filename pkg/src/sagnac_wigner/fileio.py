"""Plain-text persistence: CSV tables with ``#`` header lines, JSON sidecars, PGM heatmaps.

Floats are written with ``repr`` so that every file round-trips exactly and
repeated runs produce byte-identical output.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .field import Ensemble, Field1D, Grid1D
from .photons import CountRecord
from .sagnac import InterferometerConfig, MirrorSetting, ScanResult
from .wigner import WignerMap


def _f(v) -> str:
    return repr(float(v))


def _comment_lines(path: Path) -> tuple[list[str], list[str]]:
    comments, rows = [], []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        (comments if line.startswith("#") else rows).append(line)
    return comments, rows


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"


# ---- fields ---------------------------------------------------------------

def save_field(path, field: Field1D) -> Path:
    g = field.grid
    lines = ["# n,dx,x_center", f"# {g.n},{_f(g.dx)},{_f(g.x_center)}", "# x,re,im"]
    for x, e in zip(g.x, field.samples):
        lines.append(f"{_f(x)},{_f(e.real)},{_f(e.imag)}")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def load_field(path) -> Field1D:
    comments, rows = _comment_lines(path)
    n, dx, xc = comments[1].lstrip("# ").split(",")
    grid = Grid1D(int(n), float(dx), float(xc))
    data = np.array([[float(t) for t in r.split(",")] for r in rows])
    return Field1D(grid, data[:, 1] + 1j * data[:, 2])


def save_ensemble(directory, ensemble: Ensemble) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    lines = ["weight,file"]
    for m, (w, f) in enumerate(ensemble.modes):
        name = f"mode_{m:03d}.csv"
        save_field(directory / name, f)
        lines.append(f"{_f(w)},{name}")
    (directory / "manifest.csv").write_text("\n".join(lines) + "\n")
    return directory


def load_ensemble(directory) -> Ensemble:
    directory = Path(directory)
    rows = (directory / "manifest.csv").read_text().splitlines()[1:]
    modes = []
    for row in rows:
        if row.strip():
            w, name = row.split(",")
            modes.append((float(w), load_field(directory / name.strip())))
    return Ensemble(tuple(modes))


# ---- Wigner maps ----------------------------------------------------------

def save_map_csv(path, wmap: WignerMap) -> Path:
    lines = [
        "# x_axis: " + ",".join(_f(v) for v in wmap.x_axis),
        "# k_axis: " + ",".join(_f(v) for v in wmap.k_axis),
    ]
    lines += [",".join(_f(v) for v in row) for row in wmap.values]
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def load_map(path) -> WignerMap:
    path = Path(path)
    comments, rows = _comment_lines(path)
    axes = {}
    for c in comments:
        key, _, rest = c.lstrip("# ").partition(":")
        axes[key.strip()] = np.array([float(t) for t in rest.split(",")])
    values = np.array([[float(t) for t in r.split(",")] for r in rows])
    sidecar = path.with_suffix(".json")
    meta = json.loads(sidecar.read_text()) if sidecar.exists() else {}
    return WignerMap(axes["x_axis"], axes["k_axis"], values, meta)


def pgm_bytes(wmap: WignerMap) -> tuple[bytes, float, float]:
    """8-bit binary PGM: x runs left to right, k bottom to top; linear min/max scaling."""
    v = wmap.values
    lo, hi = float(v.min()), float(v.max())
    span = hi - lo if hi > lo else 1.0
    img = np.rint((v - lo) / span * 255).astype(np.uint8)
    img = img.T[::-1]
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode()
    return header + img.tobytes(), lo, hi


def read_pgm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    w, h = (int(t) for t in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w)


def save_map(base, wmap: WignerMap, formats=("csv", "pgm")) -> list[Path]:
    """Write ``base.csv`` (+ ``base.json`` sidecar) and optionally ``base.pgm``."""
    base = Path(base)
    written = []
    meta = {key: val for key, val in wmap.meta.items() if key != "stderr"}
    if "csv" in formats:
        written.append(save_map_csv(base.with_suffix(".csv"), wmap))
    if "pgm" in formats:
        data, lo, hi = pgm_bytes(wmap)
        p = base.with_suffix(".pgm")
        p.write_bytes(data)
        written.append(p)
        meta["pgm_scale"] = {"min": lo, "max": hi}
    side = base.with_suffix(".json")
    side.write_text(dump_json(meta))
    written.append(side)
    stderr = wmap.meta.get("stderr")
    if stderr is not None and "csv" in formats:
        err_map = WignerMap(wmap.x_axis, wmap.k_axis, stderr)
        written.append(save_map_csv(base.with_name(base.name + "_stderr.csv"), err_map))
    return written


# ---- scans and counts -----------------------------------------------------

def save_scan(path, scan: ScanResult) -> Path:
    cfg = scan.config_dict()
    lines = [
        f"# total_power={_f(scan.total_power)}",
        f"# phase={_f(scan.config.phase)}",
        f"# seed={scan.config.seed}",
        f"# source={scan.source}",
        "# config=" + json.dumps(cfg, sort_keys=True),
        "x,k,bright,dark",
    ]
    for s, b, d in zip(scan.settings, scan.bright, scan.dark):
        lines.append(f"{_f(s.x)},{_f(s.k)},{_f(b)},{_f(d)}")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def _header_fields(comments) -> dict:
    out = {}
    for c in comments:
        key, _, value = c.lstrip("# ").partition("=")
        out[key.strip()] = value.strip()
    return out


def load_scan(path) -> ScanResult:
    comments, rows = _comment_lines(path)
    head = _header_fields(comments)
    cfg = InterferometerConfig(**json.loads(head["config"]))
    data = np.array([[float(t) for t in r.split(",")] for r in rows[1:]])
    settings = tuple(MirrorSetting(x, k) for x, k in data[:, :2])
    return ScanResult(settings, data[:, 2], data[:, 3], float(head["total_power"]), cfg, head.get("source", ""))


def save_counts(path, records, s_total: float, phase: float) -> Path:
    seeds = sorted({r.seed for r in records})
    lines = [
        f"# total_power={_f(s_total)}",
        f"# phase={_f(phase)}",
        f"# seed={','.join(str(s) for s in seeds)}",
        "x,k,n_bright,n_dark,n_total",
    ]
    for r in records:
        lines.append(f"{_f(r.setting.x)},{_f(r.setting.k)},{r.n_bright},{r.n_dark},{r.n_total}")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def load_counts(path):
    """Return (records, total_power, phase)."""
    comments, rows = _comment_lines(path)
    head = _header_fields(comments)
    seed = int(head["seed"].split(",")[0]) if head.get("seed") else 0
    records = []
    for r in rows[1:]:
        x, k, nb, nd, nt = r.split(",")
        records.append(CountRecord(MirrorSetting(float(x), float(k)), int(nb), int(nd), int(nt), seed))
    return records, float(head["total_power"]), float(head["phase"])


# ---- two-photon fields and reports ----------------------------------------

def save_joint_field(path, psi) -> Path:
    g1, g2 = psi.grid1, psi.grid2
    lines = [
        f"# grid1: {g1.n},{_f(g1.dx)},{_f(g1.x_center)}",
        f"# grid2: {g2.n},{_f(g2.dx)},{_f(g2.x_center)}",
        "# i1,i2,re,im",
    ]
    for i1 in range(g1.n):
        for i2 in range(g2.n):
            v = psi.samples[i1, i2]
            lines.append(f"{i1},{i2},{_f(v.real)},{_f(v.imag)}")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n")
    return path


def load_joint_field(path):
    from .entangle import JointField

    comments, rows = _comment_lines(path)
    grids = []
    for c in comments[:2]:
        n, dx, xc = c.split(":", 1)[1].strip().split(",")
        grids.append(Grid1D(int(n), float(dx), float(xc)))
    samples = np.zeros((grids[0].n, grids[1].n), dtype=complex)
    for r in rows:
        i1, i2, re, im = r.split(",")
        samples[int(i1), int(i2)] = float(re) + 1j * float(im)
    return JointField(grids[0], grids[1], samples)


def key_value_text(pairs) -> str:
    return "".join(f"{k} = {v}\n" for k, v in pairs)
