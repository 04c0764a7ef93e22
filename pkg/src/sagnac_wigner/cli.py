"""Command-line front end: ``sagnac-wigner <command> --config run.yaml``.

Commands write their files under ``--out`` (default: the config's
``output.directory``) and print a key = value report on stdout. Errors go to
stderr as one JSON object, and the exit code is 2 for configuration errors,
3 for physics preconditions and 4 for analysis failures.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import fileio
from .analysis import fit_two_beam, initial_model
from .config import RunConfig, load_config
from .entangle import (
    chsh,
    displacement_settings,
    make_epr,
    product_state,
)
from .errors import ConfigError, InvalidParam, SagnacWignerError
from .field import (
    Ensemble,
    Grid1D,
    make_gaussian,
    make_hermite_gauss,
    make_partially_coherent_pair,
    propagate_fresnel,
    total_power,
    wedge_beam,
)
from .photons import estimate_wigner, photon_scan
from .sagnac import InterferometerConfig, MirrorSetting, grid_settings, reconstruct_wigner, run_scan
from .wigner import covariance_moments, marginal_k, marginal_x, shear_compensate, wigner_map

COMMANDS = ("beam", "oracle", "scan", "reconstruct", "fit", "chsh", "marginals")


# ---- building blocks ------------------------------------------------------

def build_grid(cfg: RunConfig) -> Grid1D:
    return Grid1D(cfg.grid.n, cfg.grid.dx, cfg.grid.x_center)


def build_ensemble(cfg: RunConfig) -> Ensemble:
    beam = cfg.beam
    p = beam.params
    if beam.type == "bundle":
        ens = fileio.load_ensemble(cfg.resolve(p["path"]))
    else:
        grid = build_grid(cfg)
        if beam.type == "gaussian":
            ens = Ensemble.pure(make_gaussian(grid, **p))
        elif beam.type == "hermite_gauss":
            ens = Ensemble.pure(make_hermite_gauss(grid, **p))
        elif beam.type == "wedge":
            ens = wedge_beam(grid, **p)
        else:
            u1 = make_gaussian(grid, p["x1"], p["a"], p["k1"], p["c"])
            u2 = make_gaussian(grid, p["x2"], p["a"], p["k2"], p["c"])
            ens = make_partially_coherent_pair(u1, u2, p["mu"])
    if beam.propagate is not None:
        z, k0 = beam.propagate
        ens = Ensemble(tuple((w, propagate_fresnel(f, z, k0)) for w, f in ens.modes))
    return ens


def scan_axes(cfg: RunConfig):
    return cfg.scan.x.values(), cfg.scan.k.values()


def _fmt(v) -> str:
    return f"{v:.12g}"


class Context:
    def __init__(self, cfg: RunConfig, out: Path, formats, seed: int, inputs: list[str]):
        self.cfg = cfg
        self.out = out
        self.formats = tuple(formats)
        self.seed = seed
        self.inputs = inputs
        self.report: list[tuple[str, str]] = []

    def emit(self, key, value):
        self.report.append((key, value if isinstance(value, str) else _fmt(value)))

    def path(self, name: str) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        return self.out / name

    def input_path(self, configured: str | None, what: str) -> Path:
        if self.inputs:
            return Path(self.inputs[0])
        if configured is None:
            raise ConfigError(f"{what}: no input file given on the command line or in the config")
        return self.cfg.resolve(configured)

    def save_map(self, name, wmap):
        written = fileio.save_map(self.path(name), wmap, self.formats)
        self.emit(f"{name}_files", ",".join(p.name for p in written))


# ---- commands -------------------------------------------------------------

def cmd_beam(ctx: Context):
    ens = build_ensemble(ctx.cfg)
    fileio.save_ensemble(ctx.path("beam"), ens)
    ctx.emit("beam", ctx.cfg.beam.type)
    ctx.emit("modes", str(len(ens.modes)))
    ctx.emit("total_power", total_power(ens))
    ctx.emit("digest", ens.digest())


def cmd_oracle(ctx: Context):
    ens = build_ensemble(ctx.cfg)
    xs, ks = scan_axes(ctx.cfg)
    wmap = wigner_map(ens, xs, ks)
    ctx.save_map("oracle", wmap)
    i, j = np.unravel_index(np.argmax(wmap.values), wmap.values.shape)
    ctx.emit("total_power", total_power(ens))
    ctx.emit("max", float(wmap.values.max()))
    ctx.emit("min", float(wmap.values.min()))
    ctx.emit("argmax_x", float(xs[i]))
    ctx.emit("argmax_k", float(ks[j]))


def cmd_scan(ctx: Context):
    cfg = ctx.cfg
    ens = build_ensemble(cfg)
    xs, ks = scan_axes(cfg)
    settings = grid_settings(xs, ks)
    if cfg.photons is None:
        icfg = InterferometerConfig(cfg.scan.phase, cfg.scan.jitter, cfg.scan.split_imbalance, ctx.seed)
        scan = run_scan(ens, settings, icfg)
        fileio.save_scan(ctx.path("scan.csv"), scan)
        wmap = reconstruct_wigner(scan, cfg.scan.method)
        ctx.emit("mode", "analog")
    else:
        records = photon_scan(ens, settings, cfg.photons, cfg.scan.phase, ctx.seed)
        s_total = total_power(ens)
        fileio.save_counts(ctx.path("counts.csv"), records, s_total, cfg.scan.phase)
        wmap = estimate_wigner(records, s_total, cfg.scan.phase)
        ctx.emit("mode", "photon")
        ctx.emit("n_total", str(cfg.photons))
    ctx.save_map("reconstructed", wmap)
    ctx.emit("points", str(len(settings)))
    ctx.emit("seed", str(ctx.seed))
    ctx.emit("max", float(wmap.values.max()))
    ctx.emit("min", float(wmap.values.min()))


def cmd_reconstruct(ctx: Context):
    src = ctx.input_path(ctx.cfg.reconstruct_input, "reconstruct.input")
    header = src.read_text().splitlines()
    columns = next((h for h in header if not h.startswith("#")), "")
    if columns.startswith("x,k,n_bright"):
        records, s_total, phase = fileio.load_counts(src)
        wmap = estimate_wigner(records, s_total, phase)
        ctx.emit("mode", "photon")
    else:
        scan = fileio.load_scan(src)
        wmap = reconstruct_wigner(scan, ctx.cfg.scan.method)
        ctx.emit("mode", "analog")
    ctx.save_map("reconstructed", wmap)
    ctx.emit("input", src.name)
    ctx.emit("max", float(wmap.values.max()))


def cmd_fit(ctx: Context):
    src = ctx.input_path(ctx.cfg.fit.map, "fit.map")
    wmap = fileio.load_map(src)
    init = initial_model(wmap)
    if ctx.cfg.fit.init:
        init = replace(init, **ctx.cfg.fit.init)
    result = fit_two_beam(wmap, init)
    text = result.report()
    ctx.path("fit_report.txt").write_text(text)
    for line in text.splitlines():
        key, _, value = line.partition(" = ")
        ctx.report.append((key, value))


def _chsh_settings(ctx: Context, psi):
    c = ctx.cfg.chsh
    if c.settings is not None:
        s = c.settings
        return tuple(MirrorSetting(*s[name]) for name in ("a", "a_prime", "b", "b_prime")), "config"
    if c.d is not None:
        return displacement_settings(c.d), "config"
    # displacement search along x in whole grid steps
    dx = psi.grid1.dx
    best = None
    for step in range(c.search_steps + 1):
        settings = displacement_settings(step * dx)
        b = chsh(psi, *settings)
        if best is None or b > best[0] + 1e-12:
            best = (b, settings)
    return best[1], "search"


def cmd_chsh(ctx: Context):
    c = ctx.cfg.chsh
    grid = build_grid(ctx.cfg)
    if c.state == "epr":
        psi = make_epr(grid, grid, c.sigma_minus, c.sigma_plus)
    else:
        psi = product_state(make_gaussian(grid), make_gaussian(grid))
    settings, origin = _chsh_settings(ctx, psi)
    b = chsh(psi, *settings)
    fileio.save_joint_field(ctx.path("state.csv"), psi)
    ctx.emit("state", c.state)
    ctx.emit("settings_source", origin)
    for name, s in zip(("a", "a_prime", "b", "b_prime"), settings):
        ctx.emit(name, f"{_fmt(s.x)},{_fmt(s.k)}")
    ctx.emit("B", b)
    ctx.emit("violation", "yes" if b > 2 else "no")
    ctx.path("chsh_report.txt").write_text(fileio.key_value_text(ctx.report))


def cmd_marginals(ctx: Context):
    m = ctx.cfg.marginals
    if m.map is not None or ctx.inputs:
        wmap = fileio.load_map(ctx.input_path(m.map, "marginals.map"))
    else:
        xs, ks = scan_axes(ctx.cfg)
        wmap = wigner_map(build_ensemble(ctx.cfg), xs, ks)
    if m.compensate is not None:
        wmap = shear_compensate(wmap, *m.compensate)
        ctx.save_map("compensated", wmap)
    ix = marginal_x(wmap)
    ik = marginal_k(wmap)
    lines = ["x,intensity"] + [f"{x!r},{v!r}" for x, v in zip(wmap.x_axis.tolist(), ix.tolist())]
    ctx.path("marginal_x.csv").write_text("\n".join(lines) + "\n")
    lines = ["k,spectrum"] + [f"{k!r},{v!r}" for k, v in zip(wmap.k_axis.tolist(), ik.tolist())]
    ctx.path("marginal_k.csv").write_text("\n".join(lines) + "\n")
    mom = covariance_moments(wmap)
    for key in ("mean_x", "mean_k", "var_x", "var_k", "cov_xk", "tilt_angle"):
        ctx.emit(key, getattr(mom, key))
    ctx.path("moments.txt").write_text(fileio.key_value_text(ctx.report))


HANDLERS = {
    "beam": cmd_beam,
    "oracle": cmd_oracle,
    "scan": cmd_scan,
    "reconstruct": cmd_reconstruct,
    "fit": cmd_fit,
    "chsh": cmd_chsh,
    "marginals": cmd_marginals,
}


# ---- entry point ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sagnac-wigner", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("inputs", nargs="*", help="input file for reconstruct, fit and marginals")
    parser.add_argument("--config", help="YAML run configuration")
    parser.add_argument("--out", help="output directory (overrides output.directory)")
    parser.add_argument("--seed", type=int, help="RNG seed (overrides scan.seed)")
    parser.add_argument("--format", help="comma-separated output formats: csv,pgm")
    return parser


def _error_payload(exc: Exception) -> dict:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    if getattr(exc, "line", None) is not None:
        payload["line"] = exc.line
    setting = getattr(exc, "setting", None)
    if isinstance(setting, MirrorSetting):
        payload["setting"] = {"x": setting.x, "k": setting.k}
    return payload


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else RunConfig()
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        formats = cfg.formats
        if args.format:
            formats = tuple(t.strip() for t in args.format.split(",") if t.strip())
            bad = [f for f in formats if f not in ("csv", "pgm")]
            if bad or not formats:
                raise ConfigError(f"--format: unknown format(s) {bad}")
        out = Path(args.out) if args.out else cfg.resolve(cfg.output_directory)
        seed = cfg.scan.seed if args.seed is None else args.seed
        ctx = Context(cfg, out, formats, seed, args.inputs)
        HANDLERS[args.command](ctx)
    except SagnacWignerError as exc:
        print(json.dumps(_error_payload(exc), sort_keys=True), file=sys.stderr)
        return exc.exit_code
    except (OSError, KeyError, ValueError) as exc:
        # unreadable or malformed input files
        err = InvalidParam(f"{type(exc).__name__}: {exc}")
        print(json.dumps(_error_payload(err), sort_keys=True), file=sys.stderr)
        return err.exit_code
    sys.stdout.write(fileio.key_value_text(ctx.report))
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
