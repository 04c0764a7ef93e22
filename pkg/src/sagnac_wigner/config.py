"""Run configuration: a YAML document checked against a strict schema.

Every key is validated before any computation starts. Unknown keys,
duplicate keys, wrong types and out-of-range physics parameters are reported
as ConfigError with the offending dotted path and its line number.

Example::

    beam:
      type: wedge
      params: {k1: 3, k2: -3, a: 1, c: 0.1}
    grid: {n: 512, dx: 0.05}
    scan:
      x: {start: -4, stop: 4, step: 0.2}
      k: {start: -6, stop: 6, step: 0.3}
      phase: 0
      seed: 7
    photons: {n_total: 10000}
    output: {directory: out, formats: [csv, pgm]}
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError

BEAM_PARAMS = {
    "gaussian": {"x_c": 0.0, "a": 1.0, "k_c": 0.0, "c": 0.0},
    "hermite_gauss": {"order": 0, "a": 1.0, "x_c": 0.0},
    "wedge": {"k1": 3.0, "k2": -3.0, "a": 1.0, "c": 0.0, "eps3": 0.0, "k3": None},
    "partially_coherent_pair": {"mu": 1.0, "x1": 0.0, "x2": 0.0, "k1": 3.0, "k2": -3.0, "a": 1.0, "c": 0.0},
    "bundle": {"path": None},
}
POSITIVE = {"a", "dx", "sigma_minus", "sigma_plus", "k0", "step", "n_total"}
FORMATS = ("csv", "pgm")


@dataclass
class _Doc:
    """Plain data with a dotted-path -> line lookup for error messages."""

    data: dict
    lines: dict

    def line(self, path: str):
        while path:
            if path in self.lines:
                return self.lines[path]
            path = path.rpartition(".")[0]
        return None

    def fail(self, path: str, message: str):
        raise ConfigError(f"{path}: {message}", self.line(path))


def _walk(loader, node, path, lines):
    lines[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        out = {}
        for key_node, value_node in node.value:
            key = loader.construct_object(key_node, deep=True)
            sub = f"{path}.{key}" if path else str(key)
            if key in out:
                raise ConfigError(f"{sub}: duplicate key", key_node.start_mark.line + 1)
            lines[sub] = key_node.start_mark.line + 1
            out[key] = _walk(loader, value_node, sub, lines)
        return out
    if isinstance(node, yaml.SequenceNode):
        return [_walk(loader, v, f"{path}[{i}]", lines) for i, v in enumerate(node.value)]
    return loader.construct_object(node, deep=True)


def parse_document(text: str) -> _Doc:
    loader = yaml.SafeLoader(text)
    try:
        node = loader.get_single_node()
        lines: dict = {}
        data = {} if node is None else _walk(loader, node, "", lines)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        raise ConfigError(f"malformed YAML: {exc.problem}", mark.line + 1 if mark else None) from None
    finally:
        loader.dispose()
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping", 1)
    return _Doc(data, lines)


# ---- typed sections -------------------------------------------------------

@dataclass(frozen=True)
class BeamSection:
    type: str = "gaussian"
    params: dict = field(default_factory=dict)
    propagate: tuple | None = None  # (z, k0)


@dataclass(frozen=True)
class GridSection:
    n: int = 256
    dx: float = 0.125
    x_center: float = 0.0


@dataclass(frozen=True)
class AxisSpec:
    start: float
    stop: float
    step: float

    def values(self) -> np.ndarray:
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return self.start + self.step * np.arange(count)


@dataclass(frozen=True)
class ScanSection:
    x: AxisSpec = AxisSpec(-2.0, 2.0, 0.125)
    k: AxisSpec = AxisSpec(-2.0, 2.0, 0.125)
    phase: float = 0.0
    jitter: float = 0.0
    split_imbalance: float = 0.0
    seed: int = 0
    method: str = "two_port"


@dataclass(frozen=True)
class FitSection:
    map: str | None = None
    init: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ChshSection:
    state: str = "epr"
    sigma_minus: float = 0.5
    sigma_plus: float = 2.0
    d: float | None = None
    settings: dict | None = None  # name -> (x, k)
    search_steps: int = 12


@dataclass(frozen=True)
class MarginalsSection:
    map: str | None = None
    compensate: tuple | None = None  # (z, k0)


@dataclass(frozen=True)
class RunConfig:
    beam: BeamSection = BeamSection()
    grid: GridSection = GridSection()
    scan: ScanSection = ScanSection()
    photons: int | None = None  # None means analog detection
    output_directory: str = "out"
    formats: tuple = FORMATS
    fit: FitSection = FitSection()
    chsh: ChshSection = ChshSection()
    marginals: MarginalsSection = MarginalsSection()
    reconstruct_input: str | None = None
    base_dir: Path = Path(".")

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self.base_dir / p


# ---- validation helpers ---------------------------------------------------

def _mapping(doc, value, path, allowed):
    if value is None:
        return {}
    if not isinstance(value, dict):
        doc.fail(path, "must be a mapping")
    for key in value:
        if key not in allowed:
            sub = f"{path}.{key}" if path else str(key)
            doc.fail(sub, f"unknown key (allowed: {', '.join(sorted(allowed))})")
    return value


def _number(doc, value, path, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        doc.fail(path, f"must be a number, got {value!r}")
    if integer:
        if float(value) != int(value):
            doc.fail(path, f"must be an integer, got {value!r}")
        value = int(value)
    else:
        value = float(value)
    if not math.isfinite(value):
        doc.fail(path, "must be finite")
    if path.rpartition(".")[2] in POSITIVE and not value > 0:
        doc.fail(path, f"must be > 0, got {value:g}")
    return value


def _pair(doc, value, path):
    if not (isinstance(value, list) and len(value) == 2):
        doc.fail(path, "must be a two-element list [x, k]")
    return tuple(_number(doc, v, f"{path}[{i}]") for i, v in enumerate(value))


def _beam(doc, raw) -> BeamSection:
    raw = _mapping(doc, raw, "beam", {"type", "params", "propagate"})
    kind = raw.get("type", "gaussian")
    if kind not in BEAM_PARAMS:
        doc.fail("beam.type", f"unknown beam type {kind!r} (allowed: {', '.join(BEAM_PARAMS)})")
    defaults = BEAM_PARAMS[kind]
    given = _mapping(doc, raw.get("params"), "beam.params", set(defaults))
    params = dict(defaults)
    for key, value in given.items():
        path = f"beam.params.{key}"
        if key == "path":
            if not isinstance(value, str):
                doc.fail(path, "must be a string")
            params[key] = value
        elif value is None and defaults[key] is None:
            params[key] = None
        else:
            params[key] = _number(doc, value, path, integer=key == "order")
    if kind == "hermite_gauss" and params["order"] < 0:
        doc.fail("beam.params.order", "must be >= 0")
    if kind == "wedge" and params["eps3"] < 0:
        doc.fail("beam.params.eps3", "must be >= 0")
    if kind == "partially_coherent_pair" and not abs(params["mu"]) <= 1:
        doc.fail("beam.params.mu", "must lie in [-1, 1]")
    if kind == "bundle" and params["path"] is None:
        doc.fail("beam.params", "bundle beam needs a path")
    propagate = None
    if "propagate" in raw:
        prop = _mapping(doc, raw["propagate"], "beam.propagate", {"z", "k0"})
        for key in ("z", "k0"):
            if key not in prop:
                doc.fail("beam.propagate", f"missing {key}")
        propagate = (_number(doc, prop["z"], "beam.propagate.z"), _number(doc, prop["k0"], "beam.propagate.k0"))
    return BeamSection(kind, params, propagate)


def _grid(doc, raw) -> GridSection:
    raw = _mapping(doc, raw, "grid", {"n", "dx", "x_center"})
    g = GridSection()
    n = _number(doc, raw.get("n", g.n), "grid.n", integer=True)
    if n < 8 or n % 2:
        doc.fail("grid.n", f"must be an even integer >= 8, got {n}")
    dx = _number(doc, raw.get("dx", g.dx), "grid.dx")
    xc = _number(doc, raw.get("x_center", g.x_center), "grid.x_center")
    return GridSection(n, dx, xc)


def _axis(doc, raw, path, default: AxisSpec) -> AxisSpec:
    raw = _mapping(doc, raw, path, {"start", "stop", "step"})
    start = _number(doc, raw.get("start", default.start), f"{path}.start")
    stop = _number(doc, raw.get("stop", default.stop), f"{path}.stop")
    step = _number(doc, raw.get("step", default.step), f"{path}.step")
    if stop < start:
        doc.fail(path, "stop must be >= start")
    return AxisSpec(start, stop, step)


def _scan(doc, raw) -> ScanSection:
    raw = _mapping(doc, raw, "scan", {"x", "k", "phase", "jitter", "split_imbalance", "seed", "method"})
    d = ScanSection()
    jitter = _number(doc, raw.get("jitter", d.jitter), "scan.jitter")
    if jitter < 0:
        doc.fail("scan.jitter", "must be >= 0")
    eps = _number(doc, raw.get("split_imbalance", d.split_imbalance), "scan.split_imbalance")
    if abs(eps) > 0.1:
        doc.fail("scan.split_imbalance", "must lie in [-0.1, 0.1]")
    seed = _number(doc, raw.get("seed", d.seed), "scan.seed", integer=True)
    if seed < 0:
        doc.fail("scan.seed", "must be >= 0")
    method = raw.get("method", d.method)
    if method not in ("two_port", "single_port_pedestal"):
        doc.fail("scan.method", f"unknown reconstruction method {method!r}")
    return ScanSection(
        _axis(doc, raw.get("x"), "scan.x", d.x),
        _axis(doc, raw.get("k"), "scan.k", d.k),
        _number(doc, raw.get("phase", d.phase), "scan.phase"),
        jitter,
        eps,
        seed,
        method,
    )


def _photons(doc, raw):
    if raw is None or raw == "analog":
        return None
    if isinstance(raw, dict):
        raw = _mapping(doc, raw, "photons", {"n_total"})
        if "n_total" not in raw:
            doc.fail("photons", "missing n_total")
        raw = raw["n_total"]
        return _number(doc, raw, "photons.n_total", integer=True)
    value = _number(doc, raw, "photons", integer=True)
    if value < 1:
        doc.fail("photons", "must be 'analog' or a positive photon number")
    return value


def _output(doc, raw):
    raw = _mapping(doc, raw, "output", {"directory", "formats"})
    directory = raw.get("directory", "out")
    if not isinstance(directory, str):
        doc.fail("output.directory", "must be a string")
    formats = raw.get("formats", list(FORMATS))
    if isinstance(formats, str):
        formats = [t.strip() for t in formats.split(",")]
    if not isinstance(formats, list) or not formats:
        doc.fail("output.formats", "must be a non-empty list")
    for i, f in enumerate(formats):
        if f not in FORMATS:
            doc.fail(f"output.formats[{i}]", f"unknown format {f!r} (allowed: csv, pgm)")
    return directory, tuple(formats)


def _fit(doc, raw) -> FitSection:
    from .analysis import PARAM_NAMES

    raw = _mapping(doc, raw, "fit", {"map", "init"})
    path = raw.get("map")
    if path is not None and not isinstance(path, str):
        doc.fail("fit.map", "must be a string")
    init = _mapping(doc, raw.get("init"), "fit.init", set(PARAM_NAMES))
    init = {k: _number(doc, v, f"fit.init.{k}") for k, v in init.items()}
    return FitSection(path, init)


def _chsh(doc, raw) -> ChshSection:
    raw = _mapping(doc, raw, "chsh", {"state", "sigma_minus", "sigma_plus", "d", "settings", "search_steps"})
    d = ChshSection()
    state = raw.get("state", d.state)
    if state not in ("epr", "product"):
        doc.fail("chsh.state", f"unknown state {state!r} (allowed: epr, product)")
    disp = raw.get("d")
    if disp is not None:
        disp = _number(doc, disp, "chsh.d")
    settings = None
    if "settings" in raw:
        names = ("a", "a_prime", "b", "b_prime")
        given = _mapping(doc, raw["settings"], "chsh.settings", set(names))
        for name in names:
            if name not in given:
                doc.fail("chsh.settings", f"missing {name}")
        settings = {name: _pair(doc, given[name], f"chsh.settings.{name}") for name in names}
        if disp is not None:
            doc.fail("chsh.d", "give either d or settings, not both")
    steps = _number(doc, raw.get("search_steps", d.search_steps), "chsh.search_steps", integer=True)
    if steps < 0:
        doc.fail("chsh.search_steps", "must be >= 0")
    return ChshSection(
        state,
        _number(doc, raw.get("sigma_minus", d.sigma_minus), "chsh.sigma_minus"),
        _number(doc, raw.get("sigma_plus", d.sigma_plus), "chsh.sigma_plus"),
        disp,
        settings,
        steps,
    )


def _marginals(doc, raw) -> MarginalsSection:
    raw = _mapping(doc, raw, "marginals", {"map", "compensate"})
    path = raw.get("map")
    if path is not None and not isinstance(path, str):
        doc.fail("marginals.map", "must be a string")
    comp = None
    if "compensate" in raw:
        c = _mapping(doc, raw["compensate"], "marginals.compensate", {"z", "k0"})
        for key in ("z", "k0"):
            if key not in c:
                doc.fail("marginals.compensate", f"missing {key}")
        comp = (_number(doc, c["z"], "marginals.compensate.z"), _number(doc, c["k0"], "marginals.compensate.k0"))
    return MarginalsSection(path, comp)


SECTIONS = ("beam", "grid", "scan", "photons", "output", "fit", "chsh", "marginals", "reconstruct")


def parse_config(text: str, base_dir: Path | str = ".") -> RunConfig:
    doc = parse_document(text)
    _mapping(doc, doc.data, "", set(SECTIONS))
    data = doc.data
    directory, formats = _output(doc, data.get("output"))
    recon = _mapping(doc, data.get("reconstruct"), "reconstruct", {"input"})
    recon_input = recon.get("input")
    if recon_input is not None and not isinstance(recon_input, str):
        doc.fail("reconstruct.input", "must be a string")
    return RunConfig(
        beam=_beam(doc, data.get("beam")),
        grid=_grid(doc, data.get("grid")),
        scan=_scan(doc, data.get("scan")),
        photons=_photons(doc, data.get("photons")),
        output_directory=directory,
        formats=formats,
        fit=_fit(doc, data.get("fit")),
        chsh=_chsh(doc, data.get("chsh")),
        marginals=_marginals(doc, data.get("marginals")),
        reconstruct_input=recon_input,
        base_dir=Path(base_dir),
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, path.parent)
