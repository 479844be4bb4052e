"""Run configuration: YAML text with explicit unit suffixes.

Quantities are strings such as ``"42.07 GHz"``, ``"0.0229 eV"`` or
``"500 nm"``. Bare numbers are accepted only inside the ``waveguide``
section (normalized units) and for dimensionless fields.
"""
from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field
from typing import Optional

import yaml

from .errors import ConfigError

_NUM = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_QTY = re.compile(rf"^\s*({_NUM})\s*([A-Za-z/µ]+(?:\s*x\s*2pi)?)?\s*$")

# (kind, unit) -> factor to SI
_UNITS = {
    "frequency": {"rad/s": 1.0, "Grad/s": 1e9, "GHz": 2 * math.pi * 1e9, "Hz": 2 * math.pi,
                  "THz": 2 * math.pi * 1e12, "normalized": 1.0},
    "energy": {"eV": 1.0, "meV": 1e-3},
    "field": {"T": 1.0},
    "length": {"m": 1.0, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9, "normalized": 1.0},
    "time": {"s": 1.0, "ps": 1e-12, "fs": 1e-15},
    "temperature": {"K": 1.0},
    "velocity": {"m/s": 1.0},
    "angle": {"rad": 1.0, "deg": math.pi / 180},
    "dimensionless": {"": 1.0},
}


def parse_quantity(value, kind, allow_bare=False, where="?"):
    """Value in SI (energies in eV, frequencies in rad/s)."""
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a {kind} quantity, got a boolean")
    if isinstance(value, (int, float)):
        if kind == "dimensionless" or allow_bare:
            return float(value)
        raise ConfigError(f"{where}: missing unit for {kind} quantity {value!r}")
    if not isinstance(value, str):
        raise ConfigError(f"{where}: expected a {kind} quantity, got {type(value).__name__}")
    m = _QTY.match(value)
    if not m:
        raise ConfigError(f"{where}: cannot parse quantity {value!r}")
    num, unit = float(m.group(1)), (m.group(2) or "").replace(" ", "")
    twopi = unit.endswith("x2pi")
    if twopi:
        unit = unit[:-4]
    table = _UNITS[kind]
    if unit == "" and not (kind == "dimensionless" or allow_bare):
        raise ConfigError(f"{where}: missing unit for {kind} quantity {value!r}")
    if unit == "" or unit == "normalized":
        if unit == "normalized" and "normalized" not in table:
            raise ConfigError(f"{where}: 'normalized' not allowed for {kind}")
        return num
    if unit not in table:
        raise ConfigError(f"{where}: unit {unit!r} not valid for {kind} (use one of {sorted(table)})")
    return num * table[unit] * (2 * math.pi if twopi else 1.0)


# ---------------------------------------------------------------------------
# YAML with line numbers


class _LineLoader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node, deep=False):
    loader.flatten_mapping(node)
    out = {}
    lines = {}
    for k, v in node.value:
        key = loader.construct_object(k, deep=deep)
        if key in out:
            raise ConfigError(f"line {k.start_mark.line + 1}: duplicate key {key!r}")
        out[key] = loader.construct_object(v, deep=deep)
        lines[key] = k.start_mark.line + 1
    out["__lines__"] = lines
    return out


_LineLoader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


def _line(d, key):
    return d.get("__lines__", {}).get(key, "?")


def _section(d, name, allowed, required=(), where=""):
    if not isinstance(d, dict):
        raise ConfigError(f"{where or name}: expected a mapping")
    for k in d:
        if k == "__lines__":
            continue
        if k not in allowed:
            raise ConfigError(f"line {_line(d, k)}: unknown key {where}{k!r}")
    for k in required:
        if k not in d:
            raise ConfigError(f"{where or name}: missing required key {k!r}")
    return d


# ---------------------------------------------------------------------------
# sections


@dataclass(frozen=True)
class WaveguideConfig:
    a: float = 2.0
    b: float = 1.0
    strength: float = 15.0
    pole_sq: float = 16.0
    eps_inf: float = 1.0
    modes: tuple = ((1, 1), (2, 1))
    bracket: tuple = (2.5, 3.5)
    omega0: Optional[float] = None
    laws: Optional[tuple] = None  # Taylor coefficient lists about omega0
    constant_index: Optional[float] = None


@dataclass(frozen=True)
class UniaxialConfig:
    eps_inf: float
    omega_rx: float
    omega_ry: float
    curvature: str = "index"
    omega_p: Optional[float] = None
    omega0: Optional[float] = None


@dataclass(frozen=True)
class ScattererConfig:
    fx: tuple = (math.pi / 2,)
    action: Optional[tuple] = None  # (real, imag) nested lists
    slope: Optional[tuple] = None


@dataclass(frozen=True)
class GrapheneConfig:
    mu_c: Optional[float] = None  # eV; None -> white-line value
    B0: float = 1.0
    tau: float = 0.2e-12
    temperature: float = 300.0
    v_f: float = 1e6
    N: int = 100
    L_g: float = 500e-9
    provider: str = "intraband"
    white_line_B0: tuple = ()


@dataclass(frozen=True)
class SolverConfig:
    k: int = 3
    m: Optional[int] = 10
    seeds: int = 64
    tol: Optional[float] = None
    mode: str = "reduced"
    count: Optional[int] = None
    initial: Optional[tuple] = None
    step: Optional[float] = None


@dataclass(frozen=True)
class SweepConfig:
    w_min: float = 0.95  # in units of omega0
    w_max: float = 1.05
    points: int = 201


@dataclass(frozen=True)
class PulseConfig:
    bandwidth: float = 0.01  # relative to omega0
    samples: int = 2048
    periods: int = 5
    amplitudes: tuple = (1.0, 1.0)
    span: float = 16.0


@dataclass(frozen=True)
class OutputConfig:
    directory: str = "out"
    formats: tuple = ("json", "csv")


@dataclass(frozen=True)
class RunConfig:
    waveguide: Optional[WaveguideConfig] = None
    uniaxial: Optional[UniaxialConfig] = None
    scatterer: Optional[ScattererConfig] = None
    graphene: Optional[GrapheneConfig] = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    pulse: Optional[PulseConfig] = None
    output: OutputConfig = field(default_factory=OutputConfig)
    digest: str = ""

    @property
    def medium(self):
        return "waveguide" if self.waveguide is not None else "uniaxial"


def _int(d, key, where, lo=None):
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"line {_line(d, key)}: {where}{key} must be an integer")
    if lo is not None and v < lo:
        raise ConfigError(f"line {_line(d, key)}: {where}{key} must be >= {lo}")
    return v


def _q(d, key, kind, where, bare=False):
    return parse_quantity(d[key], kind, bare, f"line {_line(d, key)}: {where}{key}")


def _matrix(v, where):
    if not (isinstance(v, list) and all(isinstance(r, list) for r in v)):
        raise ConfigError(f"{where}: expected a nested list")
    try:
        return tuple(tuple(float(x) for x in r) for r in v)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: non-numeric matrix entry") from None


def _waveguide(d):
    w = "waveguide."
    _section(d, "waveguide", {"a", "b", "strength", "pole_sq", "eps_inf", "modes", "bracket",
                              "omega0", "laws", "constant_index"}, where=w)
    kw = {}
    for key in ("a", "b"):
        if key in d:
            kw[key] = _q(d, key, "length", w, bare=True)
    for key in ("strength", "pole_sq", "eps_inf", "constant_index"):
        if key in d:
            kw[key] = _q(d, key, "dimensionless", w)
    if "omega0" in d:
        kw["omega0"] = _q(d, "omega0", "frequency", w, bare=True)
    if "bracket" in d:
        b = d["bracket"]
        if not (isinstance(b, list) and len(b) == 2):
            raise ConfigError(f"line {_line(d, 'bracket')}: {w}bracket needs two values")
        kw["bracket"] = tuple(parse_quantity(x, "frequency", True, f"{w}bracket") for x in b)
        if not kw["bracket"][0] < kw["bracket"][1]:
            raise ConfigError(f"line {_line(d, 'bracket')}: empty frequency bracket")
    if "modes" in d:
        ms = d["modes"]
        if not (isinstance(ms, list) and all(isinstance(m, list) and len(m) == 2 for m in ms)):
            raise ConfigError(f"line {_line(d, 'modes')}: {w}modes must be [[l, j], ...]")
        kw["modes"] = tuple((int(l), int(j)) for l, j in ms)
    if "laws" in d:
        kw["laws"] = _matrix(d["laws"], f"line {_line(d, 'laws')}: {w}laws")
        if "omega0" not in kw:
            raise ConfigError(f"{w}laws needs {w}omega0")
    return WaveguideConfig(**kw)


def _uniaxial(d):
    w = "uniaxial."
    _section(d, "uniaxial", {"eps_inf", "omega_rx", "omega_ry", "curvature", "omega_p", "omega0"},
             ("eps_inf", "omega_rx", "omega_ry"), where=w)
    kw = dict(eps_inf=_q(d, "eps_inf", "dimensionless", w),
              omega_rx=_q(d, "omega_rx", "frequency", w),
              omega_ry=_q(d, "omega_ry", "frequency", w))
    for key in ("omega_p", "omega0"):
        if key in d:
            kw[key] = _q(d, key, "frequency", w)
    if "curvature" in d:
        if d["curvature"] not in ("index", "wavevector"):
            raise ConfigError(f"line {_line(d, 'curvature')}: {w}curvature must be index|wavevector")
        kw["curvature"] = d["curvature"]
    return UniaxialConfig(**kw)


def _scatterer(d):
    w = "scatterer."
    _section(d, "scatterer", {"fx", "action", "slope"}, where=w)
    kw = {}
    if "fx" in d:
        fx = d["fx"] if isinstance(d["fx"], list) else [d["fx"]]
        kw["fx"] = tuple(_fx_value(x, f"line {_line(d, 'fx')}: {w}fx") for x in fx)
    for key in ("action", "slope"):
        if key in d:
            sub = _section(d[key], key, {"real", "imag"}, ("real",), where=f"{w}{key}.")
            re_ = _matrix(sub["real"], f"{w}{key}.real")
            im_ = _matrix(sub.get("imag", [[0.0] * len(re_)] * len(re_)), f"{w}{key}.imag")
            kw[key] = (re_, im_)
    return ScattererConfig(**kw)


def _fx_value(x, where):
    if isinstance(x, str) and x.strip() in ("pi/2", "pi / 2"):
        return math.pi / 2
    return parse_quantity(x, "dimensionless", True, where)


def _graphene(d):
    w = "graphene."
    _section(d, "graphene", {"mu_c", "B0", "tau", "temperature", "v_f", "N", "L_g", "provider",
                             "white_line_B0"}, where=w)
    kw = {}
    if "mu_c" in d and d["mu_c"] != "auto":
        kw["mu_c"] = _q(d, "mu_c", "energy", w)
    table = {"B0": "field", "tau": "time", "temperature": "temperature", "v_f": "velocity",
             "L_g": "length"}
    for key, kind in table.items():
        if key in d:
            kw[key] = _q(d, key, kind, w)
    if "N" in d:
        kw["N"] = _int(d, "N", w, 1)
    if "provider" in d:
        if d["provider"] not in ("intraband", "transparent"):
            raise ConfigError(f"line {_line(d, 'provider')}: {w}provider must be intraband|transparent")
        kw["provider"] = d["provider"]
    if "white_line_B0" in d:
        kw["white_line_B0"] = tuple(parse_quantity(x, "field", False, f"{w}white_line_B0")
                                    for x in d["white_line_B0"])
    return GrapheneConfig(**kw)


def _solver(d):
    w = "solver."
    _section(d, "solver", {"k", "m", "seeds", "tol", "mode", "count", "initial", "step"}, where=w)
    kw = {}
    if "k" in d:
        kw["k"] = _int(d, "k", w, 1)
    if "m" in d:
        kw["m"] = None if d["m"] is None else _int(d, "m", w)
    if "seeds" in d:
        kw["seeds"] = _int(d, "seeds", w, 1)
    if "count" in d:
        kw["count"] = _int(d, "count", w, 1)
    if "tol" in d:
        kw["tol"] = _q(d, "tol", "dimensionless", w)
    if "step" in d:
        kw["step"] = _q(d, "step", "frequency", w, bare=True)
    if "mode" in d:
        if d["mode"] not in ("reduced", "general"):
            raise ConfigError(f"line {_line(d, 'mode')}: {w}mode must be reduced|general")
        kw["mode"] = d["mode"]
    if "initial" in d:
        kw["initial"] = tuple(parse_quantity(x, "dimensionless", True, f"{w}initial")
                              for x in d["initial"])
    return SolverConfig(**kw)


def _sweep(d):
    w = "sweep."
    _section(d, "sweep", {"w_min", "w_max", "points"}, where=w)
    kw = {}
    for key in ("w_min", "w_max"):
        if key in d:
            kw[key] = _q(d, key, "dimensionless", w)
    if "points" in d:
        kw["points"] = _int(d, "points", w, 2)
    cfg = SweepConfig(**kw)
    if not cfg.w_min < cfg.w_max:
        raise ConfigError(f"{w}w_min must be below {w}w_max")
    return cfg


def _pulse(d):
    w = "pulse."
    _section(d, "pulse", {"bandwidth", "samples", "periods", "amplitudes", "span"}, where=w)
    kw = {}
    for key in ("bandwidth", "span"):
        if key in d:
            kw[key] = _q(d, key, "dimensionless", w)
    for key in ("samples", "periods"):
        if key in d:
            kw[key] = _int(d, key, w, 0)
    if "amplitudes" in d:
        kw["amplitudes"] = tuple(float(x) for x in d["amplitudes"])
    return PulseConfig(**kw)


def _output(d):
    _section(d, "output", {"directory", "formats"}, where="output.")
    kw = {}
    if "directory" in d:
        kw["directory"] = str(d["directory"])
    if "formats" in d:
        bad = set(d["formats"]) - {"json", "csv"}
        if bad:
            raise ConfigError(f"line {_line(d, 'formats')}: unknown output formats {sorted(bad)}")
        kw["formats"] = tuple(d["formats"])
    return OutputConfig(**kw)


_PARSERS = {"waveguide": _waveguide, "uniaxial": _uniaxial, "scatterer": _scatterer,
            "graphene": _graphene, "solver": _solver, "sweep": _sweep, "pulse": _pulse,
            "output": _output}


def parse_config(text):
    """Validate a YAML document into a :class:`RunConfig`."""
    try:
        raw = yaml.load(text, Loader=_LineLoader)
    except yaml.YAMLError as e:
        raise ConfigError(f"YAML syntax error: {e}") from None
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a mapping of sections")
    for k in raw:
        if k != "__lines__" and k not in _PARSERS:
            raise ConfigError(f"line {_line(raw, k)}: unknown section {k!r}")
    media = [m for m in ("waveguide", "uniaxial") if m in raw]
    if len(media) != 1:
        raise ConfigError("exactly one medium section (waveguide or uniaxial) is required")
    kw = {k: _PARSERS[k](raw[k] if raw[k] is not None else {"__lines__": {}})
          for k in raw if k != "__lines__"}
    kw["digest"] = hashlib.sha256(text.encode()).hexdigest()
    return RunConfig(**kw)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
