"""Flat sectioned ``key = value`` run configuration.

Sections: [run], [numerics], [grid], [medium], [bo], [output].  Lists are
comma separated.  Grids are given either as explicit lists (``inv_a = ...``)
or as ``<name>_min``, ``<name>_max``, ``<name>_count`` and
``<name>_spacing`` (linear | log).  A log-spaced k_F grid starting at 0 uses
``k_f_log_start`` as its first non-zero point.
"""
from __future__ import annotations

import configparser
import logging
import math
import re
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .errors import ConfigError
from .numerics import MAP_KINDS, MIN_NODES

log = logging.getLogger(__name__)

MODES = ("vacuum-spectrum", "medium-flow", "bo-count", "constants")
FORMATS = ("csv", "json")
TRANSFORMS = ("none", "fourth_root")

_GRID_NAMES = ("inv_a", "k_f", "density")
_GRID_KEYS = {f"{n}{s}" for n in _GRID_NAMES
              for s in ("", "_min", "_max", "_count", "_spacing")} | {"k_f_log_start"}

# section -> key -> (type, default); a default of None means optional/unset
SCHEMA: Dict[str, Dict[str, tuple]] = {
    "run": {"mode": (str, None)},
    "numerics": {
        "cutoff": (float, None),
        "n_mesh": (int, 200),
        "map_kind": (str, "rational"),
        "tol_energy": (float, 1e-8),
        "tol_eig": (float, 1e-10),
        "max_iter": (int, 2000),
        "n_states": (int, 8),
    },
    "grid": {k: (str, None) for k in sorted(_GRID_KEYS)},
    "medium": {
        "kind": (str, None),
        "inv_a": (float, 0.0),
        "a_b": (float, None),
    },
    "bo": {
        "mass_ratio": (float, 1.0),
        "r0": (float, None),
        "xi": (str, None),
        "inv_a": (float, None),
    },
    "output": {
        "path": (str, None),
        "format": (str, "csv"),
        "axis_transform": (str, "none"),
    },
}


@dataclass(frozen=True)
class Numerics:
    cutoff: Optional[float]
    n_mesh: int = 200
    map_kind: str = "rational"
    tol_energy: float = 1e-8
    tol_eig: float = 1e-10
    max_iter: int = 2000
    n_states: int = 8


@dataclass(frozen=True)
class RunSpec:
    mode: str
    numerics: Numerics
    inv_a_grid: Tuple[float, ...] = ()
    kf_grid: Tuple[float, ...] = ()
    density_grid: Tuple[float, ...] = ()
    xi_values: Tuple[float, ...] = ()
    medium_kind: str = "vacuum"
    medium_inv_a: float = 0.0
    a_b: Optional[float] = None
    mass_ratio: float = 1.0
    r0: Optional[float] = None
    bo_inv_a: Optional[float] = None
    out_path: Optional[str] = None
    out_format: str = "csv"
    axis_transform: str = "none"
    resolved: Dict[str, Dict[str, str]] = field(default_factory=dict, compare=False)

    def config_text(self) -> str:
        """Canonical text of the fully resolved configuration."""
        lines = []
        for section, items in self.resolved.items():
            lines.append(f"[{section}]")
            lines.extend(f"{k} = {v}" for k, v in items.items())
        return "\n".join(lines) + "\n"


def _line_numbers(text: str) -> Dict[Tuple[str, str], int]:
    found = {}
    section = None
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.match(r"\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            found.setdefault((section, ""), i)
            continue
        m = re.match(r"([^=:#;\s][^=:]*?)\s*[=:]", line)
        if m and section is not None:
            found.setdefault((section, m.group(1).strip().lower()), i)
    return found


def _convert(typ, raw, key, line):
    try:
        if typ is int:
            val = int(raw)
        elif typ is float:
            val = float(raw)
            if not math.isfinite(val):
                raise ValueError
        else:
            val = raw.strip()
    except ValueError:
        raise ConfigError(f"expected {typ.__name__}, got {raw!r}", key=key, line=line) from None
    return val


def _float_list(raw, key, line):
    items = [s for s in (p.strip() for p in raw.split(",")) if s]
    if not items:
        raise ConfigError("empty list", key=key, line=line)
    return tuple(_convert(float, s, key, line) for s in items)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(repr(float(x)) for x in v)
    return str(v)


def _resolve_grid(name, grid, lines, mode_needs_zero=False):
    """Returns (values, echo) for grid ``name`` or ((), {}) when absent."""
    def ln(k):
        return lines.get(("grid", k))

    explicit = grid.get(name)
    ranged = {k: grid[k] for k in grid if k.startswith(name + "_")
              and k[len(name) + 1:] in ("min", "max", "count", "spacing")}
    if name == "k_f" and "k_f_log_start" in grid:
        ranged["k_f_log_start"] = grid["k_f_log_start"]
    if explicit is not None and ranged:
        raise ConfigError("give either an explicit list or a range, not both",
                          key=f"grid.{name}", line=ln(name))
    if explicit is not None:
        values = _float_list(explicit, f"grid.{name}", ln(name))
    elif ranged:
        for part in ("min", "max", "count"):
            if f"{name}_{part}" not in ranged:
                raise ConfigError("missing required key", key=f"grid.{name}_{part}",
                                  line=ln(f"{name}_min"))
        lo = _convert(float, ranged[f"{name}_min"], f"grid.{name}_min", ln(f"{name}_min"))
        hi = _convert(float, ranged[f"{name}_max"], f"grid.{name}_max", ln(f"{name}_max"))
        count = _convert(int, ranged[f"{name}_count"], f"grid.{name}_count", ln(f"{name}_count"))
        spacing = ranged.get(f"{name}_spacing", "linear").strip()
        if count < 1:
            raise ConfigError("count must be >= 1", key=f"grid.{name}_count",
                              line=ln(f"{name}_count"))
        if spacing == "linear":
            values = tuple(float(x) for x in np.linspace(lo, hi, count))
        elif spacing == "log":
            if name == "k_f" and lo == 0.0:
                key = "k_f_log_start"
                if key not in ranged:
                    raise ConfigError("log k_F grid from 0 needs k_f_log_start", key=f"grid.{key}",
                                      line=ln(f"{name}_spacing"))
                start = _convert(float, ranged[key], f"grid.{key}", ln(key))
                if not 0 < start < hi or count < 2:
                    raise ConfigError("need 0 < k_f_log_start < k_f_max and count >= 2",
                                      key=f"grid.{key}", line=ln(key))
                values = (0.0,) + tuple(float(x) for x in np.geomspace(start, hi, count - 1))
            else:
                if lo * hi <= 0:
                    raise ConfigError("log spacing needs min and max of the same sign",
                                      key=f"grid.{name}_spacing", line=ln(f"{name}_spacing"))
                values = tuple(float(x) for x in np.geomspace(lo, hi, count))
        else:
            raise ConfigError(f"spacing must be linear or log, got {spacing!r}",
                              key=f"grid.{name}_spacing", line=ln(f"{name}_spacing"))
    else:
        return (), {}
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigError("grid must be strictly ascending", key=f"grid.{name}", line=ln(name))
    if mode_needs_zero and values[0] != 0.0:
        raise ConfigError("medium-flow k_F grid must start at 0 (anchors branch identity "
                          "to the vacuum spectrum)", key="grid.k_f",
                          line=ln("k_f") or ln("k_f_min"))
    return values, {name: _fmt(values)}


def parse_config(text: str, strict: bool = True, mode: Optional[str] = None) -> RunSpec:
    """Parse and validate a run configuration.

    ``mode`` (from the command line) fills a missing [run] mode and must agree
    with one that is present.  Unknown sections or keys raise in strict mode
    and are logged otherwise.
    """
    lines = _line_numbers(text)
    cp = configparser.ConfigParser(interpolation=None, strict=True,
                                   inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ConfigError(f"malformed config: {exc.message if hasattr(exc, 'message') else exc}",
                          line=line) from None

    raw: Dict[str, Dict[str, str]] = {}
    for section in cp.sections():
        if section not in SCHEMA:
            msg = f"unknown section [{section}]"
            if strict:
                raise ConfigError(msg, line=lines.get((section, "")))
            log.warning(msg)
            continue
        raw[section] = {}
        for key, value in cp.items(section):
            if key not in SCHEMA[section]:
                msg = "unknown key"
                if strict:
                    raise ConfigError(msg, key=f"{section}.{key}", line=lines.get((section, key)))
                log.warning("%s %s.%s", msg, section, key)
                continue
            raw[section][key] = value

    def get(section, key):
        typ, default = SCHEMA[section][key]
        if key in raw.get(section, {}):
            return _convert(typ, raw[section][key], f"{section}.{key}", lines.get((section, key)))
        return default

    def line(section, key):
        return lines.get((section, key))

    cfg_mode = get("run", "mode")
    if cfg_mode is None:
        cfg_mode = mode
    elif mode is not None and mode != cfg_mode:
        raise ConfigError(f"command line mode {mode!r} contradicts config mode {cfg_mode!r}",
                          key="run.mode", line=line("run", "mode"))
    if cfg_mode is None:
        raise ConfigError("missing required key", key="run.mode")
    if cfg_mode not in MODES:
        raise ConfigError(f"mode must be one of {', '.join(MODES)}", key="run.mode",
                          line=line("run", "mode"))

    num = {k: get("numerics", k) for k in SCHEMA["numerics"]}
    if num["n_mesh"] < MIN_NODES:
        raise ConfigError(f"n_mesh must be >= {MIN_NODES}", key="numerics.n_mesh",
                          line=line("numerics", "n_mesh"))
    if num["map_kind"] not in MAP_KINDS:
        raise ConfigError(f"map_kind must be one of {', '.join(MAP_KINDS)}",
                          key="numerics.map_kind", line=line("numerics", "map_kind"))
    for k in ("tol_energy", "tol_eig"):
        if not num[k] > 0:
            raise ConfigError("tolerance must be > 0", key=f"numerics.{k}",
                              line=line("numerics", k))
    for k in ("max_iter", "n_states"):
        if num[k] < 1:
            raise ConfigError("must be >= 1", key=f"numerics.{k}", line=line("numerics", k))
    needs_solver = cfg_mode in ("vacuum-spectrum", "medium-flow")
    if needs_solver and num["cutoff"] is None:
        raise ConfigError("missing required key", key="numerics.cutoff")
    if num["cutoff"] is not None and not num["cutoff"] > 0:
        raise ConfigError("cutoff must be > 0", key="numerics.cutoff",
                          line=line("numerics", "cutoff"))
    numerics = Numerics(**num)

    grid = raw.get("grid", {})
    inv_a_grid, echo_a = _resolve_grid("inv_a", grid, lines)
    kf_grid, echo_k = _resolve_grid("k_f", grid, lines, mode_needs_zero=cfg_mode == "medium-flow")
    dens_grid, echo_d = _resolve_grid("density", grid, lines)
    if any(k < 0 for k in kf_grid):
        raise ConfigError("k_F values must be >= 0", key="grid.k_f")
    if any(n <= 0 for n in dens_grid):
        raise ConfigError("densities must be > 0", key="grid.density")
    if cfg_mode == "vacuum-spectrum" and not inv_a_grid:
        raise ConfigError("vacuum-spectrum needs an inv_a grid", key="grid.inv_a")
    if cfg_mode == "medium-flow" and not kf_grid:
        raise ConfigError("medium-flow needs a k_F grid", key="grid.k_f")

    kind = get("medium", "kind")
    if kind is None:
        kind = {"medium-flow": "fermi_sea", "bo-count": "bose_condensate" if dens_grid
                else "vacuum"}.get(cfg_mode, "vacuum")
    if kind not in ("vacuum", "fermi_sea", "bose_condensate"):
        raise ConfigError("kind must be vacuum, fermi_sea or bose_condensate",
                          key="medium.kind", line=line("medium", "kind"))
    a_b = get("medium", "a_b")
    if a_b is not None and not a_b > 0:
        raise ConfigError("a_b must be > 0", key="medium.a_b", line=line("medium", "a_b"))

    xi_raw = get("bo", "xi")
    xi_values = _float_list(xi_raw, "bo.xi", line("bo", "xi")) if xi_raw is not None else ()
    r0 = get("bo", "r0")
    mass_ratio = get("bo", "mass_ratio")
    if not mass_ratio > 0:
        raise ConfigError("mass_ratio must be > 0", key="bo.mass_ratio",
                          line=line("bo", "mass_ratio"))
    if cfg_mode == "bo-count":
        if r0 is None:
            raise ConfigError("missing required key", key="bo.r0")
        if not r0 > 0:
            raise ConfigError("r0 must be > 0", key="bo.r0", line=line("bo", "r0"))
        if not xi_values and not dens_grid:
            raise ConfigError("bo-count needs bo.xi values or a density grid", key="bo.xi")
        if dens_grid and a_b is None:
            raise ConfigError("a density grid needs the boson scattering length", key="medium.a_b")
        if any(x <= 0 for x in xi_values):
            raise ConfigError("xi values must be > 0", key="bo.xi", line=line("bo", "xi"))

    fmt = get("output", "format")
    if fmt not in FORMATS:
        raise ConfigError("format must be csv or json", key="output.format",
                          line=line("output", "format"))
    transform = get("output", "axis_transform")
    if transform not in TRANSFORMS:
        raise ConfigError("axis_transform must be none or fourth_root",
                          key="output.axis_transform", line=line("output", "axis_transform"))

    resolved = {
        "run": {"mode": cfg_mode},
        "numerics": {k: _fmt(v) for k, v in num.items() if v is not None},
        "grid": {**echo_a, **echo_k, **echo_d},
        "medium": {"kind": kind, "inv_a": _fmt(get("medium", "inv_a"))},
        "bo": {"mass_ratio": _fmt(mass_ratio)},
        "output": {"format": fmt, "axis_transform": transform},
    }
    if a_b is not None:
        resolved["medium"]["a_b"] = _fmt(a_b)
    if r0 is not None:
        resolved["bo"]["r0"] = _fmt(r0)
    if xi_values:
        resolved["bo"]["xi"] = _fmt(xi_values)
    if get("bo", "inv_a") is not None:
        resolved["bo"]["inv_a"] = _fmt(get("bo", "inv_a"))
    if get("output", "path") is not None:
        resolved["output"]["path"] = get("output", "path")

    return RunSpec(
        mode=cfg_mode,
        numerics=numerics,
        inv_a_grid=inv_a_grid,
        kf_grid=kf_grid,
        density_grid=dens_grid,
        xi_values=xi_values,
        medium_kind=kind,
        medium_inv_a=get("medium", "inv_a"),
        a_b=a_b,
        mass_ratio=mass_ratio,
        r0=r0,
        bo_inv_a=get("bo", "inv_a"),
        out_path=get("output", "path"),
        out_format=fmt,
        axis_transform=transform,
        resolved=resolved,
    )
