"""Sweep orchestration: RunSpec -> ResultSet."""
from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from . import __version__
from .bo import (BOPotential, TrimerCount, count_trimers_bec, count_trimers_formula,
                 omega_constant, wkb_count)
from .config import RunSpec
from .errors import EfimovError, RunError
from .medium import medium_thresholds, spectral_flow
from .numerics import build_mesh
from .stm import efimov_factor, scan_spectrum, solve_s0
from .units import ThreeBodyParams

log = logging.getLogger(__name__)

COLUMNS = {
    "vacuum-spectrum": ("branch", "inv_a", "energy", "flag"),
    "medium-flow": ("branch", "k_f", "energy", "threshold_energy", "flag"),
    "bo-count": ("scale", "r0", "formula_count", "wkb_count"),
    "constants": ("name", "value"),
}

# columns that get a fourth-root companion
AXIS_PAIRS = {
    "vacuum-spectrum": ("inv_a", "energy"),
    "medium-flow": ("k_f", "energy"),
}

MAX_FAILURE_FRACTION = 0.5


@dataclass
class ResultSet:
    mode: str
    columns: Tuple[str, ...]
    rows: List[tuple]
    meta: Dict[str, object] = field(default_factory=dict)
    wall_time: float = 0.0  # kept out of emitted output so it stays deterministic


def _join(*flags: str) -> str:
    return ";".join(f for f in flags if f)


def _check_failures(failures, total):
    if total and len(failures) > MAX_FAILURE_FRACTION * total:
        first = "; ".join(f"{x!r}: {msg}" for x, msg in failures[:3])
        raise RunError(f"{len(failures)} of {total} grid points failed; first: {first}")


def _vacuum_rows(spec: RunSpec, map_fn) -> List[tuple]:
    nm = spec.numerics
    mesh = build_mesh(nm.cutoff, nm.n_mesh, nm.map_kind)
    params = ThreeBodyParams(cutoff=nm.cutoff)
    scan = scan_spectrum(spec.inv_a_grid, params, mesh, nm.n_states, nm.tol_energy, map_fn)
    _check_failures(scan.failures, len(scan.grid))
    rows = []
    for br in scan.branches:
        entries = [(x, e, f) for (x, e), f in zip(br.points, br.flags)]
        if br.appearance is not None:
            entries.append((br.appearance, 0.0, "appearance;extrapolated"))
        if br.merge is not None:
            entries.append((br.merge, -br.merge * br.merge, "merge;extrapolated"))
        entries.sort(key=lambda t: t[0])
        rows.extend((br.index, x, e, f) for x, e, f in entries)
    rows.extend((None, x, None, "failed") for x, _ in scan.failures)
    for x, msg in scan.failures:
        log.warning("inv_a = %r failed: %s", x, msg)
    return rows


def _flow_rows(spec: RunSpec, map_fn) -> List[tuple]:
    nm = spec.numerics
    mesh = build_mesh(nm.cutoff, nm.n_mesh, nm.map_kind)
    params = ThreeBodyParams(cutoff=nm.cutoff)
    flow = spectral_flow(spec.medium_inv_a, spec.kf_grid, params, mesh, nm.n_states,
                         nm.tol_energy, map_fn)
    _check_failures(flow.failures, len(flow.grid))
    rows = []
    for cv in flow.curves:
        entries = list(zip(cv.points, cv.flags))
        if cv.disappearance is not None:
            kd = cv.disappearance
            eth = medium_thresholds(spec.medium_inv_a, kd).lowest
            entries.append(((kd, eth, eth),
                            _join("disappearance", "extrapolated",
                                  "" if cv.clean else "cutoff_contaminated")))
        entries.sort(key=lambda t: t[0][0])
        rows.extend((cv.index, k, e, th, f) for (k, e, th), f in entries)
    rows.extend((None, k, None, None, "failed") for k, _ in flow.failures)
    for k, msg in flow.failures:
        log.warning("k_F = %r failed: %s", k, msg)
    return rows


def _bo_point(spec: RunSpec, item) -> TrimerCount:
    kind, value = item
    if kind == "density":
        return count_trimers_bec(value, spec.a_b, spec.r0, spec.mass_ratio, spec.bo_inv_a)
    scale = value
    if spec.bo_inv_a is not None and spec.bo_inv_a != 0:
        scale = min(value, 1.0 / abs(spec.bo_inv_a))
    pot = BOPotential("bec_truncated", mass_ratio=spec.mass_ratio, xi=value, r0=spec.r0)
    wkb = wkb_count(pot, spec.mass_ratio, spec.r0, max(scale, spec.r0))
    return TrimerCount(value=count_trimers_formula(scale, spec.r0), wkb=wkb, scale=scale,
                       r0=spec.r0)


def _bo_rows(spec: RunSpec, map_fn) -> List[tuple]:
    items = [("xi", x) for x in spec.xi_values] + [("density", n) for n in spec.density_grid]

    def safe(item):
        try:
            return _bo_point(spec, item)
        except EfimovError as exc:
            return exc

    results = list(map_fn(safe, items))
    failures = [(v, str(r)) for (_, v), r in zip(items, results) if isinstance(r, Exception)]
    _check_failures(failures, len(items))
    rows = [(r.scale, r.r0, r.value, r.wkb) for r in results if not isinstance(r, Exception)]
    rows.sort(key=lambda t: t[0])
    return rows


def _constants_rows() -> List[tuple]:
    s0 = solve_s0()
    return [
        ("omega", omega_constant()),
        ("s0", s0),
        ("efimov_factor", efimov_factor()),
        ("efimov_energy_factor", math.exp(2.0 * math.pi / s0)),
    ]


def run(spec: RunSpec, threads: int = 1) -> ResultSet:
    """Evaluate a run; grid points go through a thread-pool map when threads > 1.

    Results are merged in grid order, so output is independent of ``threads``.
    """
    if threads < 1:
        raise RunError(f"threads must be >= 1, got {threads}")
    t0 = time.perf_counter()
    executor: Optional[ThreadPoolExecutor] = None
    try:
        if threads > 1:
            executor = ThreadPoolExecutor(max_workers=threads)
            map_fn = executor.map
        else:
            map_fn = map
        if spec.mode == "vacuum-spectrum":
            rows = _vacuum_rows(spec, map_fn)
        elif spec.mode == "medium-flow":
            rows = _flow_rows(spec, map_fn)
        elif spec.mode == "bo-count":
            rows = _bo_rows(spec, map_fn)
        else:
            rows = _constants_rows()
    finally:
        if executor is not None:
            executor.shutdown()
    meta = {
        "tool": "efimov",
        "version": __version__,
        "mode": spec.mode,
        "config": spec.resolved,
        "columns": list(COLUMNS[spec.mode]),
    }
    return ResultSet(mode=spec.mode, columns=COLUMNS[spec.mode], rows=rows, meta=meta,
                     wall_time=time.perf_counter() - t0)
