"""Vacuum three-body solver for zero-range s-wave STM equations.

Bound states are energies where an eigenvalue of the discretized kernel
equals one.  The kernel is a positive operator similar to a symmetric
matrix, so its spectrum is real and the number of eigenvalues above one at
energy E counts the trimers below E.  The n-th trimer (n = 0 deepest) is
therefore the energy where the n-th largest eigenvalue crosses one, which
fixes branch labels without any continuation heuristics.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, Iterable, List, Optional, Sequence

import numpy as np

from .errors import BracketError, DomainError, EfimovError, SingularityError
from .numerics import KernelMatrix, Mesh, bracket_root, leading_eigenpair
from .units import ThreeBodyParams, dimer_energy

log = logging.getLogger(__name__)

# Symmetric-channel coupling for three identical resonant pairs, paired with
# the angle-averaged exchange kernel below.
COUPLING = 4.0 / math.pi

DEFAULT_TOL_ENERGY = 1e-8
GUARD_FACTOR = 10.0
# Step in ln(binding) for the coarse level scan; one Efimov period is ~6.2.
_SCAN_STEP = 0.75


def pair_amplitude(z, inv_a: float):
    """Zero-range pair amplitude 1 / (-1/a + sqrt(-z)) at pair energy z < 0."""
    z = np.asarray(z, dtype=float)
    if np.any(z >= 0):
        raise DomainError("pair amplitude needs z < 0")
    denom = -inv_a + np.sqrt(-z)
    if np.any(denom == 0):
        raise SingularityError(f"pair amplitude evaluated on the dimer pole z = {-inv_a**2}")
    out = 1.0 / denom
    return float(out) if out.ndim == 0 else out


def exchange_kernel(p, q, energy: float) -> np.ndarray:
    """Angle-averaged one-particle exchange, (1/2pq) ln[(p²+q²+pq-E)/(p²+q²-pq-E)].

    Returns the outer matrix over ``p`` (rows) and ``q`` (columns).
    """
    p = np.asarray(p, dtype=float)[:, None]
    q = np.asarray(q, dtype=float)[None, :]
    pq = p * q
    low = p * p + q * q - pq - energy
    return np.log1p(2.0 * pq / low) / (2.0 * pq)


def continuum_threshold(inv_a: float) -> float:
    """Lowest vacuum continuum: three free atoms (0) or atom + dimer."""
    ed = dimer_energy(inv_a)
    return 0.0 if ed is None else ed


def _check_below_threshold(energy: float, inv_a: float) -> None:
    if not energy < 0:
        raise DomainError(f"E = {energy!r} is not below the three-atom continuum E = 0")
    ed = dimer_energy(inv_a)
    if ed is not None and not energy < ed:
        raise DomainError(f"E = {energy!r} is not below the atom-dimer continuum E_D = {ed!r}")


def build_kernel(energy: float, params: ThreeBodyParams, mesh: Mesh) -> KernelMatrix:
    """Discretized STM kernel at fixed energy below every continuum."""
    _check_below_threshold(energy, params.inv_a)
    if mesh.cutoff != params.cutoff:
        raise DomainError(f"mesh cutoff {mesh.cutoff} differs from params cutoff {params.cutoff}")
    q, w = mesh.nodes, mesh.weights
    tau = 1.0 / (-params.inv_a + np.sqrt(0.75 * q * q - energy))
    measure = w * q * q * tau
    g = COUPLING * exchange_kernel(q, q, energy)
    root = np.sqrt(measure)
    return KernelMatrix(
        entries=g * measure[None, :],
        energy=energy,
        metadata={"inv_a": params.inv_a, "k_f": 0.0, "cutoff": params.cutoff,
                  "mesh": mesh.mesh_id},
        symmetric=root[:, None] * g * root[None, :],
    )


def kernel_eigenvalues(energy: float, params: ThreeBodyParams, mesh: Mesh) -> np.ndarray:
    return build_kernel(energy, params, mesh).eigenvalues()


def lambda_of_E(energy: float, params: ThreeBodyParams, mesh: Mesh, index: int = 0) -> float:
    """``index``-th largest kernel eigenvalue at ``energy`` (0 = leading)."""
    kernel = build_kernel(energy, params, mesh)
    if index == 0:
        lam, _ = leading_eigenpair(kernel.symmetric)
        return lam
    return float(kernel.eigenvalues()[index])


@dataclass(frozen=True)
class TrimerState:
    index: int
    energy: float
    threshold: float
    cutoff_contaminated: bool = False

    @property
    def binding(self) -> float:
        """Distance below the lowest open continuum."""
        return self.threshold - self.energy


def guard_band(threshold: float, mesh: Mesh, tol_energy: float) -> float:
    return GUARD_FACTOR * tol_energy * max(abs(threshold), mesh.resolution_energy)


def is_contaminated(binding: float, mesh: Mesh) -> bool:
    """Within a factor 100 of the cutoff scale or of the mesh floor."""
    return binding > mesh.cutoff**2 / 100.0 or binding < 100.0 * mesh.resolution_energy


def find_levels(eigs_at: Callable[[float], np.ndarray], threshold: float, guard: float,
                top: float, n_max: int, tol: float) -> List[float]:
    """Energies below ``threshold`` where successive eigenvalues cross one.

    Works in y = ln(threshold - E); a coarse scan from binding ``top`` down to
    ``guard`` brackets each crossing, then each is refined to ``tol`` in y
    (a relative tolerance on the binding).
    """
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    y_lo = math.log(guard)
    y_hi = math.log(top)
    for _ in range(4):
        if eigs_at(threshold - math.exp(y_hi))[0] < 1.0:
            break
        y_hi += math.log(100.0)
    else:
        raise BracketError("kernel eigenvalue stays above one at the deepest probed energy")
    n_steps = max(2, int(math.ceil((y_hi - y_lo) / _SCAN_STEP)))
    ys = np.linspace(y_hi, y_lo, n_steps + 1)
    spectra = [eigs_at(threshold - math.exp(y)) for y in ys]
    levels = []
    for n in range(n_max):
        row = [s[n] if n < len(s) else 0.0 for s in spectra]
        hit = next((i for i, lam in enumerate(row) if lam >= 1.0), None)
        if hit is None:
            break
        if hit == 0:
            raise BracketError("coarse level scan started above a crossing")
        f = partial(_crossing, eigs_at, threshold, n)
        y = bracket_root(f, float(ys[hit]), float(ys[hit - 1]), tol=tol)
        levels.append(threshold - math.exp(y))
    return levels


def _crossing(eigs_at, threshold, n, y):
    return eigs_at(threshold - math.exp(y))[n] - 1.0


def trimer_energies(params: ThreeBodyParams, mesh: Mesh, n_max: int = 8,
                    tol_energy: float = DEFAULT_TOL_ENERGY) -> List[TrimerState]:
    """Up to ``n_max`` trimer energies, deepest first."""
    threshold = continuum_threshold(params.inv_a)
    guard = guard_band(threshold, mesh, tol_energy)
    eigs = partial(kernel_eigenvalues, params=params, mesh=mesh)
    levels = find_levels(eigs, threshold, guard, mesh.cutoff**2, n_max, tol_energy)
    return [TrimerState(n, e, threshold, is_contaminated(threshold - e, mesh))
            for n, e in enumerate(levels)]


def count_at_threshold(params: ThreeBodyParams, mesh: Mesh,
                       tol_energy: float = DEFAULT_TOL_ENERGY) -> int:
    """Number of trimers bound by more than the guard band."""
    threshold = continuum_threshold(params.inv_a)
    energy = threshold - guard_band(threshold, mesh, tol_energy)
    return int(np.sum(kernel_eigenvalues(energy, params, mesh) > 1.0))


def _threshold_crossing(n, params, mesh, tol_energy, inv_a):
    p = params.with_inv_a(inv_a)
    threshold = continuum_threshold(inv_a)
    energy = threshold - guard_band(threshold, mesh, tol_energy)
    return float(kernel_eigenvalues(energy, p, mesh)[n]) - 1.0


def threshold_point(n: int, params: ThreeBodyParams, mesh: Mesh, lo: float, hi: float,
                    tol: float = DEFAULT_TOL_ENERGY) -> float:
    """inv_a in [lo, hi] where trimer ``n`` meets the lowest continuum.

    For inv_a < 0 this is the appearance point (E_n -> 0), for inv_a > 0 the
    atom-dimer merge point (E_n -> E_D).  Same-sign brackets are refined in
    ln|inv_a|.
    """
    f = partial(_threshold_crossing, n, params, mesh, tol)
    if lo * hi > 0:
        sign = math.copysign(1.0, lo)
        u = bracket_root(lambda s: f(sign * math.exp(s)), math.log(abs(lo)), math.log(abs(hi)),
                         tol=tol)
        return sign * math.exp(u)
    return bracket_root(f, lo, hi, tol=tol)


@dataclass
class SpectrumBranch:
    index: int
    points: List[tuple] = field(default_factory=list)  # (inv_a, energy)
    flags: List[str] = field(default_factory=list)
    appearance: Optional[float] = None  # inv_a where E_n -> 0-
    merge: Optional[float] = None  # inv_a where E_n -> E_D

    @property
    def appearance_a(self) -> Optional[float]:
        return None if self.appearance is None else 1.0 / self.appearance

    @property
    def merge_a(self) -> Optional[float]:
        return None if self.merge is None else 1.0 / self.merge


@dataclass
class SpectrumScan:
    grid: List[float]
    branches: List[SpectrumBranch]
    failures: List[tuple] = field(default_factory=list)  # (inv_a, message)


def _states_or_error(params, mesh, n_max, tol_energy, inv_a):
    try:
        return trimer_energies(params.with_inv_a(inv_a), mesh, n_max, tol_energy)
    except EfimovError as exc:
        return exc


def scan_spectrum(inv_a_grid: Sequence[float], params: ThreeBodyParams, mesh: Mesh,
                  n_max: int = 8, tol_energy: float = DEFAULT_TOL_ENERGY,
                  map_fn: Callable = map) -> SpectrumScan:
    """Trimer branches over an ascending inv_a grid with bracketed endpoints.

    ``map_fn`` evaluates grid points (e.g. ``executor.map``); results are
    merged in grid order so the output does not depend on scheduling.
    """
    grid = [float(x) for x in inv_a_grid]
    if not grid or any(not math.isfinite(x) for x in grid):
        raise DomainError("inv_a grid must be non-empty and finite")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("inv_a grid must be strictly ascending")
    results = list(map_fn(partial(_states_or_error, params, mesh, n_max, tol_energy), grid))
    failures = [(x, str(r)) for x, r in zip(grid, results) if isinstance(r, Exception)]
    ok = [(x, r) for x, r in zip(grid, results) if not isinstance(r, Exception)]
    depth = max((len(r) for _, r in ok), default=0)
    branches = []
    for n in range(depth):
        br = SpectrumBranch(index=n)
        present = []
        for x, states in ok:
            if n < len(states):
                s = states[n]
                br.points.append((x, s.energy))
                flags = []
                if s.cutoff_contaminated:
                    flags.append("cutoff_contaminated")
                if n + 1 < len(states) and states[n + 1].energy - s.energy <= tol_energy * abs(s.energy):
                    flags.append("ambiguous")
                br.flags.append(";".join(flags))
            present.append(n < len(states))
        for i in range(len(ok) - 1):
            if present[i] == present[i + 1]:
                continue
            lo, hi = ok[i][0], ok[i + 1][0]
            try:
                x = threshold_point(n, params, mesh, lo, hi, tol_energy)
            except EfimovError as exc:
                log.warning("branch %d endpoint in [%g, %g] not bracketed: %s", n, lo, hi, exc)
                continue
            if not present[i] and x < 0:
                br.appearance = x
            elif present[i] and x > 0:
                br.merge = x
        branches.append(br)
    return SpectrumScan(grid=grid, branches=branches, failures=failures)


def solve_s0(tol: float = 1e-12) -> float:
    """Efimov exponent s0: root of s cosh(pi s/2) = (8/sqrt3) sinh(pi s/6)."""
    c = 8.0 / math.sqrt(3.0)
    return bracket_root(lambda s: s * math.cosh(math.pi * s / 2) - c * math.sinh(math.pi * s / 6),
                        0.5, 1.5, tol=tol)


def efimov_factor() -> float:
    """Discrete scaling factor for momenta and lengths, e^(pi/s0)."""
    return math.exp(math.pi / solve_s0())


def calibrate_kstar(states: Iterable[TrimerState]) -> Optional[float]:
    """Three-body parameter anchored to the deepest clean unitarity state.

    k* = sqrt(|E_n|) e^(n pi / s0), i.e. the clean state extrapolated to the
    top of the tower.
    """
    clean = [s for s in states if not s.cutoff_contaminated]
    if not clean:
        return None
    s = clean[0]
    return math.sqrt(s.binding) * math.exp(s.index * math.pi / solve_s0())
