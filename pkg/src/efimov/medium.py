"""Three distinguishable equal-mass atoms with species 3 embedded in an inert Fermi sea.

Pauli blocking enters wherever an intermediate state carries a species-3
momentum: inside the pair bubble of the (13) and (23) pairs (angle-averaged
occupation), on the spectator integral when species 3 is the spectator, and
in the exchange term where species 3 is the exchanged particle.  Hole
energies and particle-hole fluctuations are ignored.

Channel layout of the coupled kernel: the first block holds the spectator
function with species 3 as spectator (pair (12), vacuum amplitude, momenta
restricted to q > k_F); the second holds the common spectator function of
species 1 and 2 (blocked pair amplitude).  At k_F = 0 the symmetric channel
reproduces the vacuum kernel.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import BracketError, DomainError, EfimovError
from .numerics import KernelMatrix, Mesh, bracket_root
from .stm import (
    COUPLING,
    DEFAULT_TOL_ENERGY,
    TrimerState,
    exchange_kernel,
    find_levels,
    guard_band,
    trimer_energies,
)
from .units import MediumParams, ThreeBodyParams, dimer_energy, kf_to_density

log = logging.getLogger(__name__)


def blocking_factor(k, P, k_f):
    """Fraction of orientations with |k + P/2| > k_F for the species-3 partner."""
    k = np.asarray(k, dtype=float)
    P = np.asarray(P, dtype=float)
    if k_f == 0:
        out = np.ones(np.broadcast(k, P).shape)
        return float(out) if out.ndim == 0 else out
    u, v = np.broadcast_arrays(k, 0.5 * P)
    uv = u * v
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        x = (u * u + v * v - k_f * k_f) / (2.0 * uv)
    out = np.where(uv > 0, np.clip(x + 1.0, 0.0, 2.0) / 2.0,
                   (np.sqrt(u * u + v * v) > k_f).astype(float))
    return float(out) if out.ndim == 0 else out


def blocked_continuum(P, k_f):
    """Lowest pair-relative energy with an unblocked state: max(0, k_F - P/2)^2."""
    return np.maximum(0.0, k_f - 0.5 * np.asarray(P, dtype=float)) ** 2


def _quad_primitive(k, z):
    """Primitive of 1/(k^2 - z) in k; z > 0 only for k above sqrt(z)."""
    out = np.empty(np.broadcast(k, z).shape)
    k, z = np.broadcast_arrays(k, z)
    neg, pos, zero = z < 0, z > 0, z == 0
    kappa = np.sqrt(-z[neg])
    out[neg] = np.arctan(k[neg] / kappa) / kappa
    s = np.sqrt(z[pos])
    out[pos] = np.log((k[pos] - s) / (k[pos] + s)) / (2.0 * s)
    with np.errstate(divide="ignore"):
        out[zero] = -1.0 / k[zero]
    return out


def _tail(a, z):
    """Integral of -z/(k^2 - z) from a to infinity."""
    out = np.zeros(np.broadcast(a, z).shape)
    a, z = np.broadcast_arrays(a, z)
    neg, pos = z < 0, z > 0
    kappa = np.sqrt(-z[neg])
    out[neg] = kappa * (0.5 * math.pi - np.arctan(a[neg] / kappa))
    s = np.sqrt(z[pos])
    out[pos] = 0.5 * s * np.log((a[pos] - s) / (a[pos] + s))
    return out


def inverse_blocked_pair_amplitude(z, P, inv_a: float, k_f: float):
    """1/tau_B = -1/a + (2/pi) int_0^inf dk [1 - B(k, P) k^2/(k^2 - z)].

    Evaluated in closed form on the three radial regions where B is 0, the
    partial-blocking polynomial, or 1.  Valid for z below the blocked
    continuum; identical to the vacuum expression at k_F = 0.
    """
    shape = np.broadcast(np.asarray(z), np.asarray(P)).shape
    z = np.broadcast_to(np.asarray(z, dtype=float), shape).ravel()
    P = np.broadcast_to(np.asarray(P, dtype=float), shape).ravel()
    if k_f == 0:
        if np.any(z >= 0):
            raise DomainError("pair energy must be < 0 without a Fermi sea")
        out = (-inv_a + np.sqrt(-z)).reshape(shape)
        return float(out) if out.ndim == 0 else out
    zth = blocked_continuum(P, k_f)
    if np.any(z >= zth):
        raise DomainError("pair energy at or above the Pauli-blocked two-body continuum")
    v = 0.5 * P
    k1 = np.maximum(k_f - v, 0.0)  # fully blocked below k1
    k1p = np.abs(k_f - v)
    k2 = k_f + v  # unblocked above k2
    total = k1 + _tail(k2, z)
    inner = v > k_f  # unblocked core [0, v - k_F]
    if np.any(inner):
        zi = z[inner]
        total[inner] += -zi * (_quad_primitive(v[inner] - k_f, zi) - _quad_primitive(0.0, zi))
    part = v > 1e-12 * k_f
    if np.any(part):
        zp, vp = z[part], v[part]
        a = k_f * k_f - vp * vp

        def prim(k):
            lg = np.log(np.abs(k * k - zp))
            return (0.5 * k * k + 2.0 * vp * k + 0.5 * (zp - a) * lg
                    + 2.0 * vp * zp * _quad_primitive(k, zp))

        lo, hi = k1p[part], k2[part]
        total[part] += (hi - lo) - (prim(hi) - prim(lo)) / (4.0 * vp)
    out = (-inv_a + (2.0 / math.pi) * total).reshape(shape)
    return float(out) if out.ndim == 0 else out


def blocked_pair_amplitude(z, P, inv_a: float, k_f: float):
    inv = np.asarray(inverse_blocked_pair_amplitude(z, P, inv_a, k_f))
    if np.any(inv == 0):
        raise DomainError("blocked pair amplitude evaluated on the in-medium dimer pole")
    out = 1.0 / inv
    return float(out) if out.ndim == 0 else out


def in_medium_dimer(inv_a: float, k_f: float, P: float = 0.0) -> Optional[float]:
    """Pair-relative energy of the blocked dimer with pair momentum P, or None."""
    if k_f == 0:
        return dimer_energy(inv_a)
    zth = float(blocked_continuum(P, k_f))
    f = partial(_inv_blocked_scalar, P, inv_a, k_f)
    top = zth - 1e-13 * max(zth, k_f * k_f) if zth > 0 else -1e-13 * k_f * k_f
    if f(top) > 0:
        return None
    bottom = -4.0 * (abs(inv_a) + k_f + 1.0) ** 2
    try:
        return bracket_root(f, bottom, top, tol=1e-15 * max(1.0, abs(bottom)))
    except BracketError:
        return None


def _inv_blocked_scalar(P, inv_a, k_f, z):
    return float(inverse_blocked_pair_amplitude(z, P, inv_a, k_f))


@dataclass(frozen=True)
class MediumThresholds:
    """Continua of the three-body problem with species 3 in a Fermi sea."""

    three_atom: float
    dimer_spectator: Optional[float]  # (12) dimer + species-3 atom outside the sea
    blocked_dimer: Optional[float]  # blocked (13)/(23) dimer + free atom
    blocked_dimer_momentum: Optional[float]

    @property
    def atom_dimer(self) -> Optional[float]:
        vals = [x for x in (self.dimer_spectator, self.blocked_dimer) if x is not None]
        return min(vals) if vals else None

    @property
    def lowest(self) -> float:
        ad = self.atom_dimer
        return self.three_atom if ad is None else min(self.three_atom, ad)

    def name_of_lowest(self) -> str:
        lowest = self.lowest
        if lowest == self.blocked_dimer:
            return "blocked atom-dimer continuum"
        if lowest == self.dimer_spectator:
            return "atom-dimer continuum with species 3 as spectator"
        return "three-atom continuum"


def _blocked_channel_energy(inv_a, k_f, q):
    zd = in_medium_dimer(inv_a, k_f, q)
    return math.inf if zd is None else 0.75 * q * q + zd


def medium_thresholds(inv_a: float, k_f: float) -> MediumThresholds:
    """Three-atom and atom-dimer thresholds, minimized over the spectator momentum."""
    if k_f < 0:
        raise DomainError("k_f must be >= 0")
    three = 0.75 * k_f * k_f
    ed = dimer_energy(inv_a)
    spect = None if ed is None else three + ed
    if k_f == 0:
        return MediumThresholds(three, spect, ed, None if ed is None else 0.0)
    q_hi = 3.0 * k_f + 2.0 * max(inv_a, 0.0)
    qs = np.linspace(0.0, q_hi, 41)
    es = np.array([_blocked_channel_energy(inv_a, k_f, q) for q in qs])
    if not np.any(np.isfinite(es)):
        return MediumThresholds(three, spect, None, None)
    i = int(np.argmin(es))
    lo, hi = qs[max(i - 1, 0)], qs[min(i + 1, len(qs) - 1)]
    res = minimize_scalar(partial(_blocked_channel_energy, inv_a, k_f), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-10 * q_hi})
    q_best, e_best = float(qs[i]), float(es[i])
    if res.success and res.fun < e_best:
        q_best, e_best = float(res.x), float(res.fun)
    return MediumThresholds(three, spect, e_best, q_best)


def blocked_exchange_kernel(p, q, energy: float, k_f: float) -> np.ndarray:
    """Angle average of the exchange propagator restricted to |p + q| > k_F."""
    p = np.asarray(p, dtype=float)[:, None]
    q = np.asarray(q, dtype=float)[None, :]
    pq = p * q
    s = p * p + q * q
    xc = np.clip((k_f * k_f - s) / (2.0 * pq), -1.0, 1.0)
    low = s + pq * xc - energy
    return np.log1p(pq * (1.0 - xc) / low) / (2.0 * pq)


def build_blocked_kernel(energy: float, params: ThreeBodyParams, medium: MediumParams,
                         mesh: Mesh, thresholds: Optional[MediumThresholds] = None) -> KernelMatrix:
    """Coupled 2N x 2N in-medium kernel at an energy below every in-medium continuum."""
    if medium.kind not in ("fermi_sea", "vacuum"):
        raise DomainError("blocked kernel needs a Fermi-sea (or vacuum) medium")
    k_f = medium.k_f
    inv_a = params.inv_a
    th = thresholds or medium_thresholds(inv_a, k_f)
    if not energy < th.lowest:
        raise DomainError(f"E = {energy!r} is not below the {th.name_of_lowest()} "
                          f"E = {th.lowest!r}")
    mesh3 = mesh.restricted(k_f)
    q3, w3 = mesh3.nodes, mesh3.weights
    q, w = mesh.nodes, mesh.weights
    tau0 = 1.0 / (-inv_a + np.sqrt(0.75 * q3 * q3 - energy))
    tau_b = 1.0 / np.asarray(inverse_blocked_pair_amplitude(energy - 0.75 * q * q, q, inv_a, k_f))
    if not (np.all(tau0 > 0) and np.all(tau_b > 0)):
        raise DomainError(f"E = {energy!r} reaches an in-medium dimer pole")
    m3 = w3 * q3 * q3 * tau0
    m1 = w * q * q * tau_b
    g13 = exchange_kernel(q, q3, energy)
    g11 = blocked_exchange_kernel(q, q, energy, k_f) if k_f > 0 else exchange_kernel(q, q, energy)
    n3, n1 = len(q3), len(q)
    ghat = np.zeros((n3 + n1, n3 + n1))
    ghat[:n3, n3:] = COUPLING * g13.T
    ghat[n3:, :n3] = 0.5 * COUPLING * g13
    ghat[n3:, n3:] = 0.5 * COUPLING * g11
    measure = np.concatenate([m3, m1])
    # rescaling the species-3 block by 1/sqrt(2) makes the operator symmetric
    scale = np.concatenate([np.full(n3, 1.0 / math.sqrt(2.0)), np.ones(n1)])
    sym = ghat * (scale[:, None] / scale[None, :])
    root = np.sqrt(measure)
    return KernelMatrix(
        entries=ghat * measure[None, :],
        energy=energy,
        metadata={"inv_a": inv_a, "k_f": k_f, "cutoff": params.cutoff, "mesh": mesh.mesh_id},
        symmetric=root[:, None] * sym * root[None, :],
    )


def blocked_eigenvalues(energy, params, medium, mesh, thresholds=None) -> np.ndarray:
    return build_blocked_kernel(energy, params, medium, mesh, thresholds).eigenvalues()


def medium_trimer_energies(params: ThreeBodyParams, medium: MediumParams, mesh: Mesh,
                           n_max: int = 8, tol_energy: float = DEFAULT_TOL_ENERGY
                           ) -> List[TrimerState]:
    """Trimers below the lowest in-medium continuum, deepest first.

    A vacuum-equivalent medium is delegated to the vacuum solver so both give
    bit-identical energies.
    """
    if medium.is_vacuum:
        return trimer_energies(params, mesh, n_max, tol_energy)
    th = medium_thresholds(params.inv_a, medium.k_f)
    lowest = th.lowest
    guard = guard_band(lowest, mesh, tol_energy)
    eigs = partial(blocked_eigenvalues, params=params, medium=medium, mesh=mesh, thresholds=th)
    levels = find_levels(eigs, lowest, guard, mesh.cutoff**2, n_max, tol_energy)
    return [TrimerState(n, e, lowest, (lowest - e) > mesh.cutoff**2 / 100.0)
            for n, e in enumerate(levels)]


def _count_margin(n, params, mesh, tol_energy, k_f):
    medium = MediumParams.fermi_sea(k_f)
    if medium.is_vacuum:
        from .stm import continuum_threshold, kernel_eigenvalues

        thr = continuum_threshold(params.inv_a)
        energy = thr - guard_band(thr, mesh, tol_energy)
        return float(kernel_eigenvalues(energy, params, mesh)[n]) - 1.0
    th = medium_thresholds(params.inv_a, k_f)
    energy = th.lowest - guard_band(th.lowest, mesh, tol_energy)
    return float(blocked_eigenvalues(energy, params, medium, mesh, th)[n]) - 1.0


def disappearance_point(n: int, params: ThreeBodyParams, mesh: Mesh, lo: float, hi: float,
                        tol: float = DEFAULT_TOL_ENERGY) -> float:
    """k_F in [lo, hi] where trimer ``n`` meets the lowest in-medium continuum."""
    f = partial(_count_margin, n, params, mesh, tol)
    if lo > 0:
        u = bracket_root(lambda s: f(math.exp(s)), math.log(lo), math.log(hi), tol=tol)
        return math.exp(u)
    return bracket_root(f, lo, hi, tol=tol)


@dataclass
class FlowCurve:
    index: int
    points: List[tuple] = field(default_factory=list)  # (k_f, energy, threshold)
    flags: List[str] = field(default_factory=list)
    disappearance: Optional[float] = None
    vacuum_energy: Optional[float] = None
    clean: bool = True

    def relative_shift(self) -> List[tuple]:
        """(k_F, |E(k_F) - E(0)| / |E(0)|) along the curve."""
        if self.vacuum_energy is None:
            return []
        e0 = self.vacuum_energy
        return [(k, abs(e - e0) / abs(e0)) for k, e, _ in self.points]


@dataclass
class FlowScan:
    inv_a: float
    grid: List[float]
    curves: List[FlowCurve]
    failures: List[tuple] = field(default_factory=list)


def _flow_point(params, mesh, n_max, tol_energy, k_f):
    try:
        return medium_trimer_energies(params, MediumParams.fermi_sea(k_f), mesh, n_max, tol_energy)
    except EfimovError as exc:
        return exc


def spectral_flow(inv_a: float, kf_grid: Sequence[float], params: ThreeBodyParams, mesh: Mesh,
                  n_max: int = 8, tol_energy: float = DEFAULT_TOL_ENERGY,
                  map_fn: Callable = map) -> FlowScan:
    """Trimer energies versus k_F at fixed inv_a, with bracketed disappearance points.

    Branch n is the n-th deepest trimer, anchored at the k_F = 0 vacuum state.
    A disappearance point is clean when the vacuum state is away from the
    cutoff and k_F^(n) sits at least a decade inside the mesh range.
    """
    grid = [float(k) for k in kf_grid]
    if not grid or grid[0] != 0.0:
        raise DomainError("k_F grid must start at 0 to anchor branch identity")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("k_F grid must be strictly ascending")
    p = params.with_inv_a(inv_a)
    results = list(map_fn(partial(_flow_point, p, mesh, n_max, tol_energy), grid))
    failures = [(k, str(r)) for k, r in zip(grid, results) if isinstance(r, Exception)]
    if isinstance(results[0], Exception):
        raise results[0]
    vacuum = results[0]
    ok = [(k, r) for k, r in zip(grid, results) if not isinstance(r, Exception)]
    depth = max(len(r) for _, r in ok)
    q_floor = mesh.nodes[0]
    curves = []
    for n in range(depth):
        anchored = n < len(vacuum)
        cv = FlowCurve(index=n, vacuum_energy=vacuum[n].energy if anchored else None)
        uv_dirty = anchored and vacuum[n].binding > mesh.cutoff**2 / 100.0
        dirty = not anchored or vacuum[n].cutoff_contaminated
        present = [n < len(r) for _, r in ok]
        lost = False
        for (k, states), here in zip(ok, present):
            if not here:
                lost = True
                continue
            s = states[n]
            flags = []
            if dirty or s.cutoff_contaminated:
                flags.append("cutoff_contaminated")
            if lost or not anchored:
                flags.append("gap")
            cv.points.append((k, s.energy, s.threshold))
            cv.flags.append(";".join(flags))
        for i in range(len(ok) - 1):
            if present[i] and not present[i + 1]:
                try:
                    cv.disappearance = disappearance_point(n, p, mesh, ok[i][0], ok[i + 1][0],
                                                           tol_energy)
                except EfimovError as exc:
                    log.warning("branch %d disappearance not bracketed: %s", n, exc)
                break
        kd = cv.disappearance
        cv.clean = (anchored and not uv_dirty and kd is not None
                    and 10.0 * q_floor < kd < mesh.cutoff / 10.0)
        curves.append(cv)
    return FlowScan(inv_a=inv_a, grid=grid, curves=curves, failures=failures)


def onset_fermi_momentum(e_b: float) -> float:
    """Rule of thumb: the sea matters once E_F ~ |E_B|, i.e. k_F = sqrt(2 |E_B|)."""
    if not e_b < 0:
        raise DomainError("trimer energy must be negative")
    return math.sqrt(2.0 * abs(e_b))


def onset_density(e_b: float) -> float:
    """Density at which E_F equals the trimer binding |E_B| (rule of thumb)."""
    return kf_to_density(onset_fermi_momentum(e_b))
