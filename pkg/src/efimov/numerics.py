"""Quadrature meshes, eigenvalue extraction and root bracketing."""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

from .errors import BracketError, ConfigError, ConvergenceError, DomainError, EvaluationError

MAP_KINDS = ("linear", "rational")
MIN_NODES = 8

# Rational map stretch: with c = 8 the Gauss midpoint t = 1/2 lands on
# lower + (cutoff - lower)/10, so half the nodes sit in the lowest decade.
RATIONAL_STRETCH = 8.0


@dataclass(frozen=True, eq=False)
class Mesh:
    nodes: np.ndarray
    weights: np.ndarray
    map_kind: str
    cutoff: float
    lower: float = 0.0

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def mesh_id(self) -> str:
        tag = f"{self.map_kind}:{self.lower!r}:{self.cutoff!r}:{self.size}"
        return hashlib.sha1(tag.encode()).hexdigest()[:12]

    @property
    def resolution_energy(self) -> float:
        """Energy scale of the lowest node; shallower states are unresolved."""
        return float(self.nodes[0] ** 2)

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, f(self.nodes)))

    def restricted(self, lower: float) -> "Mesh":
        """Same map and size on (lower, cutoff); identical mesh when lower == self.lower."""
        if lower == self.lower:
            return self
        return build_mesh(self.cutoff, self.size, self.map_kind, lower=lower)


def build_mesh(cutoff: float, n: int, map_kind: str = "rational", lower: float = 0.0) -> Mesh:
    """Gauss-Legendre mesh on (lower, cutoff).

    ``rational`` maps t in (0, 1) through q = lower + (cutoff - lower) t / (1 + c (1 - t)),
    clustering nodes at low momentum where spectator functions vary
    log-periodically.
    """
    if n < MIN_NODES:
        raise ConfigError(f"mesh needs at least {MIN_NODES} nodes, got {n}", key="n_mesh")
    if not (math.isfinite(cutoff) and cutoff > 0):
        raise DomainError(f"cutoff must be finite and > 0, got {cutoff}")
    if not 0 <= lower < cutoff:
        raise DomainError(f"lower edge {lower} must lie in [0, cutoff)")
    if map_kind not in MAP_KINDS:
        raise ConfigError(f"unknown map kind {map_kind!r}", key="map_kind")
    x, w = leggauss(n)
    t = 0.5 * (x + 1.0)
    w = 0.5 * w
    span = cutoff - lower
    if map_kind == "linear":
        nodes = lower + span * t
        weights = span * w
    else:
        c = RATIONAL_STRETCH
        denom = 1.0 + c * (1.0 - t)
        nodes = lower + span * t / denom
        weights = w * span * (1.0 + c) / denom**2
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return Mesh(nodes=nodes, weights=weights, map_kind=map_kind, cutoff=float(cutoff),
                lower=float(lower))


@dataclass(eq=False)
class KernelMatrix:
    """Discretized integral operator at fixed energy.

    ``entries`` is the operator acting on spectator-function values at the
    nodes.  When the operator is similar to a symmetric matrix (kernel
    symmetric, diagonal measure positive), ``symmetric`` holds that form and
    is used for all spectral work.
    """

    entries: np.ndarray
    energy: float
    metadata: dict = field(default_factory=dict)
    symmetric: Optional[np.ndarray] = None

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """All eigenvalues in descending order."""
        if self.symmetric is not None:
            return np.linalg.eigvalsh(self.symmetric)[::-1]
        ev = np.linalg.eigvals(self.entries)
        return np.sort(ev.real)[::-1]


def _as_array(m) -> np.ndarray:
    return m.entries if isinstance(m, KernelMatrix) else np.asarray(m, dtype=float)


def _normalize(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    if v[np.argmax(np.abs(v))] < 0:
        v = -v
    return v


def leading_eigenpair(m, tol: float = 1e-10, max_iter: int = 2000):
    """Largest-magnitude eigenvalue and unit eigenvector.

    Power iteration first; if it stalls (nearly degenerate top of the spectrum)
    the dense solver is used and its residual checked.  The eigenvector sign is
    fixed so that its largest-magnitude component is positive.
    """
    a = _as_array(m)
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix has non-finite entries")
    scale = np.linalg.norm(a, 2) if a.size else 0.0
    if scale == 0.0:
        v = np.zeros(a.shape[0])
        v[0] = 1.0
        return 0.0, v
    v = np.ones(a.shape[0]) / math.sqrt(a.shape[0])
    lam = 0.0
    res = math.inf
    for _ in range(max_iter):
        w = a @ v
        lam = float(v @ w)
        res = float(np.linalg.norm(w - lam * v))
        if res <= tol * scale:
            return lam, _normalize(v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            break
        v = w / nw
    # stalled power iteration: dense fallback
    if np.array_equal(a, a.T):
        vals, vecs = np.linalg.eigh(a)
    else:
        vals, vecs = np.linalg.eig(a)
    k = int(np.argmax(np.abs(vals)))
    lam = float(np.real(vals[k]))
    v = np.real(vecs[:, k])
    v = _normalize(v)
    res = float(np.linalg.norm(a @ v - lam * v))
    if res > 1e-10 * scale:
        raise ConvergenceError(f"leading eigenpair did not converge (residual {res:.3e})",
                               residual=res)
    return lam, v


def bracket_root(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-12,
                 max_iter: int = 500) -> float:
    """Root of ``f`` inside [lo, hi], which must bracket a sign change.

    Backed by Brent's method (bisection safeguarded, inverse-interpolation
    accelerated).  NaN from ``f`` raises :class:`EvaluationError`.
    """
    if lo > hi:
        lo, hi = hi, lo

    def g(x):
        y = f(x)
        if y != y:
            raise EvaluationError(f"function returned NaN at x = {x!r}")
        return y

    flo, fhi = g(lo), g(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo * fhi > 0:
        raise BracketError(f"no sign change on [{lo!r}, {hi!r}]: f = ({flo:.3e}, {fhi:.3e})")
    x = brentq(g, lo, hi, xtol=tol, rtol=max(tol, 4 * np.finfo(float).eps), maxiter=max_iter)
    return min(max(x, lo), hi)
