"""Heavy-heavy-light Born-Oppenheimer toolkit.

Natural units with hbar = 1 and the light mass m = 1; heavy masses enter
only through ``mass_ratio`` M/m.  The unitarity potential is implemented as
V(R) = -Omega^2 / R^2, i.e. with the light mass in the denominator and no
factor 1/2 (the two-centre light-particle energy itself is -kappa^2 / 2).
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from .errors import DomainError
from .numerics import bracket_root
from .units import coherence_length

POTENTIAL_KINDS = ("vacuum_unitarity", "vacuum_general_a", "bec_truncated")


@functools.lru_cache(maxsize=8)
def omega_constant(tol: float = 1e-15) -> float:
    """Solution of exp(-x) = x (the omega constant, ~0.567143)."""
    return _scaled_binding(0.0, tol)


def _scaled_binding(c: float, tol: float = 1e-15) -> float:
    # x = kappa R solves x = c + exp(-x), c = R / a
    return bracket_root(lambda x: x - c - math.exp(-x), max(c, 0.0), max(c, 0.0) + 1.0, tol=tol)


def light_binding(R: float, inv_a: float) -> Optional[float]:
    """Symmetric-state light binding kappa(R) from kappa = 1/a + exp(-kappa R)/R.

    Returns None when no positive solution exists (inv_a <= -1/R).
    """
    if not R > 0:
        raise DomainError(f"R must be > 0, got {R}")
    c = inv_a * R
    if c <= -1.0:
        return None
    if c < 0:
        x = bracket_root(lambda x: x - c - math.exp(-x), 0.0, 1.0, tol=1e-15)
    else:
        x = _scaled_binding(c)
    return x / R


def bec_switch(x: float) -> float:
    """Truncation profile in R / xi: 1 inside the coherence length, exp(-2(x - 1)) beyond."""
    return 1.0 if x <= 1.0 else math.exp(-2.0 * (x - 1.0))


@dataclass(frozen=True)
class BOPotential:
    kind: str
    inv_a: float = 0.0
    mass_ratio: float = 1.0
    xi: Optional[float] = None
    r0: float = 1.0

    def __post_init__(self):
        if self.kind not in POTENTIAL_KINDS:
            raise DomainError(f"unknown potential kind {self.kind!r}")
        if self.kind == "bec_truncated" and not (self.xi is not None and self.xi > 0):
            raise DomainError("bec_truncated needs a coherence length xi > 0")
        if not self.r0 > 0 or not self.mass_ratio > 0:
            raise DomainError("r0 and mass_ratio must be > 0")

    def __call__(self, R: float) -> float:
        return bo_potential(self.kind, R, self)


def bo_potential(kind: str, R: float, params: BOPotential) -> float:
    """Induced heavy-heavy potential.

    ``vacuum_general_a`` is referenced to the separated-heavy limit:
    V = -(kappa(R)^2 - kappa(inf)^2) with kappa(inf) = max(1/a, 0), and V = 0
    where the light particle is unbound.
    """
    if not R > 0:
        raise DomainError(f"R must be > 0, got {R}")
    omega = omega_constant()
    if kind == "vacuum_unitarity":
        return -omega * omega / (R * R)
    if kind == "bec_truncated":
        return -omega * omega / (R * R) * bec_switch(R / params.xi)
    if kind == "vacuum_general_a":
        kappa = light_binding(R, params.inv_a)
        if kappa is None:
            return 0.0
        k_inf = max(params.inv_a, 0.0)
        return -(kappa * kappa - k_inf * k_inf)
    raise DomainError(f"unknown potential kind {kind!r}")


def count_trimers_formula(scale: float, r0: float) -> float:
    """(1/pi) ln(scale / R0); scale is |a| or the coherence length."""
    if not scale > 0 or not r0 > 0:
        raise DomainError("scale and R0 must be > 0")
    return math.log(scale / r0) / math.pi


def wkb_phase(potential: Callable[[float], float], mass_ratio: float, r0: float,
              r_out: float) -> float:
    """Phase integral of sqrt(2 mu |V|) over [R0, R_out] with mu = M/(2m).

    Integrated in ln R, where a pure 1/R^2 potential gives a constant
    integrand.
    """
    if not r0 > 0 or r_out < r0:
        raise DomainError("need R_out >= R0 > 0")
    if r_out == r0:
        return 0.0
    mu = 0.5 * mass_ratio
    lo, hi = math.log(r0), math.log(r_out)
    probe = np.linspace(lo, hi, 257)
    if any(potential(math.exp(s)) > 0 for s in probe):
        raise DomainError("potential is repulsive somewhere on [R0, R_out]")

    def integrand(s):
        r = math.exp(s)
        return math.sqrt(2.0 * mu * abs(potential(r))) * r

    val, _ = quad(integrand, lo, hi, epsabs=1e-10, epsrel=1e-12, limit=200)
    return val


def wkb_count(potential: Callable[[float], float], mass_ratio: float, r0: float,
              r_out: float) -> int:
    """Semiclassical number of bound states, floor(phase/pi + 1/2)."""
    return int(math.floor(wkb_phase(potential, mass_ratio, r0, r_out) / math.pi + 0.5))


@dataclass(frozen=True)
class TrimerCount:
    value: float  # formula estimate, may be <= 0
    wkb: int
    scale: float
    r0: float

    @property
    def count(self) -> int:
        """Formula estimate as a state number (nearest integer, at least 0)."""
        return max(0, int(math.floor(self.value + 0.5)))


def count_trimers_bec(n: float, a_b: float, r0: float, mass_ratio: float = 1.0,
                      inv_a: Optional[float] = None) -> TrimerCount:
    """Trimer count with the condensate coherence length as the long-distance scale.

    With a finite positive scattering length (``inv_a`` != 0) the shorter of
    |a| and xi is used.
    """
    xi = coherence_length(n, a_b)
    if not r0 > 0:
        raise DomainError("R0 must be > 0")
    scale = xi
    if inv_a is not None and inv_a != 0:
        scale = min(xi, 1.0 / abs(inv_a))
    pot = BOPotential("bec_truncated", mass_ratio=mass_ratio, xi=xi, r0=r0)
    wkb = wkb_count(pot, mass_ratio, r0, max(scale, r0))
    return TrimerCount(value=count_trimers_formula(scale, r0), wkb=wkb, scale=scale, r0=r0)
