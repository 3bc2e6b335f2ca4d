"""Parameter records, unit conventions and scale conversions.

All solvers work in natural units with hbar = 1 and the reference particle
mass m = 1.  Momenta are measured in units of the ultraviolet cutoff (or of
the calibrated three-body parameter k*), energies in hbar^2 k^2 / m.
Laboratory units only appear in this module.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from scipy import constants as _const

from .errors import DomainError

MEDIUM_KINDS = ("vacuum", "fermi_sea", "bose_condensate")


@dataclass(frozen=True)
class UnitSystem:
    """Natural-unit convention plus the anchor needed to leave it.

    ``momentum_per_cm`` is the laboratory value (cm^-1) of one natural
    momentum unit; ``mass_kg`` is the reference particle mass.
    """

    momentum_unit: str = "cutoff"
    momentum_per_cm: float = 1.0
    mass_kg: float = _const.atomic_mass

    def __post_init__(self):
        if self.momentum_unit not in ("cutoff", "k_star"):
            raise DomainError(f"unknown momentum unit {self.momentum_unit!r}")
        if not self.momentum_per_cm > 0 or not self.mass_kg > 0:
            raise DomainError("unit anchors must be positive")

    def momentum_to_lab(self, k: float) -> float:
        """Natural momentum -> cm^-1."""
        return k * self.momentum_per_cm

    def density_to_lab(self, n: float) -> float:
        """Natural number density -> cm^-3."""
        return n * self.momentum_per_cm**3

    def energy_to_lab(self, energy: float) -> float:
        """Natural energy (hbar^2 k^2 / m) -> joule."""
        k_si = self.momentum_per_cm * 100.0
        return energy * _const.hbar**2 * k_si**2 / self.mass_kg


@dataclass(frozen=True)
class ThreeBodyParams:
    """Definition of the zero-range three-body problem.

    ``inv_a = 0`` encodes unitarity.  The cutoff must be finite: the
    zero-range limit is only ever approached through it.
    """

    cutoff: float
    inv_a: float = 0.0
    mass_ratio: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.cutoff) and self.cutoff > 0):
            raise DomainError(f"cutoff must be finite and > 0, got {self.cutoff}")
        if not math.isfinite(self.inv_a):
            raise DomainError(f"inv_a must be finite, got {self.inv_a}")
        if not (math.isfinite(self.mass_ratio) and self.mass_ratio > 0):
            raise DomainError(f"mass_ratio must be > 0, got {self.mass_ratio}")

    def with_inv_a(self, inv_a: float) -> "ThreeBodyParams":
        return ThreeBodyParams(cutoff=self.cutoff, inv_a=inv_a, mass_ratio=self.mass_ratio)


@dataclass(frozen=True)
class MediumParams:
    kind: str = "vacuum"
    k_f: float = 0.0
    density: float = 0.0
    a_b: Optional[float] = None

    def __post_init__(self):
        if self.kind not in MEDIUM_KINDS:
            raise DomainError(f"unknown medium kind {self.kind!r}")
        if not self.k_f >= 0 or not math.isfinite(self.k_f):
            raise DomainError(f"k_f must be finite and >= 0, got {self.k_f}")
        if not self.density >= 0 or not math.isfinite(self.density):
            raise DomainError(f"density must be finite and >= 0, got {self.density}")
        if self.kind == "bose_condensate" and not (self.a_b is not None and self.a_b > 0):
            raise DomainError("a condensate needs a boson scattering length a_b > 0")

    @classmethod
    def vacuum(cls) -> "MediumParams":
        return cls()

    @classmethod
    def fermi_sea(cls, k_f: float) -> "MediumParams":
        return cls(kind="fermi_sea", k_f=k_f)

    @classmethod
    def bose_condensate(cls, density: float, a_b: float) -> "MediumParams":
        return cls(kind="bose_condensate", density=density, a_b=a_b)

    @property
    def is_vacuum(self) -> bool:
        if self.kind == "vacuum":
            return True
        if self.kind == "fermi_sea":
            return self.k_f == 0.0
        return self.density == 0.0

    @property
    def coherence_length(self) -> float:
        if self.kind != "bose_condensate":
            raise DomainError("coherence length is only defined for a condensate")
        return coherence_length(self.density, self.a_b)


def dimer_energy(inv_a: float) -> Optional[float]:
    """Zero-range dimer energy -inv_a^2, or None when a <= 0 (no dimer)."""
    if inv_a > 0:
        return -inv_a * inv_a
    return None


def fermi_energy(k_f: float) -> float:
    if k_f < 0:
        raise DomainError(f"k_f must be >= 0, got {k_f}")
    return 0.5 * k_f * k_f


def kf_to_density(k_f: float) -> float:
    """Density of a single-component Fermi gas, n = k_F^3 / (6 pi^2)."""
    if k_f < 0:
        raise DomainError(f"k_f must be >= 0, got {k_f}")
    return k_f**3 / (6.0 * math.pi**2)


def density_to_kf(n: float) -> float:
    if n < 0:
        raise DomainError(f"density must be >= 0, got {n}")
    return (6.0 * math.pi**2 * n) ** (1.0 / 3.0)


def coherence_length(n: float, a_b: float) -> float:
    """Condensate coherence length xi = 1 / sqrt(8 pi n a_B)."""
    if not n > 0:
        raise DomainError(f"coherence length needs density > 0, got {n}")
    if not a_b > 0:
        raise DomainError(f"coherence length needs a_B > 0, got {a_b}")
    return 1.0 / math.sqrt(8.0 * math.pi * n * a_b)
