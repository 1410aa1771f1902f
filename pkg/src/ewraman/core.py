"""Shared physical configuration, recoil models, and the momentum-distribution container.

Unit convention (fixed, used by every module):

    hbar = 1,  m = 1,  k0 = 1

where k0 is the magnitude of the photon recoil. Momenta are measured in units
of hbar*k0, lengths in 1/k0, times in m/(hbar*k0^2), energies in
(hbar*k0)^2/m. Velocities and momenta are numerically identical (m = 1); the
semiclassical API talks about speeds, everything else about momenta.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np


class ValidationError(ValueError):
    """Raised when a configuration violates its invariants.

    Carries the full list of violations, not just the first one.
    """

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class UnitSystem:
    """The fixed natural-unit convention. Exists so metadata can state it."""

    hbar: float = 1.0
    mass: float = 1.0
    k0: float = 1.0

    def describe(self) -> dict[str, str]:
        return {
            "momentum": "hbar*k0",
            "length": "1/k0",
            "time": "m/(hbar*k0^2)",
            "energy": "(hbar*k0)^2/m",
        }


UNITS = UnitSystem()


@dataclass(frozen=True)
class PotentialConfig:
    """Exponential mirror parameters shared by both internal states.

    The incident state sees the repulsive potential v1*exp(-2*kappa*z); after
    the Raman transfer the atom sees the same shape reduced by the factor
    beta, i.e. beta*v1*exp(-2*kappa*z).

    Parameters
    ----------
    v1 : float
        Peak coefficient of the incident-state potential, > 0.
    kappa : float
        Inverse decay length of the evanescent field, > 0.
    beta : float
        Potential reduction factor after the transfer, 0 < beta < 1.
    """

    v1: float
    kappa: float
    beta: float

    def __post_init__(self):
        violations = self.validate()
        if violations:
            raise ValidationError(violations)

    def validate(self) -> list[str]:
        v = []
        if not (self.v1 > 0 and math.isfinite(self.v1)):
            v.append(f"v1 must be finite and > 0, got {self.v1}")
        if not (self.kappa > 0 and math.isfinite(self.kappa)):
            v.append(f"kappa must be finite and > 0, got {self.kappa}")
        if not (0.0 < self.beta < 1.0):
            v.append(f"beta must satisfy 0 < beta < 1, got {self.beta}")
        return v

    @property
    def v2(self) -> float:
        """Potential coefficient of the final state (exactly beta*v1)."""
        return self.beta * self.v1

    def potential(self, z, state: int = 1) -> np.ndarray:
        """Evaluate V(z) for the requested internal state (1 or 2)."""
        coeff = self.v1 if state == 1 else self.v2
        return coeff * np.exp(-2.0 * self.kappa * np.asarray(z, dtype=float))

    def as_dict(self) -> dict[str, float]:
        return {"v1": self.v1, "kappa": self.kappa, "beta": self.beta}


@dataclass(frozen=True)
class IncidentState:
    """Asymptotic incident momentum p0 > 0 (total energy p0^2/2)."""

    p0: float

    def __post_init__(self):
        if not (self.p0 > 0 and math.isfinite(self.p0)):
            raise ValidationError([f"p0 must be finite and > 0, got {self.p0}"])

    @property
    def energy(self) -> float:
        return 0.5 * self.p0 ** 2

    def turning_point(self, config: PotentialConfig) -> float:
        """Classical turning point on the incident-state potential."""
        return math.log(2.0 * config.v1 / self.p0 ** 2) / (2.0 * config.kappa)


class RecoilKind(enum.Enum):
    NONE = "none"
    ISOTROPIC = "isotropic"
    DIPOLE = "dipole"


@dataclass(frozen=True)
class RecoilModel:
    """Distribution of the z-component k of the spontaneous photon recoil.

    ``NONE`` is a point mass at k = 0 (the recoil-free comparison curves).
    ``ISOTROPIC`` is flat on [-k0, k0]. ``DIPOLE`` is the circular-dipole
    pattern (3/16)*(3 - (k/k0)^2) per unit k/k0; the 1/k0 Jacobian is applied
    so the density integrates to one over k itself.
    """

    kind: RecoilKind = RecoilKind.ISOTROPIC
    k0: float = 1.0

    def __post_init__(self):
        if not (self.k0 > 0 and math.isfinite(self.k0)):
            raise ValidationError([f"k0 must be finite and > 0, got {self.k0}"])

    def as_dict(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "k0": self.k0}


def recoil_weight(model: RecoilModel, k) -> np.ndarray:
    """Recoil density at z-momentum k. Even in k, zero outside [-k0, k0].

    For the point-mass model the density is singular; this returns ``inf`` at
    exactly k = 0 and 0 elsewhere. Quadrature always goes through
    :func:`recoil_nodes`, which handles that case as the single node (0, 1).
    """
    k = np.asarray(k, dtype=float)
    out = np.zeros_like(k)
    inside = np.abs(k) <= model.k0
    if model.kind is RecoilKind.NONE:
        out = np.where(k == 0.0, np.inf, 0.0)
    elif model.kind is RecoilKind.ISOTROPIC:
        out[inside] = 0.5 / model.k0
    else:
        u = k[inside] / model.k0
        out[inside] = (3.0 / (16.0 * model.k0)) * (3.0 - u * u)
    if out.ndim == 0:
        return out[()]
    return out


def recoil_nodes(model: RecoilModel, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes and weights for averaging over the recoil direction.

    Gauss-Legendre on [-k0, k0] with the recoil density folded into the
    weights. ``n`` must be odd so the rule always carries a k = 0 node and the
    recoil-free curve is a strict sub-case. The weights sum to exactly the
    density normalization (1) because the density is polynomial of degree <= 2.

    Returns
    -------
    (nodes, weights) : pair of float arrays, symmetric under k -> -k.
    """
    if n < 1:
        raise ValueError(f"need at least one node, got n={n}")
    if n % 2 == 0:
        raise ValueError(f"n must be odd so that k = 0 is a node, got n={n}")
    if model.kind is RecoilKind.NONE:
        return np.array([0.0]), np.array([1.0])
    u, w = np.polynomial.legendre.leggauss(n)
    order = np.argsort(u)
    u, w = u[order], w[order]
    u[n // 2] = 0.0  # exact zero at the central node
    k = model.k0 * u
    weights = model.k0 * w * recoil_weight(model, k)
    return k, weights


class NormConvention(enum.Enum):
    UNIT_INTEGRAL = "unit_integral"
    RAW = "raw"


@dataclass(frozen=True)
class MomentumDistribution:
    """Sampled momentum-space density |phi(p)|^2 on an ordered grid.

    ``UNIT_INTEGRAL`` distributions integrate (trapezoid) to 1 within 1e-9;
    ``RAW`` ones carry whatever scale the producing integral had. ``meta``
    records the full configuration that produced the distribution.
    """

    p_grid: np.ndarray
    density: np.ndarray
    norm_convention: NormConvention = NormConvention.RAW
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        p = np.asarray(self.p_grid, dtype=float)
        d = np.asarray(self.density, dtype=float)
        object.__setattr__(self, "p_grid", p)
        object.__setattr__(self, "density", d)
        violations = []
        if p.ndim != 1 or d.shape != p.shape:
            violations.append(
                f"p_grid and density must be 1-d arrays of equal length, "
                f"got shapes {p.shape} and {d.shape}"
            )
        else:
            if p.size < 2:
                violations.append("need at least two grid points")
            elif not np.all(np.diff(p) > 0):
                violations.append("p_grid must be strictly increasing")
            if np.any(d < 0):
                violations.append("density must be non-negative everywhere")
            if np.any(~np.isfinite(d)):
                violations.append("density must be finite everywhere")
        if violations:
            raise ValidationError(violations)
        if self.norm_convention is NormConvention.UNIT_INTEGRAL:
            total = float(np.trapezoid(self.density, self.p_grid))
            if abs(total - 1.0) > 1e-9:
                raise ValidationError(
                    [f"unit-integral density integrates to {total!r}, not 1"]
                )

    def integral(self) -> float:
        return float(np.trapezoid(self.density, self.p_grid))

    def normalized(self) -> "MomentumDistribution":
        """Return the unit-integral version of this distribution."""
        total = self.integral()
        if total <= 0:
            raise ValidationError(["cannot normalize a zero distribution"])
        return MomentumDistribution(
            self.p_grid,
            self.density / total,
            NormConvention.UNIT_INTEGRAL,
            dict(self.meta),
        )
