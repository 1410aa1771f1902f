"""Classical phase-space picture of the inelastic bounce.

An atom entering the mirror with speed v_i follows the incident-state
trajectory z1(v); a Raman transfer at velocity w drops it onto the weaker
final-state potential where it continues on the trajectory z2(v) belonging to
the asymptotic exit speed v_f, with

    v_f^2 = w^2 + beta*(v_i^2 - w^2).

Two transfer velocities w reach the same v_f, so each final speed inside the
classically two-path band interferes with itself. The interference phase is
the phase-space area enclosed between the two paths; a photon recoil k tilts
the loop by kicking the velocity by -k at the transfer point. All phases here
are unwrapped (reduction modulo 2*pi happens only in the fringe prediction).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .core import PotentialConfig

__all__ = [
    "InternalState",
    "Trajectory",
    "TransferGeometry",
    "transfer_speed",
    "phase_difference",
    "recoil_phase_difference",
    "predicted_fringe_momenta",
    "emitted_photon_frequency",
]

_QUAD_ABS_TOL = 1e-9


class InternalState(enum.Enum):
    ONE = 1
    TWO = 2


@dataclass(frozen=True)
class Trajectory:
    """Phase-space trajectory z(v) on one of the two mirror potentials.

    ``asymptotic_momentum`` is v_i for the incident state and v_f for the
    final state (m = 1, so speeds and momenta coincide).
    """

    state: InternalState
    asymptotic_momentum: float
    config: PotentialConfig

    @property
    def coefficient(self) -> float:
        return self.config.v1 if self.state is InternalState.ONE else self.config.v2

    def position(self, v) -> np.ndarray:
        """Height z at which the atom moves with velocity v (|v| < asymptotic)."""
        v = np.asarray(v, dtype=float)
        gap = self.asymptotic_momentum ** 2 - v * v
        if np.any(gap <= 0):
            raise ValueError("velocity outside the classically allowed range")
        return -np.log(gap / (2.0 * self.coefficient)) / (2.0 * self.config.kappa)


@dataclass(frozen=True)
class TransferGeometry:
    """Consistent (v_i, v_t, v_f) triple for a recoil-free transfer."""

    v_i: float
    v_t: float
    v_f: float
    beta: float

    def __post_init__(self):
        lo = math.sqrt(self.beta) * self.v_i
        if not (lo <= self.v_f <= self.v_i):
            raise ValueError(
                f"v_f={self.v_f} outside the classical band "
                f"[sqrt(beta)*v_i, v_i] = [{lo}, {self.v_i}]"
            )

    @classmethod
    def from_speeds(cls, v_i: float, v_f: float, beta: float) -> "TransferGeometry":
        return cls(v_i, transfer_speed(v_i, v_f, beta), v_f, beta)


def transfer_speed(v_i: float, v_f: float, beta: float) -> float:
    """Speed |v_t| at which the transfer must happen to exit with v_f.

    Inverts v_f^2 = v_t^2 + beta*(v_i^2 - v_t^2); the two velocities +-v_t
    produce the same v_f.
    """
    num = v_f * v_f - beta * v_i * v_i
    if num < -1e-13 * v_i * v_i or v_f > v_i * (1.0 + 1e-13):
        raise ValueError(
            f"v_f={v_f} outside the classical band "
            f"[{math.sqrt(beta) * v_i}, {v_i}] for v_i={v_i}, beta={beta}"
        )
    return math.sqrt(max(num, 0.0) / (1.0 - beta))


def _log_area_integrand(v, v_i, v_f, beta, kappa):
    # z1(v) - z2(v); vanishes at +-v_t where the trajectories cross
    return np.log((v_f * v_f - v * v) / (beta * (v_i * v_i - v * v))) / (2.0 * kappa)


def phase_difference(v_i: float, v_f: float, config: PotentialConfig) -> float:
    """Interference phase of the two recoil-free paths with exit speed v_f.

    The enclosed phase-space area between the incident-state and final-state
    trajectories, integrated over the velocity interval [-v_t, v_t]. Positive,
    grows with v_f, and vanishes at the turning-point transfer
    v_f = sqrt(beta)*v_i.
    """
    beta, kappa = config.beta, config.kappa
    lo = math.sqrt(beta) * v_i
    if not (lo < v_f < v_i):
        raise ValueError(
            f"v_f={v_f} must lie strictly inside ({lo}, {v_i}) for v_i={v_i}"
        )
    v_t = transfer_speed(v_i, v_f, beta)
    val, _err = quad(
        _log_area_integrand,
        -v_t,
        v_t,
        args=(v_i, v_f, beta, kappa),
        epsabs=_QUAD_ABS_TOL,
        epsrel=1e-12,
        limit=200,
    )
    return val


def _transfer_roots(p_f: float, v_i: float, beta: float, k: float):
    """Both transfer velocities w (sign included) that exit with speed p_f
    after a recoil kick -k at the transfer point."""
    disc = beta * k * k + (1.0 - beta) * (p_f * p_f - beta * v_i * v_i)
    if disc < 0.0:
        return None
    root = math.sqrt(disc)
    return (k - root) / (1.0 - beta), (k + root) / (1.0 - beta)


def recoil_phase_difference(
    v_i: float, v_f: float, config: PotentialConfig, k: float
) -> float:
    """Interference phase including a recoil kick k at the transfer.

    Both transfer velocities w solve (w - k)^2 + beta*(v_i^2 - w^2) = v_f^2;
    the accumulated path-phase difference is the incident-state arc between
    them minus the final-state arc between the kicked velocities. (The
    photon's own position phase -k*z_t cancels the constant-height legs of
    the phase-space loop exactly, leaving just the two arcs.) Reduces to
    :func:`phase_difference` at k = 0, and is even in k.
    """
    beta = config.beta
    roots = _transfer_roots(v_f, v_i, beta, k)
    if roots is None:
        raise ValueError(f"p_f={v_f} below the curved classical bound for k={k}")
    w_lo, w_hi = roots
    if not (-v_i < w_lo and w_hi < v_i):
        raise ValueError(
            f"p_f={v_f}, k={k}: only one classical path (inside a single-"
            "trajectory triangle) or none; no interference phase is defined"
        )
    z1 = Trajectory(InternalState.ONE, v_i, config)
    z2 = Trajectory(InternalState.TWO, v_f, config)

    arc1, _ = quad(z1.position, w_lo, w_hi, epsabs=_QUAD_ABS_TOL, epsrel=1e-12, limit=200)
    arc2, _ = quad(
        z2.position, w_lo - k, w_hi - k, epsabs=_QUAD_ABS_TOL, epsrel=1e-12, limit=200
    )
    return arc1 - arc2


def classical_band(v_i: float, beta: float, k: float) -> tuple[float, float]:
    """(p_lo, p_hi) of the two-path interference band for recoil component k.

    For |k| >= (1-beta)*v_i the second transfer point lies beyond the incident
    asymptote everywhere and the band is empty (p_hi <= p_lo).
    """
    arg = 1.0 - (k / v_i) ** 2 / (1.0 - beta)
    if arg < 0.0:
        raise ValueError(f"recoil k={k} exceeds the classical reach for v_i={v_i}")
    lo = math.sqrt(beta) * v_i * math.sqrt(arg)
    if abs(k) >= (1.0 - beta) * v_i:
        return lo, lo
    return lo, v_i - abs(k)


def predicted_fringe_momenta(
    v_i: float,
    config: PotentialConfig,
    recoil_k: float = 0.0,
    n_scan: int = 1200,
    edge_inset: float = 1e-4,
) -> np.ndarray:
    """Exit momenta where the two-path phase is an integer multiple of 2*pi.

    Scans the interference band (inset slightly from both edges, where the
    two classical paths merge or one leaves the potential) and refines each
    2*pi crossing by bracketing. Returns an increasing array, empty if no
    root lies in the band.
    """
    beta = config.beta
    try:
        p_lo, p_hi = classical_band(v_i, beta, recoil_k)
    except ValueError:
        return np.array([])
    width = p_hi - p_lo
    if width <= 0.0:
        return np.array([])
    a = p_lo + edge_inset * width
    b = p_hi - edge_inset * width
    if a >= b:
        return np.array([])
    grid = np.linspace(a, b, n_scan)
    phases = np.array(
        [recoil_phase_difference(v_i, p, config, recoil_k) for p in grid]
    )
    roots = []
    cycles = phases / (2.0 * math.pi)
    for i in range(len(grid) - 1):
        lo_n = math.floor(min(cycles[i], cycles[i + 1]))
        hi_n = math.floor(max(cycles[i], cycles[i + 1]))
        for n in range(lo_n + 1, hi_n + 1):
            if n < 1:
                continue
            target = 2.0 * math.pi * n
            f = lambda p: recoil_phase_difference(v_i, p, config, recoil_k) - target
            roots.append(brentq(f, grid[i], grid[i + 1], xtol=1e-12))
    return np.array(sorted(roots))


def emitted_photon_frequency(
    v_i: float, v_f: float, omega_ew: float, delta12: float
) -> float:
    """Frequency of the spontaneously emitted photon, from energy conservation.

    Independent of which of the two transfer points was taken, so it carries
    no which-way information; diagnostic only.
    """
    if v_f > v_i:
        raise ValueError(f"v_f={v_f} cannot exceed v_i={v_i}")
    return 0.5 * (v_i * v_i - v_f * v_f) + omega_ew - delta12
