"""Modified Bessel function K of purely imaginary order, K_{i*nu}(x).

This is the only special function the stationary route needs: the exact
mirror eigenfunctions are K_{i*p/kappa} evaluated along the exponential
potential. K_{i*nu}(x) is real for real nu and x > 0, oscillates in the
classically allowed region x < nu and decays like exp(-x) beyond, with an
overall magnitude ~ exp(-pi*nu/2) that underflows long before the normalized
eigenfunction does. All evaluation therefore goes through a scaled form

    K_{i*nu}(x) = mantissa * exp(log_scale)

so the exponentials can cancel against the eigenfunction normalization in
log space.

Evaluation strategy, chosen so that both branches are cancellation-free in
double precision:

* ``x >= x_b(nu)``: trapezoid sums of the integral representation
  Int_0^inf exp(-x*cosh t)*cos(nu*t) dt, scaled by exp(x). The trapezoid
  converges geometrically for this analytic, doubly-exponentially decaying
  integrand; cancellation grows like exp(pi*nu/2 - x) and is small here.
* ``x < x_b(nu)``: the convergent ascending series through
  Im[exp(i*(nu*ln(x/2) - arg Gamma(1+i*nu))) * S(nu, x)], whose internal
  cancellation grows like exp(x^2/(4*nu)) and is small here.

The boundary x_b = nu*(sqrt(4+2*pi)-2) balances the two exponents. In the
narrow band around x_b where nu is large enough that both exceed ~1e10 the
evaluation escalates to mpmath at just enough working precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import loggamma

__all__ = [
    "BesselOrder",
    "UnderflowError",
    "besselk_imag",
    "besselk_imag_scaled",
    "besselk_imag_scaled_grid",
    "stationary_norm",
    "stationary_norm_log",
]

# balanced branch boundary: x_b(nu) solves x^2/(4 nu) = pi nu / 2 - x
_XB_SLOPE = math.sqrt(4.0 + 2.0 * math.pi) - 2.0
# below this order the integral branch is used everywhere (no oscillation to speak of)
_NU_SERIES_MIN = 0.5
# cancellation (in e-folds) above which double precision cannot deliver 1e-11;
# both branches stay below this for nu <~ 32, so the mpmath fallback only
# fires in the balanced band at large order
_CANCEL_EFOLDS_MAX = 11.5
_LOG_TINY = math.log(np.finfo(float).tiny)  # ~ -708


class UnderflowError(ArithmeticError):
    """The unscaled value is not representable; use the scaled variant."""


@dataclass(frozen=True)
class BesselOrder:
    """Imaginary order i*nu with nu >= 0 (K_{i*nu} = K_{-i*nu})."""

    nu: float

    def __post_init__(self):
        if not math.isfinite(self.nu):
            raise ValueError(f"order must be finite, got {self.nu}")
        object.__setattr__(self, "nu", abs(self.nu))


def _series_branch(nu: float, x: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Ascending series, vectorized over x. Returns (mantissa, log_scale, cancel).

    mantissa = -Im[exp(i*(theta - phi)) * S],
    log_scale = log sqrt(pi / (nu * sinh(pi*nu))),
    cancel = worst ratio of largest series term to final sum (error amplifier).
    """
    q = 0.25 * x * x
    term = np.ones(x.shape, dtype=complex)
    s = term.copy()
    peak = np.abs(term)
    m = 0
    while m < 800:
        m += 1
        term = term * (q / (m * (m + 1j * nu)))
        s += term
        a = np.abs(term)
        np.maximum(peak, a, out=peak)
        if m > 3 and np.all(a < 1e-19 * np.abs(s)):
            break
    phi = loggamma(complex(1.0, nu)).imag
    theta = nu * np.log(0.5 * x)
    mantissa = -(np.exp(1j * (theta - phi)) * s).imag
    log_scale = 0.5 * (
        math.log(math.pi / nu)
        - (math.pi * nu + math.log1p(-math.exp(-2.0 * math.pi * nu)) - math.log(2.0))
    )
    cancel = float(np.max(peak / np.maximum(np.abs(s), 1e-300)))
    return mantissa, log_scale, cancel


def _trapezoid_chunk(nu: float, x: np.ndarray) -> np.ndarray:
    """Scaled integral exp(x)*K_{i nu}(x) for an ascending chunk of x values.

    Step size from the analyticity-strip bound (strip half-width 1), then
    halved until two successive levels agree; the tolerance is anchored to the
    chunk scale so zeros of the oscillatory region do not stall convergence.
    """
    xmin, xmax = float(x[0]), float(x[-1])
    tmax = math.acosh(1.0 + 46.0 / xmin)
    h = 2.0 * math.pi / (46.0 + 1.05 * nu + 0.5 * xmax)
    prev = None
    val = None
    for _ in range(6):
        n = max(8, int(math.ceil(tmax / h)))
        t = np.linspace(0.0, tmax, n + 1)
        growth = np.cosh(t) - 1.0
        osc = np.cos(nu * t)
        f = np.exp(-np.clip(np.outer(x, growth), 0.0, 745.0)) * osc
        val = (t[1] - t[0]) * (f.sum(axis=1) - 0.5 * (f[:, 0] + f[:, -1]))
        if prev is not None:
            scale = float(np.max(np.abs(val)))
            if np.all(np.abs(val - prev) <= 1e-14 * (np.abs(val) + 1e-3 * scale)):
                return val
        prev = val
        h *= 0.5
    return val


def _mpmath_series(nu: float, x: float, extra_digits: int) -> tuple[float, float]:
    """Series branch in mpmath; used only in the balanced band at large nu."""
    import mpmath as mp

    with mp.workdps(26 + extra_digits):
        nu_mp = mp.mpf(nu)
        x_mp = mp.mpf(x)
        q = x_mp * x_mp / 4
        term = mp.mpc(1)
        s = mp.mpc(1)
        m = 0
        while m < 2000:
            m += 1
            term = term * q / (m * (m + 1j * nu_mp))
            s += term
            if m > 3 and abs(term) < mp.mpf(10) ** (-(30 + extra_digits)) * abs(s):
                break
        phi = mp.arg(mp.gamma(1 + 1j * nu_mp))
        theta = nu_mp * mp.log(x_mp / 2)
        mantissa = -(mp.expj(theta - phi) * s).imag
        # log sqrt(pi/(nu sinh(pi nu))), expanded to stay inside mpf range
        log_scale = (
            mp.log(mp.pi / nu_mp)
            - (mp.pi * nu_mp + mp.log1p(-mp.exp(-2 * mp.pi * nu_mp)) - mp.log(2))
        ) / 2
        return float(mantissa), float(log_scale)


def besselk_imag_scaled(nu: float, x: float) -> tuple[float, float]:
    """K_{i*nu}(x) as (mantissa, log_scale) with value = mantissa*exp(log_scale).

    Free of intermediate under/overflow for any representable output scale
    (orders of several hundred included). Negative orders are folded.

    Parameters
    ----------
    nu : float
        Order parameter (the order is i*nu).
    x : float
        Argument, > 0.
    """
    if not (x > 0.0) or not math.isfinite(x):
        raise ValueError(f"argument must be finite and > 0, got x={x}")
    nu = BesselOrder(nu).nu
    if nu < _NU_SERIES_MIN:
        val = _trapezoid_chunk(nu, np.array([x]))
        return float(val[0]), -x
    series_efolds = x * x / (4.0 * nu)
    integral_efolds = max(0.0, math.pi * nu / 2.0 - x)
    if min(series_efolds, integral_efolds) > _CANCEL_EFOLDS_MAX:
        # balanced band: neither branch survives in doubles; the convergent
        # series in mpmath covers any x once given enough digits
        extra = int(math.ceil(series_efolds * 0.4343)) + 8
        return _mpmath_series(nu, x, extra)
    if x < _XB_SLOPE * nu:
        mantissa, log_scale, cancel = _series_branch(nu, np.array([x]))
        if cancel > math.exp(_CANCEL_EFOLDS_MAX):
            extra = int(math.ceil(math.log10(max(cancel, 10.0)))) + 10
            return _mpmath_series(nu, x, extra)
        return float(mantissa[0]), log_scale
    val = _trapezoid_chunk(nu, np.array([x]))
    return float(val[0]), -x


def besselk_imag_scaled_grid(nu: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized scaled evaluation over an array of arguments at fixed order.

    This is the workhorse for eigenfunction tables: the series branch shares
    its term recursion across all small arguments, and the integral branch
    shares one trapezoid grid per octave of argument. Cost is O(1) special-
    function work per grid point.
    """
    nu = BesselOrder(nu).nu
    x = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise ValueError("arguments must be finite and > 0")
    mantissa = np.empty_like(x)
    log_scale = np.empty_like(x)
    order = np.argsort(x, kind="stable")
    xs = x[order]
    xb = _XB_SLOPE * nu if nu >= _NU_SERIES_MIN else 0.0
    n_series = int(np.searchsorted(xs, xb))
    if n_series > 0:
        xs_ser = xs[:n_series]
        cancel_efolds = xs_ser[-1] ** 2 / (4.0 * nu)
        man, ls, cancel = _series_branch(nu, xs_ser)
        mantissa[order[:n_series]] = man
        log_scale[order[:n_series]] = ls
        if cancel > math.exp(_CANCEL_EFOLDS_MAX) or cancel_efolds > _CANCEL_EFOLDS_MAX:
            # redo only the offending top of the chunk point-by-point
            bad = xs_ser ** 2 / (4.0 * nu) > _CANCEL_EFOLDS_MAX - 2.0
            for i in np.where(bad)[0]:
                m_i, l_i = besselk_imag_scaled(nu, float(xs_ser[i]))
                mantissa[order[i]] = m_i
                log_scale[order[i]] = l_i
    lo = n_series
    # integral-branch points still inside the balanced band (nu >~ 32 only)
    # go through the scalar path and its extended-precision fallback
    x_safe = math.pi * nu / 2.0 - _CANCEL_EFOLDS_MAX
    while lo < xs.size and xs[lo] < x_safe:
        m_i, l_i = besselk_imag_scaled(nu, float(xs[lo]))
        mantissa[order[lo]] = m_i
        log_scale[order[lo]] = l_i
        lo += 1
    while lo < xs.size:
        hi = int(np.searchsorted(xs, 2.0 * xs[lo], side="right"))
        chunk = xs[lo:hi]
        val = _trapezoid_chunk(nu, chunk)
        mantissa[order[lo:hi]] = val
        log_scale[order[lo:hi]] = -chunk
        lo = hi
    return mantissa, log_scale


def besselk_imag(nu: float, x: float) -> float:
    """K_{i*nu}(x) for x > 0, real-valued.

    Raises :class:`UnderflowError` when the value is too small for a double
    (use :func:`besselk_imag_scaled` there).
    """
    mantissa, log_scale = besselk_imag_scaled(nu, x)
    if mantissa == 0.0:
        return 0.0
    total = log_scale + math.log(abs(mantissa))
    if total < _LOG_TINY + 2.0:
        raise UnderflowError(
            f"K_(i*{nu})({x}) ~ exp({total:.1f}) underflows; "
            "use besselk_imag_scaled"
        )
    return mantissa * math.exp(log_scale)


def stationary_norm_log(nu: float, p0: float, kappa: float) -> float:
    """log of the eigenfunction normalization sqrt(4*p0/(pi*kappa) * sinh(pi*nu)).

    Evaluated in log space; sinh(pi*nu) overflows a double already for
    nu >~ 225 while the normalized eigenfunction stays O(1).
    """
    if not (p0 > 0 and kappa > 0):
        raise ValueError(f"need p0 > 0 and kappa > 0, got p0={p0}, kappa={kappa}")
    if abs(nu - p0 / kappa) > 1e-9 * max(1.0, abs(nu)):
        raise ValueError(f"inconsistent order: nu={nu} but p0/kappa={p0 / kappa}")
    log_sinh = math.pi * nu + math.log1p(-math.exp(-2.0 * math.pi * nu)) - math.log(2.0)
    return 0.5 * (math.log(4.0 * p0 / (math.pi * kappa)) + log_sinh)


def stationary_norm(nu: float, p0: float, kappa: float) -> float:
    """Eigenfunction normalization as a plain float (overflow-checked)."""
    log_norm = stationary_norm_log(nu, p0, kappa)
    if log_norm > math.log(np.finfo(float).max) - 2.0:
        raise OverflowError(
            f"normalization exp({log_norm:.1f}) overflows; combine "
            "stationary_norm_log with the scaled Bessel evaluation instead"
        )
    return math.exp(log_norm)
