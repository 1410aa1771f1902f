"""Independent numerical oracles used across the test suite.

These deliberately avoid the implementation's evaluation paths: the Bessel
oracle integrates the defining integral with Gauss-Legendre panels in mpmath
(adaptive precision, nodes generated by Newton iteration on the Legendre
polynomial), and the phase oracle uses the closed-form antiderivative of the
enclosed-area integral plus an mpmath trapezoid-refinement cross-check.
"""

from __future__ import annotations

import math

import mpmath as mp

_GL_CACHE: dict[tuple[int, int], tuple[list, list]] = {}


def gauss_legendre_nodes(n: int, dps: int) -> tuple[list, list]:
    """Nodes and weights on [-1, 1] at the requested precision (cached)."""
    key = (n, dps)
    if key in _GL_CACHE:
        return _GL_CACHE[key]
    with mp.workdps(dps + 10):
        xs, ws = [], []
        for i in range(1, n + 1):
            x = mp.cos(mp.pi * (i - mp.mpf(1) / 4) / (n + mp.mpf(1) / 2))
            dp = None
            for _ in range(100):
                p0, p1 = mp.mpf(1), mp.mpf(0)
                for j in range(n):
                    p0, p1 = ((2 * j + 1) * x * p0 - j * p1) / (j + 1), p0
                dp = n * (x * p0 - p1) / (x * x - 1)
                dx = p0 / dp
                x = x - dx
                if abs(dx) < mp.mpf(10) ** (-(dps + 5)):
                    break
            xs.append(x)
            ws.append(2 / ((1 - x * x) * dp * dp))
    _GL_CACHE[key] = (xs, ws)
    return xs, ws


def oracle_dps(nu: float, x: float) -> int:
    """Working precision needed to beat the cos(nu t) cancellation."""
    cancel = max(0.0, math.pi * nu / 2.0 - min(x, math.pi * nu / 2.0))
    return 22 + int(math.ceil(0.4343 * cancel)) + 6


def besselk_imag_oracle(nu: float, x: float, dps: int | None = None):
    """K_{i nu}(x) by Gauss-Legendre panels split at the zeros of cos(nu t).

    Returns an mpf. Precision is chosen from the cancellation estimate unless
    given explicitly.
    """
    if dps is None:
        dps = oracle_dps(nu, x)
    xs, ws = gauss_legendre_nodes(16, dps)
    with mp.workdps(dps):
        nu_mp = mp.mpf(nu)
        x_mp = mp.mpf(x)
        cut = dps * math.log(10) + 25
        tmax = mp.acosh(1 + mp.mpf(cut) / x_mp)
        if nu > 0.5:
            half = mp.pi / nu_mp
            n_panels = int(mp.ceil(tmax / half))
        else:
            n_panels = 12
        h = tmax / n_panels
        total = mp.mpf(0)
        for j in range(n_panels):
            c = (j + mp.mpf(1) / 2) * h
            r = h / 2
            acc = mp.mpf(0)
            for xi, wi in zip(xs, ws):
                t = c + r * xi
                acc += wi * mp.exp(-x_mp * mp.cosh(t)) * mp.cos(nu_mp * t)
            total += acc * r
        return total


def besselk_extended_reference(nu: float, x: float, dps: int = 60):
    """mpmath's own imaginary-order evaluation (second, independent library)."""
    with mp.workdps(dps):
        return mp.besselk(1j * mp.mpf(nu), mp.mpf(x)).real


def phase_closed_form(v_i: float, v_f: float, kappa: float, beta: float) -> float:
    """Closed-form enclosed-area phase for the recoil-free two-path bounce.

    Antiderivative of ln(c^2 - v^2) is v*ln(c^2-v^2) - 2v + c*ln((c+v)/(c-v));
    evaluated between the transfer velocities +-v_t.
    """
    v_t = math.sqrt((v_f ** 2 - beta * v_i ** 2) / (1.0 - beta))

    def area(c: float) -> float:
        return 2.0 * (
            v_t * math.log(c * c - v_t * v_t)
            - 2.0 * v_t
            + c * math.log((c + v_t) / (c - v_t))
        )

    return (area(v_f) - area(v_i) - 2.0 * v_t * math.log(beta)) / (2.0 * kappa)


def phase_trapezoid_oracle(v_i: float, v_f: float, kappa: float, beta: float,
                           dps: int = 30) -> float:
    """Trapezoid-refinement evaluation of the enclosed-area integral."""
    with mp.workdps(dps):
        v_t = mp.sqrt((mp.mpf(v_f) ** 2 - beta * mp.mpf(v_i) ** 2) / (1 - beta))

        def f(v):
            return mp.log(
                (v_f ** 2 - v * v) / (beta * (v_i ** 2 - v * v))
            ) / (2 * kappa)

        prev = None
        n = 64
        total = None
        for _ in range(9):
            h = 2 * v_t / n
            vals = [f(-v_t + i * h) for i in range(n + 1)]
            total = h * (sum(vals) - (vals[0] + vals[-1]) / 2)
            if prev is not None and abs(total - prev) < mp.mpf(10) ** (-9):
                return float(total)
            prev = total
            n *= 2
        return float(total)


def free_gaussian_width(sigma0: float, t: float) -> float:
    """Analytic free-dispersion width (hbar = m = 1)."""
    return sigma0 * math.sqrt(1.0 + (t / (2.0 * sigma0 ** 2)) ** 2)
