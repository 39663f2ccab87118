"""Independent brute-force oracles used across the test suite.

Each oracle recomputes a quantity by the most literal method available
(double loops, sorting, exact summation) without touching the library's
implementation paths.
"""

from __future__ import annotations

import math

import numpy as np


def cwt_direct(x, scales, omega0: float = 6.0, dt: float = 1.0) -> np.ndarray:
    """Direct double-sum CWT: W[j, tau] = sum_t x_t sqrt(dt/s) conj(psi((t-tau)dt/s))."""
    x = np.asarray(x, dtype=np.float64)
    n = len(x)
    xd = x - x.mean()
    t_idx = np.arange(n)
    out = np.zeros((len(scales), n), dtype=complex)
    for j, s in enumerate(scales):
        weight = math.sqrt(dt / s)
        for tau in range(n):
            eta = (t_idx - tau) * dt / s
            psi = math.pi**-0.25 * np.exp(1j * omega0 * eta) * np.exp(-0.5 * eta * eta)
            out[j, tau] = np.sum(xd * weight * np.conj(psi))
    return out


def sorted_quantile(values, q: float) -> float:
    """Sort-and-interpolate quantile at position (n-1)*q."""
    xs = sorted(float(v) for v in values)
    h = (len(xs) - 1) * q
    lo = math.floor(h)
    frac = h - lo
    if frac == 0.0 or lo + 1 >= len(xs):
        return xs[lo]
    return xs[lo] + frac * (xs[lo + 1] - xs[lo])


def rmse_brute(pred, actual) -> float:
    total = math.fsum((float(p) - float(a)) ** 2 for p, a in zip(pred, actual))
    return math.sqrt(total / len(pred))


def mae_brute(pred, actual) -> float:
    return math.fsum(abs(float(p) - float(a)) for p, a in zip(pred, actual)) / len(pred)


def mape_brute(pred, actual) -> float:
    total = math.fsum(abs(float(p) - float(a)) / abs(float(a)) for p, a in zip(pred, actual))
    return 100.0 * total / len(pred)


def ar1_series(phi: float, n: int, rng: np.random.Generator, sigma: float = 1.0) -> np.ndarray:
    """Stationary AR(1) draw used to build test inputs."""
    z = rng.standard_normal(n)
    out = np.empty(n)
    prev = sigma / math.sqrt(1.0 - phi * phi) * z[0]
    out[0] = prev
    for t in range(1, n):
        prev = phi * prev + sigma * z[t]
        out[t] = prev
    return out
