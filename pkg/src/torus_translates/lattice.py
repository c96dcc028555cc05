"""Sums of an even profile over residue classes of the integers.

Sampling a series ``sum_j b(j) e^{ijx}`` on the grid ``2*pi*s/M`` only needs
the folded sums ``S[rho] = sum_{j = rho mod M} b(j)``.  For slowly decaying
profiles (power laws) the classes are summed directly up to a cutover and
closed with the Euler-Maclaurin formula beyond it, so truncations of
``10^10`` terms or the full infinite series cost the same as a few
million terms.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.integrate import quad

__all__ = ["progression_sums"]

Fn = Callable[[np.ndarray], np.ndarray]

_CHUNK = 1 << 22
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _direct(fn: Fn, lo: int, hi: int, modulus: int) -> np.ndarray:
    out = np.zeros(modulus)
    start = lo
    while start <= hi:
        stop = min(hi, start + _CHUNK - 1)
        j = np.arange(start, stop + 1, dtype=np.int64)
        out += np.bincount(j % modulus, weights=fn(j.astype(float)), minlength=modulus)
        start = stop + 1
    return out


def _gauss(fn: Fn, a: np.ndarray, b: float | np.ndarray) -> np.ndarray:
    """Vectorised 16-point Gauss-Legendre ``int_a^b fn`` per entry."""
    a = np.asarray(a, dtype=float)
    b = np.broadcast_to(np.asarray(b, dtype=float), a.shape)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = mid[:, None] + half[:, None] * _GL_X[None, :]
    return half * (fn(nodes) @ _GL_W)


def _log_quad(fn: Fn, a: float, b: float) -> float:
    def integrand(u):
        x = math.exp(u)
        return float(fn(np.array(x))) * x

    # exp(700) is near the float ceiling; beyond it integrable tails are negligible.
    upper = 700.0 if math.isinf(b) else min(math.log(b), 700.0)
    val, _ = quad(integrand, math.log(a), upper, epsabs=0, epsrel=1e-13, limit=500)
    return val


def _positive_sums(fn: Fn, dfn: Fn, modulus: int, lo: int, hi: float, cutover: int) -> np.ndarray:
    """``sum_{lo <= j <= hi, j = rho mod M} fn(j)`` over positive ``j``."""
    m = modulus
    span = max(cutover, 32 * m)
    direct_end = max(lo - 1, span) + 4 * m
    if not math.isinf(hi) and hi - direct_end < 64 * m:
        direct_end = int(hi)
    if math.isinf(hi):
        direct_end = max(direct_end, lo)
    out = _direct(fn, lo, int(min(direct_end, hi)), m)
    if direct_end >= hi:
        return out
    first = float(fn(np.array(float(direct_end + 1))))
    if first == 0.0:
        return out

    rho = np.arange(m, dtype=np.int64)
    a = direct_end + 1 + (rho - (direct_end + 1)) % m
    anchor = float(direct_end + 1 + m)
    ha = fn(a.astype(float))
    dha = m * dfn(a.astype(float))
    head = _gauss(fn, a.astype(float), anchor)
    if math.isinf(hi):
        integral = head + _log_quad(fn, anchor, math.inf)
        em = integral / m + ha / 2 - dha / 12
        return out + em
    hi_int = int(hi)
    b = hi_int - (hi_int - rho) % m
    back = float(hi_int - m)
    hb = fn(b.astype(float))
    dhb = m * dfn(b.astype(float))
    integral = head + _log_quad(fn, anchor, back) + _gauss(fn, np.full(m, back), b.astype(float))
    em = integral / m + (ha + hb) / 2 + (dhb - dha) / 12
    return out + em


def progression_sums(
    fn: Fn,
    dfn: Fn,
    modulus: int,
    lo: int = 0,
    hi: float = math.inf,
    cutover: int = 1 << 16,
) -> np.ndarray:
    """Residue-class sums of an even function over ``lo <= |j| <= hi``.

    Parameters
    ----------
    fn, dfn : callable
        Even profile and its derivative, vectorised.  ``fn`` must be smooth
        and integrable on ``[cutover, inf)``.
    modulus : int
        Number of residue classes ``M``.
    lo, hi : int
        Range of ``|j|``; ``hi`` may be ``math.inf``.
    cutover : int
        Terms with ``|j|`` below ``max(cutover, 32 M)`` are always summed
        directly; beyond it Euler-Maclaurin (through the first derivative
        correction) closes each class.

    Returns
    -------
    ndarray
        ``S`` of length ``M`` with ``S[rho]`` the sum over ``j = rho mod M``.
    """
    m = int(modulus)
    if m < 1:
        raise ValueError("modulus must be positive")
    lo = int(lo)
    if lo < 0 or hi < lo:
        raise ValueError(f"invalid range lo={lo}, hi={hi}")
    pos = _positive_sums(fn, dfn, m, max(lo, 1), hi, cutover) if hi >= 1 else np.zeros(m)
    total = pos + pos[(-np.arange(m)) % m]
    if lo == 0:
        total[0] += float(fn(np.array(0.0)))
    return total
