"""Univariate symbols: generator profiles, the cutoff bump and tail functionals.

A :class:`Symbol` is an even real function of a real variable together with
its first two derivatives.  Symbols play three roles: the multiplier
``lambda`` defining the convolution class, the generator profile ``beta``
whose Fourier series gives the translated function, and the smooth cutoff
``theta``.  All callables are vectorised over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

__all__ = [
    "Symbol",
    "SmoothFactor",
    "DecreasingFactor",
    "constant_factor",
    "oscillating_factor",
    "rational_factor",
    "make_korobov",
    "make_mask",
    "make_exponent",
    "make_theta",
    "ratio",
    "smoothstep",
    "THETA_D2_SUP",
    "J_m",
    "epsilon_m",
    "monotone_constant",
]

Fn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class Symbol:
    """An even, twice differentiable function with analytic derivatives.

    Attributes
    ----------
    value, d1, d2 : callable
        The function and its first and second derivatives.
    kind : str
        One of ``"mask"``, ``"exponent"``, ``"cutoff"``, ``"ratio"``,
        ``"custom"``.
    params : dict
        Kind parameters (``r``, ``kappa``, ``s``, factor names, ...).
    nonzero_everywhere : bool
        Required when the symbol is used as ``lambda`` or ``beta``.
    envelope : callable, optional
        Nonincreasing majorant of ``|value|`` for ``t >= 1``; used for tail
        certificates of lattice sums.
    """

    value: Fn
    d1: Fn
    d2: Fn
    kind: str
    params: dict = field(default_factory=dict)
    nonzero_everywhere: bool = True
    envelope: Fn | None = None

    def __call__(self, t):
        return self.value(np.asarray(t, dtype=float))

    def describe(self) -> str:
        inner = " ".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.kind} {inner}".strip()


# -- smooth factors -------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SmoothFactor:
    """A factor ``F`` for masks with ``|F^(k)| <= bound`` (k = 0, 1, 2)."""

    name: str
    value: Fn
    d1: Fn
    d2: Fn
    bound: float
    params: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class DecreasingFactor:
    """A positive nonincreasing factor ``F`` on ``[0, inf)`` for exponent symbols."""

    name: str
    value: Fn
    d1: Fn
    d2: Fn
    params: dict = field(default_factory=dict)


def constant_factor(c: float = 1.0) -> SmoothFactor:
    c = float(c)
    zero = lambda u: np.zeros_like(np.asarray(u, dtype=float))  # noqa: E731
    return SmoothFactor(
        "constant",
        lambda u: np.full_like(np.asarray(u, dtype=float), c),
        zero,
        zero,
        abs(c),
        {"c": c},
    )


def oscillating_factor(amp: float = 0.5, freq: float = 1.0) -> SmoothFactor:
    """``F(u) = 1 + amp*cos(freq*u)``; positive for ``amp < 1``."""
    return SmoothFactor(
        "oscillating",
        lambda u: 1 + amp * np.cos(freq * np.asarray(u, dtype=float)),
        lambda u: -amp * freq * np.sin(freq * np.asarray(u, dtype=float)),
        lambda u: -amp * freq**2 * np.cos(freq * np.asarray(u, dtype=float)),
        1 + abs(amp) * max(1.0, abs(freq), freq**2),
        {"amp": amp, "freq": freq},
    )


def rational_factor(q: float = 1.0) -> DecreasingFactor:
    """``F(t) = (1 + t)^(-q)``."""
    return DecreasingFactor(
        "rational",
        lambda t: (1 + np.asarray(t, dtype=float)) ** (-q),
        lambda t: -q * (1 + np.asarray(t, dtype=float)) ** (-q - 1),
        lambda t: q * (q + 1) * (1 + np.asarray(t, dtype=float)) ** (-q - 2),
        {"q": q},
    )


def _unit_decreasing() -> DecreasingFactor:
    one = lambda t: np.ones_like(np.asarray(t, dtype=float))  # noqa: E731
    zero = lambda t: np.zeros_like(np.asarray(t, dtype=float))  # noqa: E731
    return DecreasingFactor("constant", one, zero, zero, {"c": 1.0})


# -- constructors ---------------------------------------------------------


def _even(core, core_d1, core_d2):
    def value(t):
        return core(np.abs(np.asarray(t, dtype=float)))

    def d1(t):
        t = np.asarray(t, dtype=float)
        return np.sign(t) * core_d1(np.abs(t))

    def d2(t):
        return core_d2(np.abs(np.asarray(t, dtype=float)))

    return value, d1, d2


def make_korobov(r: float) -> Symbol:
    """``|t|^(-r)`` for ``t != 0`` and 1 at the origin."""
    r = float(r)
    if not r > 1:
        raise ValueError(f"Korobov exponent must exceed 1, got {r}")

    def core(a):
        with np.errstate(divide="ignore"):
            return np.where(a > 0, np.power(np.where(a > 0, a, 1.0), -r), 1.0)

    def core_d1(a):
        safe = np.where(a > 0, a, 1.0)
        return np.where(a > 0, -r * safe ** (-r - 1), 0.0)

    def core_d2(a):
        safe = np.where(a > 0, a, 1.0)
        return np.where(a > 0, r * (r + 1) * safe ** (-r - 2), 0.0)

    value, d1, d2 = _even(core, core_d1, core_d2)
    return Symbol(
        value,
        d1,
        d2,
        "mask",
        {"r": r, "kappa": 0.0, "F": "constant", "core": "power"},
        envelope=lambda t: np.asarray(t, dtype=float) ** (-r),
    )


def _mask_tail(r, kappa, factor):
    """Mask profile and derivatives for ``t >= 1``."""

    def value(t):
        ell = np.log(t + 1)
        return t ** (-r) * ell ** (-kappa) * factor.value(np.log(t))

    def d1(t):
        ell = np.log(t + 1)
        a, da = t ** (-r), -r * t ** (-r - 1)
        b, db = ell ** (-kappa), -kappa * ell ** (-kappa - 1) / (t + 1)
        u = np.log(t)
        c, dc = factor.value(u), factor.d1(u) / t
        return da * b * c + a * db * c + a * b * dc

    def d2(t):
        ell = np.log(t + 1)
        a = t ** (-r)
        da = -r * t ** (-r - 1)
        dda = r * (r + 1) * t ** (-r - 2)
        b = ell ** (-kappa)
        db = -kappa * ell ** (-kappa - 1) / (t + 1)
        ddb = (kappa * (kappa + 1) * ell ** (-kappa - 2) + kappa * ell ** (-kappa - 1)) / (
            t + 1
        ) ** 2
        u = np.log(t)
        c = factor.value(u)
        dc = factor.d1(u) / t
        ddc = (factor.d2(u) - factor.d1(u)) / t**2
        return dda * b * c + a * ddb * c + a * b * ddc + 2 * (da * db * c + da * b * dc + a * db * dc)

    return value, d1, d2


def _check_smooth_factor(factor: SmoothFactor) -> None:
    if not math.isfinite(factor.bound):
        raise ValueError("mask factor must declare a finite bound")
    u = np.linspace(0.0, 60.0, 6001)
    for fn in (factor.value, factor.d1, factor.d2):
        if np.max(np.abs(fn(u))) > factor.bound * (1 + 1e-12):
            raise ValueError(f"factor {factor.name!r} exceeds its declared bound {factor.bound}")


def make_mask(r: float, kappa: float = 0.0, factor: SmoothFactor | None = None) -> Symbol:
    """Mask of type ``(r, kappa)``: ``|t|^-r (log(|t|+1))^-kappa F(log|t|)`` for ``|t| >= 1``.

    On ``|t| < 1`` the profile is continued by the even quartic
    ``a + b t^2 + c t^4`` that matches value, slope and curvature at
    ``|t| = 1``, which keeps the symbol twice continuously differentiable.
    """
    r, kappa = float(r), float(kappa)
    if not r > 1:
        raise ValueError(f"mask exponent must exceed 1, got {r}")
    factor = factor or constant_factor(1.0)
    _check_smooth_factor(factor)
    tv, td1, td2 = _mask_tail(r, kappa, factor)
    one = np.array(1.0)
    h0, h1, h2 = float(tv(one)), float(td1(one)), float(td2(one))
    c4 = (h2 - h1) / 8
    c2 = (h1 - 4 * c4) / 2
    c0 = h0 - c2 - c4

    def core(a):
        inner = a < 1
        safe, small = np.where(inner, 1.0, a), np.where(inner, a, 0.0)
        return np.where(inner, c0 + c2 * small**2 + c4 * small**4, tv(safe))

    def core_d1(a):
        inner = a < 1
        safe, small = np.where(inner, 1.0, a), np.where(inner, a, 0.0)
        return np.where(inner, 2 * c2 * small + 4 * c4 * small**3, td1(safe))

    def core_d2(a):
        inner = a < 1
        safe, small = np.where(inner, 1.0, a), np.where(inner, a, 0.0)
        return np.where(inner, 2 * c2 + 12 * c4 * small**2, td2(safe))

    value, d1, d2 = _even(core, core_d1, core_d2)
    probe = np.linspace(0.0, 1.0, 2001)
    quartic = c0 + c2 * probe**2 + c4 * probe**4
    nonzero = bool(np.all(quartic > 0) or np.all(quartic < 0))
    a1 = factor.bound

    def envelope(t):
        t = np.asarray(t, dtype=float)
        return a1 * t ** (-r) * np.log(t + 1) ** (-kappa)

    return Symbol(
        value,
        d1,
        d2,
        "mask",
        {"r": r, "kappa": kappa, "F": factor.name, **factor.params},
        nonzero_everywhere=nonzero,
        envelope=envelope,
    )


def make_exponent(s: float, factor: DecreasingFactor | None = None) -> Symbol:
    """Exponent-type symbol ``exp(-s|t|) F(|t|)`` with ``F`` positive and nonincreasing."""
    s = float(s)
    if not s > 0:
        raise ValueError(f"exponent rate must be positive, got {s}")
    factor = factor or _unit_decreasing()
    probe = np.linspace(0.0, 200.0, 20001)
    fv = factor.value(probe)
    if np.any(fv <= 0) or np.any(np.diff(fv) > 1e-15 * np.abs(fv[:-1])):
        raise ValueError(f"factor {factor.name!r} must be positive and nonincreasing")

    def core(a):
        return np.exp(-s * a) * factor.value(a)

    def core_d1(a):
        return np.exp(-s * a) * (factor.d1(a) - s * factor.value(a))

    def core_d2(a):
        return np.exp(-s * a) * (factor.d2(a) - 2 * s * factor.d1(a) + s**2 * factor.value(a))

    value, d1, d2 = _even(core, core_d1, core_d2)
    f0 = float(factor.value(np.array(0.0)))
    return Symbol(
        value,
        d1,
        d2,
        "exponent",
        {"s": s, "F": factor.name, **factor.params},
        envelope=lambda t: f0 * np.exp(-s * np.asarray(t, dtype=float)),
    )


def smoothstep(u):
    """Quintic ``6u^5 - 15u^4 + 10u^3`` with vanishing first and second derivatives at 0 and 1."""
    u = np.asarray(u, dtype=float)
    return u**3 * (10 - 15 * u + 6 * u**2)


def _smoothstep_d1(u):
    return 30 * u**2 * (1 - u) ** 2


def _smoothstep_d2(u):
    return 60 * u * (1 - u) * (1 - 2 * u)


def make_theta() -> Symbol:
    """C^2 cutoff: 1 on ``|x| <= 1/2``, 0 on ``|x| >= 1``, quintic blend between."""

    def core(a):
        u = np.clip(2 * a - 1, 0.0, 1.0)
        return 1 - smoothstep(u)

    def core_d1(a):
        u = np.clip(2 * a - 1, 0.0, 1.0)
        return -2 * _smoothstep_d1(u)

    def core_d2(a):
        u = np.clip(2 * a - 1, 0.0, 1.0)
        return -4 * _smoothstep_d2(u)

    value, d1, d2 = _even(core, core_d1, core_d2)
    return Symbol(value, d1, d2, "cutoff", {}, nonzero_everywhere=False)


# max |S''| on [0, 1] is attained at u = (3 -+ sqrt 3) / 6.
THETA_D2_SUP = 4 * abs(float(_smoothstep_d2((3 - math.sqrt(3)) / 6)))


def ratio(numerator: Symbol, denominator: Symbol) -> Symbol:
    """``G = lambda / beta`` with quotient-rule derivatives."""
    if not denominator.nonzero_everywhere:
        raise ValueError("denominator symbol must be nonzero everywhere")
    if numerator is denominator:
        one = lambda t: np.ones_like(np.asarray(t, dtype=float))  # noqa: E731
        zero = lambda t: np.zeros_like(np.asarray(t, dtype=float))  # noqa: E731
        return Symbol(one, zero, zero, "ratio", {"identity": True})
    lam, bet = numerator, denominator

    # Recursive form divides by beta once per step, so exp-small beta does not underflow.
    def value(t):
        return lam.value(t) / bet.value(t)

    def d1(t):
        return (lam.d1(t) - bet.d1(t) * value(t)) / bet.value(t)

    def d2(t):
        return (lam.d2(t) - 2 * bet.d1(t) * d1(t) - bet.d2(t) * value(t)) / bet.value(t)

    return Symbol(
        value,
        d1,
        d2,
        "ratio",
        {"numerator": lam.describe(), "denominator": bet.describe()},
        nonzero_everywhere=lam.nonzero_everywhere,
    )


# -- tail functionals -----------------------------------------------------


def _integrand(psi: Symbol, m: float):
    def fn(x):
        x = np.asarray(x, dtype=float)
        return np.abs(psi.value(x)) / m + np.abs(x * psi.d2(x))

    return fn


def _tail_estimate(psi: Symbol, integrand, x: float) -> float:
    """Bound on ``int_x^inf integrand`` from the decay law of the kind."""
    if psi.kind == "mask":
        r = psi.params["r"]
        kappa = psi.params.get("kappa", 0.0)
        slack = 2.0 if kappa >= 0 else 2.0 * (1 + abs(kappa))
        return slack * x * float(integrand(x)) / (r - 1)
    if psi.kind == "exponent":
        s = psi.params["s"]
        return 2.0 * float(integrand(x)) / s
    raise ValueError(f"no tail law for symbol kind {psi.kind!r}; pass an explicit upper limit")


def J_m(psi: Symbol, m: int, tail_tol: float = 1e-13, upper: float | None = None) -> float:
    """``int_{|x| >= m} (|psi(x)/m| + |x psi''(x)|) dx``.

    The integral over ``[m, X]`` is doubled for symmetry.  ``X`` doubles
    until the tail law of the symbol's kind certifies the dropped part is
    below ``tail_tol``; custom kinds need ``upper``.
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    m = float(m)
    integrand = _integrand(psi, m)
    if upper is None:
        upper = 2 * m
        while _tail_estimate(psi, integrand, upper) >= tail_tol / 2:
            upper *= 2
            if upper > 1e300:
                raise ValueError("tail does not fall below tail_tol")
    if psi.kind == "exponent":
        part, _ = quad(integrand, m, upper, epsabs=0, epsrel=1e-11, limit=500)
    else:
        # Power-law integrands are smooth and slowly decaying in log x.
        part, _ = quad(
            lambda u: float(integrand(math.exp(u))) * math.exp(u),
            math.log(m),
            math.log(upper),
            epsabs=0,
            epsrel=1e-11,
            limit=500,
        )
    return 2 * part


def epsilon_m(lam: Symbol, beta: Symbol, m: int, tail_tol: float = 1e-13) -> float:
    """``J_m(lambda) + (sup|G| + m^2 sup|G''|) J_m(beta)`` with sups over ``[-m, m]``."""
    G = ratio(lam, beta)
    xs = np.linspace(-m, m, 64 * m + 1)
    sup_g = float(np.max(np.abs(G.value(xs))))
    sup_g2 = float(np.max(np.abs(G.d2(xs))))
    return J_m(lam, m, tail_tol) + (sup_g + m**2 * sup_g2) * J_m(beta, m, tail_tol)


def monotone_constant(psi: Symbol, t_max: float = 1e4, samples: int = 400) -> float:
    """Sampled estimate of the largest ``c0`` with ``|psi(x)| >= c0 |psi(y)|`` and
    ``|psi''(x)| >= c0 |psi''(y)|`` whenever ``|y|/2 <= |x| <= 2|y|``.

    Only ``|x|, |y| >= 1`` are probed.  A result bounded away from zero is
    evidence (not proof) of monotone type.
    """
    ys = np.geomspace(1.0, t_max, samples)
    ratios = np.geomspace(0.5, 2.0, 33)
    xs = ys[:, None] * ratios[None, :]
    worst = np.inf
    for fn in (psi.value, psi.d2):
        num = np.abs(fn(xs))
        den = np.abs(fn(ys))[:, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(den > 0, num / den, np.inf)
        worst = min(worst, float(np.min(q)))
    return worst
