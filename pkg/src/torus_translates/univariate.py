"""Approximation on the circle by 2m+1 equispaced translates of one generator.

For ``f = phi_lambda * g`` the operator

    Q_{m,beta}(f) = (2m+1)^{-1} sum_k V_m(g)(x_k) phi_beta(. - x_k),
    x_k = 2*pi*k / (2m+1),

uses the smoothed samples ``V_m(g) = H_m * g`` with kernel coefficients
``theta(k/m) lambda(k) / beta(k)``.  Its Fourier coefficients are known in
closed form: ``gamma(k) g^(k_m)`` with ``k_m`` the residue of ``k`` in
``[-m, m]`` modulo ``2m+1`` and ``gamma(k) = theta(k_m/m) G(k_m) beta(k)``.
That identity gives an oracle independent of the translate sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .lattice import progression_sums
from .spectral import GridSamples, SpectralCoefficients, fold, lp_norm, sample
from .symbols import Symbol, ratio

__all__ = [
    "HLambdaFunction",
    "TranslateApproximant",
    "build_Hm",
    "nearest_residue",
    "apply_Vm",
    "truncation_for",
    "assemble_Q",
    "phi_truncated",
    "eval_approximant",
    "sample_approximant",
    "spectral_oracle_Q",
    "sample_spectral_Q",
    "sigma_m",
    "approx_error",
    "dumps_approximant",
    "loads_approximant",
]

DIRECT_LIMIT = 1 << 22


@dataclass(frozen=True, eq=False)
class HLambdaFunction:
    """``f = phi_lambda * g``: the generator ``g`` plus the class symbol ``lambda``.

    The class norm of ``f`` is ``||g||_p``.
    """

    g: SpectralCoefficients
    lam: Symbol
    f: SpectralCoefficients = field(init=False)

    def __post_init__(self) -> None:
        weights = _tensor_symbol(self.lam, self.g)
        object.__setattr__(self, "f", SpectralCoefficients(weights * self.g.array))

    def norm(self, p: float) -> float:
        return lp_norm(self.g, p)


def _tensor_symbol(lam: Symbol, c: SpectralCoefficients) -> np.ndarray:
    out = np.ones(c.array.shape)
    for axis in range(c.dim):
        shape = [1] * c.dim
        shape[axis] = -1
        out = out * lam(c.frequencies(axis).astype(float)).reshape(shape)
    return out


def nearest_residue(k, m: int):
    """Residue of ``k`` modulo ``2m+1`` taken in ``[-m, m]``."""
    return (np.asarray(k) + m) % (2 * m + 1) - m if np.ndim(k) else (int(k) + m) % (2 * m + 1) - m


def _check_1d(c: SpectralCoefficients) -> None:
    if c.dim != 1:
        raise ValueError("univariate operators need 1-dimensional coefficients")


def _multiplier(lam: Symbol, beta: Symbol, theta: Symbol, m: int, k: np.ndarray) -> np.ndarray:
    """``theta(k/m) G(k)``, exactly zero where the cutoff vanishes."""
    k = np.asarray(k, dtype=float)
    cut = theta(k / m)
    out = np.zeros_like(k)
    live = cut != 0
    out[live] = cut[live] * ratio(lam, beta).value(k[live])
    return out


def build_Hm(lam: Symbol, beta: Symbol, theta: Symbol, m: int) -> SpectralCoefficients:
    """Kernel ``H_m`` with coefficients ``theta(k/m) lambda(k)/beta(k)``, ``|k| <= m-1``."""
    if m < 1:
        raise ValueError("m must be a positive integer")
    k = np.arange(-(m - 1), m)
    if np.any(beta(k.astype(float)) == 0):
        raise ValueError("beta vanishes at an integer")
    return SpectralCoefficients(_multiplier(lam, beta, theta, m, k).astype(complex))


def apply_Vm(F: HLambdaFunction, beta: Symbol, theta: Symbol, m: int) -> SpectralCoefficients:
    """``V_m(g) = H_m * g``."""
    _check_1d(F.g)
    bound = min(m - 1, F.g.bound[0])
    g = F.g.resized(bound)
    k = g.frequencies()
    return SpectralCoefficients(_multiplier(F.lam, beta, theta, m, k) * g.array)


def sigma_m(h, f: SpectralCoefficients, m: int) -> SpectralCoefficients:
    """Fourier multiplier with profile ``h(k/m)``, applied along every axis."""
    out = np.ones(f.array.shape)
    for axis in range(f.dim):
        shape = [1] * f.dim
        shape[axis] = -1
        out = out * np.asarray(h(f.frequencies(axis) / m), dtype=float).reshape(shape)
    return SpectralCoefficients(out * f.array)


# -- generator truncation -------------------------------------------------


def _tail_certificate(beta: Symbol, n: float) -> float:
    """Upper bound for ``sum_{|j| > n} |beta(j)|``."""
    if beta.kind == "exponent":
        s = beta.params["s"]
        f0 = float(beta.envelope(np.array(0.0)))
        return 2 * f0 * math.exp(-s * (n + 1)) / (1 - math.exp(-s))
    if beta.kind == "mask":
        r = beta.params["r"]
        kappa = beta.params.get("kappa", 0.0)
        if beta.params.get("core") == "power" or (kappa == 0 and beta.params.get("F") == "constant"):
            return 2 * n ** (1 - r) / (r - 1)
        env = beta.envelope
        val, _ = quad(
            lambda u: float(env(np.array(math.exp(u)))) * math.exp(u),
            math.log(n),
            700.0,
            epsabs=0,
            epsrel=1e-10,
            limit=500,
        )
        return 2 * val
    raise ValueError(f"no tail certificate for symbol kind {beta.kind!r}")


def truncation_for(beta: Symbol, tail_tol: float) -> tuple[int, float]:
    """Smallest practical ``N`` with ``sum_{|j|>N} |beta(j)| < tail_tol``; returns ``(N, bound)``."""
    if not tail_tol > 0:
        raise ValueError("tail_tol must be positive")
    if beta.kind == "mask" and beta.params["r"] <= 1:
        raise ValueError("beta coefficients are not summable (r <= 1)")
    if beta.kind == "exponent":
        s = beta.params["s"]
        f0 = float(beta.envelope(np.array(0.0)))
        n = math.ceil((math.log(f0 / tail_tol) + math.log(2) - math.log(1 - math.exp(-s))) / s)
        n = max(n, 1)
        return n, _tail_certificate(beta, n)
    if beta.kind == "mask":
        r = beta.params["r"]
        try:
            n = max(1, math.ceil((2 / ((r - 1) * tail_tol)) ** (1 / (r - 1))))
        except OverflowError:
            raise ValueError(f"truncation too large for tail_tol={tail_tol}") from None
        if _tail_certificate(beta, n) >= tail_tol:
            lo, hi = n, 2 * n
            while _tail_certificate(beta, hi) >= tail_tol:
                lo, hi = hi, 2 * hi
            while hi - lo > max(1, lo // 1000):
                mid = (lo + hi) // 2
                lo, hi = (lo, mid) if _tail_certificate(beta, mid) < tail_tol else (mid, hi)
            n = hi
        if n > 2**53:
            raise ValueError(f"truncation {n} too large for tail_tol={tail_tol}")
        return n, _tail_certificate(beta, n)
    raise ValueError(f"no truncation rule for symbol kind {beta.kind!r}")


@dataclass(frozen=True, eq=False)
class TranslateApproximant:
    """``sum_k weights[k] phi_beta^(N)(x - 2*pi*k/(2m+1))``.

    Centres are derived from ``m`` and never stored.  ``tail_bound``
    certifies ``sum_{|j| > N} |beta(j)|``.
    """

    generator: Symbol
    m: int
    weights: np.ndarray
    truncation: int
    tail_bound: float

    def __post_init__(self) -> None:
        w = np.array(self.weights, dtype=float)
        if w.shape != (2 * self.m + 1,):
            raise ValueError(f"expected {2 * self.m + 1} weights, got {w.shape}")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def centers(self) -> np.ndarray:
        n = 2 * self.m + 1
        return 2 * np.pi * np.arange(n) / n


def assemble_Q(
    F: HLambdaFunction,
    beta: Symbol,
    theta: Symbol,
    m: int,
    tail_tol: float = 1e-10,
    truncation: int | None = None,
) -> TranslateApproximant:
    """Weights ``V_m(g)(x_k) / (2m+1)`` of ``Q_{m,beta}(f)``.

    The generator truncation comes from ``tail_tol`` unless given explicitly.
    """
    if m < 1:
        raise ValueError("m must be a positive integer")
    if truncation is None:
        n, bound = truncation_for(beta, tail_tol)
    else:
        n = int(truncation)
        bound = _tail_certificate(beta, n)
    v = apply_Vm(F, beta, theta, m)
    samples = sample(v, 2 * m + 1).values
    return TranslateApproximant(beta, m, samples / (2 * m + 1), n, bound)


def phi_truncated(beta: Symbol, n: int, y) -> np.ndarray:
    """``sum_{|j| <= n} beta(j) e^{ijy}`` summed directly (``n <= 2**22``)."""
    if n > DIRECT_LIMIT:
        raise ValueError(f"truncation {n} too large for pointwise sums; use sample_approximant")
    y = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.full(y.shape, float(beta(0.0)))
    chunk = max(1, (1 << 22) // max(1, y.size))
    for start in range(1, n + 1, chunk):
        j = np.arange(start, min(n, start + chunk - 1) + 1, dtype=float)
        out += 2 * np.cos(np.multiply.outer(y, j)) @ beta(j)
    return out


def eval_approximant(A: TranslateApproximant, x) -> float | np.ndarray:
    """``sum_k c_k phi_beta^(N)(x - x_k)`` at arbitrary points, by direct summation."""
    scalar = np.ndim(x) == 0
    pts = np.atleast_1d(np.asarray(x, dtype=float))
    diffs = pts[:, None] - A.centers[None, :]
    vals = phi_truncated(A.generator, A.truncation, diffs.ravel()).reshape(diffs.shape)
    out = vals @ A.weights
    return float(out[0]) if scalar else out


def _phi_grid(beta: Symbol, n: float, points: int) -> np.ndarray:
    sums = progression_sums(beta.value, beta.d1, points, 0, n)
    return (np.fft.ifft(sums) * points).real


def sample_approximant(A: TranslateApproximant, points: int) -> GridSamples:
    """Translate sum on the grid ``2*pi*s/points`` for any truncation ``N``.

    ``phi_beta^(N)`` is sampled on the common refinement of the evaluation
    grid and the centre lattice; the sum over translates is then a gather.
    """
    n_c = 2 * A.m + 1
    fine = points * n_c // math.gcd(points, n_c)
    phi = _phi_grid(A.generator, A.truncation, fine)
    s = np.arange(points)[:, None] * (fine // points)
    k = np.arange(n_c)[None, :] * (fine // n_c)
    values = phi[(s - k) % fine] @ A.weights
    return GridSamples(1, points, values)


# -- spectral oracle --------------------------------------------------------


def _residue_weights(F: HLambdaFunction, beta: Symbol, theta: Symbol, m: int) -> np.ndarray:
    """``theta(a/m) G(a) g^(a)`` for ``a = -m..m`` (index ``a + m``)."""
    a = np.arange(-m, m + 1)
    g = F.g.resized(max(m, F.g.bound[0]))
    n = g.bound[0]
    ghat = g.array[a + n]
    return _multiplier(F.lam, beta, theta, m, a) * ghat


def spectral_oracle_Q(
    F: HLambdaFunction, beta: Symbol, theta: Symbol, m: int, J_max: int
) -> SpectralCoefficients:
    """Coefficients ``gamma(k) g^(k_m)`` of ``Q_{m,beta}(f)`` on alias blocks ``|j| <= J_max``.

    Block ``j`` holds ``k = j(2m+1) + a`` with ``a`` in ``[-m, m]``; the
    result covers ``|k| <= J_max (2m+1) + m``.
    """
    _check_1d(F.g)
    if J_max < 0:
        raise ValueError("J_max must be nonnegative")
    bound = J_max * (2 * m + 1) + m
    k = np.arange(-bound, bound + 1)
    res = nearest_residue(k, m)
    coeffs = _residue_weights(F, beta, theta, m)[res + m] * beta(k.astype(float))
    return SpectralCoefficients(coeffs)


def sample_spectral_Q(
    F: HLambdaFunction,
    beta: Symbol,
    theta: Symbol,
    m: int,
    points: int,
    truncation: float = math.inf,
) -> GridSamples:
    """Oracle series ``sum_{|k| <= N} gamma(k) g^(k_m) e^{ikx}`` on a grid.

    Works for ``N`` up to infinity: the frequencies are folded residue by
    residue with lattice sums of ``beta``.
    """
    _check_1d(F.g)
    n_c = 2 * m + 1
    fine = points * n_c // math.gcd(points, n_c)
    sums = progression_sums(beta.value, beta.d1, fine, 0, truncation)
    rho = np.arange(fine)
    folded = _residue_weights(F, beta, theta, m)[nearest_residue(rho, m) + m] * sums
    values = (np.fft.ifft(folded) * fine).real
    return GridSamples(1, points, values[:: fine // points])


def approx_error(
    F: HLambdaFunction,
    beta: Symbol,
    theta: Symbol,
    m: int,
    p: float,
    points: int | None = None,
) -> float:
    """``||f - Q_{m,beta}(f)||_p`` for the untruncated operator.

    ``p = 2`` is exact: the central blocks are summed explicitly and the
    alias tail of every residue class is closed with lattice sums of
    ``beta^2``.  Other ``p`` sample ``f - Q`` on a grid that contains the
    centres (where the error has its kinks), has at least 256 points per
    centre and is at least 16 times finer than ``f``.
    """
    _check_1d(F.g)
    p = float(p)
    n_c = 2 * m + 1
    deg = F.g.bound[0]
    if not np.any(F.g.array):
        return 0.0
    if p == 2:
        reach = max(deg, m)
        blocks = -(-(reach - m) // n_c) + 1
        central = blocks * n_c + m
        q = spectral_oracle_Q(F, beta, theta, m, blocks)
        err = F.f.resized(central).array - q.array
        inner = float(np.sum(np.abs(err) ** 2))
        sq = lambda t: beta.value(t) ** 2  # noqa: E731
        dsq = lambda t: 2 * beta.value(t) * beta.d1(t)  # noqa: E731
        tails = progression_sums(sq, dsq, n_c, central + 1, math.inf)
        a = np.arange(-m, m + 1)
        outer = float(np.sum(np.abs(_residue_weights(F, beta, theta, m)) ** 2 * tails[a % n_c]))
        return math.sqrt(inner + outer)
    if points is None:
        points = n_c * max(256, -(-16 * (deg + 1) // n_c))
    elif points % n_c:
        raise ValueError("points must be a multiple of 2m+1")
    q = sample_spectral_Q(F, beta, theta, m, points)
    f = sample(F.f, points)
    return lp_norm(GridSamples(1, points, f.values - q.values), p)


# -- serialisation ------------------------------------------------------------


def dumps_approximant(A: TranslateApproximant) -> str:
    """Header ``m N beta_kind params`` then rows ``k center weight``."""
    params = " ".join(f"{k}={v}" for k, v in A.generator.params.items())
    lines = [f"{A.m} {A.truncation} {A.generator.kind} {params}".rstrip()]
    for k, (x, w) in enumerate(zip(A.centers, A.weights)):
        lines.append(f"{k} {float(x)!r} {float(w)!r}")
    return "\n".join(lines) + "\n"


def loads_approximant(text: str, generator: Symbol) -> TranslateApproximant:
    """Inverse of :func:`dumps_approximant`; centres are recomputed from ``m``."""
    rows = [line.split() for line in text.splitlines() if line.strip()]
    m, n = int(rows[0][0]), int(rows[0][1])
    if rows[0][2] != generator.kind:
        raise ValueError(f"generator kind {generator.kind!r} does not match {rows[0][2]!r}")
    weights = np.zeros(2 * m + 1)
    for cols in rows[1:]:
        weights[int(cols[0])] = float(cols[2])
    return TranslateApproximant(generator, m, weights, n, _tail_certificate(generator, n))
