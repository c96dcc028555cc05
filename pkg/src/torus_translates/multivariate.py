"""Tensor-product operators and the Smolyak operator ``P_m`` on ``T^d``.

Functions of the class are handled through their generators: ``f`` is
``phi_{lambda,d} * g`` and every operator here maps ``g`` to the generator
of its output.  With ``beta = lambda`` the univariate operator
``Q_{M,lambda}`` acting along one axis becomes the periodisation
``g'(k) = theta(k_M/M) g(k_M)`` of the smoothed generator, so no division
by the symbol is ever needed.  ``P_m`` is the sum of ``q_k`` over
``|k| <= m``; expanded it is the combination of tensor operators
``Q_{2^l}`` with integer coefficients.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .lattice import progression_sums
from .spectral import SpectralCoefficients, fold
from .symbols import Symbol, ratio
from .univariate import nearest_residue

__all__ = [
    "abs_index",
    "weight_kappa",
    "apply_Q_axis",
    "Q_tensor",
    "T_op",
    "q_op",
    "P_op",
    "combination_coefficients",
    "to_function",
    "SmolyakGrid",
    "smolyak_grid",
    "sum_cardinality",
    "translate_representation",
    "translate_coefficients",
    "combination_l2_norm",
    "smolyak_error_l2",
    "T_norm_l2",
    "q_norm_l2",
    "sample_combination",
    "smolyak_error",
    "dumps_grid",
]

IDENTITY = None


def abs_index(k: Sequence[int]) -> int:
    """``|k| = sum |k_j|``."""
    return int(sum(abs(int(v)) for v in k))


def weight_kappa(k: Sequence[int], kappa: float) -> float:
    """``prod_j (k_j + 2)^(-kappa)``."""
    return float(np.prod([(int(v) + 2) ** (-kappa) for v in k]))


def to_function(g: SpectralCoefficients, lam: Symbol) -> SpectralCoefficients:
    """Coefficients of ``phi_{lambda,d} * g``."""
    out = np.ones(g.array.shape)
    for axis in range(g.dim):
        shape = [1] * g.dim
        shape[axis] = -1
        out = out * lam(g.frequencies(axis).astype(float)).reshape(shape)
    return SpectralCoefficients(out * g.array)


# -- per-axis matrices -----------------------------------------------------------


def _axis_matrix(spec, n_in: int, n_out: int, lam: Symbol, beta: Symbol, theta: Symbol) -> np.ndarray:
    """Generator-space matrix of one axis factor: identity (``None``) or ``Q_M``."""
    rows = np.arange(-n_out, n_out + 1)
    cols = np.arange(-n_in, n_in + 1)
    if spec is IDENTITY:
        return (rows[:, None] == cols[None, :]).astype(float)
    big_m = int(spec)
    res = nearest_residue(rows, big_m)
    hit = res[:, None] == cols[None, :]
    cut = theta(cols / big_m)
    live = cut != 0
    weights = np.zeros(len(cols))
    weights[live] = cut[live] * ratio(lam, beta).value(cols[live].astype(float))
    if beta is lam:
        scale = np.ones(len(rows))
    else:
        scale = beta(rows.astype(float)) / lam(rows.astype(float))
    return hit * scale[:, None] * weights[None, :]


def _out_bound(specs: Iterable, n_in: int, J_max: int) -> int:
    n = n_in
    for spec in specs:
        if spec is not IDENTITY:
            n = max(n, J_max * (2 * int(spec) + 1) + int(spec))
    return n


def _apply_axis(arr: np.ndarray, matrix: np.ndarray, axis: int) -> np.ndarray:
    out = np.tensordot(matrix, arr, axes=([1], [axis]))
    return np.moveaxis(out, 0, axis)


def _combination(
    g: SpectralCoefficients,
    terms: dict,
    lam: Symbol,
    beta: Symbol,
    theta: Symbol,
    J_max: int,
    bound=None,
) -> SpectralCoefficients:
    """``sum_t c_t (A_{t,1} x ... x A_{t,d}) g`` on a common output box.

    The box covers ``J_max`` alias blocks of the largest order on each axis
    unless ``bound`` fixes it.
    """
    d = g.dim
    if bound is not None:
        bounds = [int(bound)] * d if np.isscalar(bound) else [int(b) for b in bound]
    else:
        bounds = [
            _out_bound((spec[axis] for spec in terms), g.bound[axis], J_max) for axis in range(d)
        ]
    cache: dict = {}
    total = np.zeros(tuple(2 * n + 1 for n in bounds), dtype=complex)
    for specs, coef in terms.items():
        if coef == 0:
            continue
        arr = g.array
        for axis, spec in enumerate(specs):
            key = (axis, spec)
            if key not in cache:
                cache[key] = _axis_matrix(spec, g.bound[axis], bounds[axis], lam, beta, theta)
            arr = _apply_axis(arr, cache[key], axis)
        total += coef * arr
    return SpectralCoefficients(total)


def _check_axis(g: SpectralCoefficients, axis: int) -> None:
    if not 0 <= axis < g.dim:
        raise ValueError(f"axis {axis} out of range for dimension {g.dim}")


def apply_Q_axis(
    g: SpectralCoefficients,
    axis: int,
    lam: Symbol,
    theta: Symbol,
    m: int,
    beta: Symbol | None = None,
    J_max: int = 2,
    bound=None,
) -> SpectralCoefficients:
    """``Q_{m,beta}`` along one axis (0-based) on the generator ``g``.

    Other axes are untouched.  The result keeps alias blocks ``|j| <= J_max``
    or the explicit output box ``bound``.
    """
    _check_axis(g, axis)
    if m < 1:
        raise ValueError("m must be a positive integer")
    beta = lam if beta is None else beta
    specs = tuple(m if a == axis else IDENTITY for a in range(g.dim))
    return _combination(g, {specs: 1}, lam, beta, theta, J_max, bound)


def Q_tensor(
    g: SpectralCoefficients, lam: Symbol, theta: Symbol, ms: Sequence[int], J_max: int = 2, bound=None
) -> SpectralCoefficients:
    """``Q_m = prod_j Q_{m_j,lambda}`` (``beta = lambda``)."""
    ms = tuple(int(v) for v in ms)
    if len(ms) != g.dim or any(v < 1 for v in ms):
        raise ValueError(f"need {g.dim} positive orders, got {ms}")
    return _combination(g, {ms: 1}, lam, lam, theta, J_max, bound)


def _t_terms(ks: Sequence[int]) -> dict:
    factors = []
    for k in ks:
        if k < -1:
            raise ValueError(f"T_k needs k >= -1, got {k}")
        factors.append([(IDENTITY, 1)] if k == -1 else [(IDENTITY, 1), (2**k, -1)])
    return _expand(factors)


def _q_terms(ks: Sequence[int]) -> dict:
    factors = []
    for k in ks:
        if k < 0:
            raise ValueError(f"q_k needs k >= 0, got {k}")
        factors.append([(1, 1)] if k == 0 else [(2**k, 1), (2 ** (k - 1), -1)])
    return _expand(factors)


def _expand(factors) -> dict:
    terms: dict = defaultdict(int)
    for combo in itertools.product(*factors):
        specs = tuple(spec for spec, _ in combo)
        terms[specs] += int(np.prod([c for _, c in combo]))
    return {k: v for k, v in terms.items() if v}


def T_op(
    g: SpectralCoefficients, lam: Symbol, theta: Symbol, ks: Sequence[int], J_max: int = 2, bound=None
) -> SpectralCoefficients:
    """``T_k = prod_j T_{k_j}`` with ``T_k = I - Q_{2^k}`` and ``T_{-1} = I``."""
    if len(ks) != g.dim:
        raise ValueError(f"need a {g.dim}-dimensional index")
    return _combination(g, _t_terms(ks), lam, lam, theta, J_max, bound)


def q_op(
    g: SpectralCoefficients, lam: Symbol, theta: Symbol, ks: Sequence[int], J_max: int = 2, bound=None
) -> SpectralCoefficients:
    """``q_k = prod_j q_{k_j}`` with ``q_k = Q_{2^k} - Q_{2^(k-1)}`` and ``q_0 = Q_1``."""
    if len(ks) != g.dim:
        raise ValueError(f"need a {g.dim}-dimensional index")
    return _combination(g, _q_terms(ks), lam, lam, theta, J_max, bound)


def _simplex(d: int, m: int):
    for ks in itertools.product(range(m + 1), repeat=d):
        if sum(ks) <= m:
            yield ks


def combination_coefficients(d: int, m: int) -> dict:
    """Coefficients ``c_l`` with ``P_m = sum_l c_l Q_{2^l}`` (levels ``l``, not orders)."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    coeffs: dict = defaultdict(int)
    for ks in _simplex(d, m):
        options = [[(k, 1)] if k == 0 else [(k, 1), (k - 1, -1)] for k in ks]
        for combo in itertools.product(*options):
            coeffs[tuple(level for level, _ in combo)] += int(np.prod([c for _, c in combo]))
    return {k: v for k, v in sorted(coeffs.items()) if v}


def _p_terms(d: int, m: int) -> dict:
    return {tuple(2**lv for lv in levels): c for levels, c in combination_coefficients(d, m).items()}


def P_op(
    g: SpectralCoefficients, lam: Symbol, theta: Symbol, m: int, J_max: int = 2, bound=None
) -> SpectralCoefficients:
    """``P_m = sum_{|k| <= m} q_k`` on the generator ``g``."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    return _combination(g, _p_terms(g.dim, m), lam, lam, theta, J_max, bound)


# -- Smolyak grid -------------------------------------------------------------------


def _lattice_size(k: int) -> int:
    return 2 ** (k + 1) + 1


def sum_cardinality(d: int, m: int) -> int:
    """``sum_{|k| <= m} prod_j (2^(k_j+1) + 1)``."""
    return sum(int(np.prod([_lattice_size(k) for k in ks])) for ks in _simplex(d, m))


@dataclass(frozen=True)
class SmolyakGrid:
    """Points ``2*pi*s_j/(2^(k_j+1)+1)`` for ``|k| <= m`` with their ``(k, s)`` provenance."""

    d: int
    m: int
    provenance: tuple
    sum_cardinality: int
    distinct_cardinality: int

    def point(self, k: Sequence[int], s: Sequence[int]) -> np.ndarray:
        return np.array([2 * np.pi * sv / _lattice_size(kv) for kv, sv in zip(k, s)])

    @property
    def points(self) -> list:
        return [(self.point(k, s), (k, s)) for k, s in self.provenance]

    def rational(self, k: Sequence[int], s: Sequence[int]) -> tuple:
        """Exact coordinates as fractions of the full turn ``2*pi``."""
        return tuple(Fraction(int(sv), _lattice_size(kv)) for kv, sv in zip(k, s))

    def distinct_points(self) -> set:
        return {self.rational(k, s) for k, s in self.provenance}


def smolyak_grid(d: int, m: int) -> SmolyakGrid:
    if d < 1 or m < 0:
        raise ValueError("need d >= 1 and m >= 0")
    prov = []
    for ks in _simplex(d, m):
        for ss in itertools.product(*(range(_lattice_size(k)) for k in ks)):
            prov.append((ks, ss))
    distinct = {
        tuple(Fraction(sv, _lattice_size(kv)) for kv, sv in zip(ks, ss)) for ks, ss in prov
    }
    return SmolyakGrid(d, m, tuple(prov), len(prov), len(distinct))


def _smoothed_on_lattice(g: SpectralCoefficients, lam: Symbol, theta: Symbol, levels) -> np.ndarray:
    """``(V_{M_1} x ... x V_{M_d}) g`` sampled on the lattice ``prod_j Z[2M_j+1]``."""
    arr = g.array
    for axis, lv in enumerate(levels):
        big_m = 2**lv
        freqs = g.frequencies(axis)
        cut = theta(freqs / big_m)
        shape = [1] * g.dim
        shape[axis] = -1
        arr = arr * cut.reshape(shape)
    for axis, lv in enumerate(levels):
        size = _lattice_size(lv)
        arr = np.moveaxis(fold(np.moveaxis(arr, axis, 0), (g.bound[axis],), size), 0, axis)
    sizes = [_lattice_size(lv) for lv in levels]
    return (np.fft.ifftn(arr) * np.prod(sizes)).real


def translate_representation(g: SpectralCoefficients, lam: Symbol, theta: Symbol, m: int) -> dict:
    """Weights ``w_y`` on ``G^d(m)`` with ``P_m(f) = sum_y w_y phi_{lambda,d}(. - y)``.

    Keys are tuples of :class:`fractions.Fraction` (coordinates in units of
    ``2*pi``); coincident rational points are merged.
    """
    weights: dict = defaultdict(float)
    for levels, coef in combination_coefficients(g.dim, m).items():
        vals = _smoothed_on_lattice(g, lam, theta, levels)
        sizes = [_lattice_size(lv) for lv in levels]
        scale = coef / float(np.prod(sizes))
        for ss in itertools.product(*(range(n) for n in sizes)):
            key = tuple(Fraction(sv, n) for sv, n in zip(ss, sizes))
            weights[key] += scale * vals[ss]
    return dict(weights)


def translate_coefficients(
    weights: dict, lam: Symbol, bound: int | Sequence[int], dim: int
) -> SpectralCoefficients:
    """Fourier coefficients of ``sum_y w_y phi_{lambda,d}(. - y)`` on a box."""
    bound = (bound,) * dim if np.isscalar(bound) else tuple(bound)
    keys = list(weights)
    w = np.array([weights[k] for k in keys])
    out = w.astype(complex)
    # Contract one axis at a time: phases e^{-i k_j y_j} per point.
    parts = None
    for axis in range(dim):
        freqs = np.arange(-bound[axis], bound[axis] + 1)
        y = np.array([float(2 * math.pi * k[axis]) for k in keys])
        phase = np.exp(-1j * np.outer(freqs, y))
        parts = phase if parts is None else parts[..., None, :] * phase.reshape((1,) * (parts.ndim - 1) + phase.shape)
    coeffs = parts @ out
    lam_d = np.ones(coeffs.shape)
    for axis in range(dim):
        shape = [1] * dim
        shape[axis] = -1
        lam_d = lam_d * lam(np.arange(-bound[axis], bound[axis] + 1).astype(float)).reshape(shape)
    return SpectralCoefficients(lam_d * coeffs)


# -- exact L2 norms via per-axis Gram matrices ------------------------------------


def _crt_index(l1: int, l2: int) -> np.ndarray:
    """``idx[a mod l1, b mod l2]`` = the residue mod lcm, or -1 if incompatible."""
    lcm = l1 * l2 // math.gcd(l1, l2)
    idx = np.full((l1, l2), -1, dtype=np.int64)
    k = np.arange(lcm)
    idx[k % l1, k % l2] = k
    return idx


def _class_sums_sq(lam: Symbol, modulus: int) -> np.ndarray:
    return _class_sums_cached(lam, modulus)


@lru_cache(maxsize=256)
def _class_sums_cached(lam: Symbol, modulus: int) -> np.ndarray:
    sq = lambda t: lam.value(t) ** 2  # noqa: E731
    dsq = lambda t: 2 * lam.value(t) * lam.d1(t)  # noqa: E731
    return progression_sums(sq, dsq, modulus)


def _gram(spec_a, spec_b, n: int, lam: Symbol, theta: Symbol) -> np.ndarray:
    """``U_a^T U_b`` for f-space axis factors applied to generator indices ``-n..n``."""
    a = np.arange(-n, n + 1)
    lam_sq = lam(a.astype(float)) ** 2
    if spec_a is IDENTITY and spec_b is IDENTITY:
        return np.diag(lam_sq)
    if spec_a is IDENTITY or spec_b is IDENTITY:
        big_m = spec_b if spec_a is IDENTITY else spec_a
        size = 2 * big_m + 1
        cut = theta(a / big_m)
        hit = (a[:, None] - a[None, :]) % size == 0
        inner = hit * lam_sq[:, None] * cut[None, :]
        return inner if spec_a is IDENTITY else inner.T
    l1, l2 = 2 * spec_a + 1, 2 * spec_b + 1
    idx = _crt_index(l1, l2)[a[:, None] % l1, a[None, :] % l2]
    sums = _class_sums_sq(lam, l1 * l2 // math.gcd(l1, l2))
    cut = np.outer(theta(a / spec_a), theta(a / spec_b))
    return np.where(idx >= 0, sums[np.maximum(idx, 0)], 0.0) * cut


def combination_l2_norm(g: SpectralCoefficients, lam: Symbol, theta: Symbol, terms: dict) -> float:
    """Exact ``||sum_t c_t (A_t g)||_2`` in function space (no alias truncation).

    ``terms`` maps per-axis specs (``None`` for identity or an order ``M``)
    to coefficients; ``beta = lambda``.
    """
    items = [(specs, c) for specs, c in terms.items() if c]
    grams: dict = {}
    total = 0.0
    for (sa, ca), (sb, cb) in itertools.product(items, repeat=2):
        arr = g.array
        for axis in range(g.dim):
            key = (axis, sa[axis], sb[axis])
            if key not in grams:
                grams[key] = _gram(sa[axis], sb[axis], g.bound[axis], lam, theta)
            arr = _apply_axis(arr, grams[key], axis)
        total += ca * cb * float(np.real(np.vdot(g.array, arr)))
    return math.sqrt(max(total, 0.0))


def smolyak_error_l2(g: SpectralCoefficients, lam: Symbol, theta: Symbol, m: int) -> float:
    """``||f - P_m(f)||_2`` exactly."""
    return combination_l2_norm(g, lam, theta, _error_terms(g.dim, m))


def T_norm_l2(g: SpectralCoefficients, lam: Symbol, theta: Symbol, ks: Sequence[int]) -> float:
    return combination_l2_norm(g, lam, theta, _t_terms(ks))


def q_norm_l2(g: SpectralCoefficients, lam: Symbol, theta: Symbol, ks: Sequence[int]) -> float:
    return combination_l2_norm(g, lam, theta, _q_terms(ks))


# -- grid sampling for p != 2 ----------------------------------------------------


def _sampling_matrix(spec, n: int, points: int, lam: Symbol, theta: Symbol) -> np.ndarray:
    """Values on ``2*pi*s/points`` of the f-space axis factor applied to ``e_a``, ``|a| <= n``."""
    a = np.arange(-n, n + 1)
    s = np.arange(points)
    if spec is IDENTITY:
        return lam(a.astype(float))[None, :] * np.exp(2j * np.pi * np.outer(s, a) / points)
    size = 2 * spec + 1
    lcm = size * points // math.gcd(size, points)
    sums = progression_sums(lam.value, lam.d1, lcm)
    out = np.zeros((points, len(a)), dtype=complex)
    cut = theta(a / spec)
    for col, (av, cv) in enumerate(zip(a, cut)):
        if cv == 0:
            continue
        cls = np.arange(av % size, lcm, size)
        out[:, col] = cv * (np.exp(2j * np.pi * np.outer(s, cls % points) / points) @ sums[cls])
    return out


def sample_combination(
    g: SpectralCoefficients, lam: Symbol, theta: Symbol, terms: dict, points: int
) -> np.ndarray:
    """Exact values of ``sum_t c_t (A_t f)`` on the uniform ``points^d`` grid."""
    cache: dict = {}
    total = np.zeros((points,) * g.dim, dtype=complex)
    for specs, coef in terms.items():
        if not coef:
            continue
        arr = g.array
        for axis, spec in enumerate(specs):
            key = (axis, spec)
            if key not in cache:
                cache[key] = _sampling_matrix(spec, g.bound[axis], points, lam, theta)
            arr = _apply_axis(arr, cache[key], axis)
        total += coef * arr
    return total.real


def _error_terms(d: int, m: int) -> dict:
    terms = {(IDENTITY,) * d: 1}
    for specs, c in _p_terms(d, m).items():
        terms[specs] = terms.get(specs, 0) - c
    return terms


def smolyak_error(
    g: SpectralCoefficients, lam: Symbol, theta: Symbol, m: int, p: float, points: int | None = None
) -> float:
    """``||f - P_m(f)||_p``; exact for ``p = 2``, on a uniform grid otherwise.

    The default grid has ``4 (2^(m+1) + 1)`` points per axis; for ``p = inf``
    the grid maximum is reported.
    """
    if p == 2:
        return smolyak_error_l2(g, lam, theta, m)
    points = 4 * (2 ** (m + 1) + 1) if points is None else int(points)
    vals = np.abs(sample_combination(g, lam, theta, _error_terms(g.dim, m), points))
    if math.isinf(p):
        return float(vals.max())
    if p < 1:
        raise ValueError("p must be >= 1")
    return float(np.mean(vals**p) ** (1.0 / p))


# -- text output --------------------------------------------------------------------


def dumps_grid(grid: SmolyakGrid, weights: dict | None = None) -> str:
    """Rows ``k_1..k_d s_1..s_d s_1/L_1..s_d/L_d x_1..x_d [weight]``."""
    lines = [
        f"# d={grid.d} m={grid.m} sum_cardinality={grid.sum_cardinality} "
        f"distinct_cardinality={grid.distinct_cardinality}"
    ]
    seen: set = set()
    for ks, ss in grid.provenance:
        sizes = [_lattice_size(k) for k in ks]
        cols = [str(k) for k in ks] + [str(s) for s in ss]
        cols += [f"{s}/{n}" for s, n in zip(ss, sizes)]
        cols += [repr(2 * math.pi * s / n) for s, n in zip(ss, sizes)]
        if weights is not None:
            key = grid.rational(ks, ss)
            # Merged weights belong to the point, reported once at first provenance.
            cols.append(repr(float(weights.get(key, 0.0))) if key not in seen else "0.0")
            seen.add(key)
        lines.append(" ".join(cols))
    return "\n".join(lines) + "\n"
