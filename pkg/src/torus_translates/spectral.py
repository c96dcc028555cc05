"""Truncated Fourier series on the d-torus.

A real-valued function on ``T^d = [0, 2*pi)^d`` is stored through its
Fourier coefficients

.. math:: \\hat f(j) = (2\\pi)^{-d} \\int_{T^d} f(x) e^{-i(j, x)} dx,

kept in a dense, centred complex array: the entry at array position
``i`` on axis ``l`` is the coefficient of frequency ``i - N_l``.  Norms
carry the ``(2*pi)^{-d/p}`` normalisation so that the constant function 1
has unit norm for every ``p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

__all__ = [
    "SpectralCoefficients",
    "GridSamples",
    "coeffs_from_samples",
    "evaluate",
    "sample",
    "convolve",
    "lp_norm",
    "fold",
    "dumps",
    "loads",
]

_HERMITIAN_RTOL = 1e-9


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class SpectralCoefficients:
    """Fourier coefficients of a real trigonometric polynomial on ``T^d``.

    Parameters
    ----------
    array : ndarray
        Complex array of shape ``(2*N_1 + 1, ..., 2*N_d + 1)``.  The entry
        at position ``(i_1, ..., i_d)`` is the coefficient of the frequency
        ``(i_1 - N_1, ..., i_d - N_d)``.

    Notes
    -----
    Hermitian symmetry ``c(-j) = conj(c(j))`` is checked on construction,
    so every instance represents a real-valued function.  The array is
    frozen; operations always return new instances.
    """

    array: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.array, dtype=complex)
        if arr.ndim < 1:
            raise ValueError("coefficient array must have at least one axis")
        if any(n % 2 == 0 for n in arr.shape):
            raise ValueError(f"every axis must have odd length, got {arr.shape}")
        mirrored = np.conj(arr[(slice(None, None, -1),) * arr.ndim])
        scale = float(np.max(np.abs(arr))) if arr.size else 0.0
        if scale and np.max(np.abs(arr - mirrored)) > _HERMITIAN_RTOL * scale:
            raise ValueError("coefficients are not Hermitian symmetric")
        object.__setattr__(self, "array", _readonly(arr))

    @classmethod
    def from_dict(
        cls,
        coeffs: Mapping,
        dim: int = 1,
        bound: int | Sequence[int] | None = None,
    ) -> "SpectralCoefficients":
        """Build from a map ``{index: amplitude}``.

        Indices are ints (``dim == 1``) or tuples of length ``dim``.  Missing
        conjugate partners are *not* filled in; the map must already be
        Hermitian.
        """
        if dim < 1:
            raise ValueError("dim must be positive")
        keys = [(k,) if np.isscalar(k) else tuple(k) for k in coeffs]
        if any(len(k) != dim for k in keys):
            raise ValueError(f"every index must have {dim} entries")
        if bound is None:
            bound = [max((abs(k[ax]) for k in keys), default=0) for ax in range(dim)]
        bound = _as_bound(bound, dim)
        arr = np.zeros(tuple(2 * n + 1 for n in bound), dtype=complex)
        for key, value in zip(keys, coeffs.values()):
            if any(abs(k) > n for k, n in zip(key, bound)):
                raise ValueError(f"index {key} exceeds support bound {bound}")
            arr[tuple(k + n for k, n in zip(key, bound))] = value
        return cls(arr)

    @classmethod
    def zeros(cls, bound: int | Sequence[int], dim: int = 1) -> "SpectralCoefficients":
        bound = _as_bound(bound, dim)
        return cls(np.zeros(tuple(2 * n + 1 for n in bound), dtype=complex))

    @property
    def dim(self) -> int:
        return self.array.ndim

    @property
    def bound(self) -> tuple[int, ...]:
        """Per-axis support bound ``N``: stored frequencies satisfy ``|j_l| <= N_l``."""
        return tuple((n - 1) // 2 for n in self.array.shape)

    def frequencies(self, axis: int = 0) -> np.ndarray:
        n = self.bound[axis]
        return np.arange(-n, n + 1)

    def coeff(self, index) -> complex:
        """Coefficient at ``index``; zero outside the support box."""
        index = (index,) if np.isscalar(index) else tuple(index)
        if len(index) != self.dim:
            raise ValueError(f"expected a {self.dim}-dimensional index")
        if any(abs(k) > n for k, n in zip(index, self.bound)):
            return 0j
        return complex(self.array[tuple(k + n for k, n in zip(index, self.bound))])

    def items(self, atol: float = 0.0) -> Iterator[tuple[tuple[int, ...], complex]]:
        """Nonzero ``(index, amplitude)`` pairs in row-major order."""
        for pos in zip(*np.nonzero(np.abs(self.array) > atol)):
            yield tuple(int(p) - n for p, n in zip(pos, self.bound)), complex(self.array[pos])

    def to_dict(self, atol: float = 0.0) -> dict:
        if self.dim == 1:
            return {k[0]: v for k, v in self.items(atol)}
        return dict(self.items(atol))

    def resized(self, bound: int | Sequence[int]) -> "SpectralCoefficients":
        """Zero-pad or truncate to a new support box."""
        bound = _as_bound(bound, self.dim)
        out = np.zeros(tuple(2 * n + 1 for n in bound), dtype=complex)
        src, dst = [], []
        for old, new in zip(self.bound, bound):
            keep = min(old, new)
            src.append(slice(old - keep, old + keep + 1))
            dst.append(slice(new - keep, new + keep + 1))
        out[tuple(dst)] = self.array[tuple(src)]
        return SpectralCoefficients(out)

    def __add__(self, other: "SpectralCoefficients") -> "SpectralCoefficients":
        a, b = _common(self, other)
        return SpectralCoefficients(a.array + b.array)

    def __sub__(self, other: "SpectralCoefficients") -> "SpectralCoefficients":
        a, b = _common(self, other)
        return SpectralCoefficients(a.array - b.array)

    def __mul__(self, scalar: float) -> "SpectralCoefficients":
        if isinstance(scalar, complex) or not np.isreal(scalar):
            raise TypeError("only real scalars preserve real-valuedness")
        return SpectralCoefficients(self.array * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "SpectralCoefficients":
        return SpectralCoefficients(-self.array)


@dataclass(frozen=True, eq=False)
class GridSamples:
    """Values of a function on the uniform grid ``2*pi*s/M``, ``s = 0..M-1`` per axis.

    ``values`` is flattened in row-major axis order; ``grid`` returns the
    ``(M,) * dim`` view.
    """

    dim: int
    points_per_axis: int
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be positive")
        if self.points_per_axis < 1:
            raise ValueError("points_per_axis must be positive")
        vals = np.asarray(self.values, dtype=float).ravel().copy()
        if vals.size != self.points_per_axis**self.dim:
            raise ValueError(
                f"expected {self.points_per_axis}**{self.dim} values, got {vals.size}"
            )
        object.__setattr__(self, "values", _readonly(vals))

    @property
    def grid(self) -> np.ndarray:
        return self.values.reshape((self.points_per_axis,) * self.dim)

    def nodes(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.points_per_axis) / self.points_per_axis


def _as_bound(bound, dim: int) -> tuple[int, ...]:
    if np.isscalar(bound):
        bound = (int(bound),) * dim
    bound = tuple(int(n) for n in bound)
    if len(bound) != dim or any(n < 0 for n in bound):
        raise ValueError(f"invalid support bound {bound} for dim {dim}")
    return bound


def _common(a: SpectralCoefficients, b: SpectralCoefficients):
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    bound = tuple(max(x, y) for x, y in zip(a.bound, b.bound))
    return a.resized(bound), b.resized(bound)


def coeffs_from_samples(samples: GridSamples) -> SpectralCoefficients:
    """Discrete Fourier coefficients from uniform grid samples.

    Returns frequencies ``|j_l| <= (M - 1) // 2``.  Exact up to roundoff
    when the sampled function is a trigonometric polynomial of per-axis
    degree below ``M / 2``.
    """
    if samples.values.size == 0:
        raise ValueError("empty samples")
    m = samples.points_per_axis
    n = (m - 1) // 2
    spec = np.fft.fftn(samples.grid) / m**samples.dim
    idx = np.r_[np.arange(m - n, m), np.arange(0, n + 1)] if n else np.array([0])
    spec = spec[np.ix_(*([idx] * samples.dim))]
    # Enforce exact symmetry; the raw DFT of real data is Hermitian to roundoff.
    mirrored = np.conj(spec[(slice(None, None, -1),) * samples.dim])
    return SpectralCoefficients(0.5 * (spec + mirrored))


def fold(array: np.ndarray, bound: Sequence[int], m: int) -> np.ndarray:
    """Alias a centred coefficient array onto residues modulo ``m`` per axis.

    Entry ``rho`` of the result on each axis is the sum of all coefficients
    whose frequency is congruent to ``rho`` modulo ``m``.
    """
    out = np.asarray(array)
    for axis, n in enumerate(bound):
        length = out.shape[axis]
        lead = (-n) % m
        total = -(-(lead + length) // m) * m
        pad = [(0, 0)] * out.ndim
        pad[axis] = (lead, total - lead - length)
        out = np.pad(out, pad)
        shape = out.shape[:axis] + (total // m, m) + out.shape[axis + 1 :]
        out = out.reshape(shape).sum(axis=axis)
    return out


def sample(c: SpectralCoefficients, points_per_axis: int) -> GridSamples:
    """Exact values of ``c`` on the uniform ``M^d`` grid (fold then inverse FFT)."""
    m = int(points_per_axis)
    if m < 1:
        raise ValueError("points_per_axis must be positive")
    folded = fold(c.array, c.bound, m)
    values = np.fft.ifftn(folded) * m**c.dim
    return GridSamples(c.dim, m, values.real)


def evaluate(c: SpectralCoefficients, x) -> float | np.ndarray:
    """Evaluate the series at one point or at an array of points.

    ``x`` is a scalar (``dim == 1``), a length-``dim`` point, or an array of
    shape ``(npoints, dim)`` / ``(npoints,)`` for ``dim == 1``.
    """
    pts = np.asarray(x, dtype=float)
    scalar = pts.ndim == 0 or (pts.ndim == 1 and c.dim > 1)
    pts = pts.reshape(-1, c.dim) % (2 * np.pi)
    out = np.empty(len(pts))
    for row, p in enumerate(pts):
        acc = c.array
        for axis in range(c.dim - 1, -1, -1):
            phase = np.exp(1j * c.frequencies(axis) * p[axis])
            acc = acc @ phase
        out[row] = acc.real
    return float(out[0]) if scalar else out


def convolve(a: SpectralCoefficients, b: SpectralCoefficients) -> SpectralCoefficients:
    """Normalised convolution ``(2*pi)^{-d} int a(y) b(x - y) dy``.

    Coefficients multiply; the support bound is the componentwise minimum.
    """
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    bound = tuple(min(x, y) for x, y in zip(a.bound, b.bound))
    return SpectralCoefficients(a.resized(bound).array * b.resized(bound).array)


def _dense_points(c: SpectralCoefficients) -> int:
    top = max(c.bound)
    floor = 4096 if c.dim == 1 else 64
    return max(floor, 8 * top + 1)


def _sup_refined(c: SpectralCoefficients, samples: GridSamples) -> float:
    grid = np.abs(samples.grid)
    pos = np.unravel_index(int(np.argmax(grid)), grid.shape)
    h = 2 * np.pi / samples.points_per_axis
    point = np.array([p * h for p in pos], dtype=float)
    best = float(grid[pos])
    # One coordinate-wise pass of bounded scalar search around the discrete argmax.
    for axis in range(c.dim):
        def neg_abs(t, axis=axis):
            q = point.copy()
            q[axis] = t
            return -abs(evaluate(c, q if c.dim > 1 else q[0]))

        res = minimize_scalar(
            neg_abs,
            bounds=(point[axis] - h, point[axis] + h),
            method="bounded",
            options={"xatol": 1e-12},
        )
        if -res.fun > best:
            best = float(-res.fun)
            point[axis] = res.x
    return best


def lp_norm(f: SpectralCoefficients | GridSamples, p: float) -> float:
    """Normalised ``L^p`` norm, ``(2*pi)^{-d/p} ||f||_p``; ``p`` may be ``inf``.

    For coefficients, ``p = 2`` is exact (Parseval).  Other ``p`` use a dense
    grid at least 8 times finer than the support bound; ``p = inf``
    additionally refines around the grid maximum.  Grid samples use the
    plain normalised Riemann sum (or maximum).
    """
    p = float(p)
    if not p >= 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if isinstance(f, SpectralCoefficients):
        if p == 2:
            return float(np.sqrt(np.sum(np.abs(f.array) ** 2)))
        samples = sample(f, _dense_points(f))
        if math.isinf(p):
            return _sup_refined(f, samples)
        return lp_norm(samples, p)
    vals = np.abs(f.values)
    if vals.size == 0:
        raise ValueError("empty samples")
    if math.isinf(p):
        return float(vals.max())
    if p == 1:
        return float(vals.mean())
    top = vals.max()
    if top == 0:
        return 0.0
    return float(top * np.mean((vals / top) ** p) ** (1 / p))


def dumps(c: SpectralCoefficients, atol: float = 0.0) -> str:
    """Line-based text: a ``# dim bound...`` header then ``j_1 ... j_d re im`` rows."""
    lines = ["# " + " ".join(str(v) for v in (c.dim, *c.bound))]
    for index, value in c.items(atol):
        cols = [str(k) for k in index] + [repr(value.real), repr(value.imag)]
        lines.append(" ".join(cols))
    return "\n".join(lines) + "\n"


def loads(text: str) -> SpectralCoefficients:
    header = None
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            header = [int(v) for v in line[1:].split()]
            continue
        rows.append(line.split())
    if header is not None:
        dim, bound = header[0], header[1:]
    elif rows:
        dim, bound = len(rows[0]) - 2, None
    else:
        raise ValueError("no coefficients and no header")
    coeffs = {}
    for cols in rows:
        if len(cols) != dim + 2:
            raise ValueError(f"malformed row: {' '.join(cols)}")
        key = tuple(int(v) for v in cols[:dim])
        coeffs[key] = complex(float(cols[dim]), float(cols[dim + 1]))
    return SpectralCoefficients.from_dict(coeffs, dim=dim, bound=bound)
