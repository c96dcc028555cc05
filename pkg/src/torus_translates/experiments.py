"""Convergence experiments: configuration, random generators, sweeps and output.

A configuration is a JSON object whose keys mirror :class:`ExperimentConfig`::

    {
      "lambda": {"kind": "mask", "r": 2, "kappa": 1},
      "beta": {"kind": "exponent", "s": 1},
      "d": 1,
      "p": "inf",
      "m_list": [16, 32, 64, 128, 256],
      "g_spec": {"seed": 0, "max_degree": 8},
      "tolerances": {"tail_tol": 1e-10},
      "output": "runs/mask"
    }

``beta`` defaults to ``lambda``.  Symbol kinds are ``korobov`` (``r``),
``mask`` (``r``, ``kappa``, ``F``) and ``exponent`` (``s``, ``F``).  ``F`` is
``"constant"`` or an object with ``kind`` and its parameters
(``constant``: ``c``; ``oscillating``: ``amp``, ``freq``; ``rational``:
``q``).  ``g_spec`` is either ``{"seed", "max_degree", "decay"}`` or
``{"coefficients": [[k_1, ..., k_d, re, im], ...]}``.

Random generators use splitmix64: the ``i``-th draw (from 1) is
``mix(seed + i * 0x9E3779B97F4A7C15 mod 2^64)`` with
``z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
z *= 0x94D049BB133111EB; z ^= z >> 31``, and the uniform on ``[-1, 1)`` is
``2 * (z >> 11) * 2^-53 - 1``.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import multivariate as mv
from .spectral import SpectralCoefficients, lp_norm
from .symbols import (
    Symbol,
    constant_factor,
    epsilon_m,
    make_exponent,
    make_korobov,
    make_mask,
    make_theta,
    oscillating_factor,
    rational_factor,
)
from .univariate import HLambdaFunction, approx_error

__all__ = [
    "ConfigError",
    "NumericFailure",
    "ExperimentConfig",
    "RateFitResult",
    "load_config",
    "parse_config",
    "build_symbol",
    "parse_symbol_text",
    "splitmix64",
    "uniform_draws",
    "gen_g",
    "fit_rate",
    "run_univariate",
    "run_multivariate",
    "to_csv",
    "to_json",
    "emit",
]

CSV_HEADER = "m,n,error,reference,ratio"

_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


class NumericFailure(RuntimeError):
    """A computation produced a non-finite or unusable result."""


# -- PRNG ---------------------------------------------------------------------------


def splitmix64(seed: int, count: int) -> np.ndarray:
    """First ``count`` outputs of splitmix64 started at ``seed`` (uint64)."""
    i = np.arange(1, count + 1, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = np.uint64(seed % 2**64) + i * np.uint64(_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def uniform_draws(seed: int, count: int) -> np.ndarray:
    """Uniforms on ``[-1, 1)`` from the top 53 bits of :func:`splitmix64`."""
    bits = splitmix64(seed, count) >> np.uint64(11)
    return 2.0 * bits.astype(np.float64) * 2.0**-53 - 1.0


# -- configuration --------------------------------------------------------------------

_FACTORS = {
    "constant": (constant_factor, {"c"}),
    "oscillating": (oscillating_factor, {"amp", "freq"}),
    "rational": (rational_factor, {"q"}),
}
_SYMBOL_KEYS = {
    "korobov": {"kind", "r"},
    "mask": {"kind", "r", "kappa", "F"},
    "exponent": {"kind", "s", "F"},
}


def _factor(spec, allowed: set):
    if spec is None:
        spec = {"kind": "constant"}
    if isinstance(spec, str):
        spec = {"kind": spec}
    if not isinstance(spec, dict) or spec.get("kind") not in allowed:
        raise ConfigError(f"factor must be one of {sorted(allowed)}, got {spec!r}")
    make, keys = _FACTORS[spec["kind"]]
    extra = set(spec) - keys - {"kind"}
    if extra:
        raise ConfigError(f"unknown factor keys {sorted(extra)}")
    return make(**{k: float(v) for k, v in spec.items() if k != "kind"})


def build_symbol(spec: dict) -> Symbol:
    """Construct a symbol from ``{"kind": ..., parameters}``."""
    if not isinstance(spec, dict) or spec.get("kind") not in _SYMBOL_KEYS:
        raise ConfigError(f"symbol kind must be one of {sorted(_SYMBOL_KEYS)}, got {spec!r}")
    kind = spec["kind"]
    extra = set(spec) - _SYMBOL_KEYS[kind]
    if extra:
        raise ConfigError(f"unknown {kind} keys {sorted(extra)}")
    try:
        if kind == "korobov":
            return make_korobov(float(spec["r"]))
        if kind == "mask":
            factor = _factor(spec.get("F"), {"constant", "oscillating"})
            return make_mask(float(spec["r"]), float(spec.get("kappa", 0.0)), factor)
        factor = _factor(spec.get("F"), {"constant", "rational"})
        return make_exponent(float(spec["s"]), factor)
    except KeyError as exc:
        raise ConfigError(f"{kind} symbol needs parameter {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from None


def parse_symbol_text(text: str) -> dict:
    """``"mask:r=2,kappa=1,F=oscillating,amp=0.3"`` to a symbol spec dict."""
    kind, _, rest = text.partition(":")
    spec: dict[str, Any] = {"kind": kind.strip()}
    factor: dict[str, Any] = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"expected key=value in {text!r}")
        key = key.strip()
        if key == "F":
            factor["kind"] = value.strip()
        elif key in {"c", "amp", "freq", "q"}:
            factor[key] = float(value)
        else:
            try:
                spec[key] = float(value)
            except ValueError:
                raise ConfigError(f"non-numeric value in {item!r}") from None
    if factor:
        factor.setdefault("kind", "constant")
        spec["F"] = factor
    return spec


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment input; see the module docstring for the schema."""

    lam: dict
    beta: dict | None
    d: int
    p: float
    m_list: tuple
    g_spec: dict
    tolerances: dict = field(default_factory=dict)
    output: str | None = None

    @property
    def lam_symbol(self) -> Symbol:
        return build_symbol(self.lam)

    @property
    def beta_symbol(self) -> Symbol:
        return self.lam_symbol if self.beta is None else build_symbol(self.beta)


_CONFIG_KEYS = {"lambda", "beta", "d", "p", "m_list", "g_spec", "tolerances", "output"}
_G_KEYS = {"seed", "max_degree", "decay"}
_TOL_KEYS = {"tail_tol", "alias_rel_tol"}


def _parse_p(value) -> float:
    if isinstance(value, str) and value.strip().lower() in {"inf", "infinity"}:
        return math.inf
    try:
        p = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"p must be a number >= 1 or 'inf', got {value!r}") from None
    if not p >= 1:
        raise ConfigError(f"p must be >= 1, got {p}")
    return p


def parse_config(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    extra = set(data) - _CONFIG_KEYS
    if extra:
        raise ConfigError(f"unknown configuration keys {sorted(extra)}")
    for key in ("lambda", "m_list"):
        if key not in data:
            raise ConfigError(f"missing required key {key!r}")
    m_list = data["m_list"]
    if (
        not isinstance(m_list, list)
        or not m_list
        or not all(isinstance(m, int) and not isinstance(m, bool) for m in m_list)
    ):
        raise ConfigError("m_list must be a non-empty list of integers")
    d = data.get("d", 1)
    if not isinstance(d, int) or d < 1:
        raise ConfigError("d must be a positive integer")
    low = 0 if d > 1 else 1
    if any(m < low for m in m_list) or any(b <= a for a, b in zip(m_list, m_list[1:])):
        raise ConfigError("m_list must be strictly increasing with positive entries")
    g_spec = data.get("g_spec", {"seed": 0})
    if not isinstance(g_spec, dict):
        raise ConfigError("g_spec must be an object")
    if "coefficients" in g_spec:
        if set(g_spec) != {"coefficients"}:
            raise ConfigError("explicit g_spec takes only 'coefficients'")
    else:
        bad = set(g_spec) - _G_KEYS
        if bad:
            raise ConfigError(f"unknown g_spec keys {sorted(bad)}")
        if g_spec.get("max_degree") is not None and int(g_spec["max_degree"]) < 1:
            raise ConfigError("max_degree must be >= 1")
    tol = data.get("tolerances", {}) or {}
    bad = set(tol) - _TOL_KEYS
    if bad:
        raise ConfigError(f"unknown tolerance keys {sorted(bad)}")
    cfg = ExperimentConfig(
        lam=data["lambda"],
        beta=data.get("beta"),
        d=d,
        p=_parse_p(data.get("p", 2)),
        m_list=tuple(m_list),
        g_spec=dict(g_spec),
        tolerances=dict(tol),
        output=data.get("output"),
    )
    cfg.lam_symbol  # noqa: B018 - validates the symbol specs
    cfg.beta_symbol  # noqa: B018
    for spec in (cfg.lam, cfg.beta):
        if spec is not None and float(spec.get("kappa", 0.0)) < 0:
            raise ConfigError("experiments use kappa >= 0")
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    return parse_config(data)


# -- generators -------------------------------------------------------------------------


def _draw(seed: int, degree: int, d: int, decay: float) -> np.ndarray:
    shape = (2 * degree + 1,) * d
    idx = np.indices(shape).reshape(d, -1).T - degree
    # Representatives of +-k pairs: first nonzero entry positive.
    first = np.array([next((v for v in k if v), 0) for k in idx])
    upper = np.flatnonzero(first > 0)
    u = uniform_draws(seed, 1 + 2 * len(upper))
    flat = np.zeros(len(idx), dtype=complex)
    flat[upper] = u[1::2] + 1j * u[2::2]
    arr = flat.reshape(shape)
    arr = arr + np.conj(np.flip(arr))
    arr[(degree,) * d] = u[0]
    if decay:
        for axis in range(d):
            w = np.maximum(1, np.abs(np.arange(-degree, degree + 1))) ** (-float(decay))
            sh = [1] * d
            sh[axis] = -1
            arr = arr * w.reshape(sh)
    return arr


def gen_g(spec: dict, d: int = 1, p: float = 2.0, m_list=(1,)) -> SpectralCoefficients:
    """Generator ``g`` with ``||g||_p = 1``.

    Random coefficients are uniform on ``[-1, 1)`` in real and imaginary part
    for ``0 < |k|_inf <= max_degree`` (one draw per conjugate pair), real at 0,
    optionally damped by ``prod_j max(1, |k_j|)^(-decay)``.  ``max_degree``
    defaults to ``2 * max(m_list)``.  An all-zero draw is redrawn with
    ``seed + 1``.
    """
    if "coefficients" in spec:
        coeffs = {}
        for row in spec["coefficients"]:
            if len(row) != d + 2:
                raise ConfigError(f"coefficient rows need {d} indices plus re, im")
            coeffs[tuple(int(v) for v in row[:d])] = complex(row[d], row[d + 1])
        try:
            g = SpectralCoefficients.from_dict(coeffs, dim=d)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    else:
        seed = int(spec.get("seed", 0))
        degree = spec.get("max_degree")
        degree = 2 * max(m_list) if degree is None else int(degree)
        if degree < 1:
            raise ConfigError("max_degree must be >= 1")
        arr = _draw(seed, degree, d, spec.get("decay", 0.0))
        while not np.any(arr):
            seed += 1
            arr = _draw(seed, degree, d, spec.get("decay", 0.0))
        g = SpectralCoefficients(arr)
    norm = lp_norm(g, p)
    if not norm > 0:
        raise ConfigError("generator g is identically zero")
    return g * (1.0 / norm)


# -- sweeps ----------------------------------------------------------------------------


@dataclass(frozen=True)
class RateFitResult:
    """Fitted convergence rate and the table behind it."""

    fitted_rate: float
    log_log_correction_used: bool
    log_log_exponent: float
    residual: float
    variable: str
    table: tuple

    def ratios(self) -> list:
        return [row["error"] / row["reference"] for row in self.table]


def fit_rate(x: np.ndarray, errors: np.ndarray, loglog_exponent: float) -> tuple[float, float]:
    """Slope of ``log e - c log log x = a - rho log x`` with ``c`` pinned.

    Returns ``(rho, rms residual)``.
    """
    x = np.asarray(x, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if len(x) < 3:
        raise ConfigError("rate fit needs at least 3 values of m")
    if np.any(errors <= 0) or not np.all(np.isfinite(errors)):
        raise NumericFailure("errors must be finite and positive for a log-log fit")
    y = np.log(errors) - loglog_exponent * np.log(np.log(x))
    design = np.column_stack([np.ones_like(x), np.log(x)])
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    return float(-coef[1]), float(np.sqrt(np.mean(resid**2)))


def _lam_rate(spec: dict) -> tuple[float, float]:
    if spec["kind"] not in ("korobov", "mask"):
        raise ConfigError("multivariate runs need a korobov or mask lambda")
    return float(spec["r"]), float(spec.get("kappa", 0.0))


def run_univariate(cfg: ExperimentConfig) -> RateFitResult:
    """Sweep ``||f - Q_{m,beta} f||_p`` over ``m_list`` and fit the rate."""
    if cfg.d != 1:
        raise ConfigError("run_univariate needs d = 1")
    if len(cfg.m_list) < 3:
        raise ConfigError("rate fit needs at least 3 values of m")
    lam, beta, theta = cfg.lam_symbol, cfg.beta_symbol, make_theta()
    g = gen_g(cfg.g_spec, 1, cfg.p, cfg.m_list)
    F = HLambdaFunction(g, lam)
    kappa = float(cfg.lam.get("kappa", 0.0)) if cfg.lam["kind"] == "mask" else 0.0
    rows = []
    for m in cfg.m_list:
        err = approx_error(F, beta, theta, m, cfg.p)
        ref = epsilon_m(lam, beta, m)
        if not (math.isfinite(err) and math.isfinite(ref) and ref > 0):
            raise NumericFailure(f"non-finite error or reference at m={m}")
        rows.append({"m": m, "n": 2 * m + 1, "error": err, "reference": ref})
    rho, resid = fit_rate(np.array(cfg.m_list), np.array([r["error"] for r in rows]), -kappa)
    return RateFitResult(rho, kappa != 0, -kappa, resid, "m", tuple(rows))


def run_multivariate(cfg: ExperimentConfig) -> RateFitResult:
    """Sweep ``||f - P_m f||_p`` against ``n = sum_cardinality(G^d(m))``."""
    if cfg.d < 2:
        raise ConfigError("run_multivariate needs d >= 2")
    if cfg.beta is not None and cfg.beta != cfg.lam:
        raise ConfigError("the multivariate operator uses beta = lambda")
    if len(cfg.m_list) < 3:
        raise ConfigError("rate fit needs at least 3 values of m")
    r, kappa = _lam_rate(cfg.lam)
    lam, theta = cfg.lam_symbol, make_theta()
    g = gen_g(cfg.g_spec, cfg.d, cfg.p, cfg.m_list)
    rows = []
    for m in cfg.m_list:
        err = mv.smolyak_error(g, lam, theta, m, cfg.p)
        if not math.isfinite(err):
            raise NumericFailure(f"non-finite error at m={m}")
        ref = 2.0 ** (-r * m) * max(m, 1) ** (cfg.d - 1 - kappa)
        rows.append({"m": m, "n": mv.sum_cardinality(cfg.d, m), "error": err, "reference": ref})
    corr = r * (cfg.d - 1) - kappa
    ns = np.array([row["n"] for row in rows], dtype=float)
    rho, resid = fit_rate(ns, np.array([row["error"] for row in rows]), corr)
    return RateFitResult(rho, corr != 0, corr, resid, "n", tuple(rows))


# -- output ------------------------------------------------------------------------------


def _num(x: float) -> str:
    return repr(float(x))


def to_csv(result: RateFitResult) -> str:
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for row in sorted(result.table, key=lambda r: r["m"]):
        ratio = row["error"] / row["reference"]
        out.write(f"{row['m']},{row['n']},{_num(row['error'])},{_num(row['reference'])},{_num(ratio)}\n")
    return out.getvalue()


def to_json(result: RateFitResult) -> str:
    data = asdict(result)
    data["table"] = [dict(row) for row in sorted(result.table, key=lambda r: r["m"])]
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def emit(result: RateFitResult, path: str | Path, fmt: str = "csv") -> Path:
    """Write ``result`` as CSV or JSON to ``path``."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    path = Path(path)
    text = to_csv(result) if fmt == "csv" else to_json(result)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path
