import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torus_translates import experiments as ex
from torus_translates.spectral import lp_norm

MASK64 = (1 << 64) - 1


def splitmix_reference(seed, count):
    """Plain integer splitmix64."""
    state, out = seed & MASK64, []
    for _ in range(count):
        state = (state + 0x9E3779B97F4A7C15) & MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        out.append(z ^ (z >> 31))
    return out


def base_config(**over):
    data = {
        "lambda": {"kind": "korobov", "r": 2},
        "d": 1,
        "p": 2,
        "m_list": [8, 16, 32],
        "g_spec": {"seed": 0, "max_degree": 4},
    }
    data.update(over)
    return data


class TestSplitmix:
    def test_known_first_output(self):
        assert int(ex.splitmix64(0, 1)[0]) == 0xE220A8397B1DCDAF

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**64 - 1))
    def test_matches_reference(self, seed):
        assert [int(v) for v in ex.splitmix64(seed, 5)] == splitmix_reference(seed, 5)

    def test_uniform_range(self):
        u = ex.uniform_draws(3, 10000)
        assert u.min() >= -1 and u.max() < 1
        assert abs(u.mean()) < 0.05


class TestGenG:
    def test_explicit_constant(self):
        for p in (1, 2, math.inf):
            g = ex.gen_g({"coefficients": [[0, 1, 0]]}, 1, p)
            assert g.to_dict() == {0: 1}
            assert lp_norm(g, p) == pytest.approx(1)

    @pytest.mark.parametrize("p", [1, 2, math.inf])
    @pytest.mark.parametrize("d", [1, 2])
    def test_normalised(self, p, d):
        g = ex.gen_g({"seed": 0, "max_degree": 4}, d, p)
        assert lp_norm(g, p) == pytest.approx(1, abs=1e-12 if p == 2 else 1e-9)

    def test_deterministic(self):
        a = ex.gen_g({"seed": 5, "max_degree": 6}, 2)
        b = ex.gen_g({"seed": 5, "max_degree": 6}, 2)
        assert np.array_equal(a.array, b.array)

    def test_hermitian_and_draw_layout(self):
        g = ex.gen_g({"seed": 7, "max_degree": 3}, 1)
        raw = ex.uniform_draws(7, 7)
        scale = g.coeff(0).real / raw[0]
        assert g.coeff(1) == pytest.approx(scale * (raw[1] + 1j * raw[2]))
        assert g.coeff(-1) == pytest.approx(np.conj(g.coeff(1)))
        assert g.coeff(3) == pytest.approx(scale * (raw[5] + 1j * raw[6]))

    def test_default_degree(self):
        g = ex.gen_g({"seed": 1}, 1, 2, m_list=(4, 8))
        assert g.bound == (16,)

    def test_decay(self):
        flat = ex.gen_g({"seed": 2, "max_degree": 16}, 1)
        damped = ex.gen_g({"seed": 2, "max_degree": 16, "decay": 1.0}, 1)
        k = np.maximum(1, np.abs(flat.frequencies()))
        ratio = damped.array / (flat.array / k)
        assert np.allclose(ratio, ratio[0])

    def test_bad_degree(self):
        with pytest.raises(ex.ConfigError):
            ex.gen_g({"seed": 0, "max_degree": 0})


class TestConfig:
    def test_round_trip(self):
        cfg = ex.parse_config(base_config(p="inf"))
        assert cfg.p == math.inf
        assert cfg.beta_symbol is not None

    @pytest.mark.parametrize(
        "change",
        [
            {"bogus": 1},
            {"m_list": [8, 8, 16]},
            {"m_list": [16, 8]},
            {"m_list": []},
            {"p": 0.5},
            {"lambda": {"kind": "korobov", "r": 1}},
            {"lambda": {"kind": "korobov", "r": 2, "s": 1}},
            {"lambda": {"kind": "nope"}},
            {"beta": {"kind": "exponent", "s": -1}},
            {"g_spec": {"seed": 0, "colour": 1}},
            {"g_spec": {"seed": 0, "max_degree": 0}},
            {"tolerances": {"tail": 1}},
            {"d": 0},
            {"lambda": {"kind": "mask", "r": 2, "kappa": -1}},
        ],
    )
    def test_rejects(self, change):
        with pytest.raises(ex.ConfigError):
            ex.parse_config(base_config(**change))

    def test_factor_specs(self):
        cfg = ex.parse_config(
            base_config(
                **{
                    "lambda": {"kind": "mask", "r": 2, "kappa": 1, "F": {"kind": "oscillating", "amp": 0.2}},
                    "beta": {"kind": "exponent", "s": 1, "F": {"kind": "rational", "q": 1}},
                }
            )
        )
        assert cfg.beta_symbol(1.0) == pytest.approx(math.exp(-1) / 2)
        with pytest.raises(ex.ConfigError):
            ex.build_symbol({"kind": "exponent", "s": 1, "F": "oscillating"})

    def test_symbol_text(self):
        spec = ex.parse_symbol_text("mask:r=2,kappa=1,F=oscillating,amp=0.3")
        assert spec == {"kind": "mask", "r": 2.0, "kappa": 1.0, "F": {"kind": "oscillating", "amp": 0.3}}
        with pytest.raises(ex.ConfigError):
            ex.parse_symbol_text("korobov:r")

    def test_load_errors(self, tmp_path):
        with pytest.raises(ex.ConfigError):
            ex.load_config(tmp_path / "missing.json")
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ex.ConfigError):
            ex.load_config(bad)


class TestFit:
    def test_exact_power_law(self):
        m = np.array([4, 8, 16, 32])
        rho, resid = ex.fit_rate(m, 3.0 * m**-2.5, 0.0)
        assert rho == pytest.approx(2.5)
        assert resid < 1e-12

    def test_pinned_loglog(self):
        m = np.array([4.0, 8, 16, 32, 64])
        rho, _ = ex.fit_rate(m, m**-2 * np.log(m) ** -1.0, -1.0)
        assert rho == pytest.approx(2)

    def test_refuses_short(self):
        with pytest.raises(ex.ConfigError):
            ex.fit_rate(np.array([1, 2]), np.array([1.0, 0.5]), 0)

    def test_nonpositive(self):
        with pytest.raises(ex.NumericFailure):
            ex.fit_rate(np.array([2, 4, 8]), np.array([1.0, 0.0, 0.5]), 0)


class TestRuns:
    def test_univariate_table(self):
        res = ex.run_univariate(ex.parse_config(base_config()))
        assert [row["m"] for row in res.table] == [8, 16, 32]
        assert [row["n"] for row in res.table] == [17, 33, 65]
        assert res.residual >= 0
        assert not res.log_log_correction_used
        assert 1.8 <= res.fitted_rate <= 2.2

    def test_univariate_needs_three(self):
        with pytest.raises(ex.ConfigError):
            ex.run_univariate(ex.parse_config(base_config(m_list=[8, 16])))

    def test_mask_loglog(self):
        cfg = ex.parse_config(
            base_config(**{"lambda": {"kind": "mask", "r": 2, "kappa": 1}, "m_list": [16, 32, 64, 128, 256]})
        )
        res = ex.run_univariate(cfg)
        assert res.log_log_correction_used
        assert 1.8 <= res.fitted_rate <= 2.2

    def test_epsilon_ratio_bounded(self):
        res = ex.run_univariate(ex.parse_config(base_config(p=1, m_list=[8, 16, 32, 64, 128])))
        ratios = res.ratios()
        assert max(ratios) / min(ratios) < 4

    def test_multivariate(self):
        cfg = ex.parse_config(base_config(d=2, m_list=[1, 2, 3, 4]))
        res = ex.run_multivariate(cfg)
        assert res.table[0]["n"] == 39
        errs = [row["error"] for row in res.table]
        assert all(b < a for a, b in zip(errs, errs[1:]))
        assert res.log_log_exponent == 2

    def test_multivariate_rejects(self):
        with pytest.raises(ex.ConfigError):
            ex.run_multivariate(ex.parse_config(base_config()))
        cfg = ex.parse_config(base_config(d=2, beta={"kind": "exponent", "s": 1}))
        with pytest.raises(ex.ConfigError):
            ex.run_multivariate(cfg)


class TestEmit:
    def result(self, rows=()):
        return ex.RateFitResult(2.0, False, 0.0, 0.0, "m", tuple(rows))

    def test_header_only(self):
        assert ex.to_csv(self.result()) == "m,n,error,reference,ratio\n"

    def test_ratio_column(self):
        row = {"m": 4, "n": 9, "error": 0.5, "reference": 2.0}
        line = ex.to_csv(self.result([row])).splitlines()[1]
        assert line.split(",")[-1] == "0.25"

    def test_sorted_by_m(self):
        rows = [{"m": m, "n": 1, "error": 1.0, "reference": 1.0} for m in (8, 2, 4)]
        lines = ex.to_csv(self.result(rows)).splitlines()[1:]
        assert [int(line.split(",")[0]) for line in lines] == [2, 4, 8]

    def test_json_mirrors(self, tmp_path):
        rows = [{"m": 3, "n": 7, "error": 0.1, "reference": 0.2}]
        path = ex.emit(self.result(rows), tmp_path / "out" / "r.json", "json")
        data = json.loads(path.read_text())
        assert data["fitted_rate"] == 2.0
        assert data["table"] == rows

    def test_byte_stable(self, tmp_path):
        cfg = ex.parse_config(base_config())
        a = ex.to_csv(ex.run_univariate(cfg))
        b = ex.to_csv(ex.run_univariate(cfg))
        assert a == b

    def test_unwritable(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        with pytest.raises(OSError):
            ex.emit(self.result(), blocker / "x.csv")

    def test_bad_format(self, tmp_path):
        with pytest.raises(ValueError):
            ex.emit(self.result(), tmp_path / "x", "xml")
