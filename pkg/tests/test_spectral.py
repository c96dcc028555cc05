import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torus_translates.spectral import (
    GridSamples,
    SpectralCoefficients,
    coeffs_from_samples,
    convolve,
    dumps,
    evaluate,
    fold,
    loads,
    lp_norm,
    sample,
)
from torus_translates.symbols import make_korobov

from conftest import random_coeffs


def direct_dft(values):
    """O(M^2) DFT oracle: c_j = M^-1 sum_s v_s e^{-2 pi i j s / M}."""
    m = len(values)
    s = np.arange(m)
    half = (m - 1) // 2
    return {j: np.sum(values * np.exp(-2j * np.pi * j * s / m)) / m for j in range(-half, half + 1)}


class TestSpectralCoefficients:
    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            SpectralCoefficients.from_dict({1: 1.0, -1: 2.0})

    def test_rejects_even_shape(self):
        with pytest.raises(ValueError):
            SpectralCoefficients(np.ones(4))

    def test_absent_index_is_zero(self):
        c = SpectralCoefficients.from_dict({0: 1.0}, bound=3)
        assert c.coeff(2) == 0
        assert c.coeff(17) == 0

    def test_immutable(self):
        c = SpectralCoefficients.from_dict({0: 1.0})
        with pytest.raises(ValueError):
            c.array[0] = 2

    def test_dict_round_trip(self):
        d = {(1, -2): 1 + 2j, (-1, 2): 1 - 2j, (0, 0): 3.0}
        c = SpectralCoefficients.from_dict(d, dim=2)
        assert c.bound == (1, 2)
        assert c.to_dict() == pytest.approx(d)

    def test_arithmetic(self):
        a = SpectralCoefficients.from_dict({1: 1, -1: 1})
        b = SpectralCoefficients.from_dict({0: 2}, bound=3)
        assert (a + b).to_dict() == {-1: 1, 0: 2, 1: 1}
        assert (a * 2 - a).to_dict() == a.to_dict()
        assert (-a).coeff(1) == -1


class TestCoeffsFromSamples:
    def test_constant(self):
        c = coeffs_from_samples(GridSamples(1, 8, np.ones(8)))
        assert c.coeff(0) == pytest.approx(1)
        assert np.allclose(np.delete(c.array, c.bound[0]), 0)

    def test_cosine(self):
        x = 2 * np.pi * np.arange(8) / 8
        c = coeffs_from_samples(GridSamples(1, 8, np.cos(x)))
        assert c.bound == (3,)
        assert c.coeff(1) == pytest.approx(0.5)
        assert c.coeff(-1) == pytest.approx(0.5)
        assert abs(c.coeff(2)) < 1e-15

    def test_against_direct_dft(self):
        x = 2 * np.pi * np.arange(16) / 16
        v = np.cos(3 * x) + 2 * np.sin(5 * x)
        c = coeffs_from_samples(GridSamples(1, 16, v))
        oracle = direct_dft(v)
        for j in range(-7, 8):
            assert c.coeff(j) == pytest.approx(oracle[j], abs=1e-14)
        assert c.coeff(5) == pytest.approx(-1j)
        assert c.coeff(-5) == pytest.approx(1j)
        assert c.coeff(3) == pytest.approx(0.5)

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            GridSamples(1, 0, np.array([]))


class TestEvaluate:
    def test_constant(self):
        assert evaluate(SpectralCoefficients.from_dict({0: 1.0}), 1.234) == 1.0

    def test_cos(self):
        c = SpectralCoefficients.from_dict({1: 0.5, -1: 0.5})
        assert evaluate(c, 0.0) == pytest.approx(1)
        assert evaluate(c, math.pi) == pytest.approx(-1)

    def test_hand_value(self):
        c = SpectralCoefficients.from_dict({3: 0.5 - 0.25j, -3: 0.5 + 0.25j})
        assert evaluate(c, math.pi / 6) == pytest.approx(0.5, abs=1e-14)
        # Cross-check through the grid round trip.
        grid = sample(c, 12)
        assert grid.values[1] == pytest.approx(0.5, abs=1e-14)

    def test_vector_and_multivariate(self):
        c = random_coeffs(3, 2, dim=2)
        pts = np.array([[0.1, 0.2], [1.0, -3.0]])
        kk = np.indices((5, 5)).reshape(2, -1).T - 2
        for p, got in zip(pts, evaluate(c, pts)):
            want = sum(c.coeff(tuple(k)) * np.exp(1j * k @ p) for k in kk).real
            assert got == pytest.approx(want, abs=1e-13)


class TestSampleAndFold:
    def test_fold_matches_loop(self):
        c = random_coeffs(0, 9)
        folded = fold(c.array, c.bound, 4)
        for rho in range(4):
            want = sum(c.coeff(j) for j in range(-9, 10) if j % 4 == rho)
            assert folded[rho] == pytest.approx(want)

    def test_aliased_samples_exact(self):
        c = random_coeffs(1, 20)
        grid = sample(c, 7)
        assert np.allclose(grid.values, evaluate(c, grid.nodes()), atol=1e-12)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10**6), st.integers(0, 6), st.integers(1, 2))
    def test_round_trip(self, seed, degree, dim):
        c = random_coeffs(seed, degree, dim)
        back = coeffs_from_samples(sample(c, 2 * degree + 3))
        assert np.allclose(back.resized(degree).array, c.array, atol=1e-10)


class TestConvolve:
    def test_delta(self):
        b = random_coeffs(2, 3)
        out = convolve(SpectralCoefficients.from_dict({0: 1.0}), b)
        assert out.bound == (0,)
        assert out.coeff(0) == pytest.approx(b.coeff(0))

    def test_cosines(self):
        a = SpectralCoefficients.from_dict({1: 0.5, -1: 0.5})
        assert convolve(a, a).to_dict() == pytest.approx({-1: 0.25, 1: 0.25})

    def test_korobov_kernel(self):
        lam = make_korobov(2)
        k = np.arange(-4, 5)
        phi = SpectralCoefficients(lam(k.astype(float)).astype(complex))
        out = convolve(phi, SpectralCoefficients.from_dict({2: 1.0, -2: 1.0}))
        assert out.coeff(2) == pytest.approx(0.25)
        assert out.coeff(-2) == pytest.approx(0.25)

    def test_convolution_integral(self):
        # (2pi)^-1 int a(y) b(x - y) dy by a Riemann sum that is exact for trig polynomials.
        a, b = random_coeffs(4, 3), random_coeffs(5, 3)
        y = 2 * np.pi * np.arange(32) / 32
        x = 0.7
        want = np.mean(evaluate(a, y) * evaluate(b, x - y))
        assert evaluate(convolve(a, b), x) == pytest.approx(want, abs=1e-13)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            convolve(random_coeffs(0, 1), random_coeffs(0, 1, dim=2))

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10**6), st.floats(-3, 3), st.floats(-3, 3))
    def test_bilinear_commutative(self, seed, s, t):
        a, b, c = (random_coeffs(seed + i, 3) for i in range(3))
        lhs = convolve(a * s + b * t, c)
        rhs = convolve(a, c) * s + convolve(b, c) * t
        assert np.allclose(lhs.array, rhs.array)
        assert np.allclose(convolve(a, b).array, convolve(b, a).array)


class TestLpNorm:
    @pytest.mark.parametrize("p", [1, 1.5, 2, 3, math.inf])
    def test_constant(self, p):
        assert lp_norm(SpectralCoefficients.from_dict({0: 1.0}), p) == pytest.approx(1, abs=1e-12)

    def test_parseval(self):
        c = SpectralCoefficients.from_dict({3: 1.0, -3: 1.0})
        assert lp_norm(c, 2) == pytest.approx(math.sqrt(2))

    def test_sup(self):
        c = SpectralCoefficients.from_dict({3: 1.0, -3: 1.0})
        assert lp_norm(c, math.inf) == pytest.approx(2, abs=1e-6)

    def test_l1_of_cosine(self):
        # (2pi)^-1 int |2 cos 3x| dx = 4/pi
        c = SpectralCoefficients.from_dict({3: 1.0, -3: 1.0})
        assert lp_norm(c, 1) == pytest.approx(4 / math.pi, rel=1e-6)

    def test_sup_off_grid(self):
        # Maximum of cos(x - 0.123) is 1 but not at a grid node.
        c = SpectralCoefficients.from_dict({1: 0.5 * np.exp(-0.123j), -1: 0.5 * np.exp(0.123j)})
        assert lp_norm(c, math.inf) == pytest.approx(1, abs=1e-12)

    def test_rejects_small_p(self):
        with pytest.raises(ValueError):
            lp_norm(SpectralCoefficients.from_dict({0: 1.0}), 0.5)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10**6), st.integers(1, 2))
    def test_monotone_in_p(self, seed, dim):
        c = random_coeffs(seed, 4, dim)
        n1, n2, ninf = (lp_norm(c, p) for p in (1, 2, math.inf))
        assert n1 <= n2 * (1 + 1e-9)
        assert n2 <= ninf * (1 + 1e-9)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10**6))
    def test_parseval_property(self, seed):
        c = random_coeffs(seed, 5, 2)
        assert lp_norm(c, 2) ** 2 == pytest.approx(np.sum(np.abs(c.array) ** 2), rel=1e-12)


class TestSerialisation:
    def test_round_trip(self):
        c = random_coeffs(9, 2, dim=2)
        assert np.array_equal(loads(dumps(c)).array, c.array)
