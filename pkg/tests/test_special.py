import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from humbert_volterra.errors import DomainError, NotConverged, PoleParameter
from humbert_volterra.special import (
    Convergence,
    RowExpansion,
    SeriesControl,
    TIGHT_CONTROL,
    convergence_classification,
    f0211,
    f0211_array,
    f0211_system_residual,
    gauss_2f1,
    gauss_2f1_array,
    humbert_xi2,
    humbert_xi2_array,
    pochhammer,
    xi2_system_residual,
)


class TestPochhammer:
    def test_small_integers_exact(self):
        assert pochhammer(3, 4) == 3 * 4 * 5 * 6
        assert pochhammer(1, 5) == math.factorial(5)
        assert pochhammer(2.5, 0) == 1.0

    def test_nonpositive_integer_start_terminates(self):
        assert pochhammer(-3, 3) == -3 * -2 * -1
        assert pochhammer(-3, 4) == 0.0
        assert pochhammer(0, 1) == 0.0

    @pytest.mark.parametrize("a,k", [(-0.3, 10), (-7.5, 20), (0.5, 100), (-40.5, 90), (3.2, 150)])
    def test_against_mpmath(self, a, k):
        ref = float(mp.rf(a, k))
        assert pochhammer(a, k) == pytest.approx(ref, rel=1e-12)

    def test_sign_tracking_above_product_limit(self):
        # (-70.5)_70 has 70 negative factors, (-70.5)_71 has 71
        assert pochhammer(-70.5, 70) > 0
        assert pochhammer(-70.5, 71) < 0
        assert pochhammer(-70.5, 72) < 0

    def test_rejects_negative_k(self):
        with pytest.raises(ValueError):
            pochhammer(1.0, -1)


class TestGauss:
    @pytest.mark.parametrize(
        "a,b,c,z",
        [
            (0.3, 0.7, 1.2, 0.5),
            (0.3, 0.7, 1.2, -0.5),
            (-0.1, 1.1, 0.7, -3.0),
            (-0.1, 1.1, 1.3, -250.0),
            (0.25, 0.75, 1.3, -3e6),
            (1.5, 2.5, 4.2, 0.97),
            (0.4, 0.5, 1.9, 0.99),
            (0.5, 0.5, 2.0, 0.95),  # c - a - b integer: stays on the direct series
            (2.0, -3.0, 1.5, 0.8),  # terminating
        ],
    )
    def test_against_mpmath(self, a, b, c, z):
        res = gauss_2f1(a, b, c, z)
        assert res.converged
        assert res.value == pytest.approx(oracles.hyp2f1(a, b, c, z), rel=1e-11)

    def test_closed_form_log(self):
        # 2F1(1, 1; 2; z) = -log(1 - z) / z
        for z in (-0.9, -0.2, 0.3, 0.8):
            assert gauss_2f1(1, 1, 2, z).value == pytest.approx(-math.log1p(-z) / z, rel=1e-12)

    def test_value_at_origin(self):
        assert gauss_2f1(0.3, 0.4, 0.5, 0.0).value == 1.0

    @settings(max_examples=60, deadline=None)
    @given(
        a=st.floats(-2.5, 2.5),
        b=st.floats(-2.5, 2.5),
        c=st.floats(0.1, 4.0),
        z=st.floats(-0.99, -0.01),
    )
    def test_pfaff_matches_series_on_unit_interval(self, a, b, c, z):
        direct = gauss_2f1(a, b, c, z, method="series")
        pfaff = gauss_2f1(a, b, c, z, method="pfaff")
        budget = direct.est_error + pfaff.est_error + 1e-12 * abs(pfaff.value) + 1e-15
        assert abs(pfaff.value - direct.value) <= budget

    def test_array_matches_scalar(self):
        z = np.linspace(-5, 0.9, 13)
        arr = gauss_2f1_array(0.3, 0.7, 1.2, z)
        for zi, v in zip(z, arr):
            assert v == pytest.approx(gauss_2f1(0.3, 0.7, 1.2, zi).value, rel=1e-14)

    def test_pole_parameter(self):
        with pytest.raises(PoleParameter):
            gauss_2f1(1.0, 1.0, -2.0, 0.1)

    @pytest.mark.parametrize("z", [1.0, 1.5])
    def test_domain(self, z):
        with pytest.raises(DomainError):
            gauss_2f1(0.2, 0.3, 1.1, z)

    def test_cap_reports_failure(self):
        tiny = SeriesControl(max_outer_terms=3, max_inner_terms=3)
        with pytest.raises(NotConverged) as info:
            gauss_2f1(0.5, 0.7, 1.1, 0.8, tiny)
        assert info.value.partial is not None
        soft = gauss_2f1(0.5, 0.7, 1.1, 0.8, tiny, strict=False)
        assert not soft.converged
        assert soft.terms_used == 3

    @pytest.mark.parametrize("z", [0.6, -0.96875])
    def test_error_estimate_covers_cancellation(self, z):
        res = gauss_2f1(2.0, 2.0, 1.0, z, method="series")
        assert abs(res.value - oracles.hyp2f1(2.0, 2.0, 1.0, z)) <= res.est_error

    def test_spec_closed_form_shorthand(self):
        # 2F1(1/2, 1; 2; z) = 2 (1 - sqrt(1 - z)) / z
        for z in (0.1, 0.5, 0.8):
            assert gauss_2f1(0.5, 1, 2, z).value == pytest.approx(
                2 * (1 - math.sqrt(1 - z)) / z, rel=1e-13)


class TestHumbert:
    @pytest.mark.parametrize(
        "a,b,d,u,w",
        [(0.25, 0.75, 1.3, -0.4, 0.2), (-0.1, 1.1, 1.3, 0.5, -2.0), (0.3, 0.6, 0.8, 0.85, 1.0)],
    )
    def test_raw_series_oracle(self, a, b, d, u, w):
        assert humbert_xi2(a, b, d, u, w).value == pytest.approx(
            oracles.xi2_raw(a, b, d, u, w), rel=1e-10)

    @pytest.mark.parametrize("u", [-1.5, -40.0, -1e4])
    def test_continued_rows(self, u):
        ref = oracles.xi2_rows(-0.1, 1.1, 1.3, u, 0.7)
        assert humbert_xi2(-0.1, 1.1, 1.3, u, 0.7).value == pytest.approx(ref, rel=1e-11)

    def test_w_zero_is_gauss(self):
        for u in (-3.0, -0.4, 0.6):
            assert humbert_xi2(0.2, 0.9, 1.4, u, 0.0).value == pytest.approx(
                gauss_2f1(0.2, 0.9, 1.4, u).value, rel=1e-14)

    def test_u_zero_is_0f1(self):
        ref = float(mp.hyp0f1(1.3, 0.8))
        assert humbert_xi2(0.2, 0.9, 1.3, 0.0, 0.8).value == pytest.approx(ref, rel=1e-13)

    def test_array(self):
        u = np.array([-5.0, -0.5, 0.3])
        w = np.array([0.1, -1.0, 2.0])
        arr = humbert_xi2_array(0.2, 0.8, 1.5, u, w)
        for ui, wi, v in zip(u, w, arr):
            assert v == pytest.approx(humbert_xi2(0.2, 0.8, 1.5, ui, wi).value, rel=1e-14)

    def test_pole_in_rows(self):
        with pytest.raises(PoleParameter):
            humbert_xi2(0.2, 0.3, -1.0, 0.1, 0.1)


class TestF0211:
    @pytest.mark.parametrize(
        "args",
        [(0.2, 0.3, 0.4, 1.5, 1.1, -0.3, 0.2), (0.1, 0.9, -0.8, 0.7, 0.3, 0.5, -1.5)],
    )
    def test_raw_series_oracle(self, args):
        assert f0211(*args).value == pytest.approx(oracles.f0211_raw(*args), rel=1e-10)

    def test_reduces_to_humbert(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            b, c = rng.uniform(-1, 1, 2)
            e = rng.uniform(0.3, 2.5)
            x = rng.uniform(-50, 0.9)
            y = rng.uniform(-3, 3)
            d = rng.uniform(0.2, 2.0)
            assert f0211(b, c, d, e, d, x, y).value == pytest.approx(
                humbert_xi2(b, c, e, x, y).value, rel=1e-12)

    def test_row_expansion_matches(self):
        x = np.linspace(-8, -0.01, 7)
        exp = RowExpansion(-0.1, 1.1, 1.3, x, 4.0, num=-0.8, den=-0.2)
        for y in (-3.0, 0.0, 2.5):
            ref = f0211_array(-0.1, 1.1, -0.8, 1.3, -0.2, x, np.full_like(x, y))
            np.testing.assert_allclose(exp(y), ref, rtol=1e-12)

    def test_row_expansion_is_read_only(self):
        exp = RowExpansion(0.1, 0.2, 1.3, np.array([-1.0, -2.0]), 1.0)
        with pytest.raises(ValueError):
            exp.rows[0, 0] = 1.0


class TestConvergence:
    def test_f0211_signature_is_boundary(self):
        assert convergence_classification(0, 2, 1, 1, 0, 1, 0.5, 10) is Convergence.UNKNOWN

    def test_everywhere(self):
        assert convergence_classification(0, 0, 0, 1, 0, 0, 5, 7) is Convergence.CONVERGES_ALL

    def test_mixed_rule(self):
        # p - l = 1: |x| + |y| < 1
        assert convergence_classification(2, 1, 1, 1, 1, 1, 0.3, 0.4) is Convergence.CONVERGES_MIXED
        assert convergence_classification(2, 1, 1, 1, 1, 1, 0.6, 0.6) is Convergence.UNKNOWN

    def test_unit_rule(self):
        assert convergence_classification(1, 1, 1, 1, 0, 0, 0.9, 0.9) is Convergence.CONVERGES_UNIT

    def test_strict_excess_is_unknown(self):
        assert convergence_classification(3, 0, 0, 0, 0, 0, 0.1, 0.1) is Convergence.UNKNOWN

    def test_enum_strings(self):
        assert Convergence.CONVERGES_ALL.value == "ConvergesAll"


class TestSystemResiduals:
    def test_xi2_small(self):
        r1, r2 = xi2_system_residual(0.3, 0.6, 1.4, 0.2, 0.5, h=1e-3)
        assert abs(r1) < 1e-5 and abs(r2) < 1e-5

    def test_f0211_small(self):
        r1, r2 = f0211_system_residual(0.3, 0.6, 0.8, 1.4, 1.1, 0.2, 0.5, h=2e-3)
        assert abs(r1) < 1e-4 and abs(r2) < 1e-4

    def test_f0211_equals_xi2_when_g_equals_d(self):
        xi = xi2_system_residual(0.3, 0.6, 1.4, -0.3, 0.4, h=1e-2)
        ff = f0211_system_residual(0.3, 0.6, 0.9, 1.4, 0.9, -0.3, 0.4, h=1e-2)
        assert ff[0] == pytest.approx(xi[0], rel=1e-6, abs=1e-12)

    def test_moment_stencil_matches_plain_differences(self):
        b, c, d, e, g, x, y, h = 0.3, 0.6, 0.8, 1.4, 1.1, 0.2, -0.5, 0.05

        def f(i, j):
            return f0211(b, c, d, e, g, x + i * h, y + j * h, TIGHT_CONTROL).value

        z_yyy = (f(0, 2) - 2 * f(0, 1) + 2 * f(0, -1) - f(0, -2)) / (2 * h**3)
        yy = [(f(i, 1) - 2 * f(i, 0) + f(i, -1)) / h**2 for i in (-1, 0, 1)]
        z_xyy = (yy[2] - yy[0]) / (2 * h)
        z_xy = (f(1, 1) - f(1, -1) - f(-1, 1) + f(-1, -1)) / (4 * h**2)
        z_y = (f(0, 1) - f(0, -1)) / (2 * h)
        r2 = (y**2 * z_yyy + x * y * z_xyy + g * x * z_xy + (e + g + 1) * y * yy[1]
              + (e * g - y) * z_y - d * f(0, 0))
        assert f0211_system_residual(b, c, d, e, g, x, y, h)[1] == pytest.approx(r2, rel=1e-8)

    @pytest.mark.parametrize("u,w", [(-0.6, 1.5), (0.3, 2.0), (0.6, -1.5)])
    def test_second_order_decay(self, u, w):
        hs = (1e-2, 5e-3, 2.5e-3)
        for fn in (lambda h: xi2_system_residual(0.3, 0.6, 1.4, u, w, h),
                   lambda h: f0211_system_residual(0.3, 0.6, 0.8, 1.4, 1.1, u, w, h)):
            r = np.abs([fn(h) for h in hs])
            np.testing.assert_allclose(r[:-1] / r[1:], 4.0, rtol=0.02)
