import math

import mpmath
import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from foliation_bounds.errors import DomainError, SeriesOverflow
from foliation_bounds.psi_kernel import (
    HALF_PI,
    Normalization,
    asymmetry_parameter,
    barrier_integral,
    barrier_integral_crosscheck,
    gradient_estimate_check,
    psi,
    psi_derivatives,
    psi_ode_residual,
    refined_zhong_yang,
    saturation_profile,
    series_coefficient,
    series_partial_sum,
)
from foliation_bounds.quadrature import adaptive_simpson, gauss_legendre

# int_0^{pi/2} psi^2 by mpmath tanh-sinh at 40 digits, with the outer half
# written in the complementary angle (see tests/oracles)
BARRIER_ORACLE = 0.46276098747269170529
# ((pi + (3/4)(1/4) I) / pi)^2 at 40 digits
REFINED_PI_THIRD = 1.0560008337927954901


def _sympy_residual(theta: float) -> float:
    """Residual of the psi ODE by symbolic differentiation, evaluated at 50 digits."""
    t = sp.Symbol("t")
    expr = 4 / sp.pi * (t * sp.sec(t) ** 2 + sp.tan(t)) - 2 * sp.tan(t) * sp.sec(t)
    ode = (
        sp.diff(expr, t, 2)
        - 2 * sp.tan(t) * sp.diff(expr, t)
        - 2 * sp.sec(t) ** 2 * expr
        + 2 * sp.tan(t) * sp.sec(t)
    )
    return abs(float(ode.evalf(50, subs={t: sp.Rational(theta)})))


def _mp_psi(theta: float) -> float:
    with mpmath.workdps(60):
        t = mpmath.mpf(theta)
        return float(4 / mpmath.pi * (t * mpmath.sec(t) ** 2 + mpmath.tan(t)) - 2 * mpmath.tan(t) * mpmath.sec(t))


class TestPsiValues:
    def test_zero(self):
        assert psi(0.0) == 0.0

    def test_endpoints(self):
        assert psi(HALF_PI) == pytest.approx(1.0, abs=1e-6)
        assert psi(-HALF_PI) == pytest.approx(-1.0, abs=1e-6)

    def test_quarter_pi(self):
        # sec^2 = 2 and tan = 1 at pi/4
        assert psi(math.pi / 4) == pytest.approx(2 + 4 / math.pi - 2 * math.sqrt(2), abs=1e-15)

    @pytest.mark.parametrize("theta", [0.3, 0.7, 1.2, 1.5, 1.57, HALF_PI - 1e-5, HALF_PI - 1e-7])
    def test_against_high_precision(self, theta):
        assert psi(theta) == pytest.approx(_mp_psi(theta), rel=1e-12, abs=1e-15)

    def test_array_input(self):
        th = np.array([[-1.0, 0.0], [0.5, HALF_PI]])
        out = psi(th)
        assert out.shape == th.shape
        assert out[1, 1] == pytest.approx(1.0)

    @pytest.mark.parametrize("bad", [HALF_PI + 1e-9, -2.0, float("nan")])
    def test_domain(self, bad):
        with pytest.raises(DomainError):
            psi(bad)

    def test_continuous_across_branch_switches(self):
        for x in (math.pi / 4, HALF_PI - 1e-4):
            left, right = psi(x - 1e-12), psi(x + 1e-12)
            assert abs(left - right) < 1e-10


class TestPsiProperties:
    @given(st.floats(min_value=-HALF_PI, max_value=HALF_PI))
    def test_odd(self, theta):
        assert psi(-theta) == -psi(theta)

    @given(st.floats(min_value=-HALF_PI, max_value=HALF_PI))
    def test_bounded(self, theta):
        assert -1.0 - 1e-12 <= psi(theta) <= 1.0 + 1e-12

    @settings(max_examples=50)
    @given(st.floats(min_value=0.0, max_value=HALF_PI - 1e-6), st.floats(min_value=1e-6, max_value=0.1))
    def test_monotone(self, a, step):
        b = min(a + step, HALF_PI)
        assert psi(b) >= psi(a) - 1e-14


class TestPsiOde:
    def test_origin(self):
        assert psi_ode_residual(0.0) <= 1e-12

    @pytest.mark.parametrize("theta", [0.7, -1.2])
    def test_symbolic_oracle(self, theta):
        assert _sympy_residual(theta) <= 1e-10
        assert psi_ode_residual(theta) <= 1e-10

    @pytest.mark.parametrize("theta", [0.2, -0.9, 1.4, 1.56])
    def test_hand_derivatives_match_sympy(self, theta):
        t = sp.Symbol("t")
        expr = 4 / sp.pi * (t * sp.sec(t) ** 2 + sp.tan(t)) - 2 * sp.tan(t) * sp.sec(t)
        ours = psi_derivatives(theta)
        for k, mine in enumerate(ours):
            ref = sp.diff(expr, t, k).evalf(40, subs={t: sp.Rational(theta)})
            assert float(mine) == pytest.approx(float(ref), rel=1e-25)

    def test_full_grid(self):
        grid = np.linspace(-HALF_PI + 1e-3, HALF_PI - 1e-3, 2001)
        assert max(psi_ode_residual(float(t)) for t in grid) <= 1e-10

    def test_offset_breaks_residual(self):
        # shifting psi by a constant leaves 2 sec^2 * 0.01 behind
        assert psi_ode_residual(0.0, offset=0.01) == pytest.approx(0.02, rel=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            psi_ode_residual(HALF_PI - 1e-4)


class TestSeries:
    def test_known_coefficients(self):
        assert series_coefficient(0) == 1
        assert series_coefficient(1) == sp.Rational(3, 8)
        assert series_coefficient(2) == sp.Rational(35, 128)

    def test_cap(self):
        series_coefficient(30)
        with pytest.raises(SeriesOverflow):
            series_coefficient(31)

    @given(st.integers(min_value=1, max_value=30))
    def test_decreasing(self, k):
        assert series_coefficient(k) < series_coefficient(k - 1)

    @given(st.integers(min_value=0, max_value=30))
    def test_binomial_form(self, k):
        # (4k-1)!!/(4k)!! = C(4k, 2k) / 4^{2k}
        assert series_coefficient(k) == sp.Rational(sp.binomial(4 * k, 2 * k), 4 ** (2 * k))

    @pytest.mark.parametrize("x", [0.1, 0.5, 0.8])
    def test_partial_sums_converge(self, x):
        target = 1 / math.sqrt(1 + x) + 1 / math.sqrt(1 - x)
        assert series_partial_sum(x, 30) == pytest.approx(target, rel=1e-6 if x > 0.7 else 1e-12)


class TestBarrierIntegral:
    def test_value(self):
        assert barrier_integral() == pytest.approx(BARRIER_ORACLE, abs=1e-9)

    def test_value_tight(self):
        assert abs(barrier_integral() - BARRIER_ORACLE) < 1e-14

    def test_dual_quadrature(self):
        cross = barrier_integral_crosscheck()
        assert cross["difference"] <= 1e-9
        assert cross["simpson"] == pytest.approx(BARRIER_ORACLE, abs=1e-12)
        assert cross["gauss_legendre"] == pytest.approx(BARRIER_ORACLE, abs=1e-12)

    def test_oddness_form(self):
        val = gauss_legendre(lambda t: psi(t) * -psi(-t), 0.0, HALF_PI, 256)
        assert val == pytest.approx(BARRIER_ORACLE, abs=1e-12)

    def test_bad_tolerance(self):
        with pytest.raises(DomainError):
            barrier_integral(1e-3)


class TestQuadrature:
    def test_simpson_polynomial(self):
        assert adaptive_simpson(lambda x: x**3, 0.0, 2.0) == pytest.approx(4.0, abs=1e-13)

    def test_gauss_legendre_smooth(self):
        assert gauss_legendre(np.cos, 0.0, HALF_PI, 32) == pytest.approx(1.0, abs=1e-14)


class TestRefinedBound:
    def test_k_one_exact(self):
        assert refined_zhong_yang(2.0, 1.0) == math.pi**2 / 4.0
        assert refined_zhong_yang(math.pi, 1.0) == 1.0

    def test_pi_third(self):
        assert refined_zhong_yang(math.pi, 1 / 3) == pytest.approx(REFINED_PI_THIRD, rel=1e-13)

    @given(st.floats(min_value=0.05, max_value=10.0), st.floats(min_value=1e-3, max_value=0.999))
    def test_above_zhong_yang(self, d, k):
        assert refined_zhong_yang(d, k) > math.pi**2 / d**2

    def test_asymmetry(self):
        assert asymmetry_parameter(1 / 3) == pytest.approx(0.5)
        with pytest.raises(DomainError):
            asymmetry_parameter(0.0)


class TestNormalization:
    def test_maps_range(self):
        norm = Normalization(0.5, 0.1)
        lo, hi = norm.rescale([-0.5, 1.0])
        assert hi == pytest.approx(1 / 1.1)
        assert lo == pytest.approx(-1 / 1.1)

    def test_delta_angle(self):
        assert Normalization(1.0, 0.0).delta_angle == 0.0
        norm = Normalization(1.0, 0.2)
        assert math.sin(HALF_PI - norm.delta_angle) == pytest.approx(1 / 1.2)

    def test_a_eps(self):
        assert Normalization(1 / 3, 1.0).a_eps == pytest.approx(0.25)


class TestGradientEstimate:
    @pytest.mark.parametrize("lam", [1.0, 4.0, math.pi**2])
    def test_saturated_when_symmetric(self, lam):
        grid = np.linspace(-HALF_PI + 1e-3, HALF_PI - 1e-3, 101)
        rep = gradient_estimate_check(lam, Normalization(1.0), grid)
        assert rep.passed
        assert rep.details["max_deviation"] <= 1e-9

    def test_saturation_profile_nan_outside(self):
        out = saturation_profile(1.0, [0, 1], [1.0, 0.0], [1.0, 1.0])
        assert math.isnan(out[0]) and out[1] == 1.0
