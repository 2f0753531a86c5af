import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from foliation_bounds.bounds import (
    BOUNDARY_S,
    BoundInput,
    best_bound,
    li_type,
    lichnerowicz,
    optimal_bound_expansion,
    optimal_s,
    shi_zhang,
    shi_zhang_optimal,
    zhong_yang,
)
from foliation_bounds.errors import DomainError, InvalidInput

HALF_PI = math.pi / 2


@st.composite
def bound_inputs(draw):
    n = draw(st.integers(min_value=2, max_value=12))
    K = draw(st.one_of(st.just(0.0), st.floats(min_value=1e-3, max_value=2.0)))
    top = math.pi / math.sqrt(K) if K > 0 else 10.0
    d = draw(st.floats(min_value=0.05, max_value=1.0)) * top
    return BoundInput(n, K, d)


class TestBoundInput:
    def test_myers(self):
        with pytest.raises(InvalidInput):
            BoundInput(3, 1.0, 4.0)
        assert BoundInput(3, 1.0, math.pi).at_myers_limit

    @pytest.mark.parametrize("n,K,d", [(1, 1.0, 1.0), (3, -0.1, 1.0), (3, 1.0, 0.0), (2.5, 1.0, 1.0)])
    def test_rejects(self, n, K, d):
        with pytest.raises(InvalidInput):
            BoundInput(n, K, d)

    def test_invalid_input_is_value_error(self):
        assert issubclass(InvalidInput, ValueError)


class TestClosedForms:
    def test_zhong_yang(self):
        assert zhong_yang(BoundInput(3, 0.0, math.pi)).value == 1.0
        assert zhong_yang(BoundInput(3, 1.0, HALF_PI)).value == pytest.approx(4.0)
        for g in (1, 2, 3, 4, 6):
            assert zhong_yang(BoundInput(5, 1.0, math.pi / g)).value == pytest.approx(g * g)

    def test_lichnerowicz(self):
        r = lichnerowicz(BoundInput(3, 1.0, 1.0))
        assert r.value == 3.0 and r.valid
        r = lichnerowicz(BoundInput(3, 0.0, 1.0))
        assert r.value == 0.0 and not r.valid

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_lichnerowicz_below_hopf(self, k):
        assert lichnerowicz(BoundInput(2 * k + 1, 1.0, HALF_PI)).value <= 2 * (2 * k + 2)

    def test_shi_zhang_half(self):
        assert shi_zhang(BoundInput(3, 1.0, HALF_PI), 0.5).value == pytest.approx(5.0, abs=1e-12)

    def test_shi_zhang_domain(self):
        with pytest.raises(DomainError):
            shi_zhang(BoundInput(3, 1.0, 1.0), 1.0)
        with pytest.raises(DomainError):
            shi_zhang(BoundInput(3, 1.0, 1.0), 0.0)

    @given(st.floats(min_value=1e-6, max_value=1 - 1e-6))
    def test_shi_zhang_flat_unit(self, s):
        assert shi_zhang(BoundInput(3, 0.0, math.pi), s).value <= 1.0 + 1e-15

    @given(bound_inputs())
    def test_li_type(self, inp):
        expected = math.pi**2 / inp.d**2 + (inp.n - 1) * inp.K / 2
        assert li_type(inp).value == pytest.approx(expected, rel=1e-12)
        assert li_type(inp).value == pytest.approx(shi_zhang(inp, 0.5).value, rel=1e-15)


class TestOptimalS:
    def test_interior_example(self):
        # A = 4, B = 2: b(s) = -16 s^2 + 18 s
        opt = optimal_s(BoundInput(3, 1.0, HALF_PI))
        assert opt.A == pytest.approx(4.0) and opt.B == pytest.approx(2.0)
        assert opt.s0 == pytest.approx(0.5625)
        assert opt.regime == "interior"
        assert opt.bound == pytest.approx(5.0625)
        s = np.linspace(0, 1, 1_000_001)
        assert np.max(-16 * s**2 + 18 * s) == pytest.approx(opt.bound, abs=1e-9)

    def test_flat(self):
        opt = optimal_s(BoundInput(4, 0.0, 2.0))
        assert opt.s0 == 0.5 and opt.bound == pytest.approx(math.pi**2 / 4)

    def test_boundary_example(self):
        opt = optimal_s(BoundInput(5, 1.0, math.pi))
        assert opt.A == pytest.approx(1.0) and opt.B == pytest.approx(4.0)
        assert opt.s0 == pytest.approx(1.0)
        assert opt.regime == "boundary"
        assert opt.s_star == BOUNDARY_S
        assert opt.bound == 4.0
        assert opt.note

    def test_dimension_two_note(self):
        assert "n = 2" in shi_zhang_optimal(BoundInput(2, 1.0, 1.0)).note

    @given(bound_inputs())
    def test_regime_condition(self, inp):
        opt = optimal_s(inp)
        B = (inp.n - 1) * inp.K
        # avoid float ties at the boundary
        assume(B == 0 or abs(inp.d - 2 * math.pi / math.sqrt(B)) > 1e-9)
        interior = B == 0 or inp.d < 2 * math.pi / math.sqrt(B)
        assert (opt.regime == "interior") == interior
        assert 0 < opt.s_star < 1

    @settings(max_examples=50)
    @given(bound_inputs())
    def test_closed_form_is_grid_max(self, inp):
        opt = optimal_s(inp)
        s = np.linspace(0, 1, 100_001)[1:-1]
        b = -4 * opt.A * s**2 + (4 * opt.A + opt.B) * s
        assert np.max(b) <= opt.bound * (1 + 1e-12)
        if opt.regime == "interior":
            assert np.max(b) >= opt.bound - 1e-8 * max(1.0, opt.bound)
            assert optimal_bound_expansion(inp) == pytest.approx(opt.bound, rel=1e-12)
        else:
            # supremum only approached as s -> 1; the grid stops 1e-5 short with slope B - 4A
            gap = (opt.B - 4 * opt.A) * 1e-5
            assert np.max(b) >= opt.bound - 1.01 * gap - 1e-12 * opt.bound


class TestBestBound:
    def test_flat_top(self):
        res = best_bound(BoundInput(3, 0.0, math.pi))
        assert res[0].name == "zhong_yang" and res[0].value == 1.0

    def test_model_chain(self):
        res = best_bound(BoundInput(3, 1.0, HALF_PI), use_model=True)
        by = {r.name: r.value for r in res}
        assert res[0].name == "model"
        assert by["model"] >= 5.0625 >= 5 >= 4
        assert by["shi_zhang_optimal"] == pytest.approx(5.0625)
        assert by["li_type"] == pytest.approx(5.0)
        assert by["zhong_yang"] == pytest.approx(4.0)

    def test_hopf_s3(self):
        for r in best_bound(BoundInput(3, 1.0, HALF_PI), use_model=True):
            assert r.value <= 8.0

    def test_myers_limit_skips_model(self):
        res = best_bound(BoundInput(3, 1.0, math.pi), use_model=True)
        assert "model" not in {r.name for r in res}
        assert res[0].name == "lichnerowicz" and res[0].value == 3.0

    def test_refined_entry(self):
        names = [r.name for r in best_bound(BoundInput(3, 1.0, 1.0), k=0.5)]
        assert "refined_zy" in names
        assert "refined_zy" not in [r.name for r in best_bound(BoundInput(3, 1.0, 1.0))]

    @given(bound_inputs())
    def test_sorted_nonnegative(self, inp):
        res = best_bound(inp)
        vals = [r.value for r in res]
        assert vals == sorted(vals, reverse=True)
        assert all(v >= 0 for v in vals)
        assert next(r for r in res if r.name == "lichnerowicz").valid == (inp.K > 0)

    @settings(max_examples=30)
    @given(bound_inputs(), st.floats(min_value=0.5, max_value=1.0))
    def test_non_increasing_in_d(self, inp, shrink):
        near = {r.name: r.value for r in best_bound(BoundInput(inp.n, inp.K, inp.d * shrink))}
        far = {r.name: r.value for r in best_bound(inp)}
        for name in far:
            assert far[name] <= near[name] * (1 + 1e-12)

    @settings(max_examples=30)
    @given(bound_inputs(), st.floats(min_value=0.0, max_value=1.0))
    def test_non_decreasing_in_K(self, inp, frac):
        # any K' in [K, (pi/d)^2] keeps d admissible
        K2 = inp.K + frac * ((math.pi / inp.d) ** 2 - inp.K)
        lo = {r.name: r.value for r in best_bound(inp)}
        hi = {r.name: r.value for r in best_bound(BoundInput(inp.n, K2, inp.d))}
        for name in lo:
            assert hi[name] >= lo[name] * (1 - 1e-12)
