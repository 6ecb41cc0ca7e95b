import math

import numpy as np
import pytest

from errors import DomainError
from kernel_closed_form import (
    KernelParams, bicher_entry, bicher_row, eval_H_family, eval_L1, eval_L2, eval_S1, eval_S2,
    fractional_constant,
)

LOG2, LOG3 = math.log(2.0), math.log(3.0)


class TestFractionalConstant:
    def test_half_is_one_over_pi(self):
        assert fractional_constant(0.5) == pytest.approx(1.0 / math.pi, rel=1e-14)

    def test_near_one_behaves_like_two_one_minus_s(self):
        assert fractional_constant(0.9) / (2.0 * 0.1) == pytest.approx(1.0, rel=0.1)

    def test_decreases_toward_zero(self):
        assert fractional_constant(0.999) < fractional_constant(0.99) < fractional_constant(0.9)
        assert fractional_constant(0.999) < 3e-3

    @pytest.mark.parametrize("s", [0.0, 1.0, -0.2, 1.5])
    def test_outside_open_interval(self, s):
        with pytest.raises(DomainError):
            fractional_constant(s)


class TestHFamily:
    def test_three_quarters(self):
        hv = eval_H_family(KernelParams(1.0, 0.75))
        assert hv.H == pytest.approx(-32.0 / 9.0, rel=1e-14)
        assert hv.H1 == pytest.approx(8.0 / 9.0, rel=1e-14)
        assert hv.H3 == pytest.approx(8.0 / 3.0, rel=1e-14)
        assert hv.H5 == pytest.approx(16.0 / 9.0, rel=1e-14)

    def test_log_branch(self):
        hv = eval_H_family(KernelParams(1.0, 0.5))
        assert math.isnan(hv.H)
        assert hv.H2 == pytest.approx(-5.0 + 8.0 * LOG2, rel=1e-14)
        assert hv.H4 == pytest.approx(3.0 - 4.0 * LOG2, rel=1e-14)
        assert hv.H7 == pytest.approx(1.0 - 16.0 * LOG2 + 9.0 * LOG3, rel=1e-13)

    def test_mesh_scaling(self):
        unit = eval_H_family(KernelParams(1.0, 0.75)).as_dict()
        half = eval_H_family(KernelParams(0.5, 0.75)).as_dict()
        for name, value in unit.items():
            assert half[name] == pytest.approx(math.sqrt(2.0) * value, rel=1e-13)

    def test_branch_tolerance_routes_to_logs(self):
        p = KernelParams(0.25, 0.5 + 5e-8)
        assert p.is_half and p.branch == "half"
        assert p.scale == 1.0


class TestCorrections:
    def test_s1_log_branch_value(self):
        assert eval_S1(KernelParams(1.0, 0.5), 2.0) == pytest.approx(18 * LOG3 - 16 * LOG2 - 8, rel=1e-13)

    def test_s1_finite_next_to_support(self):
        value = eval_S1(KernelParams(0.125, 0.75), 0.125 * (1.0 + 1e-12))
        assert np.isfinite(value)

    @pytest.mark.parametrize("fn", [eval_S1, eval_S2])
    def test_corrections_need_distance_beyond_h(self, fn):
        with pytest.raises(DomainError):
            fn(KernelParams(0.25, 0.75), 0.25)

    def test_vector_arguments(self):
        p = KernelParams(1.0, 0.7)
        r = np.array([2.0, 3.0, 5.0])
        np.testing.assert_allclose(eval_S1(p, r), [eval_S1(p, x) for x in r], rtol=1e-14)
        np.testing.assert_allclose(eval_S2(p, r), [eval_S2(p, x) for x in r], rtol=1e-14)

    def test_l2_special_value(self):
        assert eval_L2(KernelParams(1.0, 0.5), 2) == pytest.approx(4 * LOG2 - 3 * LOG3, rel=1e-13)

    @pytest.mark.parametrize("fn", [eval_L1, eval_L2])
    def test_far_kernels_need_offset_two(self, fn):
        with pytest.raises(DomainError):
            fn(KernelParams(1.0, 0.75), 1)

    def test_far_parts_add_up_to_constant_entry(self):
        # a constant coefficient far entry is the sum of its two halves
        for s in (0.3, 0.5, 0.75, 0.9):
            p = KernelParams(1.0, s)
            for k in (2, 3, 7):
                assert eval_L1(p, k) + eval_L2(p, k) == pytest.approx(bicher_entry(p, k), rel=1e-10)


class TestConstantCoefficientEntries:
    def test_diagonal_three_quarters(self):
        expected = -32.0 / 9.0 * (2.0 ** 2.5 - 8.0)
        assert bicher_entry(KernelParams(1.0, 0.75), 0) == pytest.approx(expected, rel=1e-13)

    def test_diagonal_half(self):
        assert bicher_entry(KernelParams(1.0, 0.5), 0) == pytest.approx(8.0 * LOG2, rel=1e-14)

    def test_offset_two_half(self):
        assert bicher_entry(KernelParams(1.0, 0.5), 2) == pytest.approx(56 * LOG2 - 36 * LOG3, rel=1e-12)

    def test_row_matches_entries(self):
        p = KernelParams(2.0 ** -4, 0.6)
        row = bicher_row(p, 6)
        for k in range(6):
            assert row[k] == pytest.approx(bicher_entry(p, k), rel=1e-14)

    def test_off_diagonal_entries_negative(self):
        row = bicher_row(KernelParams(1.0, 0.75), 8)
        assert row[0] > 0
        assert np.all(row[1:] < 0)


class TestBranchContinuity:
    @pytest.mark.parametrize("delta", [1e-5, -1e-5])
    def test_generic_formulas_meet_log_branch(self, delta):
        half = KernelParams(1.0, 0.5)
        near = KernelParams(1.0, 0.5 + delta)
        h_half, h_near = eval_H_family(half), eval_H_family(near)
        for name in ("H2", "H4", "H7"):
            assert getattr(h_near, name) == pytest.approx(getattr(h_half, name), rel=1e-3)
        for k in (0, 1, 2, 3, 6):
            assert bicher_entry(near, k) == pytest.approx(bicher_entry(half, k), rel=1e-3)
        for r in (2.0, 3.5):
            assert eval_S1(near, r) == pytest.approx(eval_S1(half, r), rel=1e-3)
            assert eval_S2(near, r) == pytest.approx(eval_S2(half, r), rel=1e-3)
        for k in (2, 4):
            assert eval_L1(near, k) == pytest.approx(eval_L1(half, k), rel=1e-3)
            assert eval_L2(near, k) == pytest.approx(eval_L2(half, k), rel=1e-3)
