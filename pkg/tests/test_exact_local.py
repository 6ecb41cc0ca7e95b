import numpy as np
import pytest

from assembly import SourceTerm
from errors import CriticalContrastError, DomainError
from exact_local import (
    build_exact, check_contrast, critical_flux_gap, interface_value_identity, lifting_in_kernel,
)


class TestClosedForm:
    def test_half_interface(self):
        u = build_exact(0.5, 1.0, -0.5, 0.0)
        assert u.lam == pytest.approx(1.25, rel=1e-14)
        assert u.interface_value == pytest.approx(0.5, rel=1e-14)

    def test_three_quarter_interface(self):
        u = build_exact(0.75, 1.0, -1.0, 1.0)
        assert u.lam == pytest.approx(-5.0 / 96.0, rel=1e-14)
        assert u.interface_value == pytest.approx(-0.109375, rel=1e-13)

    @pytest.mark.parametrize("b, s1, s2, alpha", [
        (0.5, 1.0, 1.0, 0.0),
        (0.75, 2.0, 0.5, 0.5),
        (0.3, 1.0, -3.0, -0.25),
    ])
    def test_boundary_continuity_and_flux(self, b, s1, s2, alpha):
        u = build_exact(b, s1, s2, alpha)
        assert u.value(0.0) == 0.0
        assert u.value(1.0) == pytest.approx(0.0, abs=1e-14)
        eps = 1e-9
        assert u.value(b - eps) == pytest.approx(u.value(b + eps), abs=1e-7)
        assert u.flux(b - eps) == pytest.approx(u.flux(b + eps), abs=1e-7)

    def test_equation_residual(self):
        u = build_exact(0.75, 2.0, -0.5, 1.5)
        x = np.array([0.1, 0.4, 0.7, 0.8, 0.95])
        sigma = np.where(x < 0.75, 2.0, -0.5)
        np.testing.assert_allclose(-sigma * u.second_derivative(x), x ** 1.5, rtol=1e-14)

    def test_derivative_matches_difference_quotient(self):
        u = build_exact(0.5, 1.0, 2.0, 0.0)
        x, d = 0.3, 1e-6
        fd = (u.value(x + d) - u.value(x - d)) / (2 * d)
        assert u.derivative(x) == pytest.approx(fd, rel=1e-7)

    def test_vectorized(self):
        u = build_exact(0.5, 1.0, 1.0, 0.0)
        np.testing.assert_allclose(u.value(np.array([0.25, 0.5])), [0.09375, 0.125], rtol=1e-14)

    def test_argument_ranges(self):
        with pytest.raises(DomainError):
            build_exact(1.0, 1.0, 1.0, 0.0)
        with pytest.raises(DomainError):
            build_exact(0.5, 1.0, 1.0, -0.5)


class TestCriticalContrast:
    @pytest.mark.parametrize("b, s2", [(0.5, -1.0), (0.75, -1.0 / 3.0), (0.25, -3.0)])
    def test_rejected(self, b, s2):
        with pytest.raises(CriticalContrastError):
            build_exact(b, 1.0, s2, 0.0)

    def test_lifting_spans_kernel(self):
        assert critical_flux_gap(0.5, 1.0, -1.0) == 0.0
        assert lifting_in_kernel(0.75, 1.0, -1.0 / 3.0)
        assert not lifting_in_kernel(0.5, 1.0, -0.5)

    def test_relative_gap(self):
        assert check_contrast(0.5, 1.0, 1.0) == pytest.approx(1.0)
        assert check_contrast(0.5, 1.0, -0.5) == pytest.approx(1.0 / 3.0)


class TestInterfaceIdentity:
    def test_examples(self):
        assert interface_value_identity(0.5, 1.0, -0.5, SourceTerm(0.0)) == pytest.approx(0.5)
        assert interface_value_identity(0.75, 1.0, -1.0, SourceTerm(1.0)) == pytest.approx(-0.109375)

    def test_matches_closed_form(self):
        f = SourceTerm(0.7)
        value = interface_value_identity(0.3, 2.0, 5.0, f)
        assert value == pytest.approx(build_exact(0.3, 2.0, 5.0, 0.7).interface_value, rel=1e-12)

    def test_critical(self):
        with pytest.raises(CriticalContrastError):
            interface_value_identity(0.5, 1.0, -1.0, SourceTerm(0.0))
