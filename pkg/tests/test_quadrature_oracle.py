import math

import numpy as np
import pytest

import quadrature_oracle
from assembly import CoefficientField, assemble_old, assemble_subdomain, constant_coefficient_matrix
from errors import CapacityError, ConfigurationError, ConvergenceFailure, DomainError
from kernel_closed_form import KernelParams, bicher_entry, eval_L1, eval_L2, eval_S1, eval_S2
from lifting import alpha1, alpha2_closed_form, c_star, phi_quantities_classical, phi_ratio_classical
from mesh_interface import build_mesh
from quadrature_oracle import (
    EntryCheck, classify_entry, oracle_L1, oracle_L2, oracle_S1, oracle_S2, oracle_entry, oracle_matrix,
    oracle_phi_quantities, oracle_subdomain_matrix, summarize_checks, verify_matrix,
)


class TestKernelBlocks:
    @pytest.mark.parametrize("s", [0.3, 0.5, 0.8])
    @pytest.mark.parametrize("r_over_h", [2.0, 3.5])
    def test_interface_corrections(self, s, r_over_h):
        h = 0.125
        p = KernelParams(h, s)
        assert oracle_S1(h, s, r_over_h * h) == pytest.approx(eval_S1(p, r_over_h * h), rel=1e-7)
        assert oracle_S2(h, s, r_over_h * h) == pytest.approx(eval_S2(p, r_over_h * h), rel=1e-7)

    def test_s1_log_value(self):
        expected = 18 * math.log(3) - 16 * math.log(2) - 8
        assert oracle_S1(1.0, 0.5, 2.0) == pytest.approx(expected, rel=1e-8)

    @pytest.mark.parametrize("s", [0.4, 0.5, 0.75])
    @pytest.mark.parametrize("k", [2, 3, 6])
    def test_far_halves(self, s, k):
        p = KernelParams(1.0, s)
        l1, l2 = oracle_L1(1.0, s, k), oracle_L2(1.0, s, k)
        assert l1 + l2 == pytest.approx(bicher_entry(p, k), rel=1e-6)
        assert l1 == pytest.approx(eval_L1(p, k), rel=1e-6)
        assert l2 == pytest.approx(eval_L2(p, k), rel=1e-6)

    def test_offset_guard(self):
        with pytest.raises(DomainError):
            oracle_L1(1.0, 0.6, 1)
        with pytest.raises(DomainError):
            oracle_S2(0.25, 0.6, 0.25)

    def test_tolerance_floor(self):
        with pytest.raises(ConfigurationError):
            oracle_S1(0.25, 0.75, 0.5, tol=1e-12)

    @pytest.mark.slow
    @pytest.mark.parametrize("s", [0.6, 0.75, 0.9])
    @pytest.mark.parametrize("h", [2.0 ** -4, 2.0 ** -6])
    @pytest.mark.parametrize("k", range(9))
    def test_closed_forms_on_grid(self, s, h, k):
        p = KernelParams(h, s)
        r = (k + 2) * h
        assert oracle_S1(h, s, r) == pytest.approx(float(eval_S1(p, r)), rel=1e-6)
        assert oracle_S2(h, s, r) == pytest.approx(float(eval_S2(p, r)), rel=1e-6)
        assert oracle_L1(h, s, k + 2) == pytest.approx(float(eval_L1(p, k + 2)), rel=1e-6)
        assert oracle_L2(h, s, k + 2) == pytest.approx(float(eval_L2(p, k + 2)), rel=1e-6)

    @pytest.mark.slow
    @pytest.mark.parametrize("s", [0.6, 0.75, 0.9])
    @pytest.mark.parametrize("level", [3, 5])
    def test_constant_entries_on_grid(self, s, level):
        mesh = build_mesh("1/2", level)
        ref = constant_coefficient_matrix(mesh.n_interior, mesh.h, s)
        coeff = CoefficientField.constant(1.0)
        i = 4
        for k in range(9):
            assert oracle_entry(mesh, i, i + k, coeff, s) == pytest.approx(ref[i - 1, i + k - 1], rel=1e-6)


class TestEntries:
    def test_zero_cross_entry(self, half_mesh):
        M = half_mesh.m_interface
        coeff = CoefficientField(1.0, 2.0, 0.0)
        assert oracle_entry(half_mesh, M - 1, M + 1, coeff, 0.75) == 0.0

    @pytest.mark.slow
    @pytest.mark.parametrize("s", [0.5, 0.75])
    def test_constant_coefficient_entries(self, s):
        mesh = build_mesh("1/2", 1)
        ref = constant_coefficient_matrix(mesh.n_interior, mesh.h, s)
        coeff = CoefficientField.constant(1.0)
        for i, j in ((1, 1), (1, 2), (1, 3)):
            assert oracle_entry(mesh, i, j, coeff, s) == pytest.approx(ref[i - 1, j - 1], rel=1e-6)

    def test_node_guard(self, quarter_mesh):
        with pytest.raises(DomainError):
            oracle_entry(quarter_mesh, 0, 1, CoefficientField.constant(1.0), 0.5)


class TestVerification:
    def test_classify(self, half_mesh):
        assert classify_entry(half_mesh, 8, 8) == ("diag", "x_i=b")
        assert classify_entry(half_mesh, 7, 7) == ("diag", "x_(i+1)=b")
        assert classify_entry(half_mesh, 3, 3) == ("diag", "x_(i+1)<b")
        assert classify_entry(half_mesh, 8, 7) == ("superdiag", "x_(i+1)=b")
        assert classify_entry(half_mesh, 11, 12) == ("superdiag", "x_i>b")
        assert classify_entry(half_mesh, 8, 12) == ("far", "x_i=b")
        assert classify_entry(half_mesh, 4, 8) == ("far", "x_j=b")
        assert classify_entry(half_mesh, 3, 10) == ("far", "interior")

    def test_capacity(self):
        with pytest.raises(CapacityError):
            verify_matrix(build_mesh("1/2", 5), CoefficientField.constant(1.0), 0.5)

    def test_summary(self):
        checks = [EntryCheck(1, 1, "diag", "x_i=b", 1.0, 1.0, 1e-9),
                  EntryCheck(1, 2, "far", "interior", 1.0, 1.0, 3e-8),
                  EntryCheck(2, 2, "diag", "x_(i+1)<b", 1.0, 1.0, 2e-9)]
        assert summarize_checks(checks) == {"diag": 2e-9, "far": 3e-8}

    @pytest.mark.slow
    @pytest.mark.parametrize("coeff, s", [
        (CoefficientField(1.0, -0.5, 0.0), 0.75),
        (CoefficientField(1.0, 2.0, 1.5), 0.5),
    ])
    def test_old_matrix_matches_oracle(self, quarter_mesh, coeff, s):
        checks = verify_matrix(quarter_mesh, coeff, s)
        n = quarter_mesh.n_interior
        assert len(checks) == n * (n + 1) // 2
        assert all(c.converged for c in checks)
        assert max(c.relative for c in checks) < 1e-6
        closed = assemble_old(quarter_mesh, coeff, s).entries
        assert checks[0].closed == closed[0, 0]

    @pytest.mark.slow
    @pytest.mark.parametrize("b, level", [("1/2", 2), ("1/2", 3), ("3/4", 1), ("3/4", 2)])
    @pytest.mark.parametrize("sigma", [(1.0, 1.0, 1.0), (1.0, -1.0, 0.0), (1.0, -0.5, 0.25)])
    @pytest.mark.parametrize("s", [0.5, 0.6, 0.75, 0.9])
    def test_old_matrix_grid(self, b, level, sigma, s):
        mesh = build_mesh(b, level)
        assert mesh.n_cells in (8, 16)
        checks = verify_matrix(mesh, CoefficientField(*sigma), s)
        assert all(c.converged for c in checks)
        assert max(c.relative for c in checks) < (1e-5 if s == 0.5 else 1e-6)

    def test_cancelling_interface_entry(self, quarter_mesh):
        M = quarter_mesh.m_interface
        coeff = CoefficientField(1.0, -1.0, 0.0)
        assert assemble_old(quarter_mesh, coeff, 0.75).entries[M - 1, M - 1] == 0.0
        value = oracle_entry(quarter_mesh, M, M, coeff, 0.75)
        assert abs(value) < 1e-10


class TestOracleMatrices:
    @pytest.mark.slow
    def test_matrix_matches_entries(self, quarter_mesh):
        coeff = CoefficientField(1.0, -0.5, 0.25)
        A, converged = oracle_matrix(quarter_mesh, coeff, 0.75)
        n = quarter_mesh.n_interior
        assert A.shape == converged.shape == (n, n)
        assert converged.all()
        np.testing.assert_array_equal(A, A.T)
        assert A[1, 4] == oracle_entry(quarter_mesh, 2, 5, coeff, 0.75)

    def test_strict_raises_and_relaxed_flags(self, quarter_mesh, monkeypatch):
        def fake_entry(mesh, i, j, coeff, s, tol=None):
            if i == j:
                raise ConvergenceFailure("budget exhausted", estimate=1.5, error_bound=1e-3)
            return 2.0

        monkeypatch.setattr(quadrature_oracle, "oracle_entry", fake_entry)
        coeff = CoefficientField(1.0, 2.0, 1.5)
        with pytest.raises(ConvergenceFailure):
            oracle_matrix(quarter_mesh, coeff, 0.75, nodes=[1, 2])
        A, converged = oracle_matrix(quarter_mesh, coeff, 0.75, nodes=[1, 2], strict=False)
        np.testing.assert_array_equal(A, [[1.5, 2.0], [2.0, 1.5]])
        np.testing.assert_array_equal(converged, [[False, True], [True, False]])
        checks = verify_matrix(build_mesh("1/2", 0), coeff, 0.75)
        assert [c.converged for c in checks] == [False]
        assert checks[0].relative == math.inf

    @pytest.mark.slow
    @pytest.mark.parametrize("k", [1, 2])
    def test_subdomain_matrix(self, half_mesh, k):
        expected = assemble_subdomain(half_mesh, k, 1.0, 0.75).entries
        np.testing.assert_allclose(oracle_subdomain_matrix(half_mesh, k, 1.0, 0.75), expected, rtol=1e-6)

    @pytest.mark.slow
    def test_subdomain_sign(self, quarter_mesh):
        pos = oracle_subdomain_matrix(quarter_mesh, 2, 1.0, 0.8)
        neg = oracle_subdomain_matrix(quarter_mesh, 2, -1.0, 0.8)
        np.testing.assert_allclose(neg, -pos, rtol=1e-12)
        np.testing.assert_allclose(pos, assemble_subdomain(quarter_mesh, 2, 1.0, 0.8).entries, rtol=1e-6)

    def test_subdomain_index(self, half_mesh):
        with pytest.raises(ConfigurationError):
            oracle_subdomain_matrix(half_mesh, 3, 1.0, 0.75)


@pytest.mark.slow
class TestLiftingQuantities:
    @pytest.mark.parametrize("b", [0.5, 0.75])
    def test_classical_ratio(self, b):
        q = oracle_phi_quantities(b, 1.0, 1.0, 0.8, lifting="phi")
        assert q.phi1 / q.phi2 == pytest.approx(phi_ratio_classical(b, 0.8), rel=1e-6)

    @pytest.mark.parametrize("b, s", [(0.5, 0.8), (0.75, 0.6), (0.75, 0.9), (0.3, 0.75)])
    def test_classical_phi_values(self, b, s):
        phi1, phi2 = phi_quantities_classical(b, s)
        q = oracle_phi_quantities(b, 1.0, -0.5, s, lifting="phi")
        assert q.phi1 == pytest.approx(phi1, rel=1e-6)
        assert q.phi2 == pytest.approx(phi2, rel=1e-6)

    def test_c_star(self):
        b, s1, s2, s = 0.75, 1.0, -1.0, 0.9
        q = oracle_phi_quantities(b, s1, s2, s)
        assert q.alpha2 == pytest.approx(alpha2_closed_form(b, s1, s2, s), rel=1e-6)
        assert q.alpha1 == pytest.approx(alpha1(b, s1, s2, s), rel=1e-6)
        assert q.c_star == pytest.approx(c_star(b, s1, s2, s), rel=1e-6)

    def test_unknown_lifting(self):
        with pytest.raises(ConfigurationError):
            oracle_phi_quantities(0.5, 1.0, 1.0, 0.8, lifting="hat")


def test_oracle_entry_is_symmetric_in_arguments(quarter_mesh):
    coeff = CoefficientField(1.0, 2.0, 1.5)
    a = oracle_entry(quarter_mesh, 2, 5, coeff, 0.6)
    b = oracle_entry(quarter_mesh, 5, 2, coeff, 0.6)
    assert a == b
    assert np.isfinite(a)
