import numpy as np
import pytest

from errors import ConfigurationError, DomainError, SingularSystemError
from exact_local import build_exact
from mesh_interface import build_mesh
from solvers import (
    COMPUTED_MODELS, ModelKind, ProblemConfig, lu_solve, max_difference, run_model,
    simplified_interface_value,
)


class TestLinearAlgebra:
    def test_identity(self):
        np.testing.assert_array_equal(lu_solve(np.eye(3), [1.0, 2.0, 3.0]), [1.0, 2.0, 3.0])

    def test_indefinite(self):
        A = np.array([[0.0, 1.0], [1.0, 0.0]])
        np.testing.assert_allclose(lu_solve(A, [2.0, 5.0]), [5.0, 2.0])

    def test_singular(self):
        with pytest.raises(SingularSystemError):
            lu_solve(np.array([[1.0, 2.0], [2.0, 4.0]]), [1.0, 2.0])

    def test_zero_matrix(self):
        with pytest.raises(SingularSystemError):
            lu_solve(np.zeros((2, 2)), [1.0, 0.0])

    def test_shape_mismatch(self):
        with pytest.raises(ConfigurationError):
            lu_solve(np.eye(3), [1.0, 2.0])


class TestModelKind:
    def test_parse(self):
        assert ModelKind.parse("local_fem") is ModelKind.LOCAL_FEM
        assert ModelKind.parse(" NEW ") is ModelKind.NEW
        with pytest.raises(ConfigurationError):
            ModelKind.parse("newest")

    def test_flags(self):
        assert ModelKind.SIMPLIFIED.reconstructed and ModelKind.SIMPLIFIED.fractional
        assert ModelKind.OLD.fractional and not ModelKind.OLD.reconstructed
        assert not ModelKind.LOCAL_FEM.fractional
        assert ModelKind.LOCAL_EXACT not in COMPUTED_MODELS

    def test_cross_coefficient_defaults(self):
        config = ProblemConfig("1/2", 1.0, 3.0, 0.0)
        assert config.coefficients(ModelKind.OLD).sigma3 == 2.0
        assert config.coefficients(ModelKind.NEW).sigma3 == 0.0
        explicit = ProblemConfig("1/2", 1.0, 3.0, 0.0, sigma3=0.0)
        assert explicit.coefficients(ModelKind.OLD).sigma3 == 0.0


class TestLocalModels:
    def test_unit_problem(self):
        mesh = build_mesh("1/2", 1)
        sol = run_model("local-fem", ProblemConfig("1/2", 1.0, 1.0, 0.0), mesh)
        np.testing.assert_allclose(sol.nodal_values, [3 / 32, 1 / 8, 3 / 32], rtol=1e-13)
        assert sol.interface_value == pytest.approx(0.125)

    @pytest.mark.parametrize("alpha", [0.0, 1.0, 2.0])
    @pytest.mark.parametrize("b", ["1/2", "3/4"])
    @pytest.mark.parametrize("s1, s2", [(1.0, 1.0), (1.0, -0.5), (1.0, -2.0)])
    def test_nodally_exact(self, b, s1, s2, alpha):
        config = ProblemConfig(b, s1, s2, alpha)
        mesh = build_mesh(b, 2)
        fem = run_model(ModelKind.LOCAL_FEM, config, mesh)
        exact = run_model(ModelKind.LOCAL_EXACT, config, mesh)
        np.testing.assert_allclose(fem.nodal_values, exact.nodal_values, atol=1e-10)

    def test_interpolation_distance(self, half_mesh):
        config = ProblemConfig("1/2", 1.0, 1.0, 0.0)
        fem = run_model(ModelKind.LOCAL_FEM, config, half_mesh)
        exact = run_model(ModelKind.LOCAL_EXACT, config, half_mesh)
        assert max_difference(fem, fem) == 0.0
        assert 0.0 < max_difference(fem, exact) < 1e-3

    def test_profile_hits_interface(self, quarter_mesh):
        sol = run_model("local-fem", ProblemConfig("3/4", 1.0, 2.0, 0.0), quarter_mesh)
        x, u = sol.profile()
        assert x.size == quarter_mesh.n_cells + 1
        assert x[quarter_mesh.m_interface] == 0.75
        assert u[quarter_mesh.m_interface] == pytest.approx(sol.interface_value)


class TestReconstructedModels:
    def test_simplified_interface_value(self):
        config = ProblemConfig("1/2", 1.0, 1.0, 0.0, s=0.8)
        coarse = run_model("simplified", config, build_mesh("1/2", 2))
        fine = run_model("simplified", config, build_mesh("1/2", 4))
        assert coarse.interface_value == fine.interface_value
        assert coarse.interface_value == pytest.approx(1.0 / (1.8 * coarse.c_star), rel=1e-12)
        assert simplified_interface_value(config) == pytest.approx(coarse.interface_value, rel=1e-14)

    def test_simplified_approaches_local_value(self):
        config = ProblemConfig("1/2", 1.0, 1.0, 0.0, s=0.999)
        local = build_exact(0.5, 1.0, 1.0, 0.0).interface_value
        assert simplified_interface_value(config) == pytest.approx(local, rel=0.02)

    @pytest.mark.parametrize("kind", ["new", "simplified"])
    def test_solution_structure(self, half_mesh, kind):
        sol = run_model(kind, ProblemConfig("1/2", 1.0, -0.5, 0.0, s=0.9), half_mesh)
        m = half_mesh.interface_slot
        assert sol.hat_coefficients[m] == 0.0
        assert sol.nodal_values[m] == pytest.approx(sol.interface_value)
        assert sol.evaluate(0.5) == pytest.approx(sol.interface_value)
        assert sol.evaluate(0.0) == 0.0 and sol.evaluate(1.0) == 0.0
        x, u = sol.profile(oversampling=4)
        assert x.size == 4 * half_mesh.n_cells + 1
        assert np.all(np.isfinite(u))

    def test_new_model_keeps_coupling(self, half_mesh):
        sol = run_model("new", ProblemConfig("1/2", 1.0, 1.0, 0.0, s=0.75), half_mesh)
        assert sol.coupling is not None
        assert sol.c_star == sol.coupling.c_star

    @pytest.mark.slow
    def test_new_tends_to_simplified(self):
        mesh = build_mesh("1/2", 5)
        gaps = []
        for s in (0.99, 0.999, 0.9999):
            config = ProblemConfig("1/2", 1.0, -0.5, 0.0, s=s)
            gaps.append(max_difference(run_model("new", config, mesh), run_model("simplified", config, mesh)))
        assert gaps[0] > gaps[1] > gaps[2] > 0.0
        assert gaps[2] < 1e-3

    @pytest.mark.slow
    def test_old_model_near_local_limit(self):
        config = ProblemConfig("1/2", 1.0, 1.0, 0.0, s=0.999)
        sol = run_model("old", config, build_mesh("1/2", 4))
        assert sol.interface_value == pytest.approx(0.125, rel=0.05)


class TestRunnerErrors:
    def test_mesh_mismatch_names_model(self, half_mesh):
        with pytest.raises(ConfigurationError) as info:
            run_model("new", ProblemConfig("3/4", 1.0, 1.0, 0.0, s=0.8), half_mesh)
        assert "[new]" in str(info.value)
        assert info.value.model == "new"

    def test_cross_coefficient_rejected(self, half_mesh):
        with pytest.raises(ConfigurationError):
            run_model("simplified", ProblemConfig("1/2", 1.0, 1.0, 0.0, s=0.8, sigma3=1.0), half_mesh)

    @pytest.mark.parametrize("s", [0.5, 0.3])
    def test_reconstructed_order_range(self, half_mesh, s):
        with pytest.raises(DomainError):
            run_model("new", ProblemConfig("1/2", 1.0, 1.0, 0.0, s=s), half_mesh)

    def test_missing_order(self, half_mesh):
        with pytest.raises(ConfigurationError):
            run_model("old", ProblemConfig("1/2", 1.0, 1.0, 0.0), half_mesh)

    def test_order_cap(self, half_mesh):
        with pytest.raises(DomainError):
            run_model("old", ProblemConfig("1/2", 1.0, 1.0, 0.0, s=0.99995), half_mesh)
