"""Principal eigenpairs, Rayleigh quotients, and the critical diffusivity."""

import numpy as np
import pytest

from epithreshold import (
    ConditionNotMetError,
    Cosine,
    DiffusionSpec,
    GaussBump,
    InvalidConfigError,
    ScalarField,
    assemble,
    build_grid,
    critical_diffusivity,
    eigenvalue_at_diffusivity,
    make_field,
    mean,
    min_value,
    neumann_gap,
    principal_eigenpair,
    rayleigh_quotient,
    sample_field,
    threshold_eigenpair,
)

from conftest import bump_scenario, dense_lambda1, scenario_1d, scenario_2d


def _cos_potential_op(n=512, d=1.0):
    grid = build_grid(1.0, n)
    diffusion = DiffusionSpec.isotropic(grid, d)
    potential = sample_field(Cosine(base=0.0, amp=1.0, freq=1.0), grid)
    return assemble(diffusion, potential)


class TestPrincipalEigenpair:
    def test_constant_coefficients_give_exact_eigenvalue(self):
        grid = build_grid(1.0, 64)
        diffusion = DiffusionSpec.isotropic(grid, 0.3)
        for v in (-1.5, 0.0, 2.0):
            op = assemble(diffusion, make_field(grid, v))
            res = principal_eigenpair(op)
            assert res.eigenvalue == pytest.approx(-v, abs=1e-12)
            assert np.ptp(res.phi.values) < 1e-10  # constant eigenfunction

    def test_shift_equivariance_is_exact(self):
        grid = build_grid(1.0, 128)
        diffusion = DiffusionSpec.isotropic(grid, 0.2)
        potential = sample_field(GaussBump(0.0, 1.0, 0.5, 0.2), grid)
        base = principal_eigenpair(assemble(diffusion, potential))
        for c in (0.5, -1.25, 3.0):
            shifted = principal_eigenpair(
                assemble(diffusion, ScalarField(grid, potential.values + c))
            )
            assert shifted.eigenvalue == pytest.approx(base.eigenvalue - c, abs=1e-10)
            assert np.allclose(shifted.phi.values, base.phi.values, atol=1e-9)

    def test_against_dense_oracle_and_grid_stability(self):
        op = _cos_potential_op(n=512)
        res = principal_eigenpair(op)
        assert res.eigenvalue == pytest.approx(dense_lambda1(op), abs=1e-10)
        res_fine = principal_eigenpair(_cos_potential_op(n=1024))
        assert abs(res.eigenvalue - res_fine.eigenvalue) <= 1e-5

    def test_residual_criterion_and_normalization(self):
        op = _cos_potential_op(n=128)
        res = principal_eigenpair(op, tol=1e-11)
        resid = np.abs(op.apply_values(res.phi.values) - res.eigenvalue * res.phi.values).max()
        row_norm = np.abs(op.matrix).sum(axis=1).max()
        floor = 32 * np.finfo(float).eps * row_norm
        assert resid <= max(1e-11 * (1 + abs(res.eigenvalue)), floor)
        assert mean(ScalarField(op.grid, res.phi.values**2)) == pytest.approx(1.0, rel=1e-12)
        assert min_value(res.phi) > 0.0

    def test_2d_against_dense_oracle(self):
        scenario = scenario_2d(
            cells=(12, 14),
            lengths=(1.0, 1.3),
            alpha=GaussBump(base=0.6, amp=1.0, center=(0.5, 0.6), width=0.3),
            mu=1.0,
            d_i=0.08,
        )
        res = threshold_eigenpair(scenario)
        from epithreshold.spectral import threshold_potential

        op = assemble(scenario.diff_i, threshold_potential(scenario))
        assert res.eigenvalue == pytest.approx(dense_lambda1(op), abs=1e-9)
        assert min_value(res.phi) > 0.0

    def test_nonconvergence_raises(self):
        from epithreshold import NumericalError

        op = _cos_potential_op(n=64, d=1e-4)
        with pytest.raises(NumericalError, match="converge"):
            principal_eigenpair(op, tol=1e-14, max_iter=2)


class TestRayleighQuotient:
    def test_constant_test_field_gives_negated_mean_potential(self):
        grid = build_grid(1.0, 32)
        diffusion = DiffusionSpec.isotropic(grid, 1.0)
        potential = sample_field(Cosine(base=0.4, amp=0.3, freq=2.0), grid)
        psi = make_field(grid, 1.0)
        quotient = rayleigh_quotient(diffusion, potential, psi)
        assert quotient == pytest.approx(-mean(potential), rel=1e-12)

    def test_eigenfunction_reproduces_eigenvalue(self):
        op = _cos_potential_op(n=256)
        res = principal_eigenpair(op)
        grid = op.grid
        diffusion = DiffusionSpec.isotropic(grid, 1.0)
        quotient = rayleigh_quotient(diffusion, op.potential, res.phi)
        assert quotient == pytest.approx(res.eigenvalue, abs=1e-10)

    def test_variational_bound_on_random_fields(self, rng):
        op = _cos_potential_op(n=128)
        res = principal_eigenpair(op)
        grid = op.grid
        diffusion = DiffusionSpec.isotropic(grid, 1.0)
        for _ in range(20):
            psi = ScalarField(grid, rng.standard_normal(grid.n_cells))
            quotient = rayleigh_quotient(diffusion, op.potential, psi)
            assert quotient >= res.eigenvalue - 1e-9

    def test_zero_field_rejected(self):
        grid = build_grid(1.0, 8)
        with pytest.raises(InvalidConfigError):
            rayleigh_quotient(DiffusionSpec.isotropic(grid, 1.0), make_field(grid, 0.0), make_field(grid, 0.0))


class TestNeumannGap:
    def test_unit_interval(self):
        rho1, scaled = neumann_gap(build_grid(1.0, 8), 2.0)
        assert rho1 == pytest.approx(np.pi**2)
        assert scaled == pytest.approx(2 * np.pi**2)

    def test_rectangle_takes_longest_axis(self):
        rho1, _ = neumann_gap(build_grid((1.0, 2.0), (4, 4)))
        assert rho1 == pytest.approx((np.pi / 2) ** 2)

    def test_length_scaling(self):
        for L in (0.5, 1.0, 3.0):
            rho1, _ = neumann_gap(build_grid(L, 8))
            assert rho1 * L**2 == pytest.approx(np.pi**2)


class TestThresholdEigenvalue:
    def test_constant_potential_independent_of_diffusivity(self):
        sc = scenario_1d(alpha=2.0, mu=1.0, s0=1.0)
        for d in (1e-3, 1.0, 1e3):
            assert eigenvalue_at_diffusivity(sc, d) == pytest.approx(-1.0, abs=1e-10)

    def test_uses_scenario_mean_of_s0(self):
        # V = alpha * mean(S0) - mu with a non-constant S0
        sc = scenario_1d(alpha=1.0, mu=2.0, s0=Cosine(base=1.5, amp=0.5, freq=1.0))
        assert eigenvalue_at_diffusivity(sc, 0.7) == pytest.approx(2.0 - 1.5, abs=1e-10)

    def test_large_diffusivity_limit(self):
        sc = scenario_1d(cells=512, alpha=0.75, mu=Cosine(base=1.0, amp=0.25, freq=1.0))
        lam = eigenvalue_at_diffusivity(sc, 1e3)
        limit = mean(sc.mu) - mean(sc.alpha) * mean(sc.s0)
        spread = np.ptp(sc.alpha.values * mean(sc.s0) - sc.mu.values)
        assert abs(lam - limit) <= 1e-3 * spread

    def test_small_diffusivity_approaches_min_potential(self):
        sc = scenario_1d(cells=2048, alpha=GaussBump(0.5, 1.2, 0.5, 0.5), mu=1.0)
        lam = eigenvalue_at_diffusivity(sc, 1e-3)
        limit = float(np.min(sc.mu.values - sc.alpha.values * mean(sc.s0)))
        assert lam > limit  # approaches from above
        assert abs(lam - limit) <= 6e-2


class TestCriticalDiffusivity:
    def test_constant_alpha_rejected(self):
        with pytest.raises(ConditionNotMetError):
            critical_diffusivity(scenario_1d(alpha=2.0, mu=1.0))

    def test_bump_scenario_sign_change(self):
        sc = bump_scenario(cells=256)
        d_star = critical_diffusivity(sc)
        assert abs(eigenvalue_at_diffusivity(sc, d_star)) <= 1e-8
        assert eigenvalue_at_diffusivity(sc, d_star / 2) < 0.0
        assert eigenvalue_at_diffusivity(sc, 2 * d_star) > 0.0
