"""Semi-implicit stepping: positivity, exact mass law, energy bookkeeping."""

import math

import numpy as np
import pytest

from epithreshold import (
    Cosine,
    InvalidConfigError,
    OdeParams,
    PdeState,
    ScalarField,
    Stepper,
    Trace,
    averaged_final_size_discrete,
    dissipation_increment,
    energy_functional,
    estimate_decay_rate,
    final_size,
    gradient_energy,
    linf_norm,
    make_field,
    mean,
    min_value,
    neumann_gap,
    run_steps,
    run_to_extinction,
    step,
)

from conftest import scenario_1d, scenario_2d


class TestStep:
    def test_zero_infection_preserves_susceptible_mass(self):
        sc = scenario_1d(cells=64, s0=Cosine(base=1.0, amp=0.4, freq=1.0), i0=0.0)
        state = PdeState(0.0, sc.s0, sc.i0)
        new = step(state, sc, dt=1e-2)
        assert np.all(new.i.values == 0.0)
        assert mean(new.s) == pytest.approx(mean(sc.s0), abs=1e-14)

    def test_constant_fields_match_scalar_recursion(self):
        sc = scenario_1d(cells=32, alpha=2.0, mu=1.0, s0=1.0, i0=1e-2)
        dt = 1e-2
        new = step(PdeState(0.0, sc.s0, sc.i0), sc, dt)
        s_expect = 1.0 / (1.0 + dt * 2.0 * 1e-2)
        i_expect = (1e-2 + dt * 2.0 * s_expect * 1e-2) / (1.0 + dt * 1.0)
        assert np.allclose(new.s.values, s_expect, rtol=1e-13)
        assert np.allclose(new.i.values, i_expect, rtol=1e-13)

    def test_exact_discrete_mass_balance(self, rng):
        sc = scenario_1d(
            cells=48,
            alpha=Cosine(base=2.0, amp=0.8, freq=2.0),
            mu=Cosine(base=1.0, amp=0.3, freq=1.0),
            s0=Cosine(base=1.0, amp=0.2, freq=1.0),
            i0=5e-2,
            d_s=0.3,
            d_i=0.7,
        )
        stepper = Stepper(sc, dt=5e-3)
        s, i = sc.s0.values.copy(), sc.i0.values.copy()
        for _ in range(50):
            s_new, i_new, _ = stepper.advance(s, i)
            balance = (
                s_new.mean() + i_new.mean() - s.mean() - i.mean()
                + 5e-3 * np.mean(sc.mu.values * i_new)
            )
            assert abs(balance) < 1e-14
            s, i = s_new, i_new

    def test_positivity_and_max_principle(self):
        sc = scenario_1d(
            cells=64,
            alpha=Cosine(base=2.0, amp=1.5, freq=3.0),
            s0=Cosine(base=1.0, amp=0.7, freq=2.0),
            i0=Cosine(base=0.5, amp=0.5, freq=1.0),
            d_s=0.05,
            d_i=1.5,
        )
        stepper = Stepper(sc, dt=2e-2)
        s, i = sc.s0.values.copy(), sc.i0.values.copy()
        s0_linf = np.abs(s).max()
        for _ in range(100):
            s, i, _ = stepper.advance(s, i)
            assert s.min() > 0.0
            assert i.min() >= 0.0
            assert np.abs(s).max() <= s0_linf * (1 + 1e-14)


class TestRunToExtinction:
    def test_zero_seed_short_circuits(self):
        sc = scenario_1d(i0=0.0, s0=Cosine(base=1.0, amp=0.3, freq=1.0))
        result = run_to_extinction(sc, dt=1e-3)
        assert result.s_infinity == mean(sc.s0)
        assert result.termination == "converged"
        assert result.steps == 0

    def test_constant_scenario_matches_ode_final_size(self):
        sc = scenario_1d(cells=16, alpha=2.0, mu=1.0, s0=1.0, i0=1e-3)
        result = run_to_extinction(sc, dt=1e-3)
        expected = final_size(OdeParams(2.0, 1.0), 1.0, 1e-3)
        assert result.s_infinity == pytest.approx(expected, abs=1e-4)
        assert result.termination == "converged"
        assert result.mass_balance_defect_max < 1e-13

    def test_matches_discrete_averaged_twin_exactly_for_constant_data(self):
        sc = scenario_1d(cells=16, alpha=2.0, mu=1.0, s0=1.0, i0=1e-3)
        result = run_to_extinction(sc, dt=2e-3)
        twin = averaged_final_size_discrete(2.0, 1.0, 1.0, 1e-3, dt=2e-3)
        assert result.s_infinity == pytest.approx(twin, abs=1e-10)

    def test_trace_masses_monotone(self):
        sc = scenario_1d(cells=64, i0=Cosine(base=1e-2, amp=1e-2, freq=1.0))
        result = run_to_extinction(sc, dt=2e-3)
        arr = result.trace.as_array()
        mean_s = result.trace.column("mean_S")
        total = mean_s + result.trace.column("mean_I")
        assert np.all(np.diff(mean_s) <= 1e-14)
        assert np.all(np.diff(total) <= 1e-14)
        assert arr.shape[1] == 10

    def test_terminal_flatness_and_bounds(self):
        sc = scenario_1d(
            cells=64,
            s0=Cosine(base=1.0, amp=0.2, freq=1.0),
            i0=Cosine(base=1e-2, amp=1e-2, freq=1.0),
        )
        result = run_to_extinction(sc, dt=2e-3)
        assert result.terminal_flatness < 1e-8
        assert result.min_susceptible_over_run > 0.0
        assert linf_norm(result.final_state.s) <= linf_norm(sc.s0)
        assert result.max_infected_amplification < 50.0

    def test_2d_invariants_short_horizon(self):
        sc = scenario_2d(cells=(10, 8), lengths=(1.0, 1.0), i0=5e-2, d_s=0.2, d_i=0.4)
        result = run_steps(sc, n_steps=40, dt=5e-3)
        total = result.trace.column("mean_S") + result.trace.column("mean_I")
        assert np.all(np.diff(total) <= 1e-14)
        assert result.min_susceptible_over_run > 0.0
        assert min_value(result.final_state.i) >= 0.0
        assert result.mass_balance_defect_max < 1e-13

    def test_t_max_flagged(self):
        sc = scenario_1d(cells=16, i0=1e-2)
        result = run_to_extinction(sc, dt=1e-3, t_max=0.05)
        assert result.termination == "t_max"


class TestEnergy:
    def test_energy_reference_points(self):
        grid_field = make_field(scenario_1d(cells=8).grid, 1.0)
        state = PdeState(0.0, grid_field, grid_field.with_values(np.zeros(8)))
        assert energy_functional(state, 1.0, 1.0) == pytest.approx(1.0)
        # minimum of the convex profile sits at mu/alpha
        alpha, mu = 2.0, 0.5
        smin = make_field(grid_field.grid, mu / alpha)
        state_min = PdeState(0.0, smin, grid_field.with_values(np.zeros(8)))
        expected = 1.0 - math.log(mu / alpha)
        assert energy_functional(state_min, alpha, mu) == pytest.approx(expected)

    def test_energy_requires_positive_s(self):
        grid = scenario_1d(cells=8).grid
        state = PdeState(0.0, make_field(grid, 1.0), make_field(grid, 0.0))
        bad = PdeState(0.0, ScalarField(grid, np.full(8, -1.0)), make_field(grid, 0.0))
        energy_functional(state, 1.0, 1.0)
        with pytest.raises(InvalidConfigError):
            energy_functional(bad, 1.0, 1.0)

    def test_energy_constant_along_constant_field_run(self):
        sc = scenario_1d(cells=8, alpha=2.0, mu=1.0, s0=1.0, i0=1e-2)
        coarse = run_to_extinction(sc, dt=4e-3)
        fine = run_to_extinction(sc, dt=2e-3)

        def drift(result):
            energy = result.trace.column("energy")
            return np.abs(energy - energy[0]).max()

        assert drift(coarse) < 3e-3
        assert drift(fine) < 0.6 * drift(coarse)

    def test_dissipation_increment_properties(self, rng):
        sc = scenario_1d(cells=32)
        grid = sc.grid
        flat = PdeState(0.0, make_field(grid, 1.3), make_field(grid, 0.0))
        assert dissipation_increment(flat, flat, d_s=0.5, dt=1e-3) == 0.0
        for _ in range(5):
            s = ScalarField(grid, rng.uniform(0.5, 2.0, grid.n_cells))
            state = PdeState(0.0, s, make_field(grid, 0.0))
            assert dissipation_increment(flat, state, d_s=0.5, dt=1e-3) >= 0.0

    def test_energy_identity_self_consistency(self):
        sc = scenario_1d(
            cells=64,
            alpha=2.0,
            mu=1.0,
            s0=1.0,
            i0=Cosine(base=1e-2, amp=1e-2, freq=1.0),
            d_s=0.5,
            d_i=0.5,
        )
        result = run_to_extinction(sc, dt=2e-3)
        t = result.trace.column("t")
        energy = result.trace.column("energy")
        diss = result.trace.column("dissipation_cum")
        k = np.searchsorted(t, 0.1 - 1e-12)
        defect = abs(energy[-1] - energy[k] + (diss[-1] - diss[k]))
        assert defect <= 5e-3 * abs(energy[k])


class TestGradientEnergy:
    def test_constant_field_zero(self):
        assert gradient_energy(make_field(scenario_1d(cells=16).grid, 2.0)) == 0.0

    def test_cos_mode_value_against_refined_quadrature(self):
        # oracle: the discrete functional itself at very fine resolution
        def value(n):
            from epithreshold import build_grid

            grid = build_grid(1.0, n)
            return gradient_energy(ScalarField(grid, np.cos(np.pi * grid.centers()[0])))

        oracle = value(1 << 15)
        assert oracle == pytest.approx(np.pi**2 / 4, rel=1e-8)
        coarse = value(256)
        assert coarse == pytest.approx(np.pi**2 / 4, rel=1e-4)

    def test_pure_diffusion_gradient_decay_rate(self):
        sc = scenario_1d(
            cells=128,
            s0=Cosine(base=1.0, amp=0.5, freq=0.5),  # cos(pi x): slowest mode
            i0=0.0,
            d_s=0.5,
        )
        result = run_steps(sc, n_steps=400, dt=1e-3)
        rate = estimate_decay_rate(result.trace, window=200)
        _, expected = neumann_gap(sc.grid, 2.0 * 0.5)
        assert rate == pytest.approx(expected, rel=1e-2)

    def test_gradient_energies_decay_for_large_diffusivities(self):
        # tiny seed keeps reaction-fed gradients below the diffusive decay
        sc = scenario_1d(
            cells=64,
            alpha=2.0,
            mu=1.0,
            s0=Cosine(base=1.0, amp=0.1, freq=1.0),
            i0=Cosine(base=1e-8, amp=1e-8, freq=1.0),
            d_s=5.0,
            d_i=5.0,
        )
        result = run_steps(sc, n_steps=150, dt=1e-3)
        m = result.trace.column("grad_energy_S") + result.trace.column("grad_energy_I")
        assert m[-1] < 1e-5 * m[0]
        rate = estimate_decay_rate(result.trace, window=75)
        assert rate > 0.0


class TestDecayRate:
    def _trace_from_values(self, t, m):
        trace = Trace()
        for ti, mi in zip(t, m):
            trace.append((ti, 1.0, 0.0, 0.0, 1.0, 0.0, np.nan, np.nan, mi / 2, mi / 2))
        return trace

    def test_synthetic_exponential(self):
        t = np.linspace(0.0, 2.0, 101)
        trace = self._trace_from_values(t, np.exp(-3.0 * t))
        assert estimate_decay_rate(trace, window=50) == pytest.approx(3.0, abs=1e-6)

    def test_constant_signal_zero_rate(self):
        t = np.linspace(0.0, 1.0, 20)
        trace = self._trace_from_values(t, np.ones_like(t))
        assert estimate_decay_rate(trace, window=10) == pytest.approx(0.0, abs=1e-12)

    def test_insufficient_data(self):
        t = np.linspace(0.0, 1.0, 5)
        trace = self._trace_from_values(t, np.exp(-t))
        with pytest.raises(InvalidConfigError):
            estimate_decay_rate(trace, window=10)
