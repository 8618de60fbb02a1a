"""The critical-diffusivity phenomenon: slowing movement can start an epidemic.

With a localized hotspot whose averaged reproduction number sits below 1, the
principal eigenvalue increases strictly with the infectious diffusivity d_I,
from min(mu - alpha*mean(S0)) < 0 up to mean(mu) - mean(alpha)*mean(S0) > 0.
The sign change defines d*: below it infections cluster at the hotspot and the
epidemic propagates; above it dispersal dilutes the cluster and it fades.
"""

import numpy as np

from epithreshold import (
    critical_diffusivity,
    eigenvalue_at_diffusivity,
    monotonicity_sweep,
    parse_scenario,
    run_to_extinction,
    mean,
)
from dataclasses import replace
from epithreshold import ScalarField


def with_diffusivity(scenario, d):
    field = ScalarField(scenario.grid, np.full(scenario.grid.n_cells, d))
    diff = replace(scenario.diff_i, per_axis=(field,))
    return replace(scenario, diff_i=diff, diff_s=diff, spec=None)


def main() -> None:
    scenario = parse_scenario("scenarios/hotspot.toml")

    sweep = monotonicity_sweep(scenario, "d_I", tuple(np.logspace(-3, 1, 9)))
    print("eigenvalue vs infectious diffusivity (strictly increasing):")
    print("  d_I        lambda1")
    for d, lam in zip(sweep.values, sweep.eigenvalues):
        print(f"  {d:9.3e}  {lam:+.6f}")
    print(f"  small-d limit {sweep.limit_small_d:+.4f}, large-d limit {sweep.limit_large_d:+.4f}")
    print()

    d_star = critical_diffusivity(scenario)
    print(f"critical diffusivity d* = {d_star:.6f} "
          f"(lambda1 there: {eigenvalue_at_diffusivity(scenario, d_star):+.2e})")
    print()

    print("simulations either side of d* (seed amplitude 1e-3):")
    for label, d in (("slow movers, d*/4", d_star / 4), ("fast movers, 4d*", 4 * d_star)):
        result = run_to_extinction(with_diffusivity(scenario, d), dt=2e-3)
        loss = mean(scenario.s0) - result.s_infinity
        print(f"  {label:18s} d_I={d:.5f}: susceptible loss = {loss:.6f} "
              f"({'propagates' if loss > 0.05 else 'fades off'})")


if __name__ == "__main__":
    main()
