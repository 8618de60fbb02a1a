"""Energy bookkeeping along a homogeneous epidemic.

For constant coefficients the quantity mean(f(S)) + (alpha/mu) mean(I) with
f(x) = (alpha/mu) x - ln x decreases exactly by the accumulated gradient
dissipation d_S * integral of |grad S|^2 / S^2.  The run's trace carries both
columns; their mismatch is pure discretization error and shrinks under
refinement (first order in dt, second order in h).
"""

import numpy as np

from epithreshold import Cosine, run_to_extinction
import sys
sys.path.insert(0, "tests")
from conftest import scenario_1d  # reuse the test-suite scenario builder


def energy_defect(cells: int, dt: float):
    sc = scenario_1d(
        cells=cells,
        alpha=2.0,
        mu=1.0,
        s0=1.0,
        i0=Cosine(base=1e-2, amp=1e-2, freq=1.0),
        d_s=0.5,
        d_i=0.5,
    )
    result = run_to_extinction(sc, dt=dt)
    t = result.trace.column("t")
    energy = result.trace.column("energy")
    diss = result.trace.column("dissipation_cum")
    k = int(np.searchsorted(t, 0.1 * (1 - 1e-12)))
    defect = abs(energy[-1] - energy[k] + (diss[-1] - diss[k]))
    return energy[k], energy[-1], diss[-1] - diss[k], defect


def main() -> None:
    print("homogeneous run: alpha=2, mu=1, S0=1, I0=1e-2(1+cos 2 pi x), d=0.5")
    print()
    print("  cells  dt       E(0.1)        E(T)          D(0.1,T)    |E(T)-E(0.1)+D|")
    previous = None
    for cells, dt in ((128, 2e-3), (256, 1e-3), (512, 5e-4)):
        e0, eT, d, defect = energy_defect(cells, dt)
        shrink = "" if previous is None else f"  (x{previous / defect:.2f} smaller)"
        print(f"  {cells:5d}  {dt:.0e}  {e0:.8f}  {eT:.8f}  {d:.3e}  {defect:.3e}{shrink}")
        previous = defect
    print()
    print("the defect tracks the first-order time discretization; the dissipation")
    print("itself (~4e-8) is the true spatial effect of the non-uniform seed")


if __name__ == "__main__":
    main()
