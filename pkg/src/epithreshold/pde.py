"""Semi-implicit time integration of the spatial SIR system to extinction.

One step solves, in order,

    (Id + dt*L_S + dt*diag(alpha*I^n)) S^{n+1} = S^n
    (Id + dt*L_I + dt*diag(mu))        I^{n+1} = I^n + dt*alpha*S^{n+1}*I^n

with L_S, L_I the assembled zero-flux diffusion operators.  Both system
matrices are strictly diagonally dominant M-matrices, so the update preserves
S > 0 and I >= 0 unconditionally, and summing the two solves over cells gives
the exact discrete mass law

    mean(S+I)^{n+1} = mean(S+I)^n - dt * mean(mu * I^{n+1}),

the alpha-transfer terms cancelling identically.  The susceptible drift per
unit time therefore equals mean(alpha * S^{n+1} * I^n) exactly; the run loop
uses that reaction integral (rather than finite-differencing mean_S, which
bottoms out in rounding noise at small dt) as its convergence measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_banded
from scipy.sparse.linalg import splu

from .errors import InvalidConfigError, NumericalError
from .grids import Grid, ScalarField, Scenario, linf_norm, make_field, mean, min_value
from .operators import assemble, face_differences

__all__ = [
    "PdeState",
    "Trace",
    "ExtinctionResult",
    "Stepper",
    "step",
    "run_to_extinction",
    "run_steps",
    "energy_functional",
    "dissipation_increment",
    "gradient_energy",
    "estimate_decay_rate",
    "averaged_final_size_discrete",
]

TRACE_COLUMNS = (
    "t",
    "mean_S",
    "mean_I",
    "max_I",
    "min_S",
    "flatness",
    "energy",
    "dissipation_cum",
    "grad_energy_S",
    "grad_energy_I",
)

# relative magnitude of negative I values attributable to linear-solve rounding
_ROUNDING_FLOOR = 1e-12


@dataclass(frozen=True)
class PdeState:
    """Susceptible and infectious density fields at one time."""

    t: float
    s: ScalarField
    i: ScalarField


@dataclass
class Trace:
    """Time series of scalar diagnostics recorded along a run.

    Column order matches the trace CSV: t, mean_S, mean_I, max_I, min_S,
    flatness, energy, dissipation_cum, grad_energy_S, grad_energy_I.  The
    energy and dissipation columns are NaN unless the model is homogeneous
    (constant alpha, mu and constant scalar susceptible diffusivity).
    """

    rows: list = field(default_factory=list)

    def append(self, row: tuple) -> None:
        self.rows.append(row)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.rows, dtype=float)

    def column(self, name: str) -> np.ndarray:
        return self.as_array()[:, TRACE_COLUMNS.index(name)]

    def __len__(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class ExtinctionResult:
    """Outcome of integrating a scenario until the infection dies out."""

    s_infinity: float
    terminal_flatness: float
    trace: Trace
    termination: str  # "converged" or "t_max"
    final_state: PdeState
    steps: int
    min_susceptible_over_run: float  # empirical positive lower bound on S
    max_infected_amplification: float  # empirical sup_t ||I(t)||_inf / ||I0||_inf
    mass_balance_defect_max: float  # worst per-step violation of the exact mass law


def _gradient_energy_values(grid: Grid, values: np.ndarray) -> float:
    vol = grid.cell_volume
    total = 0.0
    for axis, d in enumerate(face_differences(grid, values)):
        h = grid.spacing[axis]
        total += float(np.sum((d / h) ** 2)) * vol
    return 0.5 * total


def gradient_energy(f: ScalarField) -> float:
    """(1/2) * integral of |grad f|^2, from face differences of cell values."""
    return _gradient_energy_values(f.grid, f.values)


def energy_functional(state: PdeState, alpha_const: float, mu_const: float) -> float:
    """mean of f(S) + (alpha/mu) * mean(I) with f(x) = (alpha/mu) x - ln x.

    Only meaningful for homogeneous (constant-coefficient) models, where this
    quantity decreases exactly by the accumulated gradient dissipation.
    """
    s = state.s.values
    if np.any(s <= 0.0):
        raise InvalidConfigError("energy functional needs S > 0 everywhere")
    r = alpha_const / mu_const
    return float(np.mean(r * s - np.log(s)) + r * np.mean(state.i.values))


def _dissipation_values(grid: Grid, s_values: np.ndarray, d_s: float, dt: float) -> float:
    s = s_values.reshape(grid.shape)
    vol = grid.cell_volume
    total = 0.0
    for axis, d in enumerate(face_differences(grid, s_values)):
        h = grid.spacing[axis]
        if grid.dim == 1:
            s_face = 0.5 * (s[1:] + s[:-1])
        elif axis == 0:
            s_face = 0.5 * (s[:, 1:] + s[:, :-1])
        else:
            s_face = 0.5 * (s[1:, :] + s[:-1, :])
        total += float(np.sum((d / h) ** 2 / s_face**2)) * vol
    return dt * d_s * total / grid.volume


def dissipation_increment(
    state_old: PdeState, state_new: PdeState, d_s: float, dt: float
) -> float:
    """One-step quadrature of d_S * spatial-average of |grad S|^2 / S^2.

    Face gradients divided by the arithmetic face average of S, evaluated at
    the new state (rectangle rule in time); always non-negative.
    """
    return _dissipation_values(state_new.s.grid, state_new.s.values, d_s, dt)


def _constant_value(f: ScalarField) -> float | None:
    v = f.values
    return float(v[0]) if np.ptp(v) == 0.0 else None


class Stepper:
    """Owns the factorized implicit solves for repeated stepping of one scenario.

    1D grids use banded (tridiagonal) elimination; 2D grids use sparse LU, with
    the infectious matrix factorized once (it does not change between steps).
    """

    def __init__(self, scenario: Scenario, dt: float):
        if dt <= 0:
            raise InvalidConfigError("dt must be positive")
        self.scenario = scenario
        self.dt = dt
        self.grid = scenario.grid
        op_s = assemble(scenario.diff_s)
        op_i = assemble(scenario.diff_i)
        n = self.grid.n_cells
        self.alpha = scenario.alpha.values
        self.mu = scenario.mu.values
        if self.grid.dim == 1:
            self._ab_s = self._banded(op_s.matrix, extra_diag=None)
            self._ab_i = self._banded(op_i.matrix, extra_diag=self.mu)
            self._solve_i = None
        else:
            eye = sp.identity(n, format="csr")
            self._base_s = (eye + dt * op_s.matrix).tocsr()
            m_i = (eye + dt * op_i.matrix + dt * sp.diags(self.mu)).tocsc()
            self._solve_i = splu(m_i).solve

    def _banded(self, matrix: sp.csr_matrix, extra_diag) -> np.ndarray:
        n = self.grid.n_cells
        ab = np.zeros((3, n))
        ab[0, 1:] = self.dt * matrix.diagonal(1)
        ab[2, :-1] = self.dt * matrix.diagonal(-1)
        ab[1] = 1.0 + self.dt * matrix.diagonal()
        if extra_diag is not None:
            ab[1] += self.dt * extra_diag
        return ab

    def advance(self, s: np.ndarray, i: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
        """One step; returns (S_new, I_new, susceptible drift per unit time).

        The drift is the reaction integral mean(alpha * S_new * I_old), which
        the discrete mass law makes identical to -d(mean_S)/dt for this step.
        """
        dt = self.dt
        if self.grid.dim == 1:
            ab = self._ab_s.copy()
            ab[1] += dt * self.alpha * i
            s_new = solve_banded((1, 1), ab, s, check_finite=False)
            rhs = i + dt * self.alpha * s_new * i
            i_new = solve_banded((1, 1), self._ab_i, rhs, check_finite=False)
        else:
            m_s = self._base_s + dt * sp.diags(self.alpha * i)
            s_new = splu(m_s.tocsc()).solve(s)
            rhs = i + dt * self.alpha * s_new * i
            i_new = self._solve_i(rhs)

        if not np.all(s_new > 0.0):
            raise NumericalError("susceptible field lost positivity; reduce dt")
        i_min = i_new.min()
        if i_min < 0.0:
            # the exact M-matrix update is non-negative; scrub solver rounding
            scale = max(1.0, float(np.abs(i).max()))
            if i_min < -_ROUNDING_FLOOR * scale:
                raise NumericalError("infectious field lost positivity; reduce dt")
            i_new = np.maximum(i_new, 0.0)
        drift = float(np.mean(self.alpha * s_new * i))
        return s_new, i_new, drift


def step(state: PdeState, scenario: Scenario, dt: float) -> PdeState:
    """Advance one semi-implicit step (convenience wrapper around Stepper)."""
    stepper = Stepper(scenario, dt)
    s_new, i_new, _ = stepper.advance(state.s.values, state.i.values)
    return PdeState(
        t=state.t + dt,
        s=ScalarField(scenario.grid, s_new),
        i=ScalarField(scenario.grid, i_new),
    )


class _Runner:
    """Shared trace-recording run loop behind the public run functions."""

    def __init__(self, scenario: Scenario, dt: float):
        self.scenario = scenario
        self.stepper = Stepper(scenario, dt)
        self.dt = dt
        # energy/dissipation are tracked only for the homogeneous model
        alpha_c = _constant_value(scenario.alpha)
        mu_c = _constant_value(scenario.mu)
        ds_c = {_constant_value(f) for f in scenario.diff_s.per_axis}
        self.alpha_c = alpha_c
        self.mu_c = mu_c
        self.ds_c = ds_c.pop() if len(ds_c) == 1 else None
        self.homogeneous = alpha_c is not None and mu_c is not None and self.ds_c is not None
        self.s = scenario.s0.values.copy()
        self.i = scenario.i0.values.copy()
        self.t = 0.0
        self.diss = 0.0 if self.homogeneous else math.nan
        self.trace = Trace()
        self.mass_defect_max = 0.0
        self.min_s = float(self.s.min())
        self.i0_linf = float(np.abs(self.i).max())
        self.max_i_ratio = 0.0
        self.record()

    def record(self) -> None:
        grid = self.scenario.grid
        if self.homogeneous:
            r = self.alpha_c / self.mu_c
            energy = float(np.mean(r * self.s - np.log(self.s)) + r * np.mean(self.i))
        else:
            energy = math.nan
        self.trace.append(
            (
                self.t,
                float(self.s.mean()),
                float(self.i.mean()),
                float(self.i.max()),
                float(self.s.min()),
                float(self.s.max() - self.s.min()),
                energy,
                self.diss,
                _gradient_energy_values(grid, self.s),
                _gradient_energy_values(grid, self.i),
            )
        )

    def advance(self) -> float:
        s_old, i_old = self.s, self.i
        mass_old = s_old.mean() + i_old.mean()
        self.s, self.i, drift = self.stepper.advance(s_old, i_old)
        self.t += self.dt
        # exact discrete balance: mean(S+I) drops by dt * mean(mu * I_new)
        defect = abs(
            self.s.mean() + self.i.mean() - mass_old
            + self.dt * float(np.mean(self.stepper.mu * self.i))
        )
        self.mass_defect_max = max(self.mass_defect_max, defect)
        if self.homogeneous:
            self.diss += _dissipation_values(self.scenario.grid, self.s, self.ds_c, self.dt)
        self.min_s = min(self.min_s, float(self.s.min()))
        if self.i0_linf > 0.0:
            self.max_i_ratio = max(self.max_i_ratio, float(np.abs(self.i).max()) / self.i0_linf)
        return drift


def run_to_extinction(
    scenario: Scenario,
    dt: float | None = None,
    t_max: float | None = None,
    tol_i: float | None = None,
    tol_s: float | None = None,
    record_every: int = 1,
) -> ExtinctionResult:
    """Integrate until the infection is numerically extinct.

    Stops once ||I||_inf < tol_i * max(1, ||I0||_inf) and the susceptible
    drift per unit time falls below tol_s, or at t_max (flagged).  The final
    mean of S is the reported limit value.
    """
    num = scenario.numerics
    dt = scenario.default_dt() if dt is None else dt
    t_max = num.t_max if t_max is None else t_max
    tol_i = num.tol_i if tol_i is None else tol_i
    tol_s = num.tol_s if tol_s is None else tol_s
    if record_every < 1:
        raise InvalidConfigError("record_every must be >= 1")

    runner = _Runner(scenario, dt)
    i_gate = tol_i * max(1.0, runner.i0_linf)
    termination = "t_max"
    steps = 0
    if runner.i0_linf == 0.0:
        termination = "converged"  # nothing to integrate: S stays at S0
    else:
        while runner.t < t_max:
            drift = runner.advance()
            steps += 1
            if steps % record_every == 0:
                runner.record()
            if float(np.abs(runner.i).max()) < i_gate and drift < tol_s:
                termination = "converged"
                break
        if steps % record_every != 0:
            runner.record()

    grid = scenario.grid
    final = PdeState(runner.t, ScalarField(grid, runner.s), ScalarField(grid, runner.i))
    return ExtinctionResult(
        s_infinity=float(runner.s.mean()),
        terminal_flatness=float(runner.s.max() - runner.s.min()),
        trace=runner.trace,
        termination=termination,
        final_state=final,
        steps=steps,
        min_susceptible_over_run=runner.min_s,
        max_infected_amplification=runner.max_i_ratio,
        mass_balance_defect_max=runner.mass_defect_max,
    )


def run_steps(
    scenario: Scenario,
    n_steps: int,
    dt: float | None = None,
    record_every: int = 1,
) -> ExtinctionResult:
    """Integrate a fixed number of steps (diffusion/decay studies)."""
    if n_steps < 1:
        raise InvalidConfigError("n_steps must be >= 1")
    dt = scenario.default_dt() if dt is None else dt
    if record_every < 1:
        raise InvalidConfigError("record_every must be >= 1")
    runner = _Runner(scenario, dt)
    for k in range(1, n_steps + 1):
        runner.advance()
        if k % record_every == 0:
            runner.record()
    if n_steps % record_every != 0:
        runner.record()
    grid = scenario.grid
    final = PdeState(runner.t, ScalarField(grid, runner.s), ScalarField(grid, runner.i))
    return ExtinctionResult(
        s_infinity=float(runner.s.mean()),
        terminal_flatness=float(runner.s.max() - runner.s.min()),
        trace=runner.trace,
        termination="fixed_steps",
        final_state=final,
        steps=n_steps,
        min_susceptible_over_run=runner.min_s,
        max_infected_amplification=runner.max_i_ratio,
        mass_balance_defect_max=runner.mass_defect_max,
    )


def estimate_decay_rate(trace: Trace, window: int) -> float:
    """Exponential decay rate of the total gradient energy over the last rows.

    Least-squares slope of log(m_S + m_I) over the trailing ``window`` rows,
    negated so a decaying signal reports a positive rate.
    """
    if window < 2:
        raise InvalidConfigError("window must be at least 2 rows")
    arr = trace.as_array()
    if len(arr) < window:
        raise InvalidConfigError(f"trace has {len(arr)} rows, need {window}")
    tail = arr[-window:]
    m = tail[:, TRACE_COLUMNS.index("grad_energy_S")] + tail[:, TRACE_COLUMNS.index("grad_energy_I")]
    if np.any(m <= 0.0):
        raise InvalidConfigError("gradient energy must be positive over the fit window")
    slope = np.polyfit(tail[:, 0], np.log(m), 1)[0]
    return float(-slope)


def averaged_final_size_discrete(
    alpha: float,
    mu: float,
    s0: float,
    i0: float,
    dt: float,
    t_max: float = 1e4,
    tol_i: float = 1e-10,
    tol_s: float = 1e-12,
) -> float:
    """Averaged-model final size under the same semi-implicit update as the PDE.

    This is the spatially constant reduction of the PDE scheme (diffusion
    drops out), with the identical step size and stopping rule; comparing the
    PDE against it isolates the spatial effect from the shared time
    discretization error.
    """
    s, i = float(s0), float(i0)
    i_gate = tol_i * max(1.0, i)
    t = 0.0
    while t < t_max and i > 0.0:
        s_new = s / (1.0 + dt * alpha * i)
        drift = alpha * s_new * i
        i = (i + dt * alpha * s_new * i) / (1.0 + dt * mu)
        s = s_new
        t += dt
        if i < i_gate and drift < tol_s:
            break
    return s
