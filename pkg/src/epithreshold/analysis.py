"""Scenario classification, propagation probes, and model comparisons.

Ties the spectral criterion to simulation: the sign of the principal
eigenvalue classifies a scenario, small-seed sweeps measure the susceptible
loss the classification predicts, and side-by-side runs quantify how the
diffusive model differs from the averaged temporal model.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidConfigError, NumericalError
from .grids import Scenario, ScalarField, linf_norm, mean
from .ode import OdeParams, averaged_params, basic_reproduction_number, final_size
from .pde import averaged_final_size_discrete, run_to_extinction
from .spectral import critical_diffusivity, eigenvalue_at_diffusivity, threshold_eigenpair, threshold_potential

__all__ = [
    "PROPAGATES",
    "FADES_OFF",
    "CRITICAL",
    "ThresholdReport",
    "ComparisonRow",
    "ComparisonReport",
    "SweepResult",
    "classify",
    "propagation_probe",
    "compare_models",
    "monotonicity_sweep",
    "sweep_workers",
]

PROPAGATES = "Propagates"
FADES_OFF = "FadesOff"
CRITICAL = "Critical"

DEFAULT_SCALES = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
FLOOR_SLACK = 0.8  # 20% slack on the loss floor |lambda_1| / max(alpha)


@dataclass(frozen=True)
class ThresholdReport:
    """Classification of one scenario by the eigenvalue criterion."""

    lambda1: float
    classification: str
    averaged_r0: float
    averaged_classification: str
    tolerance: float
    d_star: float | None = None


@dataclass(frozen=True)
class ComparisonRow:
    """One seed scale: diffusive vs averaged final sizes."""

    i0_scale: float
    s_infinity_pde: float
    s_infinity_averaged: float  # averaged model under the same discrete update
    s_infinity_averaged_exact: float  # root of the final-size equation
    gap: float  # s_infinity_pde - s_infinity_averaged
    loss: float  # mean(S0) - s_infinity_pde
    termination: str


@dataclass(frozen=True)
class ComparisonReport:
    """Rows over decreasing seed scales plus the empirical propagation margin."""

    rows: tuple[ComparisonRow, ...]
    epsilon_empirical: float  # min over scales of the susceptible loss
    lambda1: float
    classification: str
    loss_floor: float  # |lambda_1| / max(alpha) when the scenario propagates, else 0
    floor_satisfied: bool | None  # None when the classification is not Propagates
    strict_gap_expected: bool  # homogeneous coefficients with non-constant I0


@dataclass(frozen=True)
class SweepResult:
    """Eigenvalues along one parameter axis with the expected monotonicity."""

    axis: str
    values: tuple[float, ...]
    eigenvalues: tuple[float, ...]
    direction: str  # "nondecreasing" or "nonincreasing"
    monotone_ok: bool
    violations: tuple[tuple[float, float], ...]  # offending (value, next_value) pairs
    limit_small_d: float | None = None
    limit_large_d: float | None = None


def _classify_value(lam: float, tol: float) -> str:
    if lam < -tol:
        return PROPAGATES
    if lam > tol:
        return FADES_OFF
    return CRITICAL


def classify(
    scenario: Scenario,
    tol: float | None = None,
    compute_d_star: bool = False,
) -> ThresholdReport:
    """Classify a scenario by the sign of the principal eigenvalue.

    Within ``tol`` of zero the report says Critical rather than guessing a
    side.  The averaged model is classified by its reproduction number
    mean(alpha)*mean(S0)/mean(mu) against 1.  An averaged Propagates verdict
    forces the diffusive verdict to Propagates or Critical (the constant test
    field bounds lambda_1 from above by the negated averaged margin); that
    consistency is checked on every call.
    """
    pot = threshold_potential(scenario)
    if tol is None:
        tol = 1e-8 * max(1.0, linf_norm(pot))
    lam = threshold_eigenpair(scenario).eigenvalue
    classification = _classify_value(lam, tol)

    params, s0_bar, _ = averaged_params(scenario)
    r0 = basic_reproduction_number(params, s0_bar)
    if r0 > 1.0:
        averaged = PROPAGATES
    elif r0 < 1.0:
        averaged = FADES_OFF
    else:
        averaged = CRITICAL

    if averaged == PROPAGATES and classification == FADES_OFF:
        raise NumericalError(
            f"inconsistent classification: averaged R0={r0} > 1 forces lambda_1 <= "
            f"{params.mu - params.alpha * s0_bar} < 0 but the solver returned {lam}"
        )

    d_star = critical_diffusivity(scenario) if compute_d_star else None
    return ThresholdReport(
        lambda1=lam,
        classification=classification,
        averaged_r0=r0,
        averaged_classification=averaged,
        tolerance=tol,
        d_star=d_star,
    )


def _scaled_i0_scenario(scenario: Scenario, scale: float) -> Scenario:
    i0 = ScalarField(scenario.grid, scale * scenario.i0.values)
    return replace(scenario, i0=i0, spec=None)


def _is_constant(f: ScalarField) -> bool:
    return float(np.ptp(f.values)) == 0.0


def _comparison_rows(
    scenario: Scenario,
    scales: tuple[float, ...],
    dt: float,
    t_max: float | None,
) -> tuple[ComparisonRow, ...]:
    params, s0_bar, i0_bar = averaged_params(scenario)
    num = scenario.numerics
    t_max = num.t_max if t_max is None else t_max
    s0_mean = mean(scenario.s0)
    rows = []
    for scale in scales:
        result = run_to_extinction(_scaled_i0_scenario(scenario, scale), dt=dt, t_max=t_max)
        seed = scale * i0_bar
        averaged_discrete = averaged_final_size_discrete(
            params.alpha, params.mu, s0_bar, seed, dt, t_max, num.tol_i, num.tol_s
        )
        averaged_exact = final_size(params, s0_bar, seed)
        rows.append(
            ComparisonRow(
                i0_scale=scale,
                s_infinity_pde=result.s_infinity,
                s_infinity_averaged=averaged_discrete,
                s_infinity_averaged_exact=averaged_exact,
                gap=result.s_infinity - averaged_discrete,
                loss=s0_mean - result.s_infinity,
                termination=result.termination,
            )
        )
    return tuple(rows)


def _comparison_report(
    scenario: Scenario,
    scales,
    dt: float | None,
    t_max: float | None,
) -> ComparisonReport:
    scales = tuple(sorted((float(s) for s in scales), reverse=True))
    if not scales or any(s < 0 for s in scales):
        raise InvalidConfigError("scales must be a non-empty collection of non-negative factors")
    dt = scenario.default_dt() if dt is None else dt
    report = classify(scenario)
    rows = _comparison_rows(scenario, scales, dt, t_max)
    epsilon = min(row.loss for row in rows)
    if report.classification == PROPAGATES:
        floor = abs(report.lambda1) / float(np.max(scenario.alpha.values))
        floor_ok = epsilon >= FLOOR_SLACK * floor
    else:
        floor, floor_ok = 0.0, None
    strict = (
        _is_constant(scenario.alpha)
        and _is_constant(scenario.mu)
        and _is_constant(scenario.s0)
        and not _is_constant(scenario.i0)
    )
    return ComparisonReport(
        rows=rows,
        epsilon_empirical=epsilon,
        lambda1=report.lambda1,
        classification=report.classification,
        loss_floor=floor,
        floor_satisfied=floor_ok,
        strict_gap_expected=strict,
    )


def propagation_probe(
    scenario: Scenario,
    scales=DEFAULT_SCALES,
    dt: float | None = None,
    t_max: float | None = None,
) -> ComparisonReport:
    """Measure the susceptible loss under shrinking infectious seeds.

    Runs the PDE with I0 replaced by scale * I0 for each scale (descending)
    and records mean(S0) - S_infinity.  For a propagating scenario the minimum
    loss is checked against the theoretical floor |lambda_1| / max(alpha) with
    20% numerical slack; for a fading scenario the losses shrink with the seed.
    """
    return _comparison_report(scenario, scales, dt, t_max)


def compare_models(
    scenario: Scenario,
    scales=DEFAULT_SCALES,
    dt: float | None = None,
    t_max: float | None = None,
) -> ComparisonReport:
    """Final sizes of the diffusive model against the averaged model per scale.

    The averaged column integrates the averaged system with the identical
    semi-implicit update and step size, so the gap isolates the spatial effect
    from the shared time-discretization error; the exact final-size root is
    reported alongside.  With homogeneous coefficients and non-constant I0 the
    gap is strictly positive (``strict_gap_expected`` marks when that
    assertion applies).
    """
    return _comparison_report(scenario, scales, dt, t_max)


def sweep_workers() -> int:
    """Worker-pool size for sweeps, capped by EPITHRESHOLD_THREADS."""
    env = os.environ.get("EPITHRESHOLD_THREADS")
    if env is not None:
        try:
            cap = int(env)
        except ValueError as exc:
            raise InvalidConfigError(f"EPITHRESHOLD_THREADS must be an integer, got {env!r}") from exc
        if cap < 1:
            raise InvalidConfigError("EPITHRESHOLD_THREADS must be >= 1")
        return cap
    return min(4, os.cpu_count() or 1)


def monotonicity_sweep(scenario: Scenario, axis: str, samples) -> SweepResult:
    """Principal eigenvalue along one parameter axis, with monotonicity checked.

    Axes: "d_I" (isotropic infectious diffusivity; eigenvalue nondecreasing),
    "mu_shift" (mu + c; increasing), "alpha_scale" and "s0_scale"
    (multiplicative; nonincreasing).  Sweep points run on a bounded thread
    pool and the result preserves the input order.  Violations beyond solver
    tolerance are reported, not silently dropped.
    """
    values = tuple(float(v) for v in samples)
    if len(values) < 3:
        raise InvalidConfigError("a sweep needs at least 3 samples")

    if axis == "d_I":
        direction = "nondecreasing"
        make = lambda v: ("d_i", v)
    elif axis == "mu_shift":
        direction = "nondecreasing"
        make = lambda v: ("mu", ScalarField(scenario.grid, scenario.mu.values + v))
    elif axis == "alpha_scale":
        direction = "nonincreasing"
        make = lambda v: ("alpha", ScalarField(scenario.grid, v * scenario.alpha.values))
    elif axis == "s0_scale":
        direction = "nonincreasing"
        make = lambda v: ("s0", ScalarField(scenario.grid, v * scenario.s0.values))
    else:
        raise InvalidConfigError(f"unknown sweep axis {axis!r}")

    def eigenvalue_at(v: float) -> float:
        kind, payload = make(v)
        if kind == "d_i":
            return eigenvalue_at_diffusivity(scenario, payload)
        return threshold_eigenpair(replace(scenario, **{kind: payload, "spec": None})).eigenvalue

    with ThreadPoolExecutor(max_workers=sweep_workers()) as pool:
        eigenvalues = tuple(pool.map(eigenvalue_at, values))

    pot = threshold_potential(scenario)
    slack = 10.0 * scenario.numerics.eigen_tol * max(1.0, linf_norm(pot))
    violations = []
    for (v0, l0), (v1, l1) in zip(
        zip(values, eigenvalues), zip(values[1:], eigenvalues[1:])
    ):
        if v1 == v0:
            continue
        step = (l1 - l0) if v1 > v0 else (l0 - l1)
        if direction == "nonincreasing":
            step = -step
        if step < -slack:
            violations.append((v0, v1))

    limit_small = limit_large = None
    if axis == "d_I":
        s0_bar = mean(scenario.s0)
        limit_large = mean(scenario.mu) - mean(scenario.alpha) * s0_bar
        limit_small = float(np.min(scenario.mu.values - scenario.alpha.values * s0_bar))

    return SweepResult(
        axis=axis,
        values=values,
        eigenvalues=eigenvalues,
        direction=direction,
        monotone_ok=not violations,
        violations=tuple(violations),
        limit_small_d=limit_small,
        limit_large_d=limit_large,
    )
