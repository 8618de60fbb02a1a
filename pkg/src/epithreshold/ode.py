"""Temporal SIR model: trajectories, the conserved quantity, and final sizes.

The system dS/dt = -alpha*S*I, dI/dt = alpha*S*I - mu*I conserves
E(t) = (alpha/mu)*S - ln(S) + (alpha/mu)*I along trajectories; the final size
is the root of the conservation relation below mu/alpha.  The same machinery
serves the spatially averaged model by feeding it averaged coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfigError, NumericalError
from .grids import Scenario, mean

__all__ = [
    "OdeParams",
    "OdeRun",
    "averaged_params",
    "simulate_sir",
    "final_size",
    "basic_reproduction_number",
]

I_FLOOR = 1e-14  # infection level below which a trajectory counts as extinct


@dataclass(frozen=True)
class OdeParams:
    """Infection rate alpha (1/(density*time)) and recovery rate mu (1/time)."""

    alpha: float
    mu: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.mu > 0):
            raise InvalidConfigError(f"rates must be positive, got alpha={self.alpha}, mu={self.mu}")


@dataclass(frozen=True)
class OdeRun:
    """Sampled trajectory of one temporal SIR integration."""

    params: OdeParams
    times: np.ndarray
    s: np.ndarray
    i: np.ndarray
    s_infinity: float
    conserved_drift: float  # max relative drift of (alpha/mu)S - ln S + (alpha/mu)I
    termination: str  # "extinct" or "t_max"


def averaged_params(scenario: Scenario) -> tuple[OdeParams, float, float]:
    """Spatial averages (alpha_bar, mu_bar), S0_bar, I0_bar for the averaged model."""
    return (
        OdeParams(alpha=mean(scenario.alpha), mu=mean(scenario.mu)),
        mean(scenario.s0),
        mean(scenario.i0),
    )


def basic_reproduction_number(params: OdeParams, s0: float) -> float:
    """alpha * S0 / mu; the epidemic threshold sits at 1."""
    return params.alpha * s0 / params.mu


def _rhs(alpha: float, mu: float, s: float, i: float) -> tuple[float, float]:
    si = alpha * s * i
    return -si, si - mu * i


def simulate_sir(
    params: OdeParams,
    s0: float,
    i0: float,
    dt: float | None = None,
    t_max: float = 1e4,
) -> OdeRun:
    """Integrate the SIR system with the classical 4-stage Runge-Kutta scheme.

    Fixed step dt (default 1e-3 / mu); stops once I drops below 1e-14 or at
    t_max.  The conserved-quantity drift over the run is recorded as the
    accuracy monitor.
    """
    if s0 <= 0 or i0 < 0:
        raise InvalidConfigError(f"need S0 > 0 and I0 >= 0, got S0={s0}, I0={i0}")
    a, m = params.alpha, params.mu
    if dt is None:
        dt = 1e-3 / m
    if dt <= 0:
        raise InvalidConfigError("dt must be positive")

    def energy(s, i):
        return (a / m) * s - math.log(s) + (a / m) * i

    e0 = energy(s0, i0)
    t, s, i = 0.0, float(s0), float(i0)
    times, ss, ii = [t], [s], [i]
    max_drift = 0.0
    termination = "t_max"
    while t < t_max:
        if i < I_FLOOR:
            termination = "extinct"
            break
        k1s, k1i = _rhs(a, m, s, i)
        k2s, k2i = _rhs(a, m, s + 0.5 * dt * k1s, i + 0.5 * dt * k1i)
        k3s, k3i = _rhs(a, m, s + 0.5 * dt * k2s, i + 0.5 * dt * k2i)
        k4s, k4i = _rhs(a, m, s + dt * k3s, i + dt * k3i)
        s_new = s + dt * (k1s + 2 * k2s + 2 * k3s + k4s) / 6.0
        i_new = i + dt * (k1i + 2 * k2i + 2 * k3i + k4i) / 6.0
        if not (0.0 < s_new <= s) or i_new < 0.0:
            raise NumericalError(
                f"integration left the admissible region at t={t + dt} "
                f"(S={s_new}, I={i_new}); reduce dt"
            )
        s, i, t = s_new, i_new, t + dt
        times.append(t)
        ss.append(s)
        ii.append(i)
        max_drift = max(max_drift, abs(energy(s, i) - e0))
    return OdeRun(
        params=params,
        times=np.asarray(times),
        s=np.asarray(ss),
        i=np.asarray(ii),
        s_infinity=s,
        conserved_drift=max_drift / abs(e0),
        termination=termination,
    )


def final_size(params: OdeParams, s0: float, i0: float) -> float:
    """Root of (a/m)x - ln x = (a/m)S0 - ln S0 + (a/m)I0 on the branch x <= mu/alpha.

    f(x) = (a/m)x - ln x is strictly decreasing up to its minimum at mu/alpha
    and blows up at 0, so bracketing from hi = min(S0, mu/alpha) downward always
    succeeds; plain bisection then pins the root to 1e-14 * max(1, S0).

    For I0 = 0 this returns the small-seed limit: S0 itself when S0 <= mu/alpha,
    otherwise the nontrivial root below mu/alpha.
    """
    if s0 <= 0 or i0 < 0:
        raise InvalidConfigError(f"need S0 > 0 and I0 >= 0, got S0={s0}, I0={i0}")
    a, m = params.alpha, params.mu
    r = a / m

    def f(x):
        return r * x - math.log(x)

    target = f(s0) + r * i0
    hi = min(s0, m / a)
    if f(hi) >= target:  # only possible at equality (I0 = 0, S0 <= mu/alpha)
        return hi
    lo = hi
    while f(lo) < target:
        lo *= 0.5
    tol = 1e-14 * max(1.0, s0)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) >= target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
