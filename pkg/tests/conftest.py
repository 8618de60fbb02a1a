"""Shared scenario builders and independent oracles for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from epithreshold import Constant, Cosine, GaussBump, Numerics, ScenarioSpec


def as_spec(value):
    return Constant(float(value)) if np.isscalar(value) else value


def scenario_1d(
    cells=64,
    length=1.0,
    alpha=2.0,
    mu=1.0,
    s0=1.0,
    i0=1e-2,
    d_s=0.5,
    d_i=0.5,
    numerics=None,
):
    """Interval scenario from scalars or coefficient specs."""
    return ScenarioSpec(
        lengths=(float(length),),
        cells=(int(cells),),
        alpha=as_spec(alpha),
        mu=as_spec(mu),
        s0=as_spec(s0),
        i0=as_spec(i0),
        d_s=(as_spec(d_s),),
        d_i=(as_spec(d_i),),
        numerics=numerics or Numerics(),
    ).realize()


def scenario_2d(
    cells=(12, 10),
    lengths=(1.0, 2.0),
    alpha=2.0,
    mu=1.0,
    s0=1.0,
    i0=1e-2,
    d_s=0.5,
    d_i=0.5,
    numerics=None,
):
    return ScenarioSpec(
        lengths=tuple(float(v) for v in lengths),
        cells=tuple(int(v) for v in cells),
        alpha=as_spec(alpha),
        mu=as_spec(mu),
        s0=as_spec(s0),
        i0=as_spec(i0),
        d_s=(as_spec(d_s),),
        d_i=(as_spec(d_i),),
        numerics=numerics or Numerics(),
    ).realize()


GAUSS_ALPHA = GaussBump(base=0.5, amp=1.2, center=0.5, width=0.1)
WIDE_GAUSS_ALPHA = GaussBump(base=0.5, amp=1.2, center=0.5, width=0.5)


def bump_scenario(cells=256, d_i=5e-3, i0=1e-2, width=0.1):
    """Heterogeneous infection-rate scenario with the subcritical average."""
    return scenario_1d(
        cells=cells,
        alpha=GaussBump(base=0.5, amp=1.2, center=0.5, width=width),
        mu=1.0,
        s0=1.0,
        i0=Cosine(base=float(i0), amp=float(i0), freq=1.0),
        d_s=d_i,
        d_i=d_i,
    )


def dense_lambda1(op):
    """Oracle: bottom eigenvalue of the assembled matrix by a dense solver."""
    from scipy.linalg import eigh

    return float(eigh(op.matrix.toarray(), eigvals_only=True, subset_by_index=[0, 0])[0])


def random_scenario(rng: np.random.Generator, dim_choices=(1, 1, 1, 2)):
    """Randomized valid scenario for structural invariant batteries."""
    dim = int(rng.choice(dim_choices))

    def coef(lo, hi):
        kind = rng.integers(0, 3)
        base = float(rng.uniform(lo, hi))
        if kind == 0:
            return Constant(base)
        amp = float(rng.uniform(0.0, 0.8)) * base
        if kind == 1:
            freq = float(rng.integers(1, 4))
            return Cosine(base=base, amp=amp, freq=freq if dim == 1 else (freq, freq))
        center = 0.5 if dim == 1 else (0.5, 0.5)
        return GaussBump(base=base, amp=amp, center=center, width=float(rng.uniform(0.1, 0.6)))

    if dim == 1:
        cells = (int(rng.integers(16, 65)),)
        lengths = (float(rng.uniform(0.5, 2.0)),)
    else:
        cells = (int(rng.integers(6, 13)), int(rng.integers(6, 13)))
        lengths = (float(rng.uniform(0.5, 2.0)), float(rng.uniform(0.5, 2.0)))
    i0_base = float(rng.uniform(1e-4, 5e-2))
    return ScenarioSpec(
        lengths=lengths,
        cells=cells,
        alpha=coef(0.5, 3.0),
        mu=coef(0.5, 3.0),
        s0=coef(0.5, 2.0),
        i0=GaussBump(
            base=i0_base,
            amp=i0_base * float(rng.uniform(0.0, 1.0)),
            center=float(rng.uniform(0.2, 0.8)) if dim == 1 else (0.5, 0.5),
            width=float(rng.uniform(0.1, 0.5)),
        ),
        d_s=(coef(0.05, 2.0),),
        d_i=(coef(0.05, 2.0),),
    ).realize()


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
