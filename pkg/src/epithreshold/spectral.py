"""Principal eigenpairs of the assembled elliptic operator.

The bottom eigenvalue of -div(A grad .) - V with zero-flux boundaries decides
between epidemic propagation (negative) and fade-off (positive).  It is
computed by inverse power iteration on the shifted matrix A + sigma*Id with
sigma = max(V) + 1; the Rayleigh bound lambda_1 >= -max(V) makes that shift
symmetric positive definite, so the inner solves are a banded Cholesky
factorization in 1D and preconditioned conjugate gradients in 2D.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.linalg import cho_solve_banded, cholesky_banded
from scipy.sparse.linalg import LinearOperator, cg, spilu

from .errors import ConditionNotMetError, InvalidConfigError, NumericalError
from .grids import (
    DiffusionSpec,
    Grid,
    ScalarField,
    Scenario,
    linf_norm,
    make_field,
    mean,
    min_value,
)
from .operators import EllipticOperator, assemble, face_differences, face_transmissibilities

__all__ = [
    "EigenResult",
    "principal_eigenpair",
    "rayleigh_quotient",
    "neumann_gap",
    "threshold_potential",
    "eigenvalue_at_diffusivity",
    "threshold_eigenpair",
    "critical_diffusivity",
]

DEFAULT_EIGEN_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000
D_STAR_ABS_TOL = 1e-8  # |lambda_1(d*)| <= this * max(1, |V|_inf)
D_STAR_BRACKET = (1e-6, 1e6)


@dataclass(frozen=True)
class EigenResult:
    """Converged principal eigenpair.

    ``phi`` is strictly positive and normalized so the mean of phi^2 is one
    (integrate(phi^2) equals the domain measure).  ``residual`` is the
    max-norm of op(phi) - eigenvalue*phi actually achieved; it meets the
    requested tolerance unless that lies below the rounding floor of the
    assembled matrix-vector product.
    """

    eigenvalue: float
    phi: ScalarField
    residual: float
    iterations: int


def _spd_solver(matrix: sp.csr_matrix, grid: Grid) -> Callable[[np.ndarray], np.ndarray]:
    """Factorized solver for a symmetric positive definite operator matrix."""
    if grid.dim == 1:
        n = grid.n_cells
        ab = np.zeros((2, n))
        ab[1] = matrix.diagonal()
        upper = matrix.diagonal(1)
        ab[0, 1:] = upper
        chol = cholesky_banded(ab)
        return lambda b: cho_solve_banded((chol, False), b)

    ilu = spilu(matrix.tocsc(), drop_tol=1e-6, fill_factor=30)
    precond = LinearOperator(matrix.shape, matvec=ilu.solve)

    def solve(b: np.ndarray) -> np.ndarray:
        x, info = cg(matrix, b, rtol=1e-12, atol=0.0, M=precond, maxiter=10_000)
        if info != 0:
            raise NumericalError(f"inner conjugate-gradient solve failed (info={info})")
        return x

    return solve


def principal_eigenpair(
    op: EllipticOperator,
    tol: float = DEFAULT_EIGEN_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> EigenResult:
    """Bottom eigenpair of the assembled operator by inverse power iteration.

    Iterates x <- (op + sigma*Id)^{-1} x from a constant start vector, which
    keeps every iterate strictly positive (the shifted matrix is an M-matrix
    with nonnegative inverse).  Stops once the max-norm residual satisfies
    ||op phi - lambda phi|| <= tol * (1 + |lambda|), or reaches the rounding
    floor of the matrix-vector product (a few eps times the operator row
    norm, which for stiff transmissibilities exceeds any fixed tolerance);
    the Rayleigh-quotient eigenvalue is accurate to about residual^2 over the
    spectral gap either way.
    """
    if tol <= 0:
        raise InvalidConfigError("eigen tolerance must be positive")
    matrix = op.matrix
    sigma = float(np.max(op.potential.values)) + 1.0
    solve = _spd_solver(op.shifted(sigma), op.grid)
    row_norm = float(np.abs(matrix).sum(axis=1).max())
    fp_floor = 32.0 * np.finfo(float).eps * max(1.0, row_norm)

    x = np.ones(op.grid.n_cells)
    lam = float("nan")
    for iteration in range(1, max_iter + 1):
        y = solve(x)
        y /= math.sqrt(np.mean(y**2))
        ay = matrix @ y
        lam = float(np.dot(y, ay) / np.dot(y, y))
        residual = float(np.abs(ay - lam * y).max())
        x = y
        if residual <= max(tol * (1.0 + abs(lam)), fp_floor):
            if y.min() <= 0.0:
                raise NumericalError(
                    "principal eigenfunction is not strictly positive; "
                    "this indicates an assembly bug"
                )
            phi = ScalarField(op.grid, y)
            return EigenResult(eigenvalue=lam, phi=phi, residual=residual, iterations=iteration)
    raise NumericalError(
        f"inverse power iteration did not converge in {max_iter} iterations "
        f"(last eigenvalue estimate {lam})"
    )


def rayleigh_quotient(diffusion: DiffusionSpec, potential: ScalarField, psi: ScalarField) -> float:
    """Discrete Rayleigh quotient (int A grad psi . grad psi - int V psi^2) / int psi^2.

    Uses the assembled face transmissibilities, so the quotient of an operator's
    own eigenfunction reproduces its eigenvalue exactly; any other test field
    gives an upper bound.
    """
    grid = diffusion.grid
    if psi.grid != grid or potential.grid != grid:
        raise InvalidConfigError("rayleigh quotient arguments must share one grid")
    denom = float(np.sum(psi.values**2))
    if denom == 0.0:
        raise InvalidConfigError("rayleigh quotient of an identically zero field")
    trans = face_transmissibilities(diffusion)
    diffs = face_differences(grid, psi.values)
    grad = sum(float(np.sum(t * d**2)) for t, d in zip(trans, diffs))
    pot = float(np.sum(potential.values * psi.values**2))
    # the uniform cell volume cancels between numerator and denominator
    return (grad - pot) / denom


def neumann_gap(grid: Grid, diffusion_scale: float = 1.0) -> tuple[float, float]:
    """First non-zero zero-flux eigenvalue of -Laplace on the box, and its d-scaled value.

    rho_1 = min over axes of (pi / L_axis)^2; pure diffusion with diffusivity d
    flattens fields at rate d * rho_1.
    """
    rho1 = min((math.pi / L) ** 2 for L in grid.lengths)
    return rho1, diffusion_scale * rho1


def threshold_potential(scenario: Scenario) -> ScalarField:
    """Potential alpha * mean(S0) - mu entering the threshold operator."""
    s0_bar = mean(scenario.s0)
    return make_field(scenario.grid, scenario.alpha.values * s0_bar - scenario.mu.values)


def threshold_eigenpair(
    scenario: Scenario,
    d_i: float | None = None,
    tol: float | None = None,
    max_iter: int | None = None,
) -> EigenResult:
    """Principal eigenpair of the threshold operator for a scenario.

    With ``d_i`` given, the infectious diffusivity is replaced by that constant
    (isotropic); otherwise the scenario's own diffusivity applies.
    """
    if d_i is not None:
        if d_i <= 0:
            raise InvalidConfigError("d_i must be positive")
        diffusion = DiffusionSpec.isotropic(
            scenario.grid, d_i, floor=scenario.numerics.ellipticity_floor
        )
    else:
        diffusion = scenario.diff_i
    op = assemble(diffusion, threshold_potential(scenario))
    return principal_eigenpair(
        op,
        tol=scenario.numerics.eigen_tol if tol is None else tol,
        max_iter=scenario.numerics.eigen_max_iter if max_iter is None else max_iter,
    )


def eigenvalue_at_diffusivity(scenario: Scenario, d_i: float) -> float:
    """lambda_1 for the scenario with infectious diffusivity d_i * Id."""
    return threshold_eigenpair(scenario, d_i=d_i).eigenvalue


def critical_diffusivity(
    scenario: Scenario,
    d_lo: float = 1e-2,
    d_hi: float = 1e2,
    rel_tol: float = 1e-6,
) -> float:
    """Diffusivity d* where lambda_1 changes sign, by bisection in log(d).

    Requires mean(alpha)*mean(S0)/mean(mu) < 1 < max(alpha*mean(S0)/mu), which
    makes the two diffusivity limits of lambda_1 straddle zero; lambda_1 is
    strictly increasing in d there, so a sign change bracket always shrinks
    onto the root.  The bracket is expanded geometrically up to [1e-6, 1e6]
    before giving up.
    """
    pot = threshold_potential(scenario)
    ratio_avg = mean(scenario.alpha) * mean(scenario.s0) / mean(scenario.mu)
    ratio_max = float(
        np.max(scenario.alpha.values * mean(scenario.s0) / scenario.mu.values)
    )
    if not (ratio_avg < 1.0 < ratio_max):
        raise ConditionNotMetError(
            "critical diffusivity requires mean(alpha)*mean(S0)/mean(mu) < 1 < "
            f"max(alpha*mean(S0)/mu); got {ratio_avg:.6g} and {ratio_max:.6g}"
        )
    abs_tol = D_STAR_ABS_TOL * max(1.0, linf_norm(pot))

    lam = lambda d: eigenvalue_at_diffusivity(scenario, d)
    lo, hi = d_lo, d_hi
    lam_lo = lam(lo)
    while lam_lo >= 0.0:
        lo /= 10.0
        if lo < D_STAR_BRACKET[0]:
            raise ConditionNotMetError("no propagation regime found down to d_I = 1e-6")
        lam_lo = lam(lo)
    lam_hi = lam(hi)
    while lam_hi <= 0.0:
        hi *= 10.0
        if hi > D_STAR_BRACKET[1]:
            raise ConditionNotMetError("no fade-off regime found up to d_I = 1e6")
        lam_hi = lam(hi)

    mid = math.sqrt(lo * hi)
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        lam_mid = lam(mid)
        if abs(lam_mid) <= abs_tol and hi - lo <= rel_tol * mid:
            return mid
        if lam_mid < 0.0:
            lo = mid
        else:
            hi = mid
    raise NumericalError(
        f"critical diffusivity bisection stalled near d={mid:.6g}; "
        f"|lambda_1|={abs(lam(mid)):.3g} exceeds {abs_tol:.3g}"
    )
