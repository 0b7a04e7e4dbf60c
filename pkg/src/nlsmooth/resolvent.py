"""Resolvent of the discretized operator: solve u + lambda A(u) = g.

This is the implicit Euler step that generates the semigroup. The nonlinear
system is solved by a damped Newton method on the weighted-l2 residual with
Armijo backtracking, falling back to damped Picard sweeps whenever the
linearized step is unusable. In one dimension the Newton systems are
tridiagonal and solved directly; in two dimensions they are symmetrized to
an SPD system and solved by Jacobi-preconditioned conjugate gradients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded
from scipy.sparse import diags_array
from scipy.sparse.linalg import LinearOperator, cg

from .measure import GridFunction
from .operators import DiscreteOperator

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200
ARMIJO_SLOPE = 1e-4
MAX_BACKTRACKS = 40
CG_RTOL = 1e-12


class PreconditionError(ValueError):
    """lambda * L >= 1: the perturbed resolvent is not a contraction."""


class NonConvergenceError(RuntimeError):
    def __init__(self, message, residual, iterations):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class ResolventQuery:
    spec: object
    lam: float
    g: GridFunction
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER


@dataclass(frozen=True)
class ResolventResult:
    u: GridFunction
    residual: float
    iterations: int
    converged: bool


def _weighted_norm(weights, v):
    return math.sqrt(float(np.dot(weights, v * v)))


def _newton_step_1d(op, lam, u, res):
    w = op.spec.phi.value(u)
    lower, diag, upper = op.diffusion_jacobian_bands_1d(w)
    D = op.phi_derivative(u)
    fp = op.perturbation_derivative(u)
    n = u.size
    ab = np.zeros((3, n))
    ab[1, :] = 1.0 + lam * (diag * D + fp)
    ab[0, 1:] = lam * upper * D[1:]  # J[i, i+1]
    ab[2, :-1] = lam * lower * D[:-1]  # J[i+1, i]
    return solve_banded((1, 1), ab, -res)


def _newton_step_2d(op, lam, u, res):
    w = op.spec.phi.value(u)
    Lw = op.diffusion_jacobian_matrix(w)
    D = op.phi_derivative(u)
    fp = op.perturbation_derivative(u)
    # substitute z = D * delta: the system becomes SPD
    # (diag((1 + lam f') / D) + lam Lw) z = -res
    dd = (1.0 + lam * fp) / D
    M = diags_array(dd, format="csr") + lam * Lw
    n = u.size
    inv_diag = 1.0 / M.diagonal()
    precond = LinearOperator((n, n), matvec=lambda v: inv_diag * v)
    rhs = -res
    z, info = cg(M, rhs, rtol=CG_RTOL, atol=0.0, maxiter=20 * n, M=precond)
    if info != 0:
        raise np.linalg.LinAlgError(f"cg failed with info={info}")
    return z / D


def solve_resolvent(spec, lam, g, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, op=None):
    """Solve u + lambda A(u) = g for the given spec; returns ResolventResult.

    lam must be positive, and lambda * L < 1 when a Lipschitz perturbation
    is present. Raises NonConvergenceError if the weighted-l2 residual does
    not reach tol within max_iter outer iterations.
    """
    if not (lam > 0.0 and math.isfinite(lam)):
        raise ValueError(f"lambda must be positive and finite, got {lam}")
    if spec.perturbation is not None and lam * spec.perturbation.lipschitz >= 1.0:
        raise PreconditionError(
            f"lambda*L = {lam * spec.perturbation.lipschitz} >= 1; "
            "shrink the step below 1/L"
        )
    if op is None:
        op = DiscreteOperator(spec)
    weights = op.space.weights
    gv = g.values
    u = gv.copy()

    def residual(v):
        return v + lam * op.apply_values(v) - gv

    res = residual(u)
    rn = _weighted_norm(weights, res)
    iterations = 0
    while rn > tol:
        if iterations >= max_iter:
            raise NonConvergenceError(
                f"resolvent did not converge: residual {rn} after {iterations} iterations",
                residual=rn,
                iterations=iterations,
            )
        step = None
        try:
            if spec.grid.d == 1:
                step = _newton_step_1d(op, lam, u, res)
            else:
                step = _newton_step_2d(op, lam, u, res)
            if not np.all(np.isfinite(step)):
                step = None
        except (np.linalg.LinAlgError, ValueError):
            step = None

        accepted = False
        if step is not None:
            t = 1.0
            for _ in range(MAX_BACKTRACKS):
                u_try = u + t * step
                res_try = residual(u_try)
                rn_try = _weighted_norm(weights, res_try)
                if rn_try <= (1.0 - ARMIJO_SLOPE * t) * rn:
                    u, res, rn = u_try, res_try, rn_try
                    accepted = True
                    break
                t *= 0.5

        if not accepted:
            # damped Picard sweep on the fixed-point form u = g - lam A(u)
            direction = gv - lam * op.apply_values(u) - u
            t = 1.0
            for _ in range(MAX_BACKTRACKS):
                u_try = u + t * direction
                res_try = residual(u_try)
                rn_try = _weighted_norm(weights, res_try)
                if rn_try < rn:
                    u, res, rn = u_try, res_try, rn_try
                    accepted = True
                    break
                t *= 0.5
        if not accepted:
            raise NonConvergenceError(
                f"no descent found: residual {rn} after {iterations} iterations",
                residual=rn,
                iterations=iterations,
            )
        iterations += 1

    return ResolventResult(
        u=GridFunction(g.space, u),
        residual=rn,
        iterations=iterations,
        converged=True,
    )


def solve_query(query):
    return solve_resolvent(query.spec, query.lam, query.g, tol=query.tol, max_iter=query.max_iter)


def resolvent_power(spec, lam, g, n, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, op=None):
    """n-fold resolvent (I + lam A)^{-n} g; n = 0 returns g unchanged."""
    n = int(n)
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if op is None:
        op = DiscreteOperator(spec)
    u = g
    total_iter = 0
    residual = 0.0
    for _ in range(n):
        out = solve_resolvent(spec, lam, u, tol=tol, max_iter=max_iter, op=op)
        u, total_iter, residual = out.u, total_iter + out.iterations, out.residual
    return ResolventResult(u=u, residual=residual, iterations=total_iter, converged=True)
