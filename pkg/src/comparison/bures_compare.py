"""
Comparison of the isospectral metric with the Bures metric.

Uhlmann's bundle over invertible density operators shares its total space
geometry with S(sigma) when k = n, but its horizontal directions are never
tangent to S(sigma). On qubits the two distances are compared along a
rotation of a diagonal state, where the isospectral distance is known in
closed form and the Bures value follows from Dittmann's formula.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from config import TOL_DEFAULT, TOL_HERM, GEODESIC_EPS_MAX
from errors import (NotInvertibleError, NotFullRankError, SingularStateError,
                    ShapeMismatchError, NotHermitianError, NotTangentError)
from geometry.linalg_utils import dagger, frobenius
from geometry.state_space import (DensityOperator, Purification, validate_spectrum,
                                  _frozen, _resolve)

logger = logging.getLogger(__name__)

CONSTRAINTS = ("uhlmann", "tangent", "both")
FORMULA_AGREEMENT = 1e-9


@dataclass(frozen=True)
class BuresReport:
    """Isospectral distance, Bures value and their gap for one example curve."""
    p1: float
    p2: float
    eps: float
    dist_g: float
    dist_B: float
    gap: float
    strict: bool
    dittmann_value: float
    formulas_agree: bool

    def to_dict(self):
        return {
            "p1": self.p1,
            "p2": self.p2,
            "eps": self.eps,
            "dist_g": self.dist_g,
            "dist_B": self.dist_B,
            "gap": self.gap,
            "strict": self.strict,
            "dittmann_value": self.dittmann_value,
            "formulas_agree": self.formulas_agree,
        }


def _as_matrix(value):
    return value.matrix if hasattr(value, 'matrix') else np.asarray(value, dtype=complex)


def uhlmann_horizontal_check(Psi, X, tol=None):
    """
    True when X is horizontal in Uhlmann's bundle at Psi: Psi^dag X - X^dag Psi = 0.

    Parameters:
    - Psi: invertible n x n matrix (or Purification) with unit Hilbert-Schmidt norm
    - X: n x n matrix
    - tol: tolerance on invertibility, normalization and the residual

    Returns:
    - bool
    """
    tol = _resolve(tol, TOL_DEFAULT)
    Psi, X = _as_matrix(Psi), _as_matrix(X)
    if Psi.ndim != 2 or Psi.shape[0] != Psi.shape[1]:
        raise NotInvertibleError(f"Psi must be square, got shape {Psi.shape}")
    if X.shape != Psi.shape:
        raise ShapeMismatchError(f"X has shape {X.shape}, expected {Psi.shape}")
    if la.svdvals(Psi)[-1] <= tol:
        raise NotInvertibleError("Psi is singular")
    if abs(frobenius(Psi) - 1.0) > tol:
        raise NotInvertibleError(f"Psi has norm {frobenius(Psi):.12g}, expected 1")
    overlap = dagger(Psi) @ X
    return frobenius(overlap - dagger(overlap)) <= tol


def _constraint_matrix(Psi, which):
    """
    Real matrix of X -> (Psi^dag X - X^dag Psi, Psi^dag X + X^dag Psi).

    Columns run over the real basis {E_ab, i E_ab} of n x n complex matrices.
    """
    n = Psi.shape[0]
    columns = []
    for a in range(n):
        for b in range(n):
            for unit in (1.0, 1j):
                X = np.zeros((n, n), dtype=complex)
                X[a, b] = unit
                overlap = dagger(Psi) @ X
                rows = []
                if which in ("uhlmann", "both"):
                    rows.append(overlap - dagger(overlap))
                if which in ("tangent", "both"):
                    rows.append(overlap + dagger(overlap))
                stacked = np.concatenate([r.ravel() for r in rows])
                columns.append(np.concatenate([stacked.real, stacked.imag]))
    return np.array(columns).T


def _check_full_rank(Psi, tol):
    M = _as_matrix(Psi)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NotFullRankError(f"need k = n, got shape {M.shape}")
    if la.svdvals(M)[-1] <= tol:
        raise NotFullRankError("Psi is singular")
    return M


def constraint_null_dimension(Psi, which="both", tol=None):
    """
    Real dimension of the solutions X of the chosen constraints.

    which = "uhlmann" keeps Psi^dag X - X^dag Psi = 0, "tangent" keeps
    Psi^dag X + X^dag Psi = 0, "both" keeps the two together.
    """
    if which not in CONSTRAINTS:
        raise ValueError(f"which must be one of {CONSTRAINTS}, got {which!r}")
    tol = _resolve(tol, TOL_DEFAULT)
    M = _check_full_rank(Psi, tol)
    C = _constraint_matrix(M, which)
    singular = la.svdvals(C)
    rank = int(np.sum(singular > tol * max(1.0, singular[0])))
    return C.shape[1] - rank


def intersection_triviality_check(Psi, trials=10, seed=0, tol=None, which="both"):
    """
    Check that no nonzero Uhlmann-horizontal vector is tangent to S(sigma).

    The component of each random matrix that solves the constraints, found
    by a least-squares solve with singular values below tol treated as zero,
    must vanish. which selects the constraint set as in
    constraint_null_dimension; "uhlmann" or "tangent" alone fail the check.

    Parameters:
    - Psi: Purification with k = n
    - trials: number of random matrices
    - seed: seed of the random matrices
    - which: constraint set, default "both"

    Returns:
    - bool
    """
    if which not in CONSTRAINTS:
        raise ValueError(f"which must be one of {CONSTRAINTS}, got {which!r}")
    tol = _resolve(tol, TOL_DEFAULT)
    M = _check_full_rank(Psi, tol)
    if isinstance(Psi, Purification) and Psi.spectrum.rank != Psi.spectrum.hilbert_dim:
        raise NotFullRankError(f"k = {Psi.spectrum.rank} differs from n = {Psi.spectrum.hilbert_dim}")
    C = _constraint_matrix(M, which)

    rng = np.random.default_rng(seed)
    for _ in range(max(int(trials), 1)):
        x = rng.standard_normal(C.shape[1])
        # Minimum-norm y with C y = C x; x - y lies in the solution space
        y, *_ = np.linalg.lstsq(C, C @ x, rcond=tol)
        if np.linalg.norm(x - y) > math.sqrt(tol) * np.linalg.norm(x):
            return False
    return True


def dittmann_bures_2x2(rho, drho, tol=None):
    """
    dist_B(rho, rho + drho) from 1/4 Tr(drho drho + (drho - rho drho)^2 / det rho).

    Parameters:
    - rho: invertible DensityOperator on C^2
    - drho: 2 x 2 Hermitian traceless matrix

    Returns:
    - float, the nonnegative square root
    """
    tol = _resolve(tol, TOL_DEFAULT)
    R = _as_matrix(rho)
    D = np.asarray(drho, dtype=complex)
    if R.shape != (2, 2) or D.shape != (2, 2):
        raise ShapeMismatchError("the formula applies to 2 x 2 matrices only")
    if float(np.max(np.abs(D - dagger(D)))) > TOL_HERM:
        raise NotHermitianError("drho is not Hermitian")
    if abs(np.trace(D)) > tol:
        raise NotTangentError(f"drho has trace {abs(np.trace(D)):.3e}, expected 0")
    det = float(np.real(la.det(R)))
    if det <= tol:
        raise SingularStateError(f"det rho = {det:.3e}")

    correction = D - R @ D
    value = 0.25 * np.real(np.trace(D @ D + (correction @ correction) / det))
    return math.sqrt(max(float(value), 0.0))


def example_curve(p1, p2, eps, t):
    """
    rho(t) = R(eps t) diag(p1, p2) R(eps t)^T on C^2.

    Entries p2 sin^2 + p1 cos^2, (p2 - p1) sin cos, p1 sin^2 + p2 cos^2 of eps t.
    """
    spectrum = validate_spectrum([p1, p2], 2)
    s, c = math.sin(eps * t), math.cos(eps * t)
    matrix = np.array([[p2 * s * s + p1 * c * c, (p2 - p1) * s * c],
                       [(p2 - p1) * s * c, p1 * s * s + p2 * c * c]], dtype=complex)
    return DensityOperator(matrix=_frozen(matrix), spectrum=spectrum)


def closed_form_bures(p1, p2, eps):
    """dist_B between the endpoints of the example curve, in closed form."""
    d = p1 - p2
    s = math.sin(eps)
    return (d / math.sqrt(2.0)) * abs(s) * math.sqrt(2.0 + (d * d / (2.0 * p1 * p2)) * s * s)


def example_gap_report(p1, p2, eps, tol=None, **search_options):
    """
    Compare both distances between rho(0) and rho(1) of the example curve.

    dist_g is |eps| while eps stays within the geodesic range (zero for a
    degenerate spectrum, where the curve does not move); beyond it the
    curve-shortening upper bound is used.

    Returns:
    - BuresReport
    """
    tol = _resolve(tol, TOL_DEFAULT)
    rho0 = example_curve(p1, p2, eps, 0.0)
    rho1 = example_curve(p1, p2, eps, 1.0)

    dist_B = closed_form_bures(p1, p2, eps)
    dittmann_value = dittmann_bures_2x2(rho0, rho1.matrix - rho0.matrix)
    formulas_agree = abs(dittmann_value - dist_B) <= FORMULA_AGREEMENT
    if not formulas_agree:
        logger.error("closed form %.12g and Dittmann value %.12g disagree", dist_B, dittmann_value)

    if rho0.spectrum.num_blocks == 1:
        dist_g = 0.0
    elif abs(eps) <= GEODESIC_EPS_MAX:
        dist_g = abs(float(eps))
    else:
        # Deferred to keep the qubit formulas free of the dynamics package
        from dynamics.curve_shortening import distance_upper_bound
        logger.warning("eps = %g exceeds %g; using the curve-shortening bound", eps, GEODESIC_EPS_MAX)
        dist_g = distance_upper_bound(rho0, rho1, **search_options)

    gap = dist_g - dist_B
    if gap < -tol:
        logger.warning("negative gap %.3e for p = (%g, %g), eps = %g", gap, p1, p2, eps)
    return BuresReport(p1=float(p1), p2=float(p2), eps=float(eps), dist_g=dist_g,
                       dist_B=dist_B, gap=gap, strict=bool(gap > tol),
                       dittmann_value=dittmann_value, formulas_agree=formulas_agree)
