"""
Observables, their gauge invariant vector fields X_A on S(sigma), and the
uncertainty estimates built on the mechanical connection.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from config import HBAR, TOL_HERM, TOL_RADICAND, TOL_DEFAULT
from errors import (NotHermitianError, ShapeMismatchError, NegativeRadicandError,
                    InvalidRunConfigError)
from geometry.linalg_utils import dagger, hermitian_part, frobenius
from geometry.state_space import TangentVector, standard_purification, _frozen, _resolve
from geometry.bundle_geometry import (connection_form, horizontal_projection,
                                      real_inner, project)


@dataclass(frozen=True, eq=False)
class Observable:
    """Hermitian n x n matrix with the value of hbar it is measured against."""
    matrix: np.ndarray
    hbar: float = HBAR

    @property
    def dim(self):
        return self.matrix.shape[0]


@dataclass(frozen=True)
class VarianceDecomposition:
    """
    The three terms of DeltaA^2 = g_term + square_of_mean_term - second_moment_term.

    square_of_mean_term and second_moment_term are hbar^2 Tr(A P)^2 and
    hbar^2 Tr(A^2 P) for the anti-Hermitian A = A_Psi(X_A); both are real
    and nonpositive.
    """
    g_term: float
    square_of_mean_term: float
    second_moment_term: float
    variance: float
    mean: float
    second_moment: float
    second_moment_residual: float
    mean_residual: float

    @property
    def combination(self):
        return self.g_term + self.square_of_mean_term - self.second_moment_term

    @property
    def residual(self):
        return abs(self.variance - self.combination)


@dataclass(frozen=True)
class DispersionBound:
    """Both sides of DeltaA >= hbar sqrt(g(X_A, X_A)) at one state."""
    lhs: float
    rhs: float
    is_equality: bool
    horizontal: bool
    connection_norm: float

    @property
    def slack(self):
        return self.lhs - self.rhs


@dataclass(frozen=True)
class ConvexityCheck:
    """Eigenvalues of i A_Psi(X_A) in a diagonalizing gauge and the two sides of the inequality."""
    eigenvalues: np.ndarray
    weights: np.ndarray
    gauge: np.ndarray
    square_of_mean: float
    mean_of_square: float

    @property
    def satisfied(self):
        return self.square_of_mean <= self.mean_of_square + 1e-12 * max(1.0, self.mean_of_square)


def observable(M, hbar=None, tol_herm=None):
    """Validate a Hermitian matrix as an observable."""
    hbar = _resolve(hbar, HBAR)
    tol_herm = _resolve(tol_herm, TOL_HERM)
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeMismatchError(f"observable must be square, got shape {M.shape}")
    residual = float(np.max(np.abs(M - dagger(M)))) if M.size else 0.0
    if residual > tol_herm:
        raise NotHermitianError(f"max |A - A^dag| = {residual:.3e}")
    if hbar <= 0:
        raise InvalidRunConfigError(f"hbar must be positive, got {hbar}")
    return Observable(matrix=_frozen(hermitian_part(M)), hbar=float(hbar))


def _check_dims(A, n):
    if A.dim != n:
        raise ShapeMismatchError(f"observable acts on C^{A.dim}, state lives on C^{n}")


def observable_field(A, Psi):
    """
    X_A(Psi) = (1 / i hbar) A Psi.

    Tangent to S(sigma) automatically since A is Hermitian.
    """
    _check_dims(A, Psi.shape[0])
    X = (A.matrix @ Psi.matrix) / (1j * A.hbar)
    return TangentVector(base=Psi, matrix=_frozen(X))


def _moments(A, rho):
    second = complex(np.trace(A.matrix @ A.matrix @ rho.matrix))
    mean = complex(np.trace(A.matrix @ rho.matrix))
    return second, mean


def uncertainty(A, rho, tol=None):
    """
    DeltaA(rho) = sqrt(Tr(A^2 rho) - Tr(A rho)^2).

    Radicands in [-tol, 0] are rounding and clamp to zero; anything more
    negative signals a caller error.

    Parameters:
    - A: Observable
    - rho: DensityOperator
    - tol: clamping window (default tol_radicand, scaled by Tr(A^2 rho) when larger than 1)

    Returns:
    - float in energy units
    """
    tol = _resolve(tol, TOL_RADICAND)
    _check_dims(A, rho.dim)
    second, mean = _moments(A, rho)
    radicand = second.real - mean.real ** 2
    window = tol * max(1.0, second.real)
    if radicand < -window:
        raise NegativeRadicandError(f"Tr(A^2 rho) - Tr(A rho)^2 = {radicand:.3e}")
    return math.sqrt(max(radicand, 0.0))


def variance_decomposition(A, Psi):
    """
    Split DeltaA^2 at pi(Psi) into horizontal and vertical contributions.

    Also certifies Tr(A^2 rho) = hbar^2 G(X_A, X_A) and
    Tr(A rho) = i hbar Tr(A_Psi(X_A) P(sigma)) through the two residuals.

    Parameters:
    - A: Observable
    - Psi: Purification

    Returns:
    - VarianceDecomposition
    """
    hbar = A.hbar
    X = observable_field(A, Psi)
    A_form = connection_form(Psi, X).matrix
    P = Psi.spectrum.P
    horizontal = horizontal_projection(X).matrix

    rho = project(Psi)
    second, mean = _moments(A, rho)

    trace_AP = complex(np.trace(A_form @ P))
    trace_A2P = complex(np.trace(A_form @ A_form @ P))
    g_term = hbar ** 2 * real_inner(horizontal, horizontal)
    square_of_mean_term = hbar ** 2 * (trace_AP ** 2).real
    second_moment_term = hbar ** 2 * trace_A2P.real

    second_moment_residual = abs(second - hbar ** 2 * real_inner(X.matrix, X.matrix))
    mean_residual = abs(mean - 1j * hbar * trace_AP)

    return VarianceDecomposition(
        g_term=g_term,
        square_of_mean_term=square_of_mean_term,
        second_moment_term=second_moment_term,
        variance=second.real - mean.real ** 2,
        mean=mean.real,
        second_moment=second.real,
        second_moment_residual=float(second_moment_residual),
        mean_residual=float(mean_residual),
    )


def dispersion_bound_check(A, rho, tol=None):
    """
    Compare DeltaA(rho) with hbar sqrt(g(X_A, X_A)).

    is_equality reports numeric equality of the two sides; horizontal reports
    whether the connection form of X_A vanishes at the standard purification.
    Horizontal fields always give equality, and so does every pure state.

    Parameters:
    - A: Observable
    - rho: DensityOperator
    - tol: comparison tolerance (default from config)

    Returns:
    - DispersionBound
    """
    tol = _resolve(tol, TOL_DEFAULT)
    Psi = standard_purification(rho)
    X = observable_field(A, Psi)
    connection_norm = frobenius(connection_form(Psi, X).matrix)
    horizontal = horizontal_projection(X).matrix
    g_value = real_inner(horizontal, horizontal)

    lhs = uncertainty(A, rho)
    rhs = A.hbar * math.sqrt(max(g_value, 0.0))
    is_equality = abs(lhs ** 2 - rhs ** 2) <= tol * max(1.0, lhs ** 2)
    return DispersionBound(lhs=lhs, rhs=rhs, is_equality=bool(is_equality),
                           horizontal=bool(connection_norm <= tol),
                           connection_norm=connection_norm)


def convexity_check(A, Psi):
    """
    The convexity step behind the uncertainty bound.

    Diagonalizes i A_Psi(X_A) block by block, so the diagonalizing U lies in
    U(sigma) and U P(sigma) U^dag = P(sigma); then compares
    (sum_j p_j lambda_j)^2 with sum_j p_j lambda_j^2.
    """
    spectrum = Psi.spectrum
    iA = 1j * connection_form(Psi, observable_field(A, Psi)).matrix
    k = spectrum.rank
    eigenvalues = np.zeros(k)
    U = np.zeros((k, k), dtype=complex)
    for s in spectrum.block_slices:
        block_val, block_vec = la.eigh(hermitian_part(iA[s, s]))
        eigenvalues[s] = block_val
        U[s, s] = dagger(block_vec)

    weights = np.real(np.diag(U @ spectrum.P @ dagger(U)))
    square_of_mean = float(np.dot(weights, eigenvalues) ** 2)
    mean_of_square = float(np.dot(weights, eigenvalues ** 2))
    return ConvexityCheck(eigenvalues=eigenvalues, weights=weights, gauge=U,
                          square_of_mean=square_of_mean, mean_of_square=mean_of_square)
