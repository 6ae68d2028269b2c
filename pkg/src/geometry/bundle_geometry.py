"""
The purification bundle pi: S(sigma) -> D(sigma), Psi -> Psi Psi^dag.

Metrics G and g, moment of inertia, moment map, the mechanical connection
form and the vertical/horizontal splitting of tangent vectors. All block
logic runs off the multiplicity blocks of the spectrum, so degenerate
spectra need no special path.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from config import TOL_TANGENT
from errors import (BaseMismatchError, ShapeMismatchError, SpectrumMismatchError,
                    NotHermitianError, NotTangentError)
from geometry.linalg_utils import (dagger, hermitian_part, anti_hermitian_part,
                                   frobenius, polar_unitary, inverse_sqrt_psd)
from geometry.state_space import (DensityOperator, Purification, TangentVector,
                                  GaugeAlgebraElement, block_mask, orthonormal_frame,
                                  standard_purification, _frozen, _resolve)


@dataclass(frozen=True, eq=False)
class BlockProjectors:
    """Diagonal 0/1 matrices E_1..E_l, one per distinct eigenvalue of sigma."""
    projectors: tuple

    def __len__(self):
        return len(self.projectors)


@dataclass(frozen=True, eq=False)
class CotangentValue:
    """Linear functional on u(sigma), acting by xi -> Re Tr(mu^dag xi)."""
    matrix: np.ndarray

    def pair(self, xi):
        xi_matrix = xi.matrix if isinstance(xi, GaugeAlgebraElement) else xi
        return float(np.real(np.trace(dagger(self.matrix) @ xi_matrix)))


def block_projectors(spectrum):
    """The projectors E_j of the multiplicity blocks."""
    k = spectrum.rank
    projectors = []
    for s in spectrum.block_slices:
        E = np.zeros((k, k), dtype=complex)
        E[s, s] = np.eye(s.stop - s.start)
        projectors.append(_frozen(E))
    return BlockProjectors(projectors=tuple(projectors))


def _same_spectrum(first, second):
    if first is not second and not first.matches(second):
        raise SpectrumMismatchError(f"{first} differs from {second}")


def project(Psi):
    """pi(Psi) = Psi Psi^dag, isospectral to the spectrum of Psi."""
    rho = hermitian_part(Psi.matrix @ dagger(Psi.matrix))
    return DensityOperator(matrix=_frozen(rho), spectrum=Psi.spectrum)


def pushforward(X):
    """pi_* X = X Psi^dag + Psi X^dag."""
    Psi = X.base.matrix
    return X.matrix @ dagger(Psi) + Psi @ dagger(X.matrix)


def real_inner(X, Y):
    """Real part of the Hilbert-Schmidt product of two raw matrices."""
    return float(0.5 * np.real(np.trace(dagger(X) @ Y + dagger(Y) @ X)))


def metric_G(X, Y):
    """
    G(X, Y) = 1/2 Tr(X^dag Y + Y^dag X).

    Parameters:
    - X, Y: TangentVectors at a common base (raw matrices are also accepted)

    Returns:
    - float
    """
    if isinstance(X, TangentVector) and isinstance(Y, TangentVector):
        if X.base is not Y.base and not np.allclose(X.base.matrix, Y.base.matrix):
            raise BaseMismatchError("tangent vectors are attached to different purifications")
        return real_inner(X.matrix, Y.matrix)
    X = X.matrix if isinstance(X, TangentVector) else np.asarray(X)
    Y = Y.matrix if isinstance(Y, TangentVector) else np.asarray(Y)
    if X.shape != Y.shape:
        raise ShapeMismatchError(f"shapes {X.shape} and {Y.shape} differ")
    return real_inner(X, Y)


def moment_of_inertia(xi, eta):
    """
    I xi . eta = 1/2 Tr((xi^dag eta + eta^dag xi) P(sigma)).

    Independent of the point in S(sigma).
    """
    _same_spectrum(xi.spectrum, eta.spectrum)
    P = xi.spectrum.P
    a, b = xi.matrix, eta.matrix
    return float(0.5 * np.real(np.trace((dagger(a) @ b + dagger(b) @ a) @ P)))


def inertia_value(xi):
    """I xi as a cotangent value: mu = xi P(sigma)."""
    return CotangentValue(matrix=_frozen(xi.matrix @ xi.spectrum.P))


def moment_map(X, xi):
    """J_Psi(X) . xi = G(X, Psi xi)."""
    _same_spectrum(X.base.spectrum, xi.spectrum)
    return real_inner(X.matrix, X.base.matrix @ xi.matrix)


def moment_map_value(X):
    """J_Psi(X) as a cotangent value: mu = Psi^dag X."""
    return CotangentValue(matrix=_frozen(dagger(X.base.matrix) @ X.matrix))


def connection_form(Psi, X):
    """
    Mechanical connection A_Psi(X) = sum_j E_j Psi^dag X E_j P(sigma)^{-1}.

    X may be any ambient n x k matrix; the result is anti-Hermitian only
    when X is tangent.

    Parameters:
    - Psi: Purification
    - X: TangentVector or n x k matrix

    Returns:
    - GaugeAlgebraElement
    """
    X = X.matrix if isinstance(X, TangentVector) else np.asarray(X, dtype=complex)
    if X.shape != Psi.shape:
        raise ShapeMismatchError(f"X has shape {X.shape}, expected {Psi.shape}")
    spectrum = Psi.spectrum
    overlap = np.where(block_mask(spectrum), dagger(Psi.matrix) @ X, 0.0)
    inverse_p = 1.0 / np.array(spectrum.values)
    xi = overlap * inverse_p[np.newaxis, :]
    return GaugeAlgebraElement(matrix=_frozen(xi), spectrum=spectrum)


def vertical_projection(X):
    """X^perp = Psi A_Psi(X)."""
    Psi = X.base
    vertical = Psi.matrix @ connection_form(Psi, X).matrix
    return TangentVector(base=Psi, matrix=_frozen(vertical))


def horizontal_projection(X):
    """X^par = X - Psi A_Psi(X)."""
    Psi = X.base
    horizontal = X.matrix - Psi.matrix @ connection_form(Psi, X).matrix
    return TangentVector(base=Psi, matrix=_frozen(horizontal))


def vertical_energy(X):
    """G(X^perp, X^perp) through the identity -Tr(A(X)^2 P(sigma))."""
    A = connection_form(X.base, X).matrix
    return float(-np.real(np.trace(A @ A @ X.base.spectrum.P)))


def eigenframe(Psi):
    """
    Unitary frame adapted to rho = Psi Psi^dag, read off the purification.

    Psi = Q sqrt(P(sigma)) with Q orthonormal, so the columns of Q are
    eigenvectors of rho; the kernel is completed by an orthonormal basis of
    the complement.

    Returns:
    - tuple (F, eigenvalues, labels): n x n unitary F, the eigenvalue of each
      column (zero on the kernel) and its block label (-1 for the kernel)
    """
    spectrum = Psi.spectrum
    n, k = spectrum.hilbert_dim, spectrum.rank
    Q = orthonormal_frame(Psi)
    K = la.null_space(dagger(Q)) if n > k else np.zeros((n, 0), dtype=complex)
    F = np.hstack([Q, K])

    eigenvalues = np.zeros(n)
    eigenvalues[:k] = spectrum.values
    labels = np.full(n, -1, dtype=int)
    for j, s in enumerate(spectrum.block_slices):
        labels[s] = j
    return F, eigenvalues, labels


def project_to_orbit_tangent(Psi, rhodot):
    """
    Split rhodot into its part tangent to the orbit and the rest.

    In the eigenframe of rho, entries within one eigenvalue block (kernel
    included) would move eigenvalues; they are dropped.

    Returns:
    - tuple (tangent_part, normal_norm)
    """
    F, _, labels = eigenframe(Psi)
    rotated = dagger(F) @ rhodot @ F
    same_block = labels[:, np.newaxis] == labels[np.newaxis, :]
    normal = np.where(same_block, rotated, 0.0)
    tangent = F @ np.where(same_block, 0.0, rotated) @ dagger(F)
    return hermitian_part(tangent), frobenius(normal)


def minimal_generator(Psi, rhodot, tol=None):
    """
    Minimal-norm anti-Hermitian a with rhodot = a rho - rho a.

    In the eigenframe a_ij = rhodot_ij / (lambda_j - lambda_i) across blocks
    and zero within a block.

    Parameters:
    - Psi: Purification over rho
    - rhodot: n x n Hermitian matrix
    - tol: bound on the within-block entries of rhodot (default tol_tangent)

    Returns:
    - ndarray: n x n anti-Hermitian generator
    """
    tol = _resolve(tol, TOL_TANGENT)
    rhodot = np.asarray(rhodot, dtype=complex)
    n = Psi.spectrum.hilbert_dim
    if rhodot.shape != (n, n):
        raise ShapeMismatchError(f"rhodot has shape {rhodot.shape}, expected {(n, n)}")
    if float(np.max(np.abs(rhodot - dagger(rhodot)))) > tol:
        raise NotHermitianError("rhodot is not Hermitian")

    F, eigenvalues, labels = eigenframe(Psi)
    rotated = dagger(F) @ hermitian_part(rhodot) @ F
    same_block = labels[:, np.newaxis] == labels[np.newaxis, :]
    violation = float(np.max(np.abs(np.where(same_block, rotated, 0.0))))
    if violation > tol:
        raise NotTangentError(
            f"rhodot has within-block entries up to {violation:.3e} in the eigenframe")

    gaps = eigenvalues[np.newaxis, :] - eigenvalues[:, np.newaxis]
    a_rotated = np.where(same_block, 0.0, rotated / np.where(same_block, 1.0, gaps))
    return anti_hermitian_part(F @ a_rotated @ dagger(F))


def tangent_lift(Psi, rhodot, tol=None):
    """
    Horizontal X at Psi with X Psi^dag + Psi X^dag = rhodot.

    Built as X = a Psi - Psi A_Psi(a Psi) from the minimal generator a.

    Parameters:
    - Psi: Purification
    - rhodot: n x n Hermitian matrix tangent to the orbit
    - tol: consistency tolerance (default tol_tangent)

    Returns:
    - TangentVector
    """
    a = minimal_generator(Psi, rhodot, tol)
    aPsi = a @ Psi.matrix
    X = aPsi - Psi.matrix @ connection_form(Psi, aPsi).matrix
    return TangentVector(base=Psi, matrix=_frozen(X))


def metric_g(rho, rhodot, tol=None):
    """
    The submersion metric g(rhodot, rhodot) at rho.

    Parameters:
    - rho: DensityOperator
    - rhodot: n x n Hermitian matrix tangent to the orbit
    - tol: consistency tolerance (default tol_tangent)

    Returns:
    - float: G of the horizontal lift of rhodot
    """
    X = tangent_lift(standard_purification(rho), rhodot, tol)
    return real_inner(X.matrix, X.matrix)


def retract_to_fiber(M, spectrum):
    """Psi (Psi^dag Psi)^{-1/2} P(sigma)^{1/2}, a point of S(sigma) near M."""
    M = np.asarray(M, dtype=complex)
    root_p = np.sqrt(np.array(spectrum.values))
    Psi = M @ inverse_sqrt_psd(dagger(M) @ M) * root_p[np.newaxis, :]
    return Purification(matrix=_frozen(Psi), spectrum=spectrum)


def gauge_align(reference, Phi):
    """
    Closest point to reference on the fiber through Phi.

    Right-multiplies Phi by the element of U(sigma) maximizing
    Re Tr(reference^dag Phi U), one polar decomposition per block.
    """
    spectrum = Phi.spectrum
    k = spectrum.rank
    U = np.zeros((k, k), dtype=complex)
    for s in spectrum.block_slices:
        U[s, s] = polar_unitary(dagger(Phi.matrix[:, s]) @ reference.matrix[:, s])
    return Purification(matrix=_frozen(Phi.matrix @ U), spectrum=spectrum)


def step_horizontality(Psi_a, Psi_b):
    """
    Block-diagonal anti-Hermitian part of Psi_a^dag Psi_b.

    Equals the connection form of the secant at the midpoint of the step,
    and vanishes for a discretely horizontal step.
    """
    overlap = dagger(Psi_a.matrix) @ Psi_b.matrix
    return frobenius(np.where(block_mask(Psi_a.spectrum), anti_hermitian_part(overlap), 0.0))


def vertical_identity(X):
    """|G(X^perp, X^perp) + Tr(A(X)^2 P(sigma))|; zero up to rounding."""
    vertical = vertical_projection(X).matrix
    return abs(real_inner(vertical, vertical) - vertical_energy(X))
