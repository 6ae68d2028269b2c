"""
Spectra, density operators, purifications, tangent vectors and gauge algebra
elements, with validation and seeded random generators for test instances.

All values are immutable after construction: matrices are stored as
read-only complex arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from config import (TOL_TRACE, TOL_HERM, TOL_FIBER, TOL_TANGENT, TOL_COMMUTE,
                    TOL_ORTH, TOL_PSD, TOL_DEGENERACY)
from errors import (NotDecreasingError, NotPositiveError, TraceNotOneError,
                    DimensionTooSmallError, InvalidSpectrumError, NotHermitianError,
                    NotPSDError, RankMismatchError, SpectrumMismatchError,
                    ShapeMismatchError, FiberViolationError, NotTangentError,
                    NotInGaugeAlgebraError)
from geometry.linalg_utils import (dagger, hermitian_part, anti_hermitian_part,
                                   frobenius, haar_unitary)


def _frozen(M):
    """Read-only complex copy of a matrix."""
    arr = np.array(M, dtype=complex, copy=True)
    arr.setflags(write=False)
    return arr


def _resolve(value, default):
    return default if value is None else value


@dataclass(frozen=True)
class Spectrum:
    """
    Decreasing positive eigenvalues of a rank-k density operator on C^n.

    Fields:
    - values: tuple of k floats, listed with multiplicity
    - multiplicities: tuple of (distinct value, count) pairs, greatest first
    - hilbert_dim: n
    """
    values: tuple
    multiplicities: tuple
    hilbert_dim: int

    @property
    def rank(self):
        return len(self.values)

    @property
    def num_blocks(self):
        return len(self.multiplicities)

    @property
    def P(self):
        """The k x k diagonal matrix P(sigma)."""
        return np.diag(np.array(self.values, dtype=complex))

    @property
    def block_slices(self):
        """Index slices of the multiplicity blocks, greatest eigenvalue first."""
        slices = []
        start = 0
        for _, count in self.multiplicities:
            slices.append(slice(start, start + count))
            start += count
        return tuple(slices)

    def matches(self, other, tol=None):
        """True if both spectra label the same orbit."""
        tol = _resolve(tol, TOL_FIBER)
        if self.hilbert_dim != other.hilbert_dim or self.rank != other.rank:
            return False
        return bool(np.allclose(self.values, other.values, rtol=0.0, atol=tol))

    def __str__(self):
        return "σ=(" + ", ".join(f"{p:.12g}" for p in self.values) + ")"


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, nonnegative, unit-trace n x n matrix with its spectrum."""
    matrix: np.ndarray
    spectrum: Spectrum

    @property
    def dim(self):
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class Purification:
    """n x k matrix Psi with Psi^dag Psi = P(sigma); a point of S(sigma)."""
    matrix: np.ndarray
    spectrum: Spectrum

    @property
    def shape(self):
        return self.matrix.shape

    def fiber_residual(self):
        return frobenius(dagger(self.matrix) @ self.matrix - self.spectrum.P)


@dataclass(frozen=True, eq=False)
class TangentVector:
    """n x k matrix X attached to a purification, with Psi^dag X + X^dag Psi = 0."""
    base: Purification
    matrix: np.ndarray

    def tangency_residual(self):
        Psi = self.base.matrix
        return frobenius(dagger(Psi) @ self.matrix + dagger(self.matrix) @ Psi)


@dataclass(frozen=True, eq=False)
class GaugeAlgebraElement:
    """Anti-Hermitian k x k matrix commuting with P(sigma); an element of u(sigma)."""
    matrix: np.ndarray
    spectrum: Spectrum

    def eigenvalues(self):
        """Eigenvalues lambda_j of i*xi, ascending."""
        return la.eigvalsh(hermitian_part(1j * self.matrix))


def validate_spectrum(values, n, tol_trace=None, tol_degeneracy=None):
    """
    Build a Spectrum from a list of eigenvalues, clustering near-equal values.

    Values closer than tol_degeneracy are grouped into one multiplicity block
    and replaced by the block mean, so P(sigma) is exactly scalar on blocks.

    Parameters:
    - values: sequence of k real numbers, non-increasing and positive
    - n: Hilbert space dimension
    - tol_trace: trace tolerance (default from config)
    - tol_degeneracy: clustering tolerance (default from config)

    Returns:
    - Spectrum
    """
    tol_trace = _resolve(tol_trace, TOL_TRACE)
    tol_degeneracy = _resolve(tol_degeneracy, TOL_DEGENERACY)

    values = [float(v) for v in values]
    if not values:
        raise InvalidSpectrumError("spectrum must contain at least one eigenvalue")
    if any(v <= 0.0 for v in values):
        raise NotPositiveError(f"eigenvalues must be strictly positive, got {values}")
    for i in range(len(values) - 1):
        if values[i + 1] > values[i] + tol_degeneracy:
            raise NotDecreasingError(
                f"eigenvalues must be non-increasing, got {values[i]} before {values[i + 1]}")
    total = sum(values)
    if abs(total - 1.0) > tol_trace:
        raise TraceNotOneError(f"eigenvalues sum to {total:.12g}, expected 1")
    if int(n) < len(values):
        raise DimensionTooSmallError(f"n={n} is smaller than the rank k={len(values)}")

    # Group consecutive values within tolerance of the block's first member
    blocks = [[values[0]]]
    for v in values[1:]:
        if blocks[-1][0] - v <= tol_degeneracy:
            blocks[-1].append(v)
        else:
            blocks.append([v])

    clustered = []
    multiplicities = []
    for block in blocks:
        mean = sum(block) / len(block)
        clustered.extend([mean] * len(block))
        multiplicities.append((mean, len(block)))

    return Spectrum(values=tuple(clustered), multiplicities=tuple(multiplicities),
                    hilbert_dim=int(n))


def density_from_matrix(M, tol_herm=None, tol_psd=None, tol_trace=None):
    """
    Validate a matrix as a density operator and derive its spectrum.

    Parameters:
    - M: n x n complex matrix
    - tol_herm, tol_psd, tol_trace: tolerances (defaults from config)

    Returns:
    - DensityOperator
    """
    tol_herm = _resolve(tol_herm, TOL_HERM)
    tol_psd = _resolve(tol_psd, TOL_PSD)
    tol_trace = _resolve(tol_trace, TOL_TRACE)

    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ShapeMismatchError(f"density operator must be square, got shape {M.shape}")

    residual = float(np.max(np.abs(M - dagger(M)))) if M.size else 0.0
    if residual > tol_herm:
        raise NotHermitianError(f"max |rho - rho^dag| = {residual:.3e}")
    rho = hermitian_part(M)

    eig_val = la.eigvalsh(rho)
    if eig_val[0] < -tol_psd:
        raise NotPSDError(f"smallest eigenvalue {eig_val[0]:.12g} is negative")
    trace = float(np.real(np.trace(rho)))
    if abs(trace - 1.0) > tol_trace:
        raise TraceNotOneError(f"trace is {trace:.12g}, expected 1")

    kept = sorted((v for v in eig_val if v > tol_psd), reverse=True)
    spectrum = validate_spectrum(kept, rho.shape[0], tol_trace=tol_trace)
    return DensityOperator(matrix=_frozen(rho), spectrum=spectrum)


def purification_from_matrix(M, spectrum=None, tol_fiber=None):
    """
    Validate an n x k matrix as a purification.

    When no spectrum is given it is read from the diagonal of Psi^dag Psi.

    Parameters:
    - M: n x k complex matrix
    - spectrum: Spectrum or None
    - tol_fiber: tolerance on |Psi^dag Psi - P(sigma)|

    Returns:
    - Purification
    """
    tol_fiber = _resolve(tol_fiber, TOL_FIBER)
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2:
        raise ShapeMismatchError(f"purification must be a matrix, got shape {M.shape}")
    gram = dagger(M) @ M
    if spectrum is None:
        spectrum = validate_spectrum(np.real(np.diag(gram)), M.shape[0])
    if M.shape != (spectrum.hilbert_dim, spectrum.rank):
        raise ShapeMismatchError(
            f"purification shape {M.shape} does not match n={spectrum.hilbert_dim}, k={spectrum.rank}")
    residual = frobenius(gram - spectrum.P)
    if residual > tol_fiber:
        raise FiberViolationError(f"|Psi^dag Psi - P(sigma)| = {residual:.3e}")
    return Purification(matrix=_frozen(M), spectrum=spectrum)


def tangent_vector(base, X, tol_tangent=None):
    """Attach X to a purification after checking Psi^dag X + X^dag Psi = 0."""
    tol_tangent = _resolve(tol_tangent, TOL_TANGENT)
    X = np.asarray(X, dtype=complex)
    if X.shape != base.shape:
        raise ShapeMismatchError(f"tangent vector shape {X.shape} differs from base {base.shape}")
    tangent = TangentVector(base=base, matrix=_frozen(X))
    residual = tangent.tangency_residual()
    if residual > tol_tangent:
        raise NotTangentError(f"|Psi^dag X + X^dag Psi| = {residual:.3e}")
    return tangent


def block_mask(spectrum):
    """Boolean k x k mask of the multiplicity blocks."""
    k = spectrum.rank
    mask = np.zeros((k, k), dtype=bool)
    for s in spectrum.block_slices:
        mask[s, s] = True
    return mask


def gauge_element(xi, spectrum, tol_herm=None, tol_commute=None):
    """
    Validate a k x k matrix as an element of u(sigma).

    Parameters:
    - xi: k x k complex matrix
    - spectrum: Spectrum fixing the block structure

    Returns:
    - GaugeAlgebraElement
    """
    tol_herm = _resolve(tol_herm, TOL_HERM)
    tol_commute = _resolve(tol_commute, TOL_COMMUTE)
    xi = np.asarray(xi, dtype=complex)
    k = spectrum.rank
    if xi.shape != (k, k):
        raise ShapeMismatchError(f"gauge element must be {k}x{k}, got {xi.shape}")
    if frobenius(xi + dagger(xi)) > tol_herm:
        raise NotInGaugeAlgebraError("matrix is not anti-Hermitian")
    P = spectrum.P
    if frobenius(xi @ P - P @ xi) > tol_commute:
        raise NotInGaugeAlgebraError("matrix does not commute with P(sigma)")
    return GaugeAlgebraElement(matrix=_frozen(xi), spectrum=spectrum)


def gauge_algebra_basis(spectrum):
    """
    Real basis of u(sigma), block by block.

    Each block of size m contributes i*E_aa, E_ab - E_ba and i*(E_ab + E_ba).
    """
    k = spectrum.rank
    basis = []
    for s in spectrum.block_slices:
        indices = range(s.start, s.stop)
        for a in indices:
            xi = np.zeros((k, k), dtype=complex)
            xi[a, a] = 1j
            basis.append(GaugeAlgebraElement(matrix=_frozen(xi), spectrum=spectrum))
            for b in indices:
                if b <= a:
                    continue
                real_gen = np.zeros((k, k), dtype=complex)
                real_gen[a, b], real_gen[b, a] = 1.0, -1.0
                imag_gen = np.zeros((k, k), dtype=complex)
                imag_gen[a, b], imag_gen[b, a] = 1j, 1j
                basis.append(GaugeAlgebraElement(matrix=_frozen(real_gen), spectrum=spectrum))
                basis.append(GaugeAlgebraElement(matrix=_frozen(imag_gen), spectrum=spectrum))
    return basis


def standard_purification(rho):
    """
    A purification of rho with columns sqrt(p_i) v_i.

    The v_i are orthonormal eigenvectors ordered by the spectrum, each with
    its largest-magnitude entry made real and positive.

    Parameters:
    - rho: DensityOperator

    Returns:
    - Purification over rho
    """
    spectrum = rho.spectrum
    k = spectrum.rank
    eig_val, eig_vec = la.eigh(rho.matrix)
    order = np.argsort(eig_val)[::-1]
    eig_val, eig_vec = eig_val[order], eig_vec[:, order]

    support = int(np.sum(eig_val > TOL_PSD))
    if support != k:
        raise RankMismatchError(f"rho has rank {support} but its spectrum has k={k}")

    vectors = eig_vec[:, :k].copy()
    for j in range(k):
        pivot = vectors[np.argmax(np.abs(vectors[:, j])), j]
        vectors[:, j] *= np.conj(pivot) / abs(pivot)

    Psi = vectors * np.sqrt(np.array(spectrum.values))[np.newaxis, :]
    return Purification(matrix=_frozen(Psi), spectrum=spectrum)


def orthonormal_frame(Psi):
    """Orthonormal n x k frame Q with Psi = Q sqrt(P(sigma))."""
    return Psi.matrix / np.sqrt(np.array(Psi.spectrum.values))[np.newaxis, :]


def random_density(spectrum, seed):
    """
    rho = U diag(sigma, 0, ..., 0) U^dag for a Haar unitary U.

    Parameters:
    - spectrum: Spectrum
    - seed: integer seed for numpy's default generator

    Returns:
    - DensityOperator isospectral to spectrum
    """
    rng = np.random.default_rng(seed)
    n, k = spectrum.hilbert_dim, spectrum.rank
    U = haar_unitary(n, rng)
    D = np.zeros(n)
    D[:k] = spectrum.values
    rho = hermitian_part((U * D[np.newaxis, :]) @ dagger(U))
    return DensityOperator(matrix=_frozen(rho), spectrum=spectrum)


def random_purification(spectrum, seed):
    """Purification Q sqrt(P(sigma)) with Q the first k columns of a Haar unitary."""
    rng = np.random.default_rng(seed)
    n, k = spectrum.hilbert_dim, spectrum.rank
    Q = haar_unitary(n, rng)[:, :k]
    Psi = Q * np.sqrt(np.array(spectrum.values))[np.newaxis, :]
    return Purification(matrix=_frozen(Psi), spectrum=spectrum)


def tangent_projection(Psi, Z):
    """
    Orthogonal projection of an ambient n x k matrix onto T_Psi S(sigma).

    Removes Psi S with S Hermitian solving P S + S P = Psi^dag Z + Z^dag Psi.
    """
    M = Psi.matrix
    p = np.array(Psi.spectrum.values)
    rhs = dagger(M) @ Z + dagger(Z) @ M
    S = rhs / (p[:, np.newaxis] + p[np.newaxis, :])
    return Z - M @ S


def random_tangent(Psi, seed, norm=None):
    """Random tangent vector at Psi, optionally scaled to a Frobenius norm."""
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal(Psi.shape) + 1j * rng.standard_normal(Psi.shape)
    X = tangent_projection(Psi, Z)
    if norm is not None:
        X = X * (norm / frobenius(X))
    return TangentVector(base=Psi, matrix=_frozen(X))


def random_gauge_element(spectrum, seed, scale=1.0):
    """Random element of u(sigma), Gaussian within each multiplicity block."""
    rng = np.random.default_rng(seed)
    k = spectrum.rank
    xi = np.zeros((k, k), dtype=complex)
    for s in spectrum.block_slices:
        m = s.stop - s.start
        Z = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        xi[s, s] = scale * anti_hermitian_part(Z)
    return GaugeAlgebraElement(matrix=_frozen(xi), spectrum=spectrum)


def random_gauge_unitary(spectrum, seed):
    """Random element of U(sigma): Haar unitaries on each multiplicity block."""
    rng = np.random.default_rng(seed)
    k = spectrum.rank
    U = np.zeros((k, k), dtype=complex)
    for s in spectrum.block_slices:
        U[s, s] = haar_unitary(s.stop - s.start, rng)
    return U


def random_hermitian(n, seed, scale=1.0):
    """Hermitian n x n matrix with Gaussian entries."""
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * hermitian_part(Z)


def random_spectrum(n, k, seed, degenerate=False):
    """
    Random spectrum of rank k on C^n.

    With degenerate=True the two largest eigenvalues share a block (k >= 2).
    """
    rng = np.random.default_rng(seed)
    weights = rng.uniform(0.2, 1.0, size=k)
    if degenerate and k >= 2:
        weights[1] = weights[0] = max(weights[0], weights[1])
    weights = np.sort(weights)[::-1]
    weights = weights / weights.sum()
    return validate_spectrum(weights, n)


def require_same_spectrum(first, second, tol=None):
    """Raise SpectrumMismatchError unless both spectra label the same orbit."""
    if not first.matches(second, tol):
        raise SpectrumMismatchError(f"{first} (n={first.hilbert_dim}) differs from "
                                    f"{second} (n={second.hilbert_dim})")


def distinguishable(rho0, rho1, tol_orth=None):
    """
    True when rho0 and rho1 have orthogonal supports.

    Parameters:
    - rho0, rho1: DensityOperators with a common spectrum
    - tol_orth: threshold on the Frobenius norm of rho0 rho1

    Returns:
    - bool
    """
    tol_orth = _resolve(tol_orth, TOL_ORTH)
    require_same_spectrum(rho0.spectrum, rho1.spectrum)
    return frobenius(rho0.matrix @ rho1.matrix) < tol_orth


def random_observable(n, seed, scale=1.0):
    """Random Hermitian n x n matrix suitable as an observable."""
    return random_hermitian(n, seed, scale)


def spectrum_of_purification(M, tol_fiber=None):
    """Spectrum read off the diagonal of Psi^dag Psi, checking the off-diagonal vanishes."""
    return purification_from_matrix(M, tol_fiber=tol_fiber).spectrum
