"""
Dense linear algebra helpers shared by the geometry, dynamics and comparison
packages.
"""
import numpy as np
import scipy.linalg as la
from scipy.stats import unitary_group


def dagger(M):
    """Conjugate transpose."""
    return np.conj(M).T


def hermitian_part(M):
    return 0.5 * (M + dagger(M))


def anti_hermitian_part(M):
    return 0.5 * (M - dagger(M))


def frobenius(M):
    return float(np.linalg.norm(M, 'fro'))


def polar_unitary(M):
    """
    Unitary factor of the polar decomposition M = W S, computed via SVD.

    A rank-deficient M still yields a unitary (the singular vectors of the
    zero singular values are paired arbitrarily but deterministically).

    Parameters:
    - M: square complex matrix

    Returns:
    - ndarray: unitary W maximizing Re Tr(W^dag M)
    """
    if M.size == 0:
        return np.zeros_like(M, dtype=complex)
    U, _, Vh = la.svd(M)
    return U @ Vh


def unitary_log(W):
    """
    Principal logarithm of a unitary matrix, returned anti-Hermitian.

    A unitary is normal, so its complex Schur form is diagonal and the
    logarithm only needs the phases of the diagonal.
    """
    T, Z = la.schur(W, output='complex')
    phases = np.angle(np.diag(T))
    log_W = Z @ np.diag(1j * phases) @ dagger(Z)
    return anti_hermitian_part(log_W)


def hermitian_propagator(H, tau, hbar):
    """
    exp(-i H tau / hbar) for Hermitian H by spectral decomposition.

    Unitary to machine precision, which keeps the spectrum of a propagated
    density operator fixed over long runs.
    """
    eig_val, eig_vec = la.eigh(hermitian_part(H))
    phases = np.exp(-1j * eig_val * tau / hbar)
    return np.einsum('ij,j,kj->ik', eig_vec, phases, eig_vec.conj())


def antihermitian_exp(a, s=1.0):
    """exp(s * a) for anti-Hermitian a by spectral decomposition of i*a."""
    eig_val, eig_vec = la.eigh(hermitian_part(1j * a))
    phases = np.exp(-1j * s * eig_val)
    return np.einsum('ij,j,kj->ik', eig_vec, phases, eig_vec.conj())


def inverse_sqrt_psd(S):
    """S^{-1/2} for a Hermitian positive definite S."""
    eig_val, eig_vec = la.eigh(hermitian_part(S))
    return np.einsum('ij,j,kj->ik', eig_vec, 1.0 / np.sqrt(eig_val), eig_vec.conj())


def haar_unitary(n, rng):
    """Haar-distributed n x n unitary drawn from rng."""
    if n == 1:
        return np.exp(2j * np.pi * rng.random()).reshape(1, 1)
    return unitary_group.rvs(n, random_state=rng)


def random_anti_hermitian(n, rng, norm=1.0):
    """Anti-Hermitian n x n matrix with Gaussian entries, scaled to a Frobenius norm."""
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    a = anti_hermitian_part(Z)
    return a * (norm / max(frobenius(a), np.finfo(float).tiny))
