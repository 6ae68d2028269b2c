"""
Upper bounds on the distance between isospectral states by curve shortening.

A path is a chain of waypoints rho_0, ..., rho_m on the orbit, each stored
as an orthonormal frame Q_i with rho_i = Q_i P(sigma) Q_i^dag. Neighbouring
waypoints are joined by the one-parameter unitary group exp(s c_i) whose
endpoint is the block-aligned unitary closest to the identity; the length
of that segment is exact, so every path length is a genuine upper bound.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as la
from tqdm import tqdm

from config import (HBAR, DISTANCE_SEGMENTS, DISTANCE_ITERATIONS, DISTANCE_RESTARTS,
                    DISTANCE_RESTART_SCALE, DISTANCE_INITIAL_STEP, DISTANCE_MIN_STEP,
                    MAX_STEP_PHASE, SHOW_PROGRESS)
from geometry.linalg_utils import (dagger, frobenius, polar_unitary, unitary_log,
                                   antihermitian_exp, random_anti_hermitian)
from geometry.state_space import (Purification, standard_purification, orthonormal_frame,
                                  require_same_spectrum, distinguishable, _frozen, _resolve)
from geometry.bundle_geometry import connection_form
from dynamics.evolution import hamiltonian_schedule, uniform_times

logger = logging.getLogger(__name__)


def _full_frame(Q):
    n, k = Q.shape
    if n == k:
        return Q
    return np.hstack([Q, la.null_space(dagger(Q))])


def _frame_slices(spectrum):
    """Column slices of the multiplicity blocks, then the kernel."""
    slices = list(spectrum.block_slices)
    if spectrum.hilbert_dim > spectrum.rank:
        slices.append(slice(spectrum.rank, spectrum.hilbert_dim))
    return slices


def _reorthonormalize(Q):
    U, _, Vh = la.svd(Q, full_matrices=False)
    return U @ Vh


def aligned_unitary(Q0, Q1, spectrum):
    """
    The unitary V with V rho_0 V^dag = rho_1 closest to the identity.

    V maps each eigenspace of rho_0 (kernel included) onto the matching
    eigenspace of rho_1, with the freedom inside every eigenspace fixed by
    a polar decomposition.
    """
    F0, F1 = _full_frame(Q0), _full_frame(Q1)
    V = np.zeros((spectrum.hilbert_dim, spectrum.hilbert_dim), dtype=complex)
    for s in _frame_slices(spectrum):
        W = polar_unitary(dagger(F1[:, s]) @ F0[:, s])
        V += F1[:, s] @ W @ dagger(F0[:, s])
    return V


def segment_generator(Q0, Q1, spectrum):
    """Anti-Hermitian c with exp(c) rho_0 exp(-c) = rho_1."""
    return unitary_log(aligned_unitary(Q0, Q1, spectrum))


def segment_length(Q0, c, spectrum):
    """
    Length of s -> exp(s c) rho_0 exp(-s c), s in [0, 1].

    The speed is constant, equal to the norm of the horizontal part of c Psi_0.
    """
    Psi = Purification(matrix=Q0 * np.sqrt(np.array(spectrum.values))[np.newaxis, :],
                       spectrum=spectrum)
    X = c @ Psi.matrix
    return frobenius(X - Psi.matrix @ connection_form(Psi, X).matrix)


def _link(Q0, Q1, spectrum):
    return segment_length(Q0, segment_generator(Q0, Q1, spectrum), spectrum)


@dataclass(frozen=True, eq=False)
class PathEstimate:
    """
    A shortened path and how it was found.

    Fields:
    - frames: waypoint frames Q_0..Q_m
    - generators: segment generators c_0..c_{m-1}
    - segment_lengths: exact length of every segment
    - history: total length after each sweep, non-increasing
    - spectrum: common spectrum of the waypoints
    """
    frames: tuple
    generators: tuple
    segment_lengths: np.ndarray
    history: tuple
    spectrum: object

    @property
    def length(self):
        return float(np.sum(self.segment_lengths))

    @property
    def segments(self):
        return len(self.generators)

    def purifications(self):
        root_p = np.sqrt(np.array(self.spectrum.values))[np.newaxis, :]
        return [Purification(matrix=_frozen(Q * root_p), spectrum=self.spectrum)
                for Q in self.frames]

    def to_schedule(self, t0=0.0, t1=1.0, hbar=None):
        """
        Piecewise-constant Hamiltonian driving rho_0 onto rho_m along the path.

        Segment i runs on an equal share of [t0, t1] under H_i = i hbar c_i / dt,
        subdivided so every step stays below the step phase limit.
        """
        hbar = _resolve(hbar, HBAR)
        span = (t1 - t0) / self.segments
        largest = max((np.linalg.norm(c, 2) for c in self.generators), default=0.0)
        substeps = max(1, math.ceil(largest / (0.9 * MAX_STEP_PHASE)))
        times = uniform_times(t0, t1, self.segments * substeps)
        operators = []
        for c in self.generators:
            operators.extend([1j * hbar * c / span] * substeps)
        operators.append(operators[-1])
        return hamiltonian_schedule(times, operators, hbar=hbar, interpolation="piecewise")


def _segment_lengths(frames, spectrum):
    return np.array([_link(Q0, Q1, spectrum) for Q0, Q1 in zip(frames[:-1], frames[1:])])


def initial_path(rho0, rho1, segments):
    """
    Waypoint frames of the starting path.

    Distinguishable endpoints start on the geodesic cos(t) Psi_0 + sin(t) Psi_1;
    otherwise the path is exp(s log V) rho_0 with V the aligned unitary.
    """
    spectrum = rho0.spectrum
    Psi0, Psi1 = standard_purification(rho0), standard_purification(rho1)
    Q0, Q1 = orthonormal_frame(Psi0), orthonormal_frame(Psi1)
    fractions = np.linspace(0.0, 1.0, segments + 1)
    if distinguishable(rho0, rho1):
        angles = 0.5 * math.pi * fractions
        frames = [math.cos(t) * Q0 + math.sin(t) * Q1 for t in angles]
    else:
        c = segment_generator(Q0, Q1, spectrum)
        frames = [antihermitian_exp(c, s) @ Q0 for s in fractions]
    frames[0], frames[-1] = Q0, Q1
    return frames


def _shorten(frames, spectrum, iterations, seed, scale, progress):
    """One seeded restart of the waypoint search."""
    rng = np.random.default_rng(seed)
    n = spectrum.hilbert_dim
    frames = [np.array(Q) for Q in frames]
    if scale > 0.0:
        for i in range(1, len(frames) - 1):
            frames[i] = antihermitian_exp(random_anti_hermitian(n, rng, scale)) @ frames[i]

    lengths = _segment_lengths(frames, spectrum)
    steps = np.full(len(frames), DISTANCE_INITIAL_STEP)
    history = [float(lengths.sum())]
    for _ in tqdm(range(iterations), desc="shorten", disable=not progress):
        for i in range(1, len(frames) - 1):
            if steps[i] < DISTANCE_MIN_STEP:
                continue
            direction = random_anti_hermitian(n, rng)
            current = lengths[i - 1] + lengths[i]
            for sign in (1.0, -1.0):
                candidate = _reorthonormalize(antihermitian_exp(direction, sign * steps[i]) @ frames[i])
                before = _link(frames[i - 1], candidate, spectrum)
                after = _link(candidate, frames[i + 1], spectrum)
                if before + after < current:
                    frames[i] = candidate
                    lengths[i - 1], lengths[i] = before, after
                    steps[i] *= 1.5
                    break
            else:
                steps[i] *= 0.5
        history.append(float(lengths.sum()))
    return frames, history


def shorten_path(rho0, rho1, iterations=None, seed=0, segments=None, restarts=None,
                 progress=None):
    """
    Search for a short path between two isospectral states.

    Parameters:
    - rho0, rho1: DensityOperators with a common spectrum
    - iterations: sweeps over the interior waypoints per restart
    - seed: root seed; restarts use independent spawned streams
    - segments: number of path segments m
    - restarts: number of independent runs, the first from the unperturbed start
    - progress: show tqdm bars (default from config)

    Returns:
    - PathEstimate of the best run
    """
    require_same_spectrum(rho0.spectrum, rho1.spectrum)
    spectrum = rho0.spectrum
    iterations = int(_resolve(iterations, DISTANCE_ITERATIONS))
    segments = max(int(_resolve(segments, DISTANCE_SEGMENTS)), 1)
    restarts = max(int(_resolve(restarts, DISTANCE_RESTARTS)), 1)
    progress = _resolve(progress, SHOW_PROGRESS)

    start = initial_path(rho0, rho1, segments)
    seeds = np.random.SeedSequence(seed).spawn(restarts)
    scales = [0.0] + [DISTANCE_RESTART_SCALE] * (restarts - 1)
    runs = [_shorten(start, spectrum, iterations, child, scale, progress)
            for child, scale in zip(seeds, scales)]

    for r, (_, history) in enumerate(runs):
        logger.info("restart %d: %.12g -> %.12g", r, history[0], history[-1])
    frames, history = min(runs, key=lambda run: run[1][-1])

    generators = tuple(segment_generator(Q0, Q1, spectrum)
                       for Q0, Q1 in zip(frames[:-1], frames[1:]))
    lengths = np.array([segment_length(Q, c, spectrum) for Q, c in zip(frames[:-1], generators)])
    return PathEstimate(frames=tuple(frames), generators=generators, segment_lengths=lengths,
                        history=tuple(history), spectrum=spectrum)


def distance_upper_bound(rho0, rho1, iterations=None, seed=0, **options):
    """Length of the shortest path found between rho0 and rho1."""
    return shorten_path(rho0, rho1, iterations=iterations, seed=seed, **options).length
