import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from errors import (FiberMismatchError, GridMismatchError, NotDistinguishableError,
                    StepTooLargeError, NotTangentError, SpectrumMismatchError)
from geometry.state_space import (DensityOperator, Purification, density_from_matrix,
                                  purification_from_matrix,
                                  random_density, random_hermitian, random_purification,
                                  random_spectrum, random_tangent, standard_purification)
from geometry.observables import uncertainty
from comparison.bures_compare import example_curve
from dynamics.evolution import (HamiltonianSchedule, StateCurve, curve_length,
                                distinguishable_geodesic,
                                energy_dispersion, geodesic_schedule, hamiltonian_from_velocity,
                                hamiltonian_schedule, horizontal_lift, min_dispersion_hamiltonian,
                                state_curve, time_energy_check, uniform_times, von_neumann_evolve)


@pytest.mark.parametrize("p1, p2, eps", [(0.7, 0.3, 0.5), (0.9, 0.1, 0.2)])
def test_rotation_curve_length(rotation_curve, p1, p2, eps):
    assert curve_length(rotation_curve(p1, p2, eps)) == pytest.approx(eps, abs=1e-8)


def test_evolution_reproduces_rotation(qubit_rho, pauli):
    eps = 0.5
    schedule = HamiltonianSchedule.constant(-eps * pauli["y"], 0.0, 1.0, 200)
    curve = von_neumann_evolve(schedule, qubit_rho)
    for t, rho in zip(curve.times, curve.states):
        assert_allclose(rho.matrix, example_curve(0.7, 0.3, eps, t).matrix, atol=1e-12)


def test_opposite_generator_mirrors_rotation(qubit_rho, pauli):
    schedule = HamiltonianSchedule.constant(0.5 * pauli["y"], 0.0, 1.0, 100)
    curve = von_neumann_evolve(schedule, qubit_rho)
    assert_allclose(curve.end.matrix, example_curve(0.7, 0.3, -0.5, 1.0).matrix, atol=1e-12)


def test_zero_hamiltonian_keeps_state(qubit_rho):
    curve = von_neumann_evolve(HamiltonianSchedule.constant(np.zeros((2, 2)), 0.0, 1.0, 10),
                               qubit_rho)
    for rho in curve.states:
        assert_allclose(rho.matrix, qubit_rho.matrix, atol=1e-14)


def test_spectrum_is_kept_over_long_runs():
    spectrum = random_spectrum(3, 3, seed=21)
    rho0 = random_density(spectrum, 21)
    Ha, Hb = random_hermitian(3, 22, 0.5), random_hermitian(3, 23, 0.5)
    times = uniform_times(0.0, 1.0, 10_000)
    schedule = hamiltonian_schedule(times, [Ha + t * Hb for t in times])
    curve = von_neumann_evolve(schedule, rho0)
    final = np.sort(np.linalg.eigvalsh(curve.end.matrix))[::-1]
    assert np.max(np.abs(final - np.array(spectrum.values))) < 1e-12
    assert abs(np.trace(curve.end.matrix) - 1.0) < 1e-12


def test_spline_integrator_is_fourth_order():
    spectrum = random_spectrum(3, 2, seed=4)
    rho0 = random_density(spectrum, 4)
    Ha, Hb = random_hermitian(3, 5, 0.5), random_hermitian(3, 6, 0.5)

    def final_state(steps):
        times = uniform_times(0.0, 1.0, steps)
        schedule = hamiltonian_schedule(times, [Ha + math.sin(2 * t) * Hb for t in times])
        return von_neumann_evolve(schedule, rho0).end.matrix

    reference = final_state(1600)
    coarse = np.linalg.norm(final_state(50) - reference)
    fine = np.linalg.norm(final_state(100) - reference)
    assert fine < coarse / 8.0


def test_step_too_large(qubit_rho, pauli):
    schedule = HamiltonianSchedule.constant(10.0 * pauli["z"], 0.0, 1.0, 2)
    with pytest.raises(StepTooLargeError):
        von_neumann_evolve(schedule, qubit_rho)


def test_grid_checks(qubit_rho, pauli):
    with pytest.raises(GridMismatchError):
        state_curve([0.0, 0.0], [qubit_rho, qubit_rho])
    with pytest.raises(GridMismatchError):
        hamiltonian_schedule([0.0, 1.0], [pauli["z"]])
    schedule = HamiltonianSchedule.constant(pauli["z"], 0.0, 1.0, 10)
    curve = von_neumann_evolve(HamiltonianSchedule.constant(pauli["z"], 0.0, 1.0, 20), qubit_rho)
    with pytest.raises(GridMismatchError):
        energy_dispersion(schedule, curve)


def test_state_curve_requires_common_spectrum():
    times = uniform_times(0.0, 1.0, 10)
    states = [density_from_matrix(np.diag([0.7 - 0.01 * t, 0.3 + 0.01 * t])) for t in times]
    with pytest.raises(SpectrumMismatchError):
        state_curve(times, states)


def test_lift_of_rotation(rotation_curve):
    eps = 0.5
    curve = rotation_curve(eps=eps)
    Psi0 = standard_purification(curve.start)
    lift = horizontal_lift(curve, Psi0)
    assert np.max(lift.horizontality_residuals()) < 1e-8
    assert np.max(lift.fiber_residuals(curve)) < 1e-10
    assert lift.length() == pytest.approx(eps, abs=1e-8)
    for t, Psi in zip(curve.times[::100], lift.purifications[::100]):
        c, s = math.cos(eps * t), math.sin(eps * t)
        R = np.array([[c, s], [-s, c]])
        assert_allclose(Psi.matrix, R @ Psi0.matrix, atol=1e-10)


def test_lift_is_gauge_covariant(rotation_curve):
    curve = rotation_curve(steps=200)
    Psi0 = standard_purification(curve.start)
    U = np.diag([np.exp(0.3j), np.exp(-1.1j)])
    moved = Purification(matrix=Psi0.matrix @ U, spectrum=Psi0.spectrum)
    first, second = horizontal_lift(curve, Psi0), horizontal_lift(curve, moved)
    for a, b in zip(first.purifications, second.purifications):
        assert_allclose(b.matrix, a.matrix @ U, atol=1e-10)


def test_lift_rejects_wrong_start(rotation_curve):
    wrong = purification_from_matrix(np.array([[0.0, math.sqrt(0.3)], [math.sqrt(0.7), 0.0]]))
    with pytest.raises(FiberMismatchError):
        horizontal_lift(rotation_curve(), wrong)


def test_min_dispersion_hamiltonian_on_rotation(rotation_curve, pauli):
    eps = 0.5
    curve = rotation_curve(eps=eps)
    schedule = min_dispersion_hamiltonian(curve)
    assert_allclose(schedule.operators[500].matrix, -eps * pauli["y"], atol=1e-8)
    assert energy_dispersion(schedule, curve) == pytest.approx(eps, abs=1e-8)


def test_stationary_state_still_disperses(qubit_rho, pauli):
    schedule = HamiltonianSchedule.constant(pauli["z"], 0.0, 2.0, 40)
    curve = von_neumann_evolve(schedule, qubit_rho)
    assert curve_length(curve) == pytest.approx(0.0, abs=1e-12)
    assert energy_dispersion(schedule, curve) == pytest.approx(2.0 * math.sqrt(0.84), abs=1e-10)


def test_dispersion_of_generic_evolution_bounds_length():
    spectrum = random_spectrum(3, 2, seed=31)
    rho0 = random_density(spectrum, 31)
    Ha, Hb = random_hermitian(3, 32, 0.5), random_hermitian(3, 33, 0.5)
    times = uniform_times(0.0, 1.0, 1000)
    schedule = hamiltonian_schedule(times, [Ha + t * Hb for t in times])
    curve = von_neumann_evolve(schedule, rho0)

    length = curve_length(curve)
    assert energy_dispersion(schedule, curve) >= length - 1e-6
    assert energy_dispersion(min_dispersion_hamiltonian(curve), curve) == pytest.approx(length, abs=1e-6)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 4))
def test_min_dispersion_hamiltonian_replays_the_curve(seed, n):
    k = 1 + seed % n
    rho0 = random_density(random_spectrum(n, k, seed, degenerate=seed % 3 == 0), seed)
    Ha, Hb = random_hermitian(n, seed + 1, 0.5), random_hermitian(n, seed + 2, 0.5)
    times = uniform_times(0.0, 1.0, 1000)
    curve = von_neumann_evolve(hamiltonian_schedule(times, [Ha + t * Hb for t in times]), rho0)

    schedule = min_dispersion_hamiltonian(curve)
    replay = von_neumann_evolve(schedule, curve.start)
    deviation = max(np.linalg.norm(a.matrix - b.matrix)
                    for a, b in zip(curve.states, replay.states))
    assert deviation <= 1e-6
    assert abs(energy_dispersion(schedule, curve) - curve_length(curve)) <= 1e-6


def test_hamiltonian_from_velocity():
    spectrum = random_spectrum(4, 2, seed=12)
    Psi = random_purification(spectrum, 12)
    V = random_tangent(Psi, 13)
    H = hamiltonian_from_velocity(Psi, V, hbar=0.5)
    assert_allclose(H.matrix, H.matrix.conj().T, atol=1e-12)
    assert_allclose(H.matrix @ Psi.matrix, 0.5j * V.matrix, atol=1e-10)


def test_geodesic_between_distinguishable_states(transfer_pair):
    rho0, rho1 = transfer_pair
    curve, lift = distinguishable_geodesic(rho0, rho1, 400)
    assert curve_length(curve) == pytest.approx(math.pi / 2, abs=1e-6)
    assert lift.length() == pytest.approx(math.pi / 2, abs=1e-6)
    assert_allclose(curve.end.matrix, rho1.matrix, atol=1e-12)
    swapped, _ = distinguishable_geodesic(rho1, rho0, 400)
    assert curve_length(swapped) == pytest.approx(math.pi / 2, abs=1e-6)


def test_geodesic_is_its_own_horizontal_lift(transfer_pair):
    rho0, rho1 = transfer_pair
    curve, lift = distinguishable_geodesic(rho0, rho1, 400)
    Psi0, Psi1 = lift.purifications[0].matrix, lift.purifications[-1].matrix
    P = lift.purifications[0].spectrum.P
    for t, Psi in zip(curve.times, lift.purifications):
        velocity = -math.sin(t) * Psi0 + math.cos(t) * Psi1
        assert_allclose(Psi.matrix.conj().T @ Psi.matrix, P, atol=1e-12)
        assert_allclose(Psi.matrix.conj().T @ velocity, np.zeros_like(P), atol=1e-12)

    relifted = horizontal_lift(curve, lift.purifications[0])
    for a, b in zip(lift.purifications, relifted.purifications):
        assert_allclose(b.matrix, a.matrix, atol=1e-8)


def test_geodesic_between_pure_qubits():
    rho0 = density_from_matrix(np.diag([1.0, 0.0]))
    rho1 = density_from_matrix(np.diag([0.0, 1.0]))
    curve, _ = distinguishable_geodesic(rho0, rho1, 200)
    assert curve_length(curve) == pytest.approx(math.pi / 2, abs=1e-6)


def test_geodesic_needs_orthogonal_supports(qubit_rho):
    with pytest.raises(NotDistinguishableError):
        distinguishable_geodesic(qubit_rho, qubit_rho, 10)


def test_time_energy_equality_on_geodesic(transfer_pair):
    rho0, rho1 = transfer_pair
    schedule = geodesic_schedule(rho0, rho1, 400)
    assert uncertainty(schedule.operators[0], rho0) == pytest.approx(1.0, abs=1e-12)
    report = time_energy_check(schedule, rho0)
    assert report.applicable
    assert report.satisfied
    assert report.product == pytest.approx(math.pi / 2, abs=1e-8)


@pytest.mark.parametrize("lam", [0.3, 0.8])
def test_time_energy_strict_off_geodesic(transfer_pair, lam):
    rho0, rho1 = transfer_pair
    base = geodesic_schedule(rho0, rho1, 400).operators[0].matrix
    perturbed = base + lam * np.diag([1.0, -1.0, 1.0, -1.0])
    schedule = HamiltonianSchedule.constant(perturbed, 0.0, math.pi / 2, 400)
    report = time_energy_check(schedule, rho0)
    assert report.applicable
    assert report.product == pytest.approx(math.pi / 2 * math.sqrt(1 + 0.96 * lam ** 2), abs=1e-8)
    assert report.product > report.bound


@settings(max_examples=20, deadline=None)
@given(a=st.floats(-1.0, 1.0), b=st.floats(-1.0, 1.0))
def test_perturbed_transfers_respect_the_bound(a, b):
    # diag(a, b, a, b) commutes with the geodesic generator, so rho1 is still reached
    rho0 = density_from_matrix(np.diag([0.6, 0.4, 0.0, 0.0]))
    rho1 = density_from_matrix(np.diag([0.0, 0.0, 0.6, 0.4]))
    base = geodesic_schedule(rho0, rho1, 400).operators[0].matrix
    schedule = HamiltonianSchedule.constant(base + np.diag([a, b, a, b]), 0.0, math.pi / 2, 400)
    report = time_energy_check(schedule, rho0)
    assert report.applicable
    assert report.product >= math.pi / 2 - 1e-6


def test_time_energy_not_applicable(qubit_rho, pauli):
    report = time_energy_check(HamiltonianSchedule.constant(pauli["z"], 0.0, 1.0, 20), qubit_rho)
    assert not report.applicable
    assert report.satisfied is None


def test_velocity_off_orbit_is_rejected(qubit_rho):
    # Samples claim one spectrum while their eigenvalues drift
    times = uniform_times(0.0, 1.0, 10)
    drifting = StateCurve(times=times, states=tuple(
        DensityOperator(matrix=qubit_rho.matrix + np.diag([0.1 * t, -0.1 * t]),
                        spectrum=qubit_rho.spectrum)
        for t in times))
    with pytest.raises(NotTangentError):
        curve_length(drifting)
