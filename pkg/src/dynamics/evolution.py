"""
Unitary dynamics on an isospectral orbit D(sigma).

Sampled state curves, horizontal lifts to S(sigma), von Neumann integration
of Hamiltonian schedules, minimal-dispersion Hamiltonian synthesis, curve
length, energy dispersion and the time-energy check for distinguishable
endpoints.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import simpson, trapezoid
from scipy.interpolate import CubicSpline, interp1d
from tqdm import tqdm

from config import (HBAR, TOL_CURVE, TOL_FIBER, TOL_DEFAULT, TOL_HORIZONTAL,
                    MAX_STEP_PHASE, SHOW_PROGRESS)
from errors import (GridMismatchError, ShapeMismatchError, FiberMismatchError,
                    NotTangentError, StepTooLargeError, NotDistinguishableError)
from geometry.linalg_utils import (dagger, hermitian_part, frobenius, hermitian_propagator,
                                   polar_unitary)
from geometry.state_space import (DensityOperator, Purification, standard_purification,
                                  require_same_spectrum, distinguishable, _frozen, _resolve)
from geometry.bundle_geometry import (project, project_to_orbit_tangent, tangent_lift,
                                      gauge_align, step_horizontality)
from geometry.observables import Observable, observable, uncertainty

logger = logging.getLogger(__name__)

INTERPOLATIONS = ("spline", "piecewise")

# Two-stage commutator-free exponential integrator, fourth order
_GAUSS_NODES = (0.5 - math.sqrt(3.0) / 6.0, 0.5 + math.sqrt(3.0) / 6.0)
_CF_WEIGHTS = ((3.0 - 2.0 * math.sqrt(3.0)) / 12.0, (3.0 + 2.0 * math.sqrt(3.0)) / 12.0)


def _check_grid(times):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) < 2:
        raise GridMismatchError("a time grid needs at least two samples")
    if np.any(np.diff(times) <= 0.0):
        raise GridMismatchError("time grid must be strictly increasing")
    return times


def uniform_times(t0, t1, steps):
    """steps + 1 equally spaced times from t0 to t1."""
    if int(steps) < 1:
        raise GridMismatchError(f"steps must be positive, got {steps}")
    return np.linspace(float(t0), float(t1), int(steps) + 1)


def _spline(times, stacked):
    """Cubic spline through stacked matrix samples, linear below four samples."""
    if len(times) >= 4:
        return CubicSpline(times, stacked, axis=0)
    return interp1d(times, stacked, axis=0, kind='linear')


def _derivative(times, stacked):
    if len(times) >= 4:
        return CubicSpline(times, stacked, axis=0).derivative()(times)
    return np.gradient(stacked, times, axis=0)


def _integrate(values, times):
    if len(times) < 3:
        return float(trapezoid(values, x=times))
    return float(simpson(values, x=times))


@dataclass(frozen=True, eq=False)
class StateCurve:
    """
    Samples rho(tau_i) of a curve in D(sigma).

    Fields:
    - times: strictly increasing sample times
    - states: tuple of DensityOperators sharing one spectrum
    """
    times: np.ndarray
    states: tuple

    def __len__(self):
        return len(self.states)

    @property
    def spectrum(self):
        return self.states[0].spectrum

    @property
    def start(self):
        return self.states[0]

    @property
    def end(self):
        return self.states[-1]

    @property
    def duration(self):
        return float(self.times[-1] - self.times[0])

    def matrices(self):
        return np.stack([rho.matrix for rho in self.states])

    def velocities(self):
        """d rho / dt at every sample, from a cubic spline through the samples."""
        return _derivative(self.times, self.matrices())


@dataclass(frozen=True, eq=False)
class LiftedCurve:
    """Samples Psi(tau_i) of a curve in S(sigma)."""
    times: np.ndarray
    purifications: tuple

    def __len__(self):
        return len(self.purifications)

    def matrices(self):
        return np.stack([Psi.matrix for Psi in self.purifications])

    def velocities(self):
        return _derivative(self.times, self.matrices())

    def length(self):
        """Integral of sqrt(G(Psi', Psi'))."""
        speeds = np.linalg.norm(self.velocities(), axis=(1, 2))
        return _integrate(speeds, self.times)

    def horizontality_residuals(self):
        """Per-step connection form of the secant, divided by the step."""
        return np.array([
            step_horizontality(a, b) / (t1 - t0)
            for a, b, t0, t1 in zip(self.purifications[:-1], self.purifications[1:],
                                    self.times[:-1], self.times[1:])
        ])

    def fiber_residuals(self, curve):
        """|Psi(tau_i) Psi(tau_i)^dag - rho(tau_i)| per sample."""
        return np.array([frobenius(project(Psi).matrix - rho.matrix)
                         for Psi, rho in zip(self.purifications, curve.states)])

    def project(self):
        return StateCurve(times=self.times, states=tuple(project(Psi) for Psi in self.purifications))


@dataclass(frozen=True, eq=False)
class HamiltonianSchedule:
    """
    Samples H(tau_i) of a time dependent Hamiltonian.

    interpolation "spline" treats the samples as a smooth function of time;
    "piecewise" holds H(tau_i) constant on [tau_i, tau_{i+1}).
    """
    times: np.ndarray
    operators: tuple
    interpolation: str = "spline"

    def __len__(self):
        return len(self.operators)

    @property
    def hbar(self):
        return self.operators[0].hbar

    @property
    def dim(self):
        return self.operators[0].dim

    def matrices(self):
        return np.stack([H.matrix for H in self.operators])

    @cached_property
    def _interpolant(self):
        return _spline(self.times, self.matrices())

    def at(self, t):
        """H(t) as a Hermitian matrix."""
        if self.interpolation == "piecewise":
            index = int(np.searchsorted(self.times, t, side='right')) - 1
            index = min(max(index, 0), len(self.operators) - 1)
            return self.operators[index].matrix
        return hermitian_part(np.asarray(self._interpolant(t), dtype=complex))

    @classmethod
    def constant(cls, H, t0, t1, steps, hbar=None):
        """The same Hamiltonian sampled on a uniform grid."""
        H = H if isinstance(H, Observable) else observable(H, hbar)
        times = uniform_times(t0, t1, steps)
        return cls(times=times, operators=tuple(H for _ in times))


def state_curve(times, states):
    """Validate samples as a StateCurve."""
    times = _check_grid(times)
    states = tuple(states)
    if len(states) != len(times):
        raise GridMismatchError(f"{len(times)} times but {len(states)} states")
    for rho in states[1:]:
        require_same_spectrum(states[0].spectrum, rho.spectrum)
    return StateCurve(times=times, states=states)


def lifted_curve(times, purifications):
    times = _check_grid(times)
    purifications = tuple(purifications)
    if len(purifications) != len(times):
        raise GridMismatchError(f"{len(times)} times but {len(purifications)} purifications")
    for Psi in purifications[1:]:
        require_same_spectrum(purifications[0].spectrum, Psi.spectrum)
    return LiftedCurve(times=times, purifications=purifications)


def hamiltonian_schedule(times, operators, hbar=None, interpolation="spline"):
    """
    Validate samples as a HamiltonianSchedule.

    Parameters:
    - times: strictly increasing sample times
    - operators: Observables or Hermitian matrices
    - hbar: used for raw matrices (default from config)
    - interpolation: "spline" or "piecewise"

    Returns:
    - HamiltonianSchedule
    """
    if interpolation not in INTERPOLATIONS:
        raise ValueError(f"interpolation must be one of {INTERPOLATIONS}, got {interpolation!r}")
    times = _check_grid(times)
    operators = tuple(H if isinstance(H, Observable) else observable(H, hbar) for H in operators)
    if len(operators) != len(times):
        raise GridMismatchError(f"{len(times)} times but {len(operators)} operators")
    dims = {H.dim for H in operators}
    if len(dims) != 1:
        raise ShapeMismatchError(f"operators act on different dimensions {sorted(dims)}")
    return HamiltonianSchedule(times=times, operators=operators, interpolation=interpolation)


def _step_propagator(schedule, t0, t1):
    """Unitary taking rho(t0) to rho(t1) under the schedule."""
    hbar = schedule.hbar
    dt = t1 - t0
    if schedule.interpolation == "piecewise":
        samples = [schedule.at(t0)]
        stages = samples
    else:
        samples = [schedule.at(t0 + node * dt) for node in _GAUSS_NODES]
        H1, H2 = samples
        # Applied in order; the weights of each stage sum to one half
        stages = [2.0 * (_CF_WEIGHTS[1] * H1 + _CF_WEIGHTS[0] * H2),
                  2.0 * (_CF_WEIGHTS[0] * H1 + _CF_WEIGHTS[1] * H2)]
        dt = 0.5 * dt

    phase = max(np.linalg.norm(H, 2) for H in samples) * (t1 - t0) / hbar
    if phase > MAX_STEP_PHASE:
        raise StepTooLargeError(
            f"|H| dt / hbar = {phase:.3e} on [{t0:.6g}, {t1:.6g}] exceeds {MAX_STEP_PHASE}")

    U = np.eye(schedule.dim, dtype=complex)
    for H in stages:
        U = hermitian_propagator(H, dt, hbar) @ U
    return U


def von_neumann_evolve(schedule, rho0, progress=None):
    """
    Integrate rho' = [H, rho] / (i hbar) on the schedule's time grid.

    Every step conjugates by an exactly unitary propagator, so the spectrum
    is preserved to rounding. Spline schedules use a fourth-order
    commutator-free exponential step; piecewise schedules are propagated
    exactly.

    Parameters:
    - schedule: HamiltonianSchedule
    - rho0: DensityOperator at schedule.times[0]
    - progress: show a tqdm bar (default from config)

    Returns:
    - StateCurve sampled at schedule.times
    """
    if schedule.dim != rho0.dim:
        raise ShapeMismatchError(f"Hamiltonian acts on C^{schedule.dim}, rho0 on C^{rho0.dim}")
    progress = _resolve(progress, SHOW_PROGRESS)
    times = schedule.times
    # Accumulated propagator, projected back to the unitary group every step
    total = np.eye(rho0.dim, dtype=complex)
    states = [rho0]
    for i in tqdm(range(len(times) - 1), desc="evolve", disable=not progress):
        total = polar_unitary(_step_propagator(schedule, times[i], times[i + 1]) @ total)
        rho = hermitian_part(total @ rho0.matrix @ dagger(total))
        states.append(DensityOperator(matrix=_frozen(rho), spectrum=rho0.spectrum))
    logger.debug("evolved %d steps over [%g, %g]", len(times) - 1, times[0], times[-1])
    return StateCurve(times=times, states=tuple(states))


def _orbit_velocities(curve, tol_curve=None):
    """
    Standard purifications and orbit-tangent velocities at every sample.

    The spline velocity is projected onto the orbit; a normal part larger
    than tol_curve relative to the velocity means the samples are not
    isospectral or too coarse.
    """
    tol_curve = _resolve(tol_curve, TOL_CURVE)
    velocities = curve.velocities()
    result = []
    for i, (rho, rhodot) in enumerate(zip(curve.states, velocities)):
        Psi = standard_purification(rho)
        tangent, normal = project_to_orbit_tangent(Psi, hermitian_part(rhodot))
        scale = max(frobenius(rhodot), np.finfo(float).tiny)
        if normal > tol_curve * scale and normal > TOL_DEFAULT:
            raise NotTangentError(
                f"sample {i}: velocity leaves the orbit (normal part {normal:.3e} of {scale:.3e})")
        result.append((Psi, tangent))
    return result


def curve_length(curve, tol_curve=None):
    """
    Length of a sampled curve in D(sigma) under g.

    Parameters:
    - curve: StateCurve
    - tol_curve: relative bound on the off-orbit part of sampled velocities

    Returns:
    - float
    """
    speeds = []
    for Psi, rhodot in _orbit_velocities(curve, tol_curve):
        X = tangent_lift(Psi, rhodot)
        speeds.append(frobenius(X.matrix))
    return _integrate(np.array(speeds), curve.times)


def horizontal_lift(curve, Psi0, tol_fiber=None):
    """
    Horizontal lift of a state curve starting at Psi0.

    Each sample is the point of the fiber over rho(tau_{i+1}) closest to the
    previous one, which makes every step horizontal to rounding.

    Parameters:
    - curve: StateCurve
    - Psi0: Purification over curve.start
    - tol_fiber: tolerance on |Psi0 Psi0^dag - rho(tau_0)|

    Returns:
    - LiftedCurve
    """
    tol_fiber = _resolve(tol_fiber, TOL_FIBER)
    require_same_spectrum(curve.spectrum, Psi0.spectrum)
    residual = frobenius(project(Psi0).matrix - curve.start.matrix)
    if residual > tol_fiber:
        raise FiberMismatchError(f"Psi0 projects {residual:.3e} away from the first state")
    _orbit_velocities(curve)

    purifications = [Psi0]
    for rho in curve.states[1:]:
        purifications.append(gauge_align(purifications[-1], standard_purification(rho)))
    lift = LiftedCurve(times=curve.times, purifications=tuple(purifications))
    worst = float(np.max(lift.horizontality_residuals(), initial=0.0))
    if worst > TOL_HORIZONTAL:
        logger.warning("lift residual %.3e exceeds %g; the samples may be too coarse",
                       worst, TOL_HORIZONTAL)
    logger.info("lifted %d samples, max horizontality residual %.3e", len(lift), worst)
    return lift


def hamiltonian_from_velocity(Psi, Psidot, hbar=None):
    """
    A Hermitian H with H Psi = i hbar Psidot for a tangent velocity Psidot.

    H = i hbar (Psidot P^-1 Psi^dag - Psi P^-1 Psidot^dag
                - Psi P^-1 (Psi^dag Psidot) P^-1 Psi^dag)

    Depends on Psi only through rho = Psi Psi^dag when Psidot is horizontal.
    """
    hbar = _resolve(hbar, HBAR)
    M = Psi.matrix
    V = Psidot.matrix if hasattr(Psidot, 'matrix') else np.asarray(Psidot, dtype=complex)
    inverse_p = np.diag(1.0 / np.array(Psi.spectrum.values))
    generator = (V @ inverse_p @ dagger(M) - M @ inverse_p @ dagger(V)
                 - M @ inverse_p @ (dagger(M) @ V) @ inverse_p @ dagger(M))
    return observable(hermitian_part(1j * hbar * generator), hbar)


def min_dispersion_hamiltonian(curve, hbar=None, tol_curve=None):
    """
    Hamiltonian schedule generating the horizontal lift of a curve.

    At each sample H is synthesized from the horizontal lift of the curve's
    velocity, so Delta H = hbar sqrt(g(rho', rho')) pointwise and the energy
    dispersion equals the curve length.

    Parameters:
    - curve: StateCurve
    - hbar: Planck constant (default from config)

    Returns:
    - HamiltonianSchedule on the curve's grid
    """
    hbar = _resolve(hbar, HBAR)
    operators = []
    for Psi, rhodot in _orbit_velocities(curve, tol_curve):
        X = tangent_lift(Psi, rhodot)
        operators.append(hamiltonian_from_velocity(Psi, X, hbar))
    return HamiltonianSchedule(times=curve.times, operators=tuple(operators))


def energy_dispersion(schedule, curve):
    """
    (1 / hbar) * integral of Delta H(rho) dt along the curve.

    Piecewise schedules conserve Delta H on each step, so the integral is
    a plain sum there.
    """
    if len(schedule.times) != len(curve.times) or not np.allclose(schedule.times, curve.times):
        raise GridMismatchError("schedule and curve are sampled on different grids")
    spreads = np.array([uncertainty(H, rho) for H, rho in zip(schedule.operators, curve.states)])
    if schedule.interpolation == "piecewise":
        return float(np.sum(spreads[:-1] * np.diff(curve.times)) / schedule.hbar)
    return _integrate(spreads, curve.times) / schedule.hbar


def geodesic_hamiltonian(Psi0, Psi1, hbar=None, tol=None):
    """
    Constant H = i hbar (Psi1 P^-1 Psi0^dag - Psi0 P^-1 Psi1^dag).

    Drives cos(t) Psi0 + sin(t) Psi1 when Psi0^dag Psi1 = 0, reaching Psi1
    at t = pi / 2 with Delta H = hbar.
    """
    tol = _resolve(tol, TOL_DEFAULT)
    overlap = frobenius(dagger(Psi0.matrix) @ Psi1.matrix)
    if overlap > tol:
        raise NotDistinguishableError(f"|Psi0^dag Psi1| = {overlap:.3e}")
    hbar = _resolve(hbar, HBAR)
    inverse_p = np.diag(1.0 / np.array(Psi0.spectrum.values))
    generator = Psi1.matrix @ inverse_p @ dagger(Psi0.matrix) - Psi0.matrix @ inverse_p @ dagger(Psi1.matrix)
    return observable(hermitian_part(1j * hbar * generator), hbar)


def _geodesic_endpoints(rho0, rho1):
    if not distinguishable(rho0, rho1):
        raise NotDistinguishableError("states do not have orthogonal supports")
    return standard_purification(rho0), standard_purification(rho1)


def distinguishable_geodesic(rho0, rho1, steps):
    """
    The geodesic Psi(t) = cos(t) Psi0 + sin(t) Psi1, t in [0, pi/2].

    Parameters:
    - rho0, rho1: distinguishable DensityOperators with a common spectrum
    - steps: number of intervals N

    Returns:
    - tuple (StateCurve, LiftedCurve) with N + 1 samples
    """
    Psi0, Psi1 = _geodesic_endpoints(rho0, rho1)
    times = uniform_times(0.0, math.pi / 2.0, steps)
    spectrum = rho0.spectrum
    purifications = tuple(
        Purification(matrix=_frozen(math.cos(t) * Psi0.matrix + math.sin(t) * Psi1.matrix),
                     spectrum=spectrum)
        for t in times)
    lift = LiftedCurve(times=times, purifications=purifications)
    return lift.project(), lift


def geodesic_schedule(rho0, rho1, steps, hbar=None):
    """Constant schedule over [0, pi/2] driving rho0 onto rho1 along the geodesic."""
    Psi0, Psi1 = _geodesic_endpoints(rho0, rho1)
    H = geodesic_hamiltonian(Psi0, Psi1, hbar)
    return HamiltonianSchedule.constant(H, 0.0, math.pi / 2.0, steps)


@dataclass(frozen=True)
class TimeEnergyReport:
    """
    Time-averaged energy spread against the pi hbar / 2 bound.

    satisfied is None when the endpoints are not distinguishable.
    """
    mean_dispersion: float
    duration: float
    product: float
    bound: float
    applicable: bool
    satisfied: bool | None


def time_energy_check(schedule, rho0, tol=None):
    """
    Evolve rho0 under the schedule and test <Delta H> Delta t >= pi hbar / 2.

    Parameters:
    - schedule: HamiltonianSchedule
    - rho0: DensityOperator
    - tol: slack on the bound (default from config)

    Returns:
    - TimeEnergyReport
    """
    tol = _resolve(tol, TOL_DEFAULT)
    curve = von_neumann_evolve(schedule, rho0)
    duration = curve.duration
    action = energy_dispersion(schedule, curve) * schedule.hbar
    mean_dispersion = action / duration
    bound = math.pi * schedule.hbar / 2.0
    applicable = distinguishable(curve.start, curve.end)
    satisfied = bool(action >= bound - tol) if applicable else None
    if not applicable:
        logger.info("final state is not distinguishable from the initial state")
    return TimeEnergyReport(mean_dispersion=mean_dispersion, duration=duration,
                            product=action, bound=bound, applicable=bool(applicable),
                            satisfied=satisfied)
