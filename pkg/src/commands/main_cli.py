import sys
import os

# Path adjustment
sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import argparse
import logging
import math
from dataclasses import dataclass

import numpy as np

from config import HBAR, TOL_DEFAULT, DEFAULT_STEPS, TOL_QUADRATURE, LOG_LEVEL
from errors import GeometryError, ParseError, InvalidRunConfigError
from geometry.state_space import (density_from_matrix, purification_from_matrix,
                                  standard_purification, distinguishable)
from geometry.observables import observable, dispersion_bound_check, variance_decomposition
from dynamics.evolution import (HamiltonianSchedule, von_neumann_evolve, horizontal_lift,
                                curve_length, energy_dispersion, min_dispersion_hamiltonian,
                                time_energy_check)
from dynamics.curve_shortening import shorten_path
from comparison.bures_compare import example_gap_report
from serialization.storage import (save_json, load_json, dumps, matrix_from_dict,
                                   curve_to_dict, state_curve_from_dict, schedule_to_dict,
                                   schedule_from_dict)
from commands import reports

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunConfig:
    """Settings shared by every subcommand of one invocation."""
    hbar: float = HBAR
    tol: float = TOL_DEFAULT
    seed: int = 0
    steps: int = DEFAULT_STEPS
    as_json: bool = False

    def validate(self):
        if not self.hbar > 0:
            raise InvalidRunConfigError(f"hbar must be positive, got {self.hbar}")
        if not self.tol > 0:
            raise InvalidRunConfigError(f"tol must be positive, got {self.tol}")
        if self.steps < 2:
            raise InvalidRunConfigError(f"steps must be at least 2, got {self.steps}")
        return self


def emit(run, payload, display, output=None):
    """Print a payload as JSON or through its report, optionally saving it."""
    if output:
        save_json(payload, output)
    if run.as_json:
        print(dumps(payload))
    else:
        display(payload)


def load_matrix(path):
    return matrix_from_dict(load_json(path))


def load_density(path):
    return density_from_matrix(load_matrix(path))


def load_schedule(path, run, t0, t1):
    """A schedule file, or a single matrix held constant over [t0, t1]."""
    data = load_json(path)
    if isinstance(data, dict) and "times" in data:
        return schedule_from_dict(data, hbar=run.hbar)
    return HamiltonianSchedule.constant(matrix_from_dict(data), t0, t1, run.steps, run.hbar)


def run_validate(run, args):
    """Validate a density operator or purification file."""
    M = load_matrix(args.path)
    if args.kind == 'density' or (args.kind == 'auto' and M.shape[0] == M.shape[1]):
        spectrum = density_from_matrix(M, tol_trace=run.tol).spectrum
        label = "density operator"
    else:
        spectrum = purification_from_matrix(M).spectrum
        label = "purification"
    payload = {
        "kind": label,
        "hilbert_dim": spectrum.hilbert_dim,
        "spectrum": list(spectrum.values),
        "multiplicities": [[value, count] for value, count in spectrum.multiplicities],
    }
    emit(run, payload, reports.display_validation)


def run_uncertainty(run, args):
    """Compare Delta A with hbar sqrt(g(X_A, X_A)) and split the variance."""
    A = observable(load_matrix(args.obs_path), run.hbar)
    rho = load_density(args.rho_path)
    bound = dispersion_bound_check(A, rho, tol=run.tol)
    terms = variance_decomposition(A, standard_purification(rho))
    payload = {
        "delta_A": bound.lhs,
        "hbar_sqrt_g": bound.rhs,
        "is_equality": bound.is_equality,
        "horizontal": bound.horizontal,
        "g_term": terms.g_term,
        "square_of_mean_term": terms.square_of_mean_term,
        "second_moment_term": terms.second_moment_term,
    }
    emit(run, payload, reports.display_uncertainty, args.output)


def run_dispersion(run, args):
    """Energy dispersion of an evolution against the length of its curve."""
    schedule = load_schedule(args.hamiltonian_path, run, args.t0, args.t1)
    rho0 = load_density(args.rho0_path)
    curve = von_neumann_evolve(schedule, rho0, progress=False if run.as_json else None)
    value = energy_dispersion(schedule, curve)
    length = curve_length(curve)
    slack = value - length
    payload = {
        "t0": float(curve.times[0]),
        "t1": float(curve.times[-1]),
        "dispersion": value,
        "length": length,
        "slack": slack,
        "is_equality": abs(slack) <= TOL_QUADRATURE * max(1.0, length),
    }
    if distinguishable(curve.start, curve.end):
        report = time_energy_check(schedule, rho0, tol=run.tol)
        payload["time_energy"] = {"product": report.product, "bound": report.bound,
                                  "satisfied": report.satisfied}
    emit(run, payload, reports.display_dispersion, args.output)


def run_lift(run, args):
    """Horizontal lift of a sampled state curve."""
    curve = state_curve_from_dict(load_json(args.curve_path))
    if args.psi0_path:
        Psi0 = purification_from_matrix(load_matrix(args.psi0_path), curve.spectrum)
    else:
        Psi0 = standard_purification(curve.start)
    lifted = horizontal_lift(curve, Psi0)
    if args.output:
        save_json(curve_to_dict(lifted), args.output)
    if args.hamiltonian_path:
        save_json(schedule_to_dict(min_dispersion_hamiltonian(curve, run.hbar)),
                  args.hamiltonian_path)
    payload = {
        "samples": len(curve),
        "curve_length": curve_length(curve),
        "lift_length": lifted.length(),
        "max_horizontality_residual": float(np.max(lifted.horizontality_residuals())),
        "max_fiber_residual": float(np.max(lifted.fiber_residuals(curve))),
    }
    emit(run, payload, reports.display_lift)


def run_distance(run, args):
    """Upper bound on the isospectral distance between two states."""
    rho0, rho1 = load_density(args.rho0_path), load_density(args.rho1_path)
    estimate = shorten_path(rho0, rho1, iterations=args.iterations, seed=run.seed,
                            segments=args.segments, restarts=args.restarts,
                            progress=False if run.as_json else None)
    if args.hamiltonian_path:
        save_json(schedule_to_dict(estimate.to_schedule(0.0, 1.0, run.hbar)), args.hamiltonian_path)
    apart = distinguishable(rho0, rho1)
    payload = {
        "upper_bound": estimate.length,
        "segments": estimate.segments,
        "distinguishable": apart,
        "lower_bound": math.pi / 2.0 if apart else 0.0,
        "history": list(estimate.history),
    }
    emit(run, payload, reports.display_distance, args.output)


def run_bures_example(run, args):
    """Isospectral and Bures distances along the qubit rotation example."""
    report = example_gap_report(args.p1, args.p2, args.eps, tol=run.tol, seed=run.seed)
    emit(run, report.to_dict(), reports.display_bures, args.output)


def run_evolve(run, args):
    """Integrate the von Neumann equation and write the state curve."""
    schedule = load_schedule(args.hamiltonian_path, run, args.t0, args.t1)
    rho0 = load_density(args.rho0_path)
    curve = von_neumann_evolve(schedule, rho0, progress=False if run.as_json else None)
    if args.output:
        save_json(curve_to_dict(curve), args.output)

    n, k = rho0.dim, rho0.spectrum.rank
    expected = np.sort(np.concatenate([rho0.spectrum.values, np.zeros(n - k)]))
    drift = float(np.max(np.abs(np.linalg.eigvalsh(curve.end.matrix) - expected)))
    payload = {
        "samples": len(curve),
        "t0": float(curve.times[0]),
        "t1": float(curve.times[-1]),
        "spectrum_drift": drift,
        "output": args.output,
    }
    if run.as_json and not args.output:
        payload["curve"] = curve_to_dict(curve)
    emit(run, payload, reports.display_evolution)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="isogeo",
        description="Geometry of isospectral mixed states: uncertainty, dispersion, distances.")
    parser.add_argument("--hbar", type=float, default=HBAR, help="Planck constant.")
    parser.add_argument("--tol", type=float, default=TOL_DEFAULT,
                        help="Comparison tolerance (ISOGEO_TOL moves the default).")
    parser.add_argument("--seed", type=int, default=0, help="Root random seed.")
    parser.add_argument("--steps", type=int, default=DEFAULT_STEPS,
                        help="Intervals of uniform time grids.")
    parser.add_argument("--json", dest="as_json", action="store_true",
                        help="Print machine-readable JSON.")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log debug messages.")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("validate", help="Validate a density operator or purification file.")
    p.add_argument("path")
    p.add_argument("--kind", choices=["auto", "density", "purification"], default="auto",
                   help="auto treats square matrices as density operators.")
    p.set_defaults(handler=run_validate)

    p = commands.add_parser("uncertainty", help="Uncertainty estimate of an observable.")
    p.add_argument("obs_path")
    p.add_argument("rho_path")
    p.add_argument("--output", default=None, help="Also save the report here.")
    p.set_defaults(handler=run_uncertainty)

    p = commands.add_parser("dispersion", help="Energy dispersion against curve length.")
    p.add_argument("hamiltonian_path")
    p.add_argument("rho0_path")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=1.0)
    p.add_argument("--output", default=None, help="Also save the report here.")
    p.set_defaults(handler=run_dispersion)

    p = commands.add_parser("lift", help="Horizontal lift of a sampled state curve.")
    p.add_argument("curve_path")
    p.add_argument("--psi0", dest="psi0_path", default=None,
                   help="Starting purification (default: the standard one).")
    p.add_argument("--output", default=None, help="Save the lifted curve here.")
    p.add_argument("--emit-hamiltonian", dest="hamiltonian_path", default=None,
                   help="Save the minimal-dispersion Hamiltonian schedule here.")
    p.set_defaults(handler=run_lift)

    p = commands.add_parser("distance", help="Upper bound on the isospectral distance.")
    p.add_argument("rho0_path")
    p.add_argument("rho1_path")
    p.add_argument("--iterations", type=int, default=None, help="Sweeps per restart.")
    p.add_argument("--segments", type=int, default=None, help="Path segments.")
    p.add_argument("--restarts", type=int, default=None, help="Independent restarts.")
    p.add_argument("--emit-hamiltonian", dest="hamiltonian_path", default=None,
                   help="Save a Hamiltonian schedule driving rho0 onto rho1 along the path.")
    p.add_argument("--output", default=None, help="Also save the report here.")
    p.set_defaults(handler=run_distance)

    p = commands.add_parser("bures-example", help="Isospectral vs Bures distance on a qubit.")
    p.add_argument("p1", type=float)
    p.add_argument("p2", type=float)
    p.add_argument("eps", type=float)
    p.add_argument("--output", default=None, help="Also save the report here.")
    p.set_defaults(handler=run_bures_example)

    p = commands.add_parser("evolve", help="Integrate the von Neumann equation.")
    p.add_argument("hamiltonian_path")
    p.add_argument("rho0_path")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=1.0)
    p.add_argument("--output", default=None, help="Save the state curve here.")
    p.set_defaults(handler=run_evolve)
    return parser


def main(argv=None):
    """
    Parse arguments and run one subcommand.

    Returns:
    - int: 0 on success, 2 for domain failures, 1 for I/O and parse failures
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else LOG_LEVEL,
                        format="[%(levelname)s] %(name)s: %(message)s")
    try:
        run = RunConfig(hbar=args.hbar, tol=args.tol, seed=args.seed, steps=args.steps,
                        as_json=args.as_json).validate()
        args.handler(run, args)
    except GeometryError as e:
        print(f"[ERROR] {e}", file=sys.stderr)
        return 2
    except (ParseError, OSError) as e:
        print(f"[ERROR] {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
