"""Persistence of matrices, curves, schedules and reports as JSON."""
import json
import os

import numpy as np

from errors import ParseError
from geometry.state_space import density_from_matrix, purification_from_matrix


def save_json(data, output_path, ensure_ascii=True):
    """Save dict to JSON, creating parent directories if needed."""
    directory = os.path.dirname(output_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(output_path, "w", encoding="utf-8") as f:
        json.dump(data, f, ensure_ascii=ensure_ascii, indent=2)


def load_json(input_path):
    """Read a JSON file; a missing file raises FileNotFoundError, bad content ParseError."""
    with open(input_path, "r", encoding="utf-8") as f:
        try:
            return json.load(f)
        except ValueError as e:
            # JSONDecodeError and UnicodeDecodeError
            raise ParseError(f"{input_path}: {e}") from e


def dumps(data):
    return json.dumps(data, indent=2)


def matrix_to_dict(M):
    """Row-major {"rows", "cols", "data": [[re, im], ...]}."""
    M = np.asarray(M, dtype=complex)
    return {
        "rows": int(M.shape[0]),
        "cols": int(M.shape[1]),
        "data": [[float(z.real), float(z.imag)] for z in M.ravel()],
    }


def matrix_from_dict(data):
    """
    Decode the shared matrix format.

    Parameters:
    - data: dict with rows, cols and data entries

    Returns:
    - complex ndarray of shape (rows, cols)
    """
    try:
        rows, cols, entries = int(data["rows"]), int(data["cols"]), data["data"]
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"malformed matrix object: {e}") from e
    if rows < 1 or cols < 1 or len(entries) != rows * cols:
        raise ParseError(f"matrix declares {rows}x{cols} but carries {len(entries)} entries")
    try:
        values = [complex(float(re), float(im)) for re, im in entries]
    except (TypeError, ValueError) as e:
        raise ParseError(f"matrix entries must be [re, im] pairs: {e}") from e
    return np.array(values, dtype=complex).reshape(rows, cols)


def _samples_from_dict(data):
    try:
        times, matrices = data["times"], data["matrices"]
    except (KeyError, TypeError) as e:
        raise ParseError(f"expected times and matrices: {e}") from e
    if len(times) != len(matrices):
        raise ParseError(f"{len(times)} times but {len(matrices)} matrices")
    try:
        times = np.array([float(t) for t in times])
    except (TypeError, ValueError) as e:
        raise ParseError(f"times must be numbers: {e}") from e
    return times, [matrix_from_dict(m) for m in matrices]


def samples_to_dict(times, matrices, **extra):
    data = {"times": [float(t) for t in times],
            "matrices": [matrix_to_dict(M) for M in matrices]}
    data.update(extra)
    return data


def curve_to_dict(curve):
    """StateCurve or LiftedCurve as {"times", "matrices"}."""
    return samples_to_dict(curve.times, curve.matrices())


def state_curve_from_dict(data):
    # Deferred to keep storage importable from the dynamics package
    from dynamics.evolution import state_curve
    times, matrices = _samples_from_dict(data)
    return state_curve(times, [density_from_matrix(M) for M in matrices])


def lifted_curve_from_dict(data):
    from dynamics.evolution import lifted_curve
    times, matrices = _samples_from_dict(data)
    first = purification_from_matrix(matrices[0])
    rest = [purification_from_matrix(M, first.spectrum) for M in matrices[1:]]
    return lifted_curve(times, [first] + rest)


def schedule_to_dict(schedule):
    return samples_to_dict(schedule.times, schedule.matrices(),
                           interpolation=schedule.interpolation)


def schedule_from_dict(data, hbar=None):
    from dynamics.evolution import hamiltonian_schedule
    times, matrices = _samples_from_dict(data)
    interpolation = data.get("interpolation", "spline")
    try:
        return hamiltonian_schedule(times, matrices, hbar=hbar, interpolation=interpolation)
    except ValueError as e:
        if hasattr(e, 'code'):
            raise
        raise ParseError(str(e)) from e
