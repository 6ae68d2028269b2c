"""Human-readable rendering of command results."""
from config import SIGNIFICANT_DIGITS


def fmt(value):
    """Number with the configured significant digits."""
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


def _banner(title):
    print("=" * 60)
    print(title)
    print("=" * 60)


def _rows(pairs):
    width = max(len(label) for label, _ in pairs)
    for label, value in pairs:
        shown = fmt(value) if isinstance(value, float) else str(value)
        print(f"  {label.ljust(width)} : {shown}")


def display_validation(payload):
    """
    Display the outcome of validating a density operator or purification.

    Parameters:
    - payload: dict with 'kind', 'spectrum', 'multiplicities' and 'hilbert_dim'
    """
    sigma = ", ".join(fmt(p) for p in payload['spectrum'])
    print(f"valid {payload['kind']}, σ=({sigma})")
    blocks = ", ".join(f"{fmt(value)} x{count}" for value, count in payload['multiplicities'])
    print(f"  n = {payload['hilbert_dim']}, k = {len(payload['spectrum'])}, blocks: {blocks}")


def display_uncertainty(payload):
    _banner("UNCERTAINTY ESTIMATE")
    _rows([
        ("Delta A", payload['delta_A']),
        ("hbar sqrt(g)", payload['hbar_sqrt_g']),
        ("equality", payload['is_equality']),
        ("horizontal", payload['horizontal']),
    ])
    print("\nVariance decomposition:")
    _rows([
        ("horizontal term", payload['g_term']),
        ("square of mean term", payload['square_of_mean_term']),
        ("second moment term", payload['second_moment_term']),
    ])


def display_dispersion(payload):
    _banner("ENERGY DISPERSION")
    _rows([
        ("interval", f"[{fmt(payload['t0'])}, {fmt(payload['t1'])}]"),
        ("dispersion", payload['dispersion']),
        ("curve length", payload['length']),
        ("slack", payload['slack']),
        ("equality", payload['is_equality']),
    ])
    if 'time_energy' in payload:
        te = payload['time_energy']
        print(f"\nEndpoints distinguishable: <Delta H> Delta t = {fmt(te['product'])}"
              f" against pi hbar / 2 = {fmt(te['bound'])}")


def display_lift(payload):
    _banner("HORIZONTAL LIFT")
    _rows([
        ("samples", payload['samples']),
        ("curve length", payload['curve_length']),
        ("lift length", payload['lift_length']),
        ("max horizontality residual", payload['max_horizontality_residual']),
        ("max fiber residual", payload['max_fiber_residual']),
    ])


def display_distance(payload):
    _banner("DISTANCE ESTIMATE")
    _rows([
        ("upper bound", payload['upper_bound']),
        ("segments", payload['segments']),
        ("sweeps", len(payload['history']) - 1),
    ])
    if payload['distinguishable']:
        print("\n" + "-" * 60)
        print(f"Distinguishable states: distance is at least pi/2 = {fmt(payload['lower_bound'])}")
        print("-" * 60)


def display_bures(payload):
    _banner("ISOSPECTRAL VS BURES DISTANCE")
    _rows([
        ("p1", payload['p1']),
        ("p2", payload['p2']),
        ("eps", payload['eps']),
        ("dist_g", payload['dist_g']),
        ("dist_B", payload['dist_B']),
        ("gap", payload['gap']),
        ("strict", payload['strict']),
        ("formulas agree", payload['formulas_agree']),
    ])


def display_evolution(payload):
    _banner("VON NEUMANN EVOLUTION")
    _rows([
        ("samples", payload['samples']),
        ("interval", f"[{fmt(payload['t0'])}, {fmt(payload['t1'])}]"),
        ("spectrum drift", payload['spectrum_drift']),
    ])
    if payload.get('output'):
        print(f"\nCurve saved to: {payload['output']}")
