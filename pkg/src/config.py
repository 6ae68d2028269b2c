import os
import configparser

# --- PATHS ---
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
CONFIG_FILE = os.path.join(BASE_DIR, 'config.ini')

# --- LOAD CONFIGURATION FROM .INI FILE ---
config = configparser.ConfigParser()

# We check if the file exists to avoid confusing errors
if not os.path.exists(CONFIG_FILE):
    raise FileNotFoundError(f"Configuration file not found at: {CONFIG_FILE}")

config.read(CONFIG_FILE, encoding='utf-8')

# --- TOLERANCES ---
try:
    tol_section = config['TOLERANCES']
    # ISOGEO_TOL only moves the default used by the command line
    TOL_DEFAULT = float(os.environ.get('ISOGEO_TOL', tol_section['default']))
    TOL_TRACE = float(tol_section['trace'])
    TOL_HERM = float(tol_section['hermitian'])
    TOL_FIBER = float(tol_section['fiber'])
    TOL_TANGENT = float(tol_section['tangent'])
    TOL_COMMUTE = float(tol_section['commute'])
    TOL_ORTH = float(tol_section['orthogonal'])
    TOL_PSD = float(tol_section['psd'])
    TOL_DEGENERACY = float(tol_section['degeneracy'])
    TOL_RADICAND = float(tol_section['radicand'])
    TOL_HORIZONTAL = float(tol_section['horizontal'])
    TOL_CURVE = float(tol_section['curve'])
    TOL_QUADRATURE = float(tol_section['quadrature'])
except KeyError as e:
    raise KeyError(f"Missing TOLERANCES configuration key in config.ini: {e}")

# --- DYNAMICS ---
try:
    HBAR = float(config['DYNAMICS']['hbar'])
    DEFAULT_STEPS = int(config['DYNAMICS']['steps'])
    MAX_STEP_PHASE = float(config['DYNAMICS']['max_step_phase'])
    GEODESIC_EPS_MAX = float(config['DYNAMICS']['geodesic_eps_max'])
except KeyError as e:
    raise KeyError(f"Missing DYNAMICS configuration key in config.ini: {e}")

# --- DISTANCE SEARCH ---
try:
    DISTANCE_SEGMENTS = int(config['DISTANCE']['segments'])
    DISTANCE_ITERATIONS = int(config['DISTANCE']['iterations'])
    DISTANCE_RESTARTS = int(config['DISTANCE']['restarts'])
    DISTANCE_RESTART_SCALE = float(config['DISTANCE']['restart_scale'])
    DISTANCE_INITIAL_STEP = float(config['DISTANCE']['initial_step'])
    DISTANCE_MIN_STEP = float(config['DISTANCE']['min_step'])
except KeyError as e:
    raise KeyError(f"Missing DISTANCE configuration key in config.ini: {e}")

# --- OUTPUT / LOGGING ---
try:
    SIGNIFICANT_DIGITS = int(config['OUTPUT']['significant_digits'])
    SHOW_PROGRESS = config['OUTPUT'].getboolean('progress', False)
    LOG_LEVEL = config['LOGGING'].get('level', 'WARNING').upper()
except KeyError as e:
    raise KeyError(f"Missing OUTPUT/LOGGING configuration key in config.ini: {e}")
