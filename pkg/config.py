import os

from dotenv import load_dotenv

load_dotenv()

# HTTP surface
API_USERNAME = os.getenv("NCSPECTRA_USERNAME", "admin")
API_PASSWORD = os.getenv("NCSPECTRA_PASSWORD", "admin")
DEBUG_MODE = os.getenv("DEBUG_MODE", "false").strip().lower() in ("1", "true", "yes")

# numerics
DEFAULT_TOLERANCE = 1e-6
DEFAULT_SCHEDULE = (16, 24, 32, 40)
DEFAULT_K = 6
DEFAULT_LEVEL_BOUND = 5
MIN_CUTOFF = 8
FOCK_CHECK_THRESHOLD = 1e-9
HERMITIAN_TOLERANCE = 1e-10
BISECTION_RTOL = 1e-13

# output
CSV_FLOAT_FORMAT = "%.16e"
JSON_SCHEMA_VERSION = 1
SPECTRUM_COLUMNS = ["model", "n1", "n2", "sigma_z", "E_squared", "E", "E_nonrel", "E_bar"]
