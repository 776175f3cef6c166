import os
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()
#Helps load environment variables

# Define directories
PARENT_DIR = Path(__file__).resolve().parent.parent
DATA_DIR = PARENT_DIR / "data"
REPORTS_DIR = PARENT_DIR / "reports"

# Create directories if they don't exist
for directory in [
    DATA_DIR,
    REPORTS_DIR,
]:
    directory.mkdir(parents=True, exist_ok=True)


VERSION = "0.3.0"

BFCONE_THREADS = int(os.getenv("BFCONE_THREADS", os.cpu_count() or 1))
BFCONE_SEED = int(os.getenv("BFCONE_SEED", 0))
BFCONE_MARGIN = float(os.getenv("BFCONE_MARGIN", 1e-3))

CLASSIFY_TOL = float(os.getenv("BFCONE_CLASSIFY_TOL", 1e-8))

DEFAULT_SAMPLES = 20
DEFAULT_INTERVAL = (0.5, 2.0)
# tan branch keeps this distance from its poles
POLE_MARGIN = 0.1

# below this norm Bochner flatness passes vacuously
RIEMANN_FLOOR = 1e-8

LINALG_TOL = 1e-10
CURVATURE_TOL = 1e-6
GRADIENT_TOL = 1e-4

DEFAULT_TOLERANCES = {
    "I1": LINALG_TOL,
    "I2": LINALG_TOL,
    "I3": LINALG_TOL,
    "I4": CURVATURE_TOL,
    "I5": CURVATURE_TOL,
    "I6": CURVATURE_TOL,
    "I7": CURVATURE_TOL,
    "I8": 1e-9,
    "I9": 1e-9,
    "I10": 1e-8,
    "I11": 1e-7,
    "I12a": CURVATURE_TOL,
    "I12b": CURVATURE_TOL,
    "I12c": CURVATURE_TOL,
    "I13": GRADIENT_TOL,
    "I14": 1e-8,
    "I15": 1e-5,
    "I16": CURVATURE_TOL,
    "I17": 1e-8,
    "I18": CURVATURE_TOL,
    "I19": LINALG_TOL,
    "I20": 1e-8,
    "I21": CURVATURE_TOL,
    "I22": 1e-7,
    "I23": 1e-8,
    "I24": 1e-5,
    "I25": 1e-8,
    "I26": 1e-6,
    "I27": CURVATURE_TOL,
}
