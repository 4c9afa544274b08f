import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Fixture directory consulted by `gen` before the built-in generators
FIXTURE_DIR = os.getenv("CUBEKNOT_FIXTURE_DIR", "")

# Lattice Configuration
COORDINATE_LIMIT = 2**31 - 1
SUPPORTED_AMBIENTS = (3, 4, 5)
CELL_CACHE_SIZE = int(os.getenv("CUBEKNOT_CELL_CACHE", "200000"))

# Sweep Configuration
SWEEP_LOCAL_DEPTH = 8
SWEEP_LOCAL_STATES = 5000
SWEEP_AXIS = 1
SWEEP_ORDER = "levels"

# Search Configuration
SEARCH_MAX_MOVES = 12
SEARCH_MAX_STATES = 100_000
SEARCH_SCALES = (1, 2, 3)

# Random Walk Configuration
WALK_PROPOSALS = 32

# Certificate Configuration
DIGEST_ALGORITHM = "sha256"
CELL_FILE_MAGIC = "cubeknot"
CERT_FILE_MAGIC = "cubeknot-cert"
